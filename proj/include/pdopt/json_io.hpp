#pragma once

#include <fstream>
#include <string>
#include <utility>

#include "json.hpp"
#include "pdopt/problems.hpp"

namespace pdopt {

using Json = nlohmann::json;

inline Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec vec_from_json(const Json& j) {
  Vec v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i)
    v[i] = j.at(static_cast<size_t>(i)).get<double>();
  return v;
}

inline Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat mat_from_json(const Json& j) {
  const Index r = static_cast<Index>(j.size());
  if (r == 0) throw IoError("matrix json: empty");
  const Index c = static_cast<Index>(j.at(0).size());
  Mat m(r, c);
  for (Index i = 0; i < r; ++i) {
    const auto& row = j.at(static_cast<size_t>(i));
    if (static_cast<Index>(row.size()) != c) throw IoError("matrix json: ragged");
    for (Index k = 0; k < c; ++k)
      m(i, k) = row.at(static_cast<size_t>(k)).get<double>();
  }
  return m;
}

inline Json smooth_to_json(const SmoothTerm& f) {
  Json j;
  switch (f.kind) {
    case SmoothTerm::Kind::quadratic:
      j["kind"] = "quadratic";
      j["A"] = mat_to_json(f.A);
      j["b"] = vec_to_json(f.b);
      break;
    case SmoothTerm::Kind::logistic:
      j["kind"] = "logistic";
      j["data"] = mat_to_json(f.A);
      j["labels"] = vec_to_json(f.b);
      break;
    case SmoothTerm::Kind::linear:
      j["kind"] = "linear";
      j["c"] = vec_to_json(f.b);
      j["L_override"] = f.l_override;
      break;
    case SmoothTerm::Kind::custom:
      throw IoError("custom smooth term is not serializable");
  }
  return j;
}

inline SmoothTerm smooth_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "quadratic")
    return make_quadratic(mat_from_json(j.at("A")), vec_from_json(j.at("b")));
  if (kind == "logistic")
    return make_logistic(mat_from_json(j.at("data")),
                         vec_from_json(j.at("labels")));
  if (kind == "linear")
    return make_linear(vec_from_json(j.at("c")),
                       j.value("L_override", 1.0));
  throw IoError("unknown smooth kind: " + kind);
}

inline Json prox_to_json(const ProxTerm& h) {
  Json j;
  switch (h.kind) {
    case ProxTerm::Kind::zero:
      j["kind"] = "zero";
      break;
    case ProxTerm::Kind::l1_norm:
      j["kind"] = "l1_norm";
      j["weight"] = h.weight;
      break;
    case ProxTerm::Kind::quadratic_around_c:
      j["kind"] = "quadratic_around_c";
      j["c"] = vec_to_json(h.center);
      j["weight"] = h.weight;
      break;
    case ProxTerm::Kind::huber:
      j["kind"] = "huber";
      j["delta"] = h.delta;
      break;
    case ProxTerm::Kind::affine_indicator_b:
      j["kind"] = "affine_indicator_b";
      j["b"] = vec_to_json(h.center);
      break;
    case ProxTerm::Kind::box_indicator:
      j["kind"] = "box_indicator";
      j["lo"] = vec_to_json(h.lo);
      j["hi"] = vec_to_json(h.hi);
      break;
    case ProxTerm::Kind::custom:
      throw IoError("custom prox term is not serializable");
  }
  return j;
}

inline ProxTerm prox_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return make_zero();
  if (kind == "l1_norm") return make_l1(j.value("weight", 1.0));
  if (kind == "quadratic_around_c")
    return make_quadratic_around(vec_from_json(j.at("c")),
                                 j.value("weight", 1.0));
  if (kind == "huber") return make_huber(j.at("delta").get<double>());
  if (kind == "affine_indicator_b")
    return make_affine_indicator(vec_from_json(j.at("b")));
  if (kind == "box_indicator")
    return make_box_indicator(vec_from_json(j.at("lo")),
                              vec_from_json(j.at("hi")));
  throw IoError("unknown prox kind: " + kind);
}

inline RegimeTag regime_tag_from_string(const std::string& s) {
  if (s == "primal_only") return RegimeTag::primal_only;
  if (s == "regS") return RegimeTag::regS;
  if (s == "regB") return RegimeTag::regB;
  if (s == "regC") return RegimeTag::regC;
  throw IoError("unknown regime tag: " + s);
}

inline Json instance_to_json(const ProblemInstance& P) {
  Json j;
  j["regime_tag"] = regime_tag_name(P.tag);
  j["seed"] = P.seed;
  j["mu_g"] = P.mu_g;
  j["f"] = smooth_to_json(P.f);
  if (P.g) j["g"] = prox_to_json(*P.g);
  if (P.h) j["h"] = prox_to_json(*P.h);
  if (P.K) j["K"] = mat_to_json(P.K->matrix());
  if (P.K) {
    j["spectral"] = {{"op_norm_sq", P.kb.op_norm_sq},
                     {"lam_min", P.kb.lam_min},
                     {"lam_min_plus", P.kb.lam_min_plus}};
  }
  Json r;
  r["x_star"] = vec_to_json(P.ref.x_star);
  r["grad_f_star"] = vec_to_json(P.ref.grad_f_star);
  r["psi_star"] = P.ref.psi_star;
  if (P.ref.has_dual) {
    r["u_star"] = vec_to_json(P.ref.u_star);
    r["conj_subgrad_star"] = vec_to_json(P.ref.conj_subgrad_star);
  }
  j["reference"] = std::move(r);
  if (P.solution_set) {
    j["solution_set"] = {{"C", mat_to_json(P.solution_set->C())},
                         {"d", vec_to_json(P.solution_set->d())}};
  }
  return j;
}

inline ProblemInstance instance_from_json(const Json& j) {
  ProblemInstance P;
  P.tag = regime_tag_from_string(j.at("regime_tag").get<std::string>());
  P.seed = j.value("seed", std::uint64_t{0});
  P.mu_g = j.at("mu_g").get<double>();
  P.f = smooth_from_json(j.at("f"));
  if (j.contains("g")) P.g = prox_from_json(j.at("g"));
  if (j.contains("h")) P.h = prox_from_json(j.at("h"));
  if (j.contains("K")) {
    P.K = LinearMap::dense(mat_from_json(j.at("K")));
    if (j.contains("spectral")) {
      const auto& s = j.at("spectral");
      P.kb.op_norm_sq = s.at("op_norm_sq").get<double>();
      P.kb.lam_min = s.at("lam_min").get<double>();
      P.kb.lam_min_plus = s.at("lam_min_plus").get<double>();
    } else {
      P.kb = exact_spectral(*P.K);
    }
  }
  const auto& r = j.at("reference");
  P.ref.x_star = vec_from_json(r.at("x_star"));
  P.ref.grad_f_star = vec_from_json(r.at("grad_f_star"));
  P.ref.psi_star = r.at("psi_star").get<double>();
  if (r.contains("u_star")) {
    P.ref.u_star = vec_from_json(r.at("u_star"));
    P.ref.conj_subgrad_star = vec_from_json(r.at("conj_subgrad_star"));
    P.ref.has_dual = true;
  }
  if (j.contains("solution_set")) {
    P.solution_set = std::make_shared<AffineSet>(
        mat_from_json(j.at("solution_set").at("C")),
        vec_from_json(j.at("solution_set").at("d")));
  }
  validate_reference(P);
  validate_regime(P);
  return P;
}

inline void save_instance(const ProblemInstance& P, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << instance_to_json(P).dump(2) << "\n";
}

inline ProblemInstance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  Json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw IoError("parse error in " + path + ": " + e.what());
  }
  return instance_from_json(j);
}

}  // namespace pdopt
