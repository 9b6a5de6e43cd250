#include "rsmlqr/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "rsmlqr/error.hpp"

namespace rsmlqr {
namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + ": " + what);
}

[[noreturn]] void dimension_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::DimensionError, path + ": " + what);
}

const nlohmann::json& member(const nlohmann::json& obj, const std::string& path,
                             const char* key) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing required key \"") + key + "\"");
  return *it;
}

Matrix parse_matrix(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = path + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].empty()) schema_error(rp, "expected a non-empty array of numbers");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) {
      schema_error(rp, "row has " + std::to_string(j[i].size()) + " entries, expected " +
                           std::to_string(cols));
    }
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& v = j[i][c];
      const std::string ep = path + "/" + std::to_string(i) + "/" + std::to_string(c);
      if (!v.is_number()) schema_error(ep, "expected a number");
      const double d = v.get<double>();
      if (!std::isfinite(d)) schema_error(ep, "expected a finite number");
      m(static_cast<Index>(i), static_cast<Index>(c)) = d;
    }
  }
  return m;
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void parse_subsystem(const nlohmann::json& j, const std::string& path, LinearSystem& sys,
                     CostWeights& w) {
  if (!j.is_object()) schema_error(path, "expected an object");
  const auto& name = member(j, path, "name");
  if (!name.is_string()) schema_error(path + "/name", "expected a string");
  sys.name = name.get<std::string>();
  sys.A = parse_matrix(member(j, path, "A"), path + "/A");
  sys.B = parse_matrix(member(j, path, "B"), path + "/B");
  w.Q = parse_matrix(member(j, path, "Q"), path + "/Q");
  w.R = parse_matrix(member(j, path, "R"), path + "/R");
  const Index n = sys.A.rows();
  if (sys.A.cols() != n) dimension_error(path + "/A", "A must be square, got " + shape(sys.A));
  if (sys.B.rows() != n) {
    dimension_error(path + "/B", "B must have " + std::to_string(n) + " rows, got " + shape(sys.B));
  }
  if (w.Q.rows() != n || w.Q.cols() != n) {
    dimension_error(path + "/Q", "Q must be " + std::to_string(n) + "x" + std::to_string(n) +
                                     ", got " + shape(w.Q));
  }
  const Index m = sys.B.cols();
  if (w.R.rows() != m || w.R.cols() != m) {
    dimension_error(path + "/R", "R must be " + std::to_string(m) + "x" + std::to_string(m) +
                                     ", got " + shape(w.R));
  }
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Json number(double v) {
  // JSON has no infinities; the ordered_json dump would print null anyway.
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

Json rank_to_json(const RankTest& r) {
  return Json{{"full_rank", r.full_rank}, {"rank", r.rank}, {"margin", number(r.margin)}};
}

Json cost_to_json(const CostResult& c) {
  return Json{{"stable", c.stable}, {"value", number(c.value)}};
}

const char* origin_name(StateOrigin o) {
  switch (o) {
    case StateOrigin::Subsystem1: return "subsystem1";
    case StateOrigin::Subsystem2: return "subsystem2";
    case StateOrigin::Shared: return "shared";
  }
  return "unknown";
}

}  // namespace

Problem parse_problem(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "invalid JSON at " + line_column(text, e.byte) + ": " + e.what());
  }
  if (!root.is_object()) schema_error("", "top level must be an object");
  const auto& subs = member(root, "", "subsystems");
  if (!subs.is_array() || subs.size() != 2) {
    schema_error("/subsystems", "expected an array of exactly two subsystems");
  }
  Problem p;
  parse_subsystem(subs[0], "/subsystems/0", p.s1, p.w1);
  parse_subsystem(subs[1], "/subsystems/1", p.s2, p.w2);

  const auto& pattern = member(root, "", "pattern");
  const auto& pairs = member(pattern, "/pattern", "pairs");
  if (!pairs.is_array()) schema_error("/pattern/pairs", "expected an array");
  p.pattern.n1 = p.s1.states();
  p.pattern.n2 = p.s2.states();
  std::vector<bool> used1(p.pattern.n1, false), used2(p.pattern.n2, false);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string pp = "/pattern/pairs/" + std::to_string(i);
    const auto& pr = pairs[i];
    if (!pr.is_array() || pr.size() != 2) schema_error(pp, "expected a pair [j, k]");
    for (std::size_t c = 0; c < 2; ++c) {
      if (!pr[c].is_number_integer()) schema_error(pp + "/" + std::to_string(c), "expected an integer");
    }
    const auto j = pr[0].get<std::int64_t>();
    const auto k = pr[1].get<std::int64_t>();
    if (j < 0 || j >= p.pattern.n1) {
      schema_error(pp + "/0", "subsystem-1 index " + std::to_string(j) + " out of range [0, " +
                                  std::to_string(p.pattern.n1) + ")");
    }
    if (k < 0 || k >= p.pattern.n2) {
      schema_error(pp + "/1", "subsystem-2 index " + std::to_string(k) + " out of range [0, " +
                                  std::to_string(p.pattern.n2) + ")");
    }
    if (used1[j]) schema_error(pp + "/0", "duplicate subsystem-1 index " + std::to_string(j));
    if (used2[k]) schema_error(pp + "/1", "duplicate subsystem-2 index " + std::to_string(k));
    used1[j] = used2[k] = true;
    p.pattern.pairs.emplace_back(j, k);
  }
  return p;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::NumericalFailure, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

LoadedProblem load_problem_text(std::string_view text) {
  return {parse_problem(text), "sha256:" + sha256_hex(text)};
}

LoadedProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_problem_text(ss.str());
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

Json problem_to_json(const Problem& p) {
  auto sub = [](const LinearSystem& s, const CostWeights& w) {
    return Json{{"name", s.name},
                {"A", matrix_to_json(s.A)},
                {"B", matrix_to_json(s.B)},
                {"Q", matrix_to_json(w.Q)},
                {"R", matrix_to_json(w.R)}};
  };
  Json pairs = Json::array();
  for (const auto& [j, k] : p.pattern.pairs) pairs.push_back(Json::array({j, k}));
  return Json{{"subsystems", Json::array({sub(p.s1, p.w1), sub(p.s2, p.w2)})},
              {"pattern", Json{{"pairs", std::move(pairs)}}}};
}

Json composite_to_json(const CompositeSystem& sys, const CompositeCost& cost) {
  Json index_map = Json::array();
  for (const CompositeIndex& ci : sys.K.index_map) {
    index_map.push_back(Json{{"origin", origin_name(ci.origin)},
                             {"subsystem1", ci.sub1 >= 0 ? Json(ci.sub1) : Json(nullptr)},
                             {"subsystem2", ci.sub2 >= 0 ? Json(ci.sub2) : Json(nullptr)}});
  }
  return Json{{"n1", sys.n1()},
              {"n2", sys.n2()},
              {"k_shared", sys.shared()},
              {"m1", sys.m1},
              {"m2", sys.m2},
              {"dim", sys.states()},
              {"K", matrix_to_json(sys.K.K)},
              {"index_map", std::move(index_map)},
              {"Acal", matrix_to_json(sys.Acal)},
              {"Bcal", matrix_to_json(sys.Bcal)},
              {"Qcal", matrix_to_json(cost.Qcal)},
              {"Rbar", matrix_to_json(cost.Rbar)}};
}

Json design_to_json(const LQRDesign& d) {
  return Json{{"P", matrix_to_json(d.riccati.P)},
              {"F", matrix_to_json(d.F)},
              {"residual_norm", number(d.riccati.residual_norm)},
              {"closed_loop_max_re", number(d.riccati.closed_loop_max_re)},
              {"newton_sweeps", d.riccati.newton_sweeps},
              {"detectable", d.detectable}};
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Compositional: return "compositional";
    case Verdict::NotCompositional: return "not_compositional";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

Json checks_to_json(const CompositionalityReport& rep) {
  Json out;
  out["tolerance"] = rep.tol;
  out["verdict"] = verdict_name(rep.verdict());
  if (rep.theorem3) {
    const auto& t = *rep.theorem3;
    out["theorem3"] = Json{{"deviation", number(t.deviation)},
                           {"relative_deviation", number(t.relative_deviation)},
                           {"equivalent", t.equivalent},
                           {"PbarK", matrix_to_json(t.PbarK)},
                           {"KP", matrix_to_json(t.KP)}};
  } else {
    out["theorem3"] = nullptr;
  }
  if (rep.gains) {
    out["gains"] = Json{{"deviation", number(rep.gains->deviation)},
                        {"equivalent", rep.gains->equivalent}};
  } else {
    out["gains"] = nullptr;
  }
  if (rep.corollary1) {
    const auto& c = *rep.corollary1;
    out["corollary1"] = Json{{"PbarKKt", matrix_to_json(c.PbarKKt)},
                             {"symmetric", c.symmetric},
                             {"psd", c.psd},
                             {"asymmetry", number(c.asymmetry)},
                             {"min_eigenvalue", number(c.min_eigenvalue)},
                             {"rules_out_compositionality", !c.passes()}};
  } else {
    out["corollary1"] = nullptr;
  }
  if (rep.theorem5) {
    const auto& t = *rep.theorem5;
    out["theorem5"] = Json{{"hypothesis_ok", t.hypothesis_ok},
                           {"controllable", rank_to_json(t.controllable)},
                           {"observable", rank_to_json(t.observable)},
                           {"predicts_compositional", t.predicts_compositional}};
  } else {
    out["theorem5"] = nullptr;
  }
  if (rep.gare_residual_PbarK) {
    out["gare_residuals"] = Json{{"PbarK", number(*rep.gare_residual_PbarK)},
                                 {"KP", number(*rep.gare_residual_KP)}};
    out["constructed_are_residual_KPKt"] = number(*rep.constructed_residual_KPKt);
  } else {
    out["gare_residuals"] = nullptr;
    out["constructed_are_residual_KPKt"] = nullptr;
  }
  out["warnings"] = rep.warnings;
  out["inconsistencies"] = rep.inconsistencies;
  return out;
}

Json report_to_json(const CompositionalityReport& rep, const ReportMeta& meta) {
  Json out;
  out["input_digest"] = meta.digest;
  out["composite"] = composite_to_json(rep.composite, rep.cost);
  out["lqr_direct"] = rep.direct ? design_to_json(*rep.direct) : Json(nullptr);
  out["lqr_composed"] = Json{{"subsystems", Json::array({design_to_json(rep.sub1),
                                                         design_to_json(rep.sub2)})},
                             {"Pbar", matrix_to_json(rep.Pbar)},
                             {"F", matrix_to_json(rep.F_composed)}};
  out["checks"] = checks_to_json(rep);
  if (meta.gap) {
    const GapResult& g = meta.gap->result;
    out["gap"] = Json{{"x0", vector_to_json(meta.gap->x0)},
                      {"J_composed", cost_to_json(g.composed)},
                      {"J_direct", cost_to_json(g.direct)},
                      {"gap", number(g.gap)}};
  } else {
    out["gap"] = nullptr;
  }
  Json m{{"tool", "rsmlqr"},
         {"version", std::string(kVersion)},
         {"tolerances",
          Json{{"compositionality", rep.tol},
               {"symmetry", kSymmetryTol},
               {"psd", kPsdTol}}}};
  if (meta.timings_ms) {
    Json t = Json::object();
    for (const auto& [k, v] : *meta.timings_ms) t[k] = v;
    m["timings_ms"] = std::move(t);
  }
  out["meta"] = std::move(m);
  return out;
}

Json search_to_json(const SearchConfig& config, const SearchResult& result) {
  Json instances = Json::array();
  for (const SearchHit& hit : result.hits) {
    instances.push_back(Json{{"trial", hit.trial},
                             {"deviation", number(hit.report.theorem3->deviation)},
                             {"problem", problem_to_json(hit.problem)},
                             {"checks", checks_to_json(hit.report)}});
  }
  const double threshold = config.threshold;
  return Json{{"config",
               Json{{"n_range", Json::array({config.n_min, config.n_max})},
                    {"m_range", Json::array({config.m_min, config.m_max})},
                    {"k_range", Json::array({config.k_min, config.k_max})},
                    {"trials", config.trials},
                    {"seed", config.seed},
                    {"threshold", std::isfinite(threshold) ? Json(threshold) : Json("inf")},
                    {"tolerance", config.tol}}},
              {"evaluated", result.evaluated},
              {"skipped", result.skipped},
              {"found", result.hits.size()},
              {"instances", std::move(instances)},
              {"meta", Json{{"tool", "rsmlqr"}, {"version", std::string(kVersion)}}}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace rsmlqr
