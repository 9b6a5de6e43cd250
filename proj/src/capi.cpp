#include "rsmlqr/rsmlqr.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <new>
#include <string>

#include "rsmlqr/error.hpp"
#include "rsmlqr/io.hpp"
#include "rsmlqr/lqr.hpp"
#include "rsmlqr/sim.hpp"

struct rsmlqr_problem {
  rsmlqr::LoadedProblem loaded;
};

struct rsmlqr_text {
  std::string data;
};

namespace {

using namespace rsmlqr;

thread_local std::string g_last_error;

rsmlqr_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return RSMLQR_ERR_FILE_NOT_FOUND;
    case ErrorCode::ParseError: return RSMLQR_ERR_PARSE;
    case ErrorCode::SchemaError:
    case ErrorCode::DuplicateSharedIndex:
    case ErrorCode::IndexOutOfRange: return RSMLQR_ERR_SCHEMA;
    case ErrorCode::DimensionError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NonSquare: return RSMLQR_ERR_DIMENSION;
    case ErrorCode::NotStabilizable: return RSMLQR_ERR_NOT_STABILIZABLE;
    case ErrorCode::WeightNotPSD:
    case ErrorCode::WeightNotPD:
    case ErrorCode::RNotPD:
    case ErrorCode::RSingular:
    case ErrorCode::NotPSD:
    case ErrorCode::NotSymmetric: return RSMLQR_ERR_WEIGHT;
    case ErrorCode::NumericalFailure:
    case ErrorCode::NotHurwitz: return RSMLQR_ERR_NUMERICAL;
    case ErrorCode::InvalidArgument: return RSMLQR_ERR_INVALID_ARGUMENT;
  }
  return RSMLQR_ERR_INTERNAL;
}

rsmlqr_status fail(rsmlqr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
rsmlqr_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return RSMLQR_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), std::string(to_string(e.code())) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return fail(RSMLQR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RSMLQR_ERR_INTERNAL, e.what());
  }
}

rsmlqr_verdict to_c(Verdict v) {
  switch (v) {
    case Verdict::Compositional: return RSMLQR_COMPOSITIONAL;
    case Verdict::NotCompositional: return RSMLQR_NOT_COMPOSITIONAL;
    case Verdict::Inconclusive: return RSMLQR_INCONCLUSIVE;
  }
  return RSMLQR_INCONCLUSIVE;
}

rsmlqr_text* make_text(std::string s) { return new rsmlqr_text{std::move(s)}; }

Vector initial_state(const double* x0, std::size_t len, Index dim) {
  if (x0 == nullptr) return Vector::Ones(dim);
  if (static_cast<Index>(len) != dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "x0 has " + std::to_string(len) + " entries, composite state has " +
                    std::to_string(dim));
  }
  return Eigen::Map<const Vector>(x0, dim);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

extern "C" {

const char* rsmlqr_version(void) { return kVersion.data(); }

const char* rsmlqr_status_name(rsmlqr_status status) {
  switch (status) {
    case RSMLQR_OK: return "ok";
    case RSMLQR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RSMLQR_ERR_FILE_NOT_FOUND: return "file not found";
    case RSMLQR_ERR_PARSE: return "parse error";
    case RSMLQR_ERR_SCHEMA: return "schema error";
    case RSMLQR_ERR_DIMENSION: return "dimension error";
    case RSMLQR_ERR_NOT_STABILIZABLE: return "not stabilizable";
    case RSMLQR_ERR_WEIGHT: return "invalid weight";
    case RSMLQR_ERR_NUMERICAL: return "numerical failure";
    case RSMLQR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rsmlqr_last_error(void) { return g_last_error.c_str(); }

const char* rsmlqr_text_data(const rsmlqr_text* text) {
  return text != nullptr ? text->data.c_str() : "";
}

size_t rsmlqr_text_size(const rsmlqr_text* text) {
  return text != nullptr ? text->data.size() : 0;
}

void rsmlqr_text_free(rsmlqr_text* text) { delete text; }

rsmlqr_status rsmlqr_problem_load(const char* path, rsmlqr_problem** out) {
  if (path == nullptr || out == nullptr) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { *out = new rsmlqr_problem{load_problem(path)}; });
}

rsmlqr_status rsmlqr_problem_parse(const char* json, size_t len, rsmlqr_problem** out) {
  if (json == nullptr || out == nullptr) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded(
      [&] { *out = new rsmlqr_problem{load_problem_text(std::string_view(json, len))}; });
}

void rsmlqr_problem_free(rsmlqr_problem* problem) { delete problem; }

size_t rsmlqr_problem_composite_dim(const rsmlqr_problem* problem) {
  if (problem == nullptr) return 0;
  const CompositionPattern& p = problem->loaded.problem.pattern;
  return static_cast<size_t>(p.n1 + p.n2 - p.shared());
}

rsmlqr_status rsmlqr_problem_to_json(const rsmlqr_problem* problem, rsmlqr_text** out) {
  if (problem == nullptr || out == nullptr) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { *out = make_text(dump(problem_to_json(problem->loaded.problem))); });
}

rsmlqr_status rsmlqr_compose(const rsmlqr_problem* problem, rsmlqr_text** out) {
  if (problem == nullptr || out == nullptr) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const Problem& p = problem->loaded.problem;
    const CompositeSystem sys = compose_open_loop(p.s1, p.s2, p.pattern);
    const CompositeCost cost = compose_cost(p.w1, p.w2, sys.K);
    Json j{{"input_digest", problem->loaded.digest},
           {"composite", composite_to_json(sys, cost)},
           {"meta", Json{{"tool", "rsmlqr"}, {"version", std::string(kVersion)}}}};
    *out = make_text(dump(j));
  });
}

rsmlqr_status rsmlqr_lqr(const rsmlqr_problem* problem, rsmlqr_text** out) {
  if (problem == nullptr || out == nullptr) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const CompositionalityReport rep =
        analyze(problem->loaded.problem, kCompositionalityTol, CheckSelection{true, false, false});
    Json j{{"input_digest", problem->loaded.digest},
           {"lqr_composed",
            Json{{"subsystems",
                  Json::array({design_to_json(rep.sub1), design_to_json(rep.sub2)})},
                 {"Pbar", matrix_to_json(rep.Pbar)},
                 {"F", matrix_to_json(rep.F_composed)}}},
           {"lqr_direct", design_to_json(*rep.direct)},
           {"meta", Json{{"tool", "rsmlqr"}, {"version", std::string(kVersion)}}}};
    *out = make_text(dump(j));
  });
}

void rsmlqr_check_options_init(rsmlqr_check_options* options) {
  if (options == nullptr) return;
  *options = rsmlqr_check_options{};
  options->tol = kCompositionalityTol;
  options->checks = RSMLQR_CHECK_ALL;
}

rsmlqr_status rsmlqr_check(const rsmlqr_problem* problem, const rsmlqr_check_options* options,
                           rsmlqr_check_summary* summary, rsmlqr_text** report_out) {
  if (problem == nullptr) return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null problem");
  rsmlqr_check_options opts;
  rsmlqr_check_options_init(&opts);
  if (options != nullptr) opts = *options;
  if (!std::isfinite(opts.tol)) return fail(RSMLQR_ERR_INVALID_ARGUMENT, "tolerance must be finite");
  const double tol = opts.tol > 0.0 ? opts.tol : kCompositionalityTol;
  const unsigned mask = opts.checks == 0 ? static_cast<unsigned>(RSMLQR_CHECK_ALL) : opts.checks;
  if ((mask & ~static_cast<unsigned>(RSMLQR_CHECK_ALL)) != 0) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "unknown check bits");
  }
  if (opts.compute_gap && !(mask & RSMLQR_CHECK_THEOREM3)) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT,
                "the optimality gap needs the direct design (theorem3 check)");
  }
  return guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    CheckSelection sel{(mask & RSMLQR_CHECK_THEOREM3) != 0,
                       (mask & RSMLQR_CHECK_COROLLARY1) != 0,
                       (mask & RSMLQR_CHECK_THEOREM5) != 0};
    const CompositionalityReport rep = analyze(problem->loaded.problem, tol, sel);
    std::map<std::string, double> timings{{"analyze", elapsed_ms(t0)}};

    ReportMeta meta;
    meta.digest = problem->loaded.digest;
    if (opts.compute_gap) {
      const auto t1 = std::chrono::steady_clock::now();
      const Vector x0 = initial_state(opts.x0, opts.x0_len, rep.composite.states());
      meta.gap = GapSection{x0, optimality_gap(rep.composite, rep.cost, rep.F_composed,
                                               rep.direct->F, x0)};
      timings["gap"] = elapsed_ms(t1);
    }
    if (opts.record_timings) meta.timings_ms = timings;

    if (summary != nullptr) {
      rsmlqr_check_summary s{};
      s.verdict = to_c(rep.verdict());
      s.has_deviation = rep.theorem3.has_value();
      s.deviation = rep.theorem3 ? rep.theorem3->deviation : 0.0;
      s.corollary1_ran = rep.corollary1.has_value();
      s.corollary1_passes = rep.corollary1 && rep.corollary1->passes();
      s.theorem5_ran = rep.theorem5.has_value();
      s.theorem5_predicts = rep.theorem5 && rep.theorem5->predicts_compositional;
      s.has_gap = meta.gap.has_value();
      s.gap = meta.gap ? meta.gap->result.gap : 0.0;
      s.inconsistencies = rep.inconsistencies.size();
      *summary = s;
    }
    if (report_out != nullptr) *report_out = make_text(dump(report_to_json(rep, meta)));
  });
}

rsmlqr_status rsmlqr_simulate(const rsmlqr_problem* problem, rsmlqr_controller controller,
                              double horizon, double step, const double* x0, size_t x0_len,
                              rsmlqr_text** csv_out, int* blew_up) {
  if (problem == nullptr || csv_out == nullptr) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null argument");
  }
  if (controller != RSMLQR_CONTROLLER_DIRECT && controller != RSMLQR_CONTROLLER_COMPOSED) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "unknown controller");
  }
  return guarded([&] {
    const bool direct = controller == RSMLQR_CONTROLLER_DIRECT;
    const CompositionalityReport rep = analyze(problem->loaded.problem, kCompositionalityTol,
                                               CheckSelection{direct, false, false});
    const Matrix& gain = direct ? rep.direct->F : rep.F_composed;
    const Vector x = initial_state(x0, x0_len, rep.composite.states());
    const Trajectory traj =
        simulate(closed_loop_matrix(rep.composite, gain), x, horizon, step);
    if (blew_up != nullptr) *blew_up = traj.blew_up ? 1 : 0;
    *csv_out = make_text(trajectory_csv(traj));
  });
}

void rsmlqr_search_options_init(rsmlqr_search_options* options) {
  if (options == nullptr) return;
  const SearchConfig d;
  *options = rsmlqr_search_options{};
  options->n_min = static_cast<size_t>(d.n_min);
  options->n_max = static_cast<size_t>(d.n_max);
  options->m_min = static_cast<size_t>(d.m_min);
  options->m_max = static_cast<size_t>(d.m_max);
  options->k_min = static_cast<size_t>(d.k_min);
  options->k_max = static_cast<size_t>(d.k_max);
  options->trials = d.trials;
  options->seed = d.seed;
  options->threshold = d.threshold;
  options->tol = d.tol;
  options->threads = d.threads;
}

rsmlqr_status rsmlqr_search(const rsmlqr_search_options* options, rsmlqr_text** json_out,
                            size_t* found) {
  if (options == nullptr || json_out == nullptr) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "null argument");
  }
  const rsmlqr_search_options& o = *options;
  if (o.n_min < 1 || o.n_min > o.n_max || o.m_min < 1 || o.m_min > o.m_max ||
      o.k_min > o.k_max || !(o.tol > 0.0) || std::isnan(o.threshold)) {
    return fail(RSMLQR_ERR_INVALID_ARGUMENT, "invalid search configuration");
  }
  return guarded([&] {
    SearchConfig cfg;
    cfg.n_min = static_cast<Index>(o.n_min);
    cfg.n_max = static_cast<Index>(o.n_max);
    cfg.m_min = static_cast<Index>(o.m_min);
    cfg.m_max = static_cast<Index>(o.m_max);
    cfg.k_min = static_cast<Index>(o.k_min);
    cfg.k_max = static_cast<Index>(o.k_max);
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.threshold = o.threshold;
    cfg.tol = o.tol;
    cfg.threads = o.threads;
    const SearchResult result = counterexample_search(cfg);
    if (o.problem_dir != nullptr) {
      const std::filesystem::path dir(o.problem_dir);
      std::filesystem::create_directories(dir);
      for (const SearchHit& hit : result.hits) {
        const auto file = dir / ("instance_" + std::to_string(hit.trial) + ".json");
        std::ofstream os(file, std::ios::binary);
        if (!os) throw Error(ErrorCode::FileNotFound, "cannot write " + file.string());
        os << dump(problem_to_json(hit.problem));
      }
    }
    if (found != nullptr) *found = result.hits.size();
    *json_out = make_text(dump(search_to_json(cfg, result)));
  });
}

}  // extern "C"
