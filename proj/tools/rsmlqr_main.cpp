// rsmlqr command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsmlqr/rsmlqr.h"

namespace {

constexpr int kExitError = 1;

struct ProblemDeleter {
  void operator()(rsmlqr_problem* p) const { rsmlqr_problem_free(p); }
};
struct TextDeleter {
  void operator()(rsmlqr_text* t) const { rsmlqr_text_free(t); }
};
using ProblemPtr = std::unique_ptr<rsmlqr_problem, ProblemDeleter>;
using TextPtr = std::unique_ptr<rsmlqr_text, TextDeleter>;

struct Failure {
  rsmlqr_status status;
};

void ensure(rsmlqr_status status) {
  if (status != RSMLQR_OK) throw Failure{status};
}

ProblemPtr load(const std::string& path) {
  rsmlqr_problem* raw = nullptr;
  ensure(rsmlqr_problem_load(path.c_str(), &raw));
  return ProblemPtr(raw);
}

void emit(const rsmlqr_text* text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout.write(rsmlqr_text_data(text), static_cast<std::streamsize>(rsmlqr_text_size(text)));
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + out_path);
  os.write(rsmlqr_text_data(text), static_cast<std::streamsize>(rsmlqr_text_size(text)));
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty vector");
  return out;
}

unsigned parse_checks(const std::string& text) {
  unsigned mask = 0;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item == "thm3" || item == "theorem3") {
      mask |= RSMLQR_CHECK_THEOREM3;
    } else if (item == "cor1" || item == "corollary1") {
      mask |= RSMLQR_CHECK_COROLLARY1;
    } else if (item == "thm5" || item == "theorem5") {
      mask |= RSMLQR_CHECK_THEOREM5;
    } else {
      throw std::invalid_argument("unknown check '" + item + "'");
    }
  }
  return mask;
}

const char* verdict_word(rsmlqr_verdict v) {
  switch (v) {
    case RSMLQR_COMPOSITIONAL: return "compositional";
    case RSMLQR_NOT_COMPOSITIONAL: return "not-compositional";
    case RSMLQR_INCONCLUSIVE: return "inconclusive";
  }
  return "?";
}

std::string summary_line(const rsmlqr_check_summary& s) {
  std::ostringstream os;
  os.precision(6);
  os << "verdict=" << verdict_word(s.verdict);
  if (s.has_deviation) os << " deviation=" << s.deviation;
  if (s.corollary1_ran) os << " corollary1=" << (s.corollary1_passes ? "pass" : "fail");
  if (s.theorem5_ran) os << " theorem5=" << (s.theorem5_predicts ? "compositional" : "inconclusive");
  if (s.has_gap) os << " gap=" << s.gap;
  if (s.inconsistencies > 0) os << " inconsistencies=" << s.inconsistencies;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compose LTI subsystems, synthesize LQR controllers and test compositionality"};
  app.set_version_flag("--version", std::string("rsmlqr ") + rsmlqr_version());
  app.require_subcommand(1);

  std::string file;
  std::string out_path;

  auto* compose = app.add_subcommand("compose", "Emit K, Acal, Bcal, Qcal and Rbar as JSON");
  compose->add_option("file", file, "Problem JSON")->required();
  compose->add_option("-o,--out", out_path, "Output path (default stdout)");

  auto* lqr = app.add_subcommand("lqr", "Emit subsystem, composed and direct LQR designs");
  lqr->add_option("file", file, "Problem JSON")->required();
  lqr->add_option("-o,--out", out_path, "Output path (default stdout)");

  double tol = 1e-8;
  std::string report_path;
  bool gap = false;
  bool timings = false;
  std::string x0_text;
  std::string checks_text = "thm3,cor1,thm5";
  auto* check = app.add_subcommand("check", "Decide compositionality of the LQR designs");
  check->add_option("file", file, "Problem JSON")->required();
  check->add_option("--tol", tol, "Relative tolerance on |Pbar K - K Pcal|")
      ->envname("RSMLQR_TOL")
      ->check(CLI::PositiveNumber);
  check->add_option("--report", report_path, "Write the JSON report here ('-' for stdout)");
  check->add_flag("--gap", gap, "Compute the optimality gap of the composed controller");
  check->add_option("--x0", x0_text, "Initial state for the gap, comma separated (default ones)");
  check->add_option("--checks", checks_text,
                    "Comma separated subset of thm3,cor1,thm5 (default all)");
  check->add_flag("--timings", timings, "Include wall-clock timings in the report");

  std::string controller = "direct";
  double horizon = 10.0;
  double step = 1e-3;
  auto* simulate = app.add_subcommand("simulate", "Closed-loop trajectory as CSV");
  simulate->add_option("file", file, "Problem JSON")->required();
  simulate->add_option("--controller", controller, "direct or composed")
      ->check(CLI::IsMember({"direct", "composed"}));
  simulate->add_option("--horizon", horizon, "Final time")->check(CLI::PositiveNumber);
  simulate->add_option("--step", step, "RK4 step")->check(CLI::PositiveNumber);
  simulate->add_option("--x0", x0_text, "Initial composite state, comma separated (default ones)");
  simulate->add_option("-o,--out", out_path, "Output path (default stdout)");

  rsmlqr_search_options search_opts;
  rsmlqr_search_options_init(&search_opts);
  std::string threshold_text;
  std::string problem_dir;
  auto* search = app.add_subcommand("search", "Random search for non-compositional instances");
  search->add_option("file", file, "Ignored; accepted for a uniform command shape");
  search->add_option("--trials", search_opts.trials, "Number of random instances");
  search->add_option("--seed", search_opts.seed, "Pseudo-random seed");
  search->add_option("--threshold", threshold_text, "Report deviations above this (or 'inf')");
  search->add_option("--n-min", search_opts.n_min, "Smallest subsystem state dimension");
  search->add_option("--n-max", search_opts.n_max, "Largest subsystem state dimension");
  search->add_option("--m-min", search_opts.m_min, "Smallest subsystem input dimension");
  search->add_option("--m-max", search_opts.m_max, "Largest subsystem input dimension");
  search->add_option("--k-min", search_opts.k_min, "Fewest shared states");
  search->add_option("--k-max", search_opts.k_max, "Most shared states");
  search->add_option("--tol", search_opts.tol, "Compositionality tolerance")
      ->envname("RSMLQR_TOL")
      ->check(CLI::PositiveNumber);
  search->add_option("--threads", search_opts.threads, "Worker threads");
  search->add_option("--problem-dir", problem_dir, "Write each hit as a problem file here");
  search->add_option("-o,--out", out_path, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*compose || *lqr) {
      const ProblemPtr problem = load(file);
      rsmlqr_text* raw = nullptr;
      ensure(*compose ? rsmlqr_compose(problem.get(), &raw) : rsmlqr_lqr(problem.get(), &raw));
      const TextPtr text(raw);
      emit(text.get(), out_path);
      return 0;
    }
    if (*check) {
      const ProblemPtr problem = load(file);
      rsmlqr_check_options opts;
      rsmlqr_check_options_init(&opts);
      opts.tol = tol;
      opts.checks = parse_checks(checks_text);
      opts.compute_gap = gap ? 1 : 0;
      opts.record_timings = timings ? 1 : 0;
      std::vector<double> x0;
      if (!x0_text.empty()) {
        x0 = parse_vector(x0_text);
        opts.x0 = x0.data();
        opts.x0_len = x0.size();
      }
      rsmlqr_check_summary summary{};
      rsmlqr_text* raw = nullptr;
      ensure(rsmlqr_check(problem.get(), &opts, &summary, report_path.empty() ? nullptr : &raw));
      const TextPtr report(raw);
      if (report) emit(report.get(), report_path);
      if (report_path != "-") std::cout << summary_line(summary) << "\n";
      if (summary.inconsistencies > 0) {
        std::cerr << "warning: checks disagree; see the report's inconsistencies list\n";
      }
      return static_cast<int>(summary.verdict);
    }
    if (*simulate) {
      const ProblemPtr problem = load(file);
      std::vector<double> x0;
      if (!x0_text.empty()) x0 = parse_vector(x0_text);
      rsmlqr_text* raw = nullptr;
      int blew_up = 0;
      ensure(rsmlqr_simulate(problem.get(),
                             controller == "composed" ? RSMLQR_CONTROLLER_COMPOSED
                                                      : RSMLQR_CONTROLLER_DIRECT,
                             horizon, step, x0.empty() ? nullptr : x0.data(), x0.size(), &raw,
                             &blew_up));
      const TextPtr csv(raw);
      emit(csv.get(), out_path);
      if (blew_up) std::cerr << "warning: trajectory exceeded the overflow guard and was truncated\n";
      return 0;
    }
    if (*search) {
      if (!threshold_text.empty()) {
        search_opts.threshold = threshold_text == "inf" ? HUGE_VAL : std::stod(threshold_text);
      }
      search_opts.problem_dir = problem_dir.empty() ? nullptr : problem_dir.c_str();
      rsmlqr_text* raw = nullptr;
      size_t found = 0;
      ensure(rsmlqr_search(&search_opts, &raw, &found));
      const TextPtr json(raw);
      emit(json.get(), out_path);
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << "rsmlqr: " << rsmlqr_status_name(f.status) << ": " << rsmlqr_last_error()
              << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "rsmlqr: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
