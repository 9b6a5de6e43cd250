#pragma once

// JSON problem files, reports and search output.
//
// Problem schema:
//   {"subsystems": [{"name": str, "A": [[num]], "B": [[num]], "Q": [[num]],
//                    "R": [[num]]}, {...}],
//    "pattern": {"pairs": [[j, k], ...]}}
// Matrices are row-major nested arrays; pattern indices are zero-based.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "rsmlqr/lqr.hpp"
#include "rsmlqr/problem.hpp"
#include "rsmlqr/sim.hpp"

namespace rsmlqr {

inline constexpr std::string_view kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

struct LoadedProblem {
  Problem problem;
  std::string digest;  // "sha256:<hex>" of the raw input bytes
};

/// Throws ParseError (with line/column), SchemaError (JSON path + violated
/// constraint) or DimensionError.
Problem parse_problem(std::string_view text);
LoadedProblem load_problem_text(std::string_view text);
LoadedProblem load_problem(const std::filesystem::path& path);  // + FileNotFound

std::string sha256_hex(std::string_view bytes);

Json matrix_to_json(const Matrix& m);
Json problem_to_json(const Problem& p);
Json composite_to_json(const CompositeSystem& sys, const CompositeCost& cost);
Json design_to_json(const LQRDesign& d);
Json checks_to_json(const CompositionalityReport& rep);

struct GapSection {
  Vector x0;
  GapResult result;
};

struct ReportMeta {
  std::string digest;
  std::optional<GapSection> gap;
  std::optional<std::map<std::string, double>> timings_ms;
};

/// Top-level keys: input_digest, composite, lqr_direct, lqr_composed,
/// checks, gap, meta. Byte-identical for identical inputs unless timings are
/// requested.
Json report_to_json(const CompositionalityReport& rep, const ReportMeta& meta);

Json search_to_json(const SearchConfig& config, const SearchResult& result);

std::string verdict_name(Verdict v);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace rsmlqr
