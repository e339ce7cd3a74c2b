#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "comprate/estimators.hpp"

namespace comprate {

inline constexpr std::string_view kToolName = "comprate";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Fixed result-file schema; one line per (n, k, measure) point.
inline constexpr std::string_view kCsvHeader =
    "variant,measure,n,k,m,epsilon,trials,mean,stderr,seed";

// Shortest round-trip decimal form, locale-free.
std::string format_double(double v);
std::string format_u64(std::uint64_t v);

std::string csv_row(const RateEstimate& e);

// Parses one data line of the schema above. Throws std::invalid_argument
// on malformed input.
RateEstimate parse_csv_row(std::string_view line);

// Reads a whole result file (header + rows).
std::vector<RateEstimate> read_result_csv(std::istream& in);
std::vector<RateEstimate> read_result_csv_file(const std::string& path);

// Line-oriented key=value sidecar describing how a result file was produced.
using Manifest = std::vector<std::pair<std::string, std::string>>;

std::string render_manifest(const Manifest& entries);

// results.csv -> results.manifest (extension replaced; appended when absent).
std::string manifest_path_for(const std::string& csv_path);

}  // namespace comprate
