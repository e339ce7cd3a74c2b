#include "comprate/report.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace comprate {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::uint64_t parse_u64_field(std::string_view s, const char* what) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument(std::string("malformed integer field: ") + what);
    }
    return v;
}

double parse_double_field(std::string_view s, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument(std::string("malformed numeric field: ") + what);
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf;
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

std::string format_u64(std::uint64_t v) {
    std::array<char, 24> buf;
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_u64: conversion failed");
    return std::string(buf.data(), ptr);
}

std::string csv_row(const RateEstimate& e) {
    std::string row;
    row += variant_name(e.variant);
    row += ',';
    row += measure_name(e.measure);
    row += ',';
    row += format_u64(e.n);
    row += ',';
    row += format_u64(e.k);
    row += ',';
    row += format_u64(e.m);
    row += ',';
    row += format_double(e.epsilon);
    row += ',';
    row += format_u64(e.trials);
    row += ',';
    row += format_double(e.mean);
    row += ',';
    row += format_double(e.std_error);
    row += ',';
    row += format_u64(e.seed);
    return row;
}

RateEstimate parse_csv_row(std::string_view line) {
    const auto fields = split_fields(line);
    if (fields.size() != 10) {
        throw std::invalid_argument("result row must have exactly 10 fields");
    }
    RateEstimate e;
    const auto variant = parse_variant(fields[0]);
    if (!variant) throw std::invalid_argument("unknown variant in result row");
    e.variant = *variant;
    const auto measure = parse_measure(fields[1]);
    if (!measure) throw std::invalid_argument("unknown measure in result row");
    e.measure = *measure;
    e.n = parse_u64_field(fields[2], "n");
    e.k = parse_u64_field(fields[3], "k");
    e.m = parse_u64_field(fields[4], "m");
    e.epsilon = parse_double_field(fields[5], "epsilon");
    e.trials = parse_u64_field(fields[6], "trials");
    e.mean = parse_double_field(fields[7], "mean");
    e.std_error = parse_double_field(fields[8], "stderr");
    e.seed = parse_u64_field(fields[9], "seed");
    return e;
}

std::vector<RateEstimate> read_result_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("result file is empty");
    }
    if (line != kCsvHeader) {
        throw std::invalid_argument("result file header does not match the expected schema");
    }
    std::vector<RateEstimate> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_csv_row(line));
    }
    return rows;
}

std::vector<RateEstimate> read_result_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open result file: " + path);
    }
    return read_result_csv(in);
}

std::string render_manifest(const Manifest& entries) {
    std::string out;
    for (const auto& [key, value] : entries) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

std::string manifest_path_for(const std::string& csv_path) {
    const std::size_t slash = csv_path.find_last_of('/');
    const std::size_t dot = csv_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return csv_path + ".manifest";
    }
    return csv_path.substr(0, dot) + ".manifest";
}

}  // namespace comprate
