#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "psm.hpp"
#include "sample.hpp"

namespace bayesclust::io {

/// Shortest form that reads back to the same double.
inline std::string format_real(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// 64-bit FNV-1a, used as a content digest in run reports.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("cannot write " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot write " + path.string());
    }
}

namespace detail {

// Splits on commas and whitespace.
inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r'; };
    while (i < line.size()) {
        while (i < line.size() && sep(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !sep(line[j])) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool parse_integer(std::string_view tok, long long& value) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

inline bool parse_real(std::string_view tok, double& value) {
    std::string s(tok);
    char* end = nullptr;
    value = std::strtod(s.c_str(), &end);
    return !s.empty() && end == s.c_str() + s.size();
}

// Rows of tokens with 1-based line numbers; the first non-blank row may be
// a header, which `is_data` decides.
template <class IsData>
std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows(std::string_view text, IsData is_data) {
    std::vector<std::pair<std::size_t, std::vector<std::string_view>>> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++line_no;
        auto toks = tokens(text.substr(pos, end - pos));
        pos = end + 1;
        if (toks.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const bool header = first && !is_data(toks);
        first = false;
        if (!header) out.emplace_back(line_no, std::move(toks));
        if (end == text.size()) break;
    }
    return out;
}

} // namespace detail

/// Label matrix: one draw per row, N positive integer labels per row,
/// comma or whitespace separated, with an optional header row.
inline PartitionSample parse_label_matrix(std::string_view text) {
    auto all_integers = [](const std::vector<std::string_view>& toks) {
        long long v = 0;
        for (auto t : toks)
            if (!detail::parse_integer(t, v)) return false;
        return true;
    };
    const auto rows = detail::rows(text, all_integers);
    if (rows.empty()) throw parse_error("label matrix has no rows");
    const std::size_t n = rows.front().second.size();
    std::vector<Partition> draws;
    draws.reserve(rows.size());
    std::vector<long long> labels(n);
    for (const auto& [line, toks] : rows) {
        if (toks.size() != n)
            throw parse_error("ragged row: expected " + std::to_string(n) + " labels, found " +
                                  std::to_string(toks.size()),
                              line);
        for (std::size_t i = 0; i < n; ++i) {
            if (!detail::parse_integer(toks[i], labels[i]))
                throw parse_error("invalid label '" + std::string(toks[i]) + "'", line);
            if (labels[i] < 1) throw parse_error("labels must be positive integers", line);
        }
        draws.emplace_back(labels);
    }
    return PartitionSample(std::move(draws));
}

inline PartitionSample read_label_matrix(const std::filesystem::path& path) {
    return parse_label_matrix(read_file(path));
}

/// One canonical draw per row. Samples carrying multiplicities are expanded.
inline std::string label_matrix_csv(const PartitionSample& sample) {
    std::string out;
    for (std::size_t s = 0; s < sample.size(); ++s) {
        std::string row;
        for (std::size_t i = 0; i < sample.items(); ++i) {
            if (i) row += ',';
            row += std::to_string(sample[s][i]);
        }
        row += '\n';
        const std::uint64_t repeat = sample.has_counts() ? sample.counts()[s] : 1;
        for (std::uint64_t r = 0; r < repeat; ++r) out += row;
    }
    return out;
}

inline std::string label_row_csv(const Partition& p) { return label_matrix_csv(PartitionSample({p})); }

/// Dataset CSV: one point per row, optional header.
inline Dataset parse_dataset(std::string_view text) {
    auto all_reals = [](const std::vector<std::string_view>& toks) {
        double v = 0;
        for (auto t : toks)
            if (!detail::parse_real(t, v)) return false;
        return true;
    };
    const auto rows = detail::rows(text, all_reals);
    if (rows.empty()) throw parse_error("dataset has no rows");
    const std::size_t dim = rows.front().second.size();
    std::vector<double> values;
    values.reserve(rows.size() * dim);
    for (const auto& [line, toks] : rows) {
        if (toks.size() != dim)
            throw parse_error("ragged row: expected " + std::to_string(dim) + " values, found " +
                                  std::to_string(toks.size()),
                              line);
        for (auto t : toks) {
            double v = 0;
            if (!detail::parse_real(t, v) || !std::isfinite(v))
                throw parse_error("invalid value '" + std::string(t) + "'", line);
            values.push_back(v);
        }
    }
    return Dataset(rows.size(), dim, std::move(values));
}

inline Dataset read_dataset(const std::filesystem::path& path) { return parse_dataset(read_file(path)); }

inline std::string dataset_csv(const Dataset& data) {
    std::string out;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t d = 0; d < data.cols(); ++d) {
            if (d) out += ',';
            out += format_real(data(i, d));
        }
        out += '\n';
    }
    return out;
}

/// Square CSV, one row per item.
inline std::string psm_csv(const PSMatrix& psm) {
    std::string out;
    for (std::size_t i = 0; i < psm.size(); ++i) {
        for (std::size_t j = 0; j < psm.size(); ++j) {
            if (j) out += ',';
            out += format_real(psm(i, j));
        }
        out += '\n';
    }
    return out;
}

} // namespace bayesclust::io
