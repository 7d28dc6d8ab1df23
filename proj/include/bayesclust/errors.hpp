#pragma once

#include <stdexcept>
#include <string>

namespace bayesclust {

/// A computation declined because its cost guard tripped (e.g. exhaustive search on large N).
class refused_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; `line` is 1-based, 0 when not attributable to a line.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (row " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace bayesclust
