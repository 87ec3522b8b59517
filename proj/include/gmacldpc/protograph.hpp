#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gmacldpc {

/// Raised when a protograph text file cannot be parsed. The message names
/// the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Base matrix of edge multiplicities. Row i is check node C_i, column j is
/// variable node V_j. Construction validates connectivity and design rate.
class Protograph {
 public:
  Protograph(std::size_t rows, std::size_t cols, std::vector<int> entries);
  Protograph(const std::vector<std::vector<int>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  int operator()(std::size_t i, std::size_t j) const { return b_[i * cols_ + j]; }
  const std::vector<int>& entries() const { return b_; }

  int row_degree(std::size_t i) const;
  int column_degree(std::size_t j) const;
  int max_multiplicity() const;
  int edge_count() const;

  double design_rate() const { return 1.0 - static_cast<double>(rows_) / static_cast<double>(cols_); }

  /// Text form: "rows cols" header followed by one line per row.
  std::string to_text() const;

  bool operator==(const Protograph&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<int> b_;
};

Protograph parse_protograph(std::string_view text);
Protograph load_protograph(const std::string& path);

/// Protograph of the bit-repetition construction [[B, 0], [I, I]]: every
/// variable of `inner` is sent twice, the copy tied by a degree-2 check.
/// For B = [[3, 3]] this is the rate-1/4 baseline [[3,3,0,0],[1,0,1,0],[0,1,0,1]].
Protograph repetition_protograph(const Protograph& inner);

}  // namespace gmacldpc
