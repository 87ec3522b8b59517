#include "gmacldpc/protograph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gmacldpc {

namespace {

void validate(std::size_t rows, std::size_t cols, const std::vector<int>& b) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("protograph must have at least one row and one column");
  }
  if (b.size() != rows * cols) {
    throw std::invalid_argument("protograph entry count does not match its shape");
  }
  if (std::any_of(b.begin(), b.end(), [](int e) { return e < 0; })) {
    throw std::invalid_argument("negative entry");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < cols; ++j) any = any || b[i * cols + j] > 0;
    if (!any) throw std::invalid_argument("disconnected check node " + std::to_string(i));
  }
  for (std::size_t j = 0; j < cols; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < rows; ++i) any = any || b[i * cols + j] > 0;
    if (!any) throw std::invalid_argument("disconnected variable node " + std::to_string(j));
  }
  if (rows >= cols) throw std::invalid_argument("non-positive design rate");
}

std::vector<int> flatten(const std::vector<std::vector<int>>& rows) {
  std::vector<int> out;
  for (const auto& r : rows) {
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw std::invalid_argument("ragged protograph rows");
    }
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace

Protograph::Protograph(std::size_t rows, std::size_t cols, std::vector<int> entries)
    : rows_(rows), cols_(cols), b_(std::move(entries)) {
  validate(rows_, cols_, b_);
}

Protograph::Protograph(const std::vector<std::vector<int>>& rows)
    : Protograph(rows.size(), rows.empty() ? 0 : rows.front().size(), flatten(rows)) {}

int Protograph::row_degree(std::size_t i) const {
  return std::accumulate(b_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                         b_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_), 0);
}

int Protograph::column_degree(std::size_t j) const {
  int d = 0;
  for (std::size_t i = 0; i < rows_; ++i) d += (*this)(i, j);
  return d;
}

int Protograph::max_multiplicity() const { return *std::max_element(b_.begin(), b_.end()); }

int Protograph::edge_count() const { return std::accumulate(b_.begin(), b_.end(), 0); }

std::string Protograph::to_text() const {
  std::ostringstream os;
  os << rows_ << ' ' << cols_ << '\n';
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j) os << ' ';
      os << (*this)(i, j);
    }
    os << '\n';
  }
  return os.str();
}

Protograph parse_protograph(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
  }
  // Trailing blank lines are tolerated, interior ones are not.
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) {
    lines.pop_back();
  }
  if (lines.empty()) throw ParseError(1, "empty protograph");

  auto read_ints = [](const std::string& line, std::size_t lineno) {
    std::istringstream ls(line);
    std::vector<long> v;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      long x = 0;
      try {
        x = std::stol(tok, &used);
      } catch (const std::exception&) {
        throw ParseError(lineno, "not an integer: '" + tok + "'");
      }
      if (used != tok.size()) throw ParseError(lineno, "not an integer: '" + tok + "'");
      v.push_back(x);
    }
    return v;
  };

  auto header = read_ints(lines[0], 1);
  if (header.size() != 2 || header[0] <= 0 || header[1] <= 0) {
    throw ParseError(1, "header must be 'rows cols' with positive values");
  }
  const auto rows = static_cast<std::size_t>(header[0]);
  const auto cols = static_cast<std::size_t>(header[1]);
  if (lines.size() - 1 != rows) {
    throw ParseError(lines.size(), "expected " + std::to_string(rows) + " rows, found " +
                                       std::to_string(lines.size() - 1));
  }

  std::vector<int> b;
  b.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto v = read_ints(lines[i + 1], i + 2);
    if (v.size() != cols) {
      throw ParseError(i + 2, "expected " + std::to_string(cols) + " entries, found " +
                                  std::to_string(v.size()));
    }
    for (long x : v) {
      if (x < 0) throw ParseError(i + 2, "negative entry");
      b.push_back(static_cast<int>(x));
    }
  }
  try {
    return Protograph(rows, cols, std::move(b));
  } catch (const std::invalid_argument& e) {
    // Report structural errors against the first offending data line.
    std::size_t line = 2;
    const std::string msg = e.what();
    auto pos = msg.find_last_of(' ');
    if (msg.rfind("disconnected check node", 0) == 0) line = 2 + std::stoul(msg.substr(pos + 1));
    throw ParseError(line, msg);
  }
}

Protograph load_protograph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open protograph file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_protograph(ss.str());
}

Protograph repetition_protograph(const Protograph& inner) {
  const std::size_t r = inner.rows();
  const std::size_t c = inner.cols();
  std::vector<int> b((r + c) * 2 * c, 0);
  auto at = [&](std::size_t i, std::size_t j) -> int& { return b[i * 2 * c + j]; };
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) at(i, j) = inner(i, j);
  }
  for (std::size_t j = 0; j < c; ++j) {
    at(r + j, j) = 1;
    at(r + j, c + j) = 1;
  }
  return Protograph(r + c, 2 * c, std::move(b));
}

}  // namespace gmacldpc
