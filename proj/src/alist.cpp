#include "gmacldpc/alist.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gmacldpc {

std::string to_alist(const ParityCheckMatrix& H) {
  std::size_t max_col = 0;
  std::size_t max_row = 0;
  for (std::size_t v = 0; v < H.n(); ++v) max_col = std::max(max_col, H.var_degree(v));
  for (std::size_t c = 0; c < H.m(); ++c) max_row = std::max(max_row, H.check_degree(c));

  std::ostringstream os;
  os << H.n() << ' ' << H.m() << '\n' << max_col << ' ' << max_row << '\n';
  for (std::size_t v = 0; v < H.n(); ++v) os << (v ? " " : "") << H.var_degree(v);
  os << '\n';
  for (std::size_t c = 0; c < H.m(); ++c) os << (c ? " " : "") << H.check_degree(c);
  os << '\n';
  for (std::size_t v = 0; v < H.n(); ++v) {
    std::vector<std::uint32_t> checks;
    for (auto e : H.var_edges(v)) checks.push_back(H.edge_check(e));
    std::sort(checks.begin(), checks.end());
    for (std::size_t i = 0; i < max_col; ++i) {
      os << (i ? " " : "") << (i < checks.size() ? checks[i] + 1 : 0);
    }
    os << '\n';
  }
  for (std::size_t c = 0; c < H.m(); ++c) {
    auto vars = H.check_vars(c);
    std::vector<std::uint32_t> sorted(vars.begin(), vars.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < max_row; ++i) {
      os << (i ? " " : "") << (i < sorted.size() ? sorted[i] + 1 : 0);
    }
    os << '\n';
  }
  return os.str();
}

ParityCheckMatrix parse_alist(std::string_view text) {
  std::istringstream is{std::string(text)};
  auto next = [&](const char* what) {
    long x;
    if (!(is >> x)) throw std::runtime_error(std::string("alist: expected ") + what);
    if (x < 0) throw std::runtime_error(std::string("alist: negative ") + what);
    return static_cast<std::size_t>(x);
  };
  const std::size_t n = next("n");
  const std::size_t m = next("m");
  const std::size_t max_col = next("max column weight");
  const std::size_t max_row = next("max row weight");
  std::vector<std::size_t> col_w(n), row_w(m);
  for (auto& w : col_w) w = next("column weight");
  for (auto& w : row_w) w = next("row weight");

  // Column lists are read to advance the stream and cross-checked below.
  std::vector<std::vector<std::uint32_t>> col_lists(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < max_col; ++i) {
      auto c = next("check index");
      if (c == 0) continue;
      if (c > m) throw std::runtime_error("alist: check index out of range");
      col_lists[v].push_back(static_cast<std::uint32_t>(c - 1));
    }
    if (col_lists[v].size() != col_w[v]) throw std::runtime_error("alist: column weight mismatch");
  }
  std::vector<std::vector<std::uint32_t>> rows(m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < max_row; ++i) {
      auto v = next("variable index");
      if (v == 0) continue;
      if (v > n) throw std::runtime_error("alist: variable index out of range");
      rows[c].push_back(static_cast<std::uint32_t>(v - 1));
    }
    if (rows[c].size() != row_w[c]) throw std::runtime_error("alist: row weight mismatch");
  }
  ParityCheckMatrix H(n, rows);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::uint32_t> checks;
    for (auto e : H.var_edges(v)) checks.push_back(H.edge_check(e));
    std::sort(checks.begin(), checks.end());
    std::sort(col_lists[v].begin(), col_lists[v].end());
    if (checks != col_lists[v]) throw std::runtime_error("alist: row and column lists disagree");
  }
  return H;
}

ParityCheckMatrix load_alist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alist file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_alist(ss.str());
}

void save_alist(const ParityCheckMatrix& H, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write alist file '" + path + "'");
  out << to_alist(H);
}

}  // namespace gmacldpc
