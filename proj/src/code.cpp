#include "gmacldpc/code.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "gmacldpc/rng.hpp"

namespace gmacldpc {

ParityCheckMatrix::ParityCheckMatrix(std::size_t n,
                                     const std::vector<std::vector<std::uint32_t>>& rows)
    : n_(n) {
  check_ptr_.assign(1, 0);
  for (std::size_t c = 0; c < rows.size(); ++c) {
    auto sorted = rows[c];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("duplicate entry in check " + std::to_string(c));
    }
    for (auto v : sorted) {
      if (v >= n) throw std::invalid_argument("variable index out of range in check " + std::to_string(c));
      edge_var_.push_back(v);
      edge_check_.push_back(static_cast<std::uint32_t>(c));
    }
    check_ptr_.push_back(edge_var_.size());
  }

  var_ptr_.assign(n + 1, 0);
  for (auto v : edge_var_) ++var_ptr_[v + 1];
  std::partial_sum(var_ptr_.begin(), var_ptr_.end(), var_ptr_.begin());
  var_edge_.resize(edge_var_.size());
  std::vector<std::size_t> fill(var_ptr_.begin(), var_ptr_.end() - 1);
  for (std::size_t e = 0; e < edge_var_.size(); ++e) {
    var_edge_[fill[edge_var_[e]]++] = static_cast<std::uint32_t>(e);
  }
}

bool ParityCheckMatrix::is_codeword(std::span<const std::uint8_t> bits) const {
  for (std::size_t c = 0; c < m(); ++c) {
    std::uint8_t s = 0;
    for (auto v : check_vars(c)) s ^= bits[v];
    if (s & 1) return false;
  }
  return true;
}

Bits ParityCheckMatrix::syndrome(std::span<const std::uint8_t> bits) const {
  Bits s(m(), 0);
  for (std::size_t c = 0; c < m(); ++c) {
    for (auto v : check_vars(c)) s[c] ^= bits[v] & 1;
  }
  return s;
}

std::size_t ParityCheckMatrix::count_four_cycles() const {
  // Every pair of variables sharing t >= 2 checks closes C(t, 2) 4-cycles.
  std::unordered_map<std::uint64_t, std::uint32_t> shared;
  for (std::size_t c = 0; c < m(); ++c) {
    auto vars = check_vars(c);
    for (std::size_t a = 0; a < vars.size(); ++a) {
      for (std::size_t b = a + 1; b < vars.size(); ++b) {
        auto lo = std::min(vars[a], vars[b]);
        auto hi = std::max(vars[a], vars[b]);
        ++shared[(static_cast<std::uint64_t>(lo) << 32) | hi];
      }
    }
  }
  std::size_t cycles = 0;
  for (const auto& [key, t] : shared) cycles += static_cast<std::size_t>(t) * (t - 1) / 2;
  return cycles;
}

std::vector<std::vector<std::uint32_t>> ParityCheckMatrix::rows() const {
  std::vector<std::vector<std::uint32_t>> out(m());
  for (std::size_t c = 0; c < m(); ++c) {
    auto vars = check_vars(c);
    out[c].assign(vars.begin(), vars.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

Encoder::Encoder(const ParityCheckMatrix& H) : n_(H.n()), words_((H.n() + 63) / 64) {
  const std::size_t m = H.m();
  std::vector<std::uint64_t> rows(m * words_, 0);
  for (std::size_t c = 0; c < m; ++c) {
    for (auto v : H.check_vars(c)) rows[c * words_ + v / 64] ^= 1ULL << (v % 64);
  }
  auto row = [&](std::size_t r) { return rows.data() + r * words_; };
  auto bit = [&](std::size_t r, std::size_t col) { return (row(r)[col / 64] >> (col % 64)) & 1ULL; };

  std::size_t rank = 0;
  std::vector<bool> is_pivot(n_, false);
  for (std::size_t col = 0; col < n_ && rank < m; ++col) {
    std::size_t sel = rank;
    while (sel < m && !bit(sel, col)) ++sel;
    if (sel == m) continue;
    if (sel != rank) std::swap_ranges(row(sel), row(sel) + words_, row(rank));
    for (std::size_t r = 0; r < m; ++r) {
      if (r != rank && bit(r, col)) {
        for (std::size_t w = 0; w < words_; ++w) row(r)[w] ^= row(rank)[w];
      }
    }
    pivots_.push_back(static_cast<std::uint32_t>(col));
    is_pivot[col] = true;
    ++rank;
  }
  reduced_.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(rank * words_));
  for (std::size_t col = 0; col < n_; ++col) {
    if (!is_pivot[col]) info_positions_.push_back(static_cast<std::uint32_t>(col));
  }
}

Bits Encoder::encode(std::span<const std::uint8_t> info) const {
  if (info.size() != k()) throw std::invalid_argument("information length mismatch");
  std::vector<std::uint64_t> word(words_, 0);
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (info[i] & 1) {
      auto col = info_positions_[i];
      word[col / 64] |= 1ULL << (col % 64);
    }
  }
  // Reduced rows are zero on every other pivot column, so parity bits can be
  // filled in any order.
  for (std::size_t r = 0; r < pivots_.size(); ++r) {
    const std::uint64_t* rr = reduced_.data() + r * words_;
    unsigned parity = 0;
    for (std::size_t w = 0; w < words_; ++w) parity ^= std::popcount(rr[w] & word[w]) & 1U;
    if (parity) word[pivots_[r] / 64] |= 1ULL << (pivots_[r] % 64);
  }
  Bits c(n_);
  for (std::size_t v = 0; v < n_; ++v) c[v] = static_cast<std::uint8_t>((word[v / 64] >> (v % 64)) & 1ULL);
  return c;
}

Bits Encoder::extract_info(std::span<const std::uint8_t> codeword) const {
  Bits u(k());
  for (std::size_t i = 0; i < k(); ++i) u[i] = codeword[info_positions_[i]];
  return u;
}

Encoder derive_encoder(const ParityCheckMatrix& H) {
  Encoder enc(H);
  if (enc.k() == 0) throw std::domain_error("zero-rate code");
  return enc;
}

LiftedCode::LiftedCode(ParityCheckMatrix H, std::vector<std::uint32_t> proto_col)
    : H_(std::move(H)), encoder_(derive_encoder(H_)), proto_col_(std::move(proto_col)) {
  if (!proto_col_.empty() && proto_col_.size() != H_.n()) {
    throw std::invalid_argument("protograph column labels do not match code length");
  }
}

// ---------------------------------------------------------------------------

namespace {

// Edge-level state of a lifting: adjacency lists plus, per edge, its block so
// that swaps stay inside one protograph edge class.
struct LiftGraph {
  std::vector<std::vector<std::uint32_t>> check_adj;
  std::vector<std::vector<std::uint32_t>> var_adj;

  bool connected(std::uint32_t c, std::uint32_t v) const {
    const auto& a = check_adj[c];
    return std::find(a.begin(), a.end(), v) != a.end();
  }

  /// 4-cycles through edge (c, v).
  std::size_t cycles_through(std::uint32_t c, std::uint32_t v) const {
    std::size_t count = 0;
    for (auto v2 : check_adj[c]) {
      if (v2 == v) continue;
      for (auto c2 : var_adj[v]) {
        if (c2 != c && connected(c2, v2)) ++count;
      }
    }
    return count;
  }

  /// 6-cycles through edge (c, v).
  std::size_t six_cycles_through(std::uint32_t c, std::uint32_t v) const {
    std::size_t count = 0;
    for (auto c3 : var_adj[v]) {
      if (c3 == c) continue;
      for (auto v3 : check_adj[c3]) {
        if (v3 == v) continue;
        for (auto c2 : var_adj[v3]) {
          if (c2 == c3 || c2 == c) continue;
          for (auto v2 : check_adj[c2]) {
            if (v2 != v && v2 != v3 && connected(c, v2)) ++count;
          }
        }
      }
    }
    return count;
  }

  void remove(std::uint32_t c, std::uint32_t v) {
    auto& a = check_adj[c];
    a.erase(std::find(a.begin(), a.end(), v));
    auto& b = var_adj[v];
    b.erase(std::find(b.begin(), b.end(), c));
  }

  void add(std::uint32_t c, std::uint32_t v) {
    check_adj[c].push_back(v);
    var_adj[v].push_back(c);
  }
};

struct LiftEdge {
  std::uint32_t check;
  std::uint32_t var;
  std::uint32_t block;
};

}  // namespace

ParityCheckMatrix lift_matrix(const Protograph& p, std::size_t Z, std::uint64_t seed, LiftOptions opts) {
  if (Z == 0) throw std::invalid_argument("lifting factor must be positive");
  if (static_cast<std::size_t>(p.max_multiplicity()) > Z) {
    throw std::invalid_argument("multiplicity " + std::to_string(p.max_multiplicity()) +
                                " exceeds lifting factor " + std::to_string(Z));
  }
  const std::size_t n = p.cols() * Z;
  const std::size_t m = p.rows() * Z;

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> shift_dist(0, Z - 1);

  // Block (i, j) of multiplicity e: row r connects to column tau((sigma(r) + s_k) mod Z)
  // for e distinct shifts s_k. The shifted copies are disjoint permutations; the
  // random sigma/tau keep different blocks from commuting.
  LiftGraph g;
  g.check_adj.resize(m);
  g.var_adj.resize(n);
  std::vector<LiftEdge> edges;
  std::vector<std::vector<std::size_t>> block_edges;
  std::vector<std::uint32_t> sigma(Z), tau(Z);
  std::vector<std::size_t> shifts;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const int e = p(i, j);
      if (e == 0) continue;
      const auto block = static_cast<std::uint32_t>(block_edges.size());
      block_edges.emplace_back();
      std::iota(sigma.begin(), sigma.end(), 0U);
      std::iota(tau.begin(), tau.end(), 0U);
      std::shuffle(sigma.begin(), sigma.end(), rng);
      std::shuffle(tau.begin(), tau.end(), rng);
      shifts.clear();
      while (shifts.size() < static_cast<std::size_t>(e)) {
        auto s = shift_dist(rng);
        if (std::find(shifts.begin(), shifts.end(), s) == shifts.end()) shifts.push_back(s);
      }
      for (auto s : shifts) {
        for (std::size_t r = 0; r < Z; ++r) {
          const auto c = static_cast<std::uint32_t>(i * Z + r);
          const auto v = static_cast<std::uint32_t>(j * Z + tau[(sigma[r] + s) % Z]);
          block_edges.back().push_back(edges.size());
          edges.push_back({c, v, block});
          g.add(c, v);
        }
      }
    }
  }

  // Swap endpoints of two edges of the same block:
  // (c1, v1), (c2, v2) -> (c1, v2), (c2, v1). Degrees and block structure are
  // preserved; a swap is kept only if it strictly lowers the local cost. The
  // first pass clears 4-cycles, the second thins out 6-cycles without letting
  // 4-cycles back in.
  auto improve = [&](int sweeps, int partners, auto cost) {
    auto local = [&](std::size_t a, std::size_t b) {
      return cost(edges[a].check, edges[a].var) + cost(edges[b].check, edges[b].var);
    };
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      bool any = false;
      for (std::size_t a = 0; a < edges.size(); ++a) {
        if (cost(edges[a].check, edges[a].var) == 0) continue;
        any = true;
        const auto& pool = block_edges[edges[a].block];
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        for (int tries = 0; tries < partners; ++tries) {
          const std::size_t b = pool[pick(rng)];
          const auto c1 = edges[a].check, v1 = edges[a].var;
          const auto c2 = edges[b].check, v2 = edges[b].var;
          if (b == a || c1 == c2 || v1 == v2 || g.connected(c1, v2) || g.connected(c2, v1)) continue;
          const std::size_t before = local(a, b);
          g.remove(c1, v1);
          g.remove(c2, v2);
          g.add(c1, v2);
          g.add(c2, v1);
          edges[a].var = v2;
          edges[b].var = v1;
          if (local(a, b) < before) break;
          g.remove(c1, v2);
          g.remove(c2, v1);
          g.add(c1, v1);
          g.add(c2, v2);
          edges[a].var = v1;
          edges[b].var = v2;
        }
      }
      if (!any) break;
    }
  };
  improve(opts.max_attempts, 16, [&](std::uint32_t c, std::uint32_t v) { return g.cycles_through(c, v); });
  improve(opts.six_cycle_sweeps, 128, [&](std::uint32_t c, std::uint32_t v) {
    return 1000 * g.cycles_through(c, v) + g.six_cycles_through(c, v);
  });
  return ParityCheckMatrix(n, g.check_adj);
}

LiftedCode lift(const Protograph& p, std::size_t Z, std::uint64_t seed, LiftOptions opts) {
  auto H = lift_matrix(p, Z, seed, opts);
  const std::size_t n = H.n();
  std::vector<std::uint32_t> proto_col(n);
  for (std::size_t v = 0; v < n; ++v) proto_col[v] = static_cast<std::uint32_t>(v / Z);
  return LiftedCode(std::move(H), std::move(proto_col));
}

LiftedCode build_repetition_baseline(const ParityCheckMatrix& H_inner) {
  const std::size_t half = H_inner.n();
  if (H_inner.m() >= half) {
    throw std::invalid_argument("inner parity-check matrix has no information bits (dimension mismatch)");
  }
  auto rows = H_inner.rows();
  for (std::size_t v = 0; v < half; ++v) {
    rows.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(half + v)});
  }
  return LiftedCode(ParityCheckMatrix(2 * half, rows));
}

LiftedCode build_repetition_baseline(const LiftedCode& inner) {
  auto base = build_repetition_baseline(inner.H());
  if (inner.proto_col().empty()) return base;
  const std::uint32_t cols = *std::max_element(inner.proto_col().begin(), inner.proto_col().end()) + 1;
  std::vector<std::uint32_t> labels(inner.proto_col());
  for (auto c : inner.proto_col()) labels.push_back(c + cols);
  return LiftedCode(base.H(), std::move(labels));
}

}  // namespace gmacldpc
