#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmacldpc/protograph.hpp"

namespace gmacldpc {

using Bits = std::vector<std::uint8_t>;

/// Sparse binary matrix with compressed adjacency in both directions.
/// Edges are numbered in check-major order: the edges of check c occupy
/// [check_begin(c), check_end(c)).
class ParityCheckMatrix {
 public:
  ParityCheckMatrix() = default;
  /// `rows[c]` lists the variable indices of check c (stored sorted).
  /// Duplicates are rejected.
  ParityCheckMatrix(std::size_t n, const std::vector<std::vector<std::uint32_t>>& rows);

  std::size_t n() const { return n_; }
  std::size_t m() const { return check_ptr_.empty() ? 0 : check_ptr_.size() - 1; }
  std::size_t edges() const { return edge_var_.size(); }

  std::size_t check_begin(std::size_t c) const { return check_ptr_[c]; }
  std::size_t check_end(std::size_t c) const { return check_ptr_[c + 1]; }
  std::size_t check_degree(std::size_t c) const { return check_end(c) - check_begin(c); }
  std::uint32_t edge_var(std::size_t e) const { return edge_var_[e]; }
  std::uint32_t edge_check(std::size_t e) const { return edge_check_[e]; }

  /// Edge ids incident to variable v.
  std::span<const std::uint32_t> var_edges(std::size_t v) const {
    return {var_edge_.data() + var_ptr_[v], var_ptr_[v + 1] - var_ptr_[v]};
  }
  std::size_t var_degree(std::size_t v) const { return var_ptr_[v + 1] - var_ptr_[v]; }

  /// Variable indices of check c.
  std::span<const std::uint32_t> check_vars(std::size_t c) const {
    return {edge_var_.data() + check_ptr_[c], check_degree(c)};
  }

  bool is_codeword(std::span<const std::uint8_t> bits) const;
  Bits syndrome(std::span<const std::uint8_t> bits) const;

  /// Number of distinct length-4 cycles (pairs of variables sharing two checks).
  std::size_t count_four_cycles() const;

  std::vector<std::vector<std::uint32_t>> rows() const;

  bool operator==(const ParityCheckMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> check_ptr_{0};
  std::vector<std::uint32_t> edge_var_;
  std::vector<std::uint32_t> edge_check_;
  std::vector<std::size_t> var_ptr_;
  std::vector<std::uint32_t> var_edge_;
};

/// Systematic encoder obtained by GF(2) Gauss-Jordan elimination of H.
/// Information bits land on the non-pivot columns (`info_positions`), each
/// pivot column is the parity of its reduced row restricted to those.
class Encoder {
 public:
  Encoder() = default;
  explicit Encoder(const ParityCheckMatrix& H);

  std::size_t n() const { return n_; }
  std::size_t k() const { return info_positions_.size(); }
  std::size_t rank() const { return pivots_.size(); }
  const std::vector<std::uint32_t>& info_positions() const { return info_positions_; }

  Bits encode(std::span<const std::uint8_t> info) const;
  Bits extract_info(std::span<const std::uint8_t> codeword) const;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> reduced_;  // rank() rows of `words_` words
  std::vector<std::uint32_t> pivots_;
  std::vector<std::uint32_t> info_positions_;
};

/// Throws std::domain_error("zero-rate code") when H has full column rank.
Encoder derive_encoder(const ParityCheckMatrix& H);

/// Immutable code: parity-check matrix, encoder and the protograph column of
/// every lifted variable node (empty when the code did not come from a lift).
class LiftedCode {
 public:
  LiftedCode(ParityCheckMatrix H, std::vector<std::uint32_t> proto_col = {});

  const ParityCheckMatrix& H() const { return H_; }
  const Encoder& encoder() const { return encoder_; }
  const std::vector<std::uint32_t>& proto_col() const { return proto_col_; }

  std::size_t n() const { return H_.n(); }
  std::size_t m() const { return H_.m(); }
  std::size_t k() const { return encoder_.k(); }
  double rate() const { return static_cast<double>(k()) / static_cast<double>(n()); }

  Bits encode(std::span<const std::uint8_t> info) const { return encoder_.encode(info); }

 private:
  ParityCheckMatrix H_;
  Encoder encoder_;
  std::vector<std::uint32_t> proto_col_;
};

struct LiftOptions {
  /// Sweeps of the 4-cycle removal pass.
  int max_attempts = 2000;
  /// Sweeps of the follow-up pass that thins out 6-cycles.
  int six_cycle_sweeps = 20;
};

/// Random lifting. A multiplicity-e entry becomes e disjoint Z x Z
/// permutations: distinct cyclic shifts conjugated by a random row and column
/// permutation drawn per block. 4-cycles are then removed by resampling edge
/// endpoints within a block (degree preserving); if `max_attempts` sweeps do
/// not clear them all the remainder is kept. A second pass of the same moves
/// reduces the number of 6-cycles. Deterministic in `seed`.
/// Lifted variable j*Z + r belongs to protograph column j.
LiftedCode lift(const Protograph& p, std::size_t Z, std::uint64_t seed, LiftOptions opts = {});
/// Lifted parity-check matrix alone (no encoder is derived).
ParityCheckMatrix lift_matrix(const Protograph& p, std::size_t Z, std::uint64_t seed, LiftOptions opts = {});

/// Composite [[H_inner, 0], [I, I]] whose codewords are (c, c).
LiftedCode build_repetition_baseline(const ParityCheckMatrix& H_inner);
/// Same, keeping protograph column labels: copy of column j is labelled j + cols.
LiftedCode build_repetition_baseline(const LiftedCode& inner);

}  // namespace gmacldpc
