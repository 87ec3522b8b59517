#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gmacldpc/code.hpp"

namespace gmacldpc {

// LLR convention throughout: L = log p(x = +1) / p(x = -1) where the BPSK
// symbol is x = 1 - 2c, i.e. code bit 0 <-> +1. A non-negative total LLR is
// decided as bit 0 (symbol +1).

inline constexpr double kLlrMax = 30.0;

inline double clamp_llr(double x) { return x > kLlrMax ? kLlrMax : (x < -kLlrMax ? -kLlrMax : x); }

inline std::uint8_t hard_decision(double llr) { return llr < 0.0 ? 1 : 0; }

/// Pairwise check-node combination 2 atanh(tanh(a/2) tanh(b/2)) in the
/// overflow-free form sign(a) sign(b) min(|a|,|b|) + log1p(e^-|a+b|) - log1p(e^-|a-b|).
/// Negating either argument negates the result exactly.
double box_plus(double a, double b);

/// Message to one check: sum of the other incoming check messages plus the
/// state (channel) message, clamped.
double variable_update(std::span<const double> others, double state_llr);

/// Message to one variable from a check given the other incoming messages.
/// An empty input gives +kLlrMax (a degree-1 check forces bit 0).
double check_update(std::span<const double> others);

/// Flooding sum-product decoder that owns its per-edge buffers. The prior
/// (channel or state-node message) is supplied on every iteration so the
/// same instance serves as the inner loop of the joint decoder.
class BpDecoder {
 public:
  explicit BpDecoder(const ParityCheckMatrix& H);

  /// Zeroes check-to-variable messages and sets decisions from `prior`.
  void reset(std::span<const double> prior);

  /// Recomputes totals and decisions for a new prior without message passing.
  void refresh(std::span<const double> prior);

  /// One flooding iteration: variable nodes, then check nodes, then totals.
  void iterate(std::span<const double> prior);

  bool syndrome_ok() const { return H_->is_codeword(hard_); }

  std::span<const double> total() const { return total_; }
  std::span<const double> v2c() const { return v2c_; }
  std::span<const double> c2v() const { return c2v_; }
  std::span<const std::uint8_t> hard() const { return hard_; }

  /// Sum of incoming check messages at variable v (total minus prior), clamped.
  double extrinsic(std::size_t v) const;

  const ParityCheckMatrix& H() const { return *H_; }

 private:
  void update_totals(std::span<const double> prior);

  const ParityCheckMatrix* H_;
  std::vector<double> v2c_;
  std::vector<double> c2v_;
  std::vector<double> check_sum_;
  std::vector<double> total_;
  std::vector<std::uint8_t> hard_;
  std::vector<double> fwd_;
  std::vector<double> bwd_;
};

struct BpResult {
  Bits codeword;
  bool converged = false;
  int iterations = 0;
  std::vector<double> posterior;
};

/// Decodes one frame. The syndrome of the channel decisions is checked
/// before the first iteration, so an error-free input reports 0 iterations.
BpResult bp_decode(const LiftedCode& code, std::span<const double> channel_llr, int max_iters);
BpResult bp_decode(const ParityCheckMatrix& H, std::span<const double> channel_llr, int max_iters);

}  // namespace gmacldpc
