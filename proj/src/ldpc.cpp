#include "gmacldpc/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gmacldpc {

double box_plus(double a, double b) {
  const double sign = ((a < 0) != (b < 0)) ? -1.0 : 1.0;
  const double mag = std::min(std::fabs(a), std::fabs(b));
  // Computed as one difference so that flipping the sign of either argument
  // swaps the two log1p terms and negates the correction bit-exactly.
  const double correction = std::log1p(std::exp(-std::fabs(a + b))) - std::log1p(std::exp(-std::fabs(a - b)));
  if (a == 0.0 || b == 0.0) return correction;
  return sign * mag + correction;
}

double variable_update(std::span<const double> others, double state_llr) {
  double s = state_llr;
  for (double m : others) s += m;
  return clamp_llr(s);
}

double check_update(std::span<const double> others) {
  if (others.empty()) return kLlrMax;
  double acc = clamp_llr(others[0]);
  for (std::size_t i = 1; i < others.size(); ++i) acc = box_plus(acc, clamp_llr(others[i]));
  return clamp_llr(acc);
}

BpDecoder::BpDecoder(const ParityCheckMatrix& H)
    : H_(&H),
      v2c_(H.edges(), 0.0),
      c2v_(H.edges(), 0.0),
      check_sum_(H.n(), 0.0),
      total_(H.n(), 0.0),
      hard_(H.n(), 0) {
  std::size_t max_deg = 0;
  for (std::size_t c = 0; c < H.m(); ++c) max_deg = std::max(max_deg, H.check_degree(c));
  fwd_.resize(max_deg);
  bwd_.resize(max_deg);
}

void BpDecoder::reset(std::span<const double> prior) {
  if (prior.size() != H_->n()) throw std::invalid_argument("prior length does not match code length");
  std::fill(c2v_.begin(), c2v_.end(), 0.0);
  std::fill(v2c_.begin(), v2c_.end(), 0.0);
  std::fill(check_sum_.begin(), check_sum_.end(), 0.0);
  update_totals(prior);
}

void BpDecoder::refresh(std::span<const double> prior) { update_totals(prior); }

void BpDecoder::update_totals(std::span<const double> prior) {
  for (std::size_t v = 0; v < H_->n(); ++v) {
    total_[v] = prior[v] + check_sum_[v];
    hard_[v] = hard_decision(total_[v]);
  }
}

double BpDecoder::extrinsic(std::size_t v) const { return clamp_llr(check_sum_[v]); }

void BpDecoder::iterate(std::span<const double> prior) {
  const auto& H = *H_;

  // Variable nodes: the message on edge e excludes c2v[e].
  for (std::size_t v = 0; v < H.n(); ++v) {
    const double s = prior[v] + check_sum_[v];
    for (auto e : H.var_edges(v)) v2c_[e] = clamp_llr(s - c2v_[e]);
  }

  // Check nodes: forward/backward box-plus gives every leave-one-out product.
  for (std::size_t c = 0; c < H.m(); ++c) {
    const std::size_t b = H.check_begin(c);
    const std::size_t d = H.check_degree(c);
    if (d == 1) {
      c2v_[b] = kLlrMax;
      continue;
    }
    fwd_[0] = v2c_[b];
    bwd_[d - 1] = v2c_[b + d - 1];
    for (std::size_t j = 1; j < d; ++j) {
      fwd_[j] = box_plus(fwd_[j - 1], v2c_[b + j]);
      bwd_[d - 1 - j] = box_plus(bwd_[d - j], v2c_[b + d - 1 - j]);
    }
    c2v_[b] = clamp_llr(bwd_[1]);
    c2v_[b + d - 1] = clamp_llr(fwd_[d - 2]);
    for (std::size_t j = 1; j + 1 < d; ++j) c2v_[b + j] = clamp_llr(box_plus(fwd_[j - 1], bwd_[j + 1]));
  }

  for (std::size_t v = 0; v < H.n(); ++v) {
    double s = 0.0;
    for (auto e : H.var_edges(v)) s += c2v_[e];
    check_sum_[v] = s;
  }
  update_totals(prior);
}

BpResult bp_decode(const ParityCheckMatrix& H, std::span<const double> channel_llr, int max_iters) {
  BpDecoder dec(H);
  dec.reset(channel_llr);
  BpResult out;
  out.converged = dec.syndrome_ok();
  while (!out.converged && out.iterations < max_iters) {
    dec.iterate(channel_llr);
    ++out.iterations;
    out.converged = dec.syndrome_ok();
  }
  out.codeword.assign(dec.hard().begin(), dec.hard().end());
  out.posterior.assign(dec.total().begin(), dec.total().end());
  return out;
}

BpResult bp_decode(const LiftedCode& code, std::span<const double> channel_llr, int max_iters) {
  return bp_decode(code.H(), channel_llr, max_iters);
}

}  // namespace gmacldpc
