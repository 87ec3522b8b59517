#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gmacldpc/code.hpp"
#include "gmacldpc/ldpc.hpp"
#include "gmacldpc/rng.hpp"

namespace gmacldpc {

/// T equal-power BPSK users, y = sum_t x_t + z with z ~ N(0, N0/2).
struct ChannelConfig {
  int users = 1;
  double power = 1.0;  ///< per-symbol power P
  double n0 = 1.0;     ///< noise variance per real sample is N0/2

  double amplitude() const;
  double noise_variance() const { return n0 / 2.0; }
  /// 10 log10(P / (R N0)) for per-user code rate R.
  double ebn0_db(double rate) const;
  void validate() const;

  /// Fixes P and solves N0 = P / (R 10^(ebn0/10)).
  static ChannelConfig from_ebn0(int users, double rate, double ebn0_db, double power = 1.0);
};

/// Single-user AWGN LLR 4 sqrt(P) y / N0, clamped.
double channel_llr(double y, const ChannelConfig& cfg);

/// Message from a functional (state) node to one participant.
///
/// Marginalizes exactly over the 2^d configurations of the d = priors.size()
/// other participants, each weighted by the probability implied by its prior
/// LLR, under the Gaussian likelihood exp(-(y - sqrt(P) sum x)^2 / N0). The
/// log-sum-exp is accumulated over complementary configuration pairs, which
/// makes update(-y, -priors) == -update(y, priors) hold bit-exactly. With no
/// other participants the result is channel_llr(y).
double functional_node_update(double y, std::span<const double> priors, const ChannelConfig& cfg);

/// Adjacency between users' code bits and the received samples (chips).
/// Each code bit occupies at most one chip; bits mapped to -1 are not sent
/// (punctured) and receive no state-node message.
class SlotLayout {
 public:
  struct Participant {
    std::uint32_t user;
    std::uint32_t bit;
    bool operator==(const Participant&) const = default;
  };

  SlotLayout() = default;
  SlotLayout(std::size_t chips, std::vector<std::vector<std::int32_t>> chip_of);

  /// Unspread layout: user t sends bit v on chip perms[t][v].
  static SlotLayout interleaved(const std::vector<std::vector<std::uint32_t>>& perms);

  std::size_t users() const { return chip_of_.size(); }
  std::size_t chips() const { return chip_ptr_.empty() ? 0 : chip_ptr_.size() - 1; }
  std::size_t code_length() const { return chip_of_.empty() ? 0 : chip_of_.front().size(); }
  /// Bits actually transmitted per user.
  std::size_t transmitted_bits(std::size_t user) const;

  std::int32_t chip_of(std::size_t user, std::size_t bit) const { return chip_of_[user][bit]; }
  std::span<const Participant> participants(std::size_t chip) const {
    return {members_.data() + chip_ptr_[chip], chip_ptr_[chip + 1] - chip_ptr_[chip]};
  }
  std::size_t max_degree() const;

  bool operator==(const SlotLayout&) const = default;

 private:
  std::vector<std::vector<std::int32_t>> chip_of_;
  std::vector<std::size_t> chip_ptr_;
  std::vector<Participant> members_;
};

/// Independent uniform permutations of [n], user t seeded from (seed, t).
std::vector<std::vector<std::uint32_t>> random_interleavers(int users, std::size_t n, std::uint64_t seed);

/// BPSK-modulates each user's codeword (bit 0 -> +sqrt(P)), places the
/// symbols according to `layout`, superimposes and adds Gaussian noise.
std::vector<double> transmit(const ChannelConfig& cfg, const SlotLayout& layout,
                             const std::vector<Bits>& codewords, Rng& rng);
std::vector<double> transmit(const ChannelConfig& cfg, const SlotLayout& layout,
                             const std::vector<Bits>& codewords, std::uint64_t seed);

struct Schedule {
  int outer = 30;
  int inner = 2;
};

struct JointResult {
  std::vector<Bits> codewords;
  std::vector<bool> success;  ///< per-user zero syndrome
  int outer_iterations = 0;
  int inner_iterations = 0;  ///< BP iterations run per user in total
  std::vector<std::vector<double>> posterior;

  bool all_success() const;
};

/// Joint multi-user decoder over one layout. Owns all message buffers; one
/// instance per worker.
///
/// Schedule: all user-to-state messages start at zero. Each outer round
/// recomputes every state-to-user message, then runs `inner` flooding BP
/// iterations per user. Check-to-variable messages persist across rounds.
/// The user-to-state message is the extrinsic sum of incoming check messages.
/// Decoding stops as soon as every user's syndrome is zero.
class JointDecoder {
 public:
  JointDecoder(const LiftedCode& code, const SlotLayout& layout, ChannelConfig cfg, Schedule schedule = {});

  JointResult decode(std::span<const double> y);

  void set_channel(const ChannelConfig& cfg);
  const ChannelConfig& channel() const { return cfg_; }

 private:
  void update_state_messages(std::span<const double> y);
  bool all_ok() const;

  const LiftedCode* code_;
  const SlotLayout* layout_;
  ChannelConfig cfg_;
  Schedule schedule_;
  std::vector<BpDecoder> users_;
  std::vector<std::vector<double>> m_vs_;
  std::vector<std::vector<double>> m_sv_;
  std::vector<double> others_;
};

JointResult joint_decode(const LiftedCode& code, const SlotLayout& layout, std::span<const double> y,
                         const ChannelConfig& cfg, Schedule schedule = {});

}  // namespace gmacldpc
