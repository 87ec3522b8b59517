#include "gmacldpc/gmac.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gmacldpc {

double ChannelConfig::amplitude() const { return std::sqrt(power); }

double ChannelConfig::ebn0_db(double rate) const { return 10.0 * std::log10(power / (rate * n0)); }

void ChannelConfig::validate() const {
  if (users < 1) throw std::invalid_argument("channel needs at least one user");
  if (!(power > 0.0)) throw std::invalid_argument("power must be positive");
  if (!(n0 > 0.0)) throw std::invalid_argument("N0 must be positive");
}

ChannelConfig ChannelConfig::from_ebn0(int users, double rate, double ebn0_db, double power) {
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
  ChannelConfig cfg{users, power, power / (rate * std::pow(10.0, ebn0_db / 10.0))};
  cfg.validate();
  return cfg;
}

double channel_llr(double y, const ChannelConfig& cfg) {
  return clamp_llr(4.0 * cfg.amplitude() * y / cfg.n0);
}

double functional_node_update(double y, std::span<const double> priors, const ChannelConfig& cfg) {
  const std::size_t d = priors.size();
  if (d == 0) return channel_llr(y, cfg);
  if (d > 24) throw std::invalid_argument("functional node degree too large for exact marginalization");

  const double a = cfg.amplitude();
  const double inv_n0 = 1.0 / cfg.n0;
  const std::uint32_t full = (1U << d) - 1U;
  const std::uint32_t half = 1U << (d - 1);

  // Configuration mask bit j set <=> other participant j sends +1. The prior
  // weight exp(x_j L_j / 2) differs from p(x_j) only by a per-node constant.
  auto log_terms = [&](std::uint32_t mask, double& num, double& den) {
    double w = 0.0;
    for (std::size_t j = 0; j < d; ++j) w += ((mask >> j) & 1U) ? priors[j] : -priors[j];
    w *= 0.5;
    const double s = 2.0 * std::popcount(mask) - static_cast<double>(d);
    const double rp = y - a * (1.0 + s);
    const double rm = y - a * (-1.0 + s);
    num = w - rp * rp * inv_n0;
    den = w - rm * rm * inv_n0;
  };

  double num_max = -std::numeric_limits<double>::infinity();
  double den_max = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    double nt, dt;
    log_terms(mask, nt, dt);
    num_max = std::max(num_max, nt);
    den_max = std::max(den_max, dt);
  }
  double num_sum = 0.0;
  double den_sum = 0.0;
  for (std::uint32_t mask = 0; mask < half; ++mask) {
    double n1, d1, n2, d2;
    log_terms(mask, n1, d1);
    log_terms(mask ^ full, n2, d2);
    num_sum += std::exp(n1 - num_max) + std::exp(n2 - num_max);
    den_sum += std::exp(d1 - den_max) + std::exp(d2 - den_max);
  }
  return clamp_llr((num_max + std::log(num_sum)) - (den_max + std::log(den_sum)));
}

// ---------------------------------------------------------------------------

SlotLayout::SlotLayout(std::size_t chips, std::vector<std::vector<std::int32_t>> chip_of)
    : chip_of_(std::move(chip_of)) {
  if (chip_of_.empty()) throw std::invalid_argument("layout needs at least one user");
  const std::size_t n = chip_of_.front().size();
  std::vector<std::size_t> count(chips, 0);
  for (std::size_t t = 0; t < chip_of_.size(); ++t) {
    if (chip_of_[t].size() != n) throw std::invalid_argument("all users must share the code length");
    std::vector<bool> used(chips, false);
    for (auto c : chip_of_[t]) {
      if (c < 0) continue;
      if (static_cast<std::size_t>(c) >= chips) throw std::invalid_argument("chip index out of range");
      if (used[static_cast<std::size_t>(c)]) {
        throw std::invalid_argument("user " + std::to_string(t) + " maps two bits to one chip");
      }
      used[static_cast<std::size_t>(c)] = true;
      ++count[static_cast<std::size_t>(c)];
    }
  }
  chip_ptr_.assign(chips + 1, 0);
  std::partial_sum(count.begin(), count.end(), chip_ptr_.begin() + 1);
  members_.resize(chip_ptr_.back());
  std::vector<std::size_t> fill(chip_ptr_.begin(), chip_ptr_.end() - 1);
  for (std::size_t t = 0; t < chip_of_.size(); ++t) {
    for (std::size_t v = 0; v < n; ++v) {
      auto c = chip_of_[t][v];
      if (c >= 0) {
        members_[fill[static_cast<std::size_t>(c)]++] = {static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(v)};
      }
    }
  }
}

SlotLayout SlotLayout::interleaved(const std::vector<std::vector<std::uint32_t>>& perms) {
  if (perms.empty()) throw std::invalid_argument("layout needs at least one user");
  const std::size_t n = perms.front().size();
  std::vector<std::vector<std::int32_t>> chip_of;
  for (const auto& p : perms) {
    if (p.size() != n) throw std::invalid_argument("interleaver length mismatch");
    chip_of.emplace_back(p.begin(), p.end());
  }
  return SlotLayout(n, std::move(chip_of));
}

std::size_t SlotLayout::transmitted_bits(std::size_t user) const {
  return static_cast<std::size_t>(
      std::count_if(chip_of_[user].begin(), chip_of_[user].end(), [](std::int32_t c) { return c >= 0; }));
}

std::size_t SlotLayout::max_degree() const {
  std::size_t d = 0;
  for (std::size_t c = 0; c < chips(); ++c) d = std::max(d, chip_ptr_[c + 1] - chip_ptr_[c]);
  return d;
}

std::vector<std::vector<std::uint32_t>> random_interleavers(int users, std::size_t n, std::uint64_t seed) {
  std::vector<std::vector<std::uint32_t>> perms(static_cast<std::size_t>(users));
  for (int t = 0; t < users; ++t) {
    auto& p = perms[static_cast<std::size_t>(t)];
    p.resize(n);
    std::iota(p.begin(), p.end(), 0U);
    Rng rng(stream_seed({seed, static_cast<std::uint64_t>(t)}));
    std::shuffle(p.begin(), p.end(), rng);
  }
  return perms;
}

std::vector<double> transmit(const ChannelConfig& cfg, const SlotLayout& layout,
                             const std::vector<Bits>& codewords, Rng& rng) {
  cfg.validate();
  if (codewords.size() != layout.users()) throw std::invalid_argument("codeword count does not match user count");
  const double a = cfg.amplitude();
  std::vector<double> y(layout.chips(), 0.0);
  for (std::size_t t = 0; t < codewords.size(); ++t) {
    if (codewords[t].size() != layout.code_length()) throw std::invalid_argument("codeword length mismatch");
    for (std::size_t v = 0; v < codewords[t].size(); ++v) {
      auto c = layout.chip_of(t, v);
      if (c >= 0) y[static_cast<std::size_t>(c)] += codewords[t][v] ? -a : a;
    }
  }
  std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_variance()));
  for (auto& s : y) s += noise(rng);
  return y;
}

std::vector<double> transmit(const ChannelConfig& cfg, const SlotLayout& layout,
                             const std::vector<Bits>& codewords, std::uint64_t seed) {
  Rng rng(seed);
  return transmit(cfg, layout, codewords, rng);
}

// ---------------------------------------------------------------------------

bool JointResult::all_success() const {
  return std::all_of(success.begin(), success.end(), [](bool b) { return b; });
}

JointDecoder::JointDecoder(const LiftedCode& code, const SlotLayout& layout, ChannelConfig cfg, Schedule schedule)
    : code_(&code), layout_(&layout), cfg_(cfg), schedule_(schedule) {
  cfg_.validate();
  if (layout.code_length() != code.n()) throw std::invalid_argument("layout code length does not match code");
  if (static_cast<std::size_t>(cfg_.users) != layout.users()) {
    throw std::invalid_argument("channel user count does not match layout");
  }
  if (schedule_.outer < 1 || schedule_.inner < 1) throw std::invalid_argument("schedule needs positive iteration counts");
  for (std::size_t t = 0; t < layout.users(); ++t) users_.emplace_back(code.H());
  m_vs_.assign(layout.users(), std::vector<double>(code.n(), 0.0));
  m_sv_.assign(layout.users(), std::vector<double>(code.n(), 0.0));
  others_.resize(layout.max_degree());
}

void JointDecoder::set_channel(const ChannelConfig& cfg) {
  cfg.validate();
  if (cfg.users != cfg_.users) throw std::invalid_argument("channel user count does not match layout");
  cfg_ = cfg;
}

void JointDecoder::update_state_messages(std::span<const double> y) {
  for (std::size_t c = 0; c < layout_->chips(); ++c) {
    auto members = layout_->participants(c);
    const std::size_t d = members.size();
    for (std::size_t k = 0; k < d; ++k) {
      std::size_t o = 0;
      for (std::size_t j = 0; j < d; ++j) {
        if (j != k) others_[o++] = m_vs_[members[j].user][members[j].bit];
      }
      m_sv_[members[k].user][members[k].bit] =
          functional_node_update(y[c], std::span<const double>(others_.data(), d - 1), cfg_);
    }
  }
}

bool JointDecoder::all_ok() const {
  return std::all_of(users_.begin(), users_.end(), [](const BpDecoder& d) { return d.syndrome_ok(); });
}

JointResult JointDecoder::decode(std::span<const double> y) {
  if (y.size() != layout_->chips()) throw std::invalid_argument("received vector length does not match layout");
  const std::size_t T = users_.size();
  for (auto& m : m_vs_) std::fill(m.begin(), m.end(), 0.0);
  for (auto& m : m_sv_) std::fill(m.begin(), m.end(), 0.0);

  JointResult out;
  bool done = false;
  for (int o = 0; o < schedule_.outer && !done; ++o) {
    update_state_messages(y);
    for (std::size_t t = 0; t < T; ++t) {
      if (o == 0) {
        users_[t].reset(m_sv_[t]);
      } else {
        users_[t].refresh(m_sv_[t]);
      }
    }
    ++out.outer_iterations;
    done = all_ok();
    for (int i = 0; i < schedule_.inner && !done; ++i) {
      for (std::size_t t = 0; t < T; ++t) users_[t].iterate(m_sv_[t]);
      ++out.inner_iterations;
      done = all_ok();
    }
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < code_->n(); ++v) m_vs_[t][v] = users_[t].extrinsic(v);
    }
  }

  for (const auto& u : users_) {
    out.codewords.emplace_back(u.hard().begin(), u.hard().end());
    out.success.push_back(u.syndrome_ok());
    out.posterior.emplace_back(u.total().begin(), u.total().end());
  }
  return out;
}

JointResult joint_decode(const LiftedCode& code, const SlotLayout& layout, std::span<const double> y,
                         const ChannelConfig& cfg, Schedule schedule) {
  JointDecoder dec(code, layout, cfg, schedule);
  return dec.decode(y);
}

}  // namespace gmacldpc
