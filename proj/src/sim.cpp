#include "gmacldpc/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>

#include "gmacldpc/rng.hpp"

namespace gmacldpc {

SimMode parse_sim_mode(const std::string& name) {
  if (name == "interleaved") return SimMode::interleaved;
  if (name == "spread") return SimMode::spread;
  if (name == "split") return SimMode::split;
  throw std::invalid_argument("unknown simulation mode '" + name + "' (interleaved, spread, split)");
}

std::string to_string(SimMode m) {
  switch (m) {
    case SimMode::interleaved: return "interleaved";
    case SimMode::spread: return "spread";
    case SimMode::split: return "split";
  }
  return "?";
}

void SimConfig::validate(const LiftedCode& code) const {
  if (users < 1) throw std::invalid_argument("users must be at least 1");
  if (ebn0_db.empty()) throw std::invalid_argument("at least one Eb/N0 point is required");
  for (double e : ebn0_db) {
    if (!std::isfinite(e)) throw std::invalid_argument("Eb/N0 points must be finite");
  }
  if (frames < 1) throw std::invalid_argument("frames must be at least 1");
  if (stop_after_errors < 0) throw std::invalid_argument("stop_after_errors must be non-negative");
  if (schedule.outer < 1 || schedule.inner < 1) throw std::invalid_argument("schedule iterations must be positive");
  if (transmitted > code.n()) throw std::invalid_argument("cannot transmit more bits than the code length");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (!(power > 0.0)) throw std::invalid_argument("power must be positive");
  if (code.k() == 0) throw std::invalid_argument("code has no information bits");
  if (mode == SimMode::spread) {
    if (signature) {
      const std::size_t sent = transmitted == 0 ? code.n() : transmitted;
      if (signature->users() != static_cast<std::size_t>(users) || signature->bits() != sent ||
          (chips != 0 && signature->chips() != chips))
        throw std::invalid_argument("signature does not match users, transmitted bits and chips");
    } else if (chips == 0) {
      throw std::invalid_argument("spread mode needs a chip count");
    }
  }
  if (mode == SimMode::split) {
    if (groups < 1 || users % groups != 0) throw std::invalid_argument("users must split evenly into groups");
  }
}

std::pair<double, double> wilson_interval(long k, long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  if (k < 0 || k > n) throw std::invalid_argument("successes must be in [0, trials]");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<double> ebn0_sweep(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  if (stop < start) throw std::invalid_argument("sweep stop is below start");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

namespace {

std::uint64_t layout_seed(const SimConfig& cfg) { return stream_seed({cfg.seed, 0x1a7011ULL}); }

}  // namespace

SpreadingSignature default_signature(const LiftedCode& code, const SimConfig& cfg) {
  const std::size_t sent = cfg.transmitted == 0 ? code.n() : cfg.transmitted;
  return generate_signatures(cfg.users, sent, cfg.chips, layout_seed(cfg));
}

namespace {

struct Group {
  int first_user;
  int users;
  SlotLayout layout;
};

std::vector<Group> make_groups(const LiftedCode& code, const SimConfig& cfg, std::size_t sent) {
  std::vector<Group> groups;
  switch (cfg.mode) {
    case SimMode::interleaved:
      groups.push_back({0, cfg.users, punctured_interleaved(cfg.users, code.n(), sent, layout_seed(cfg))});
      break;
    case SimMode::spread:
      groups.push_back({0, cfg.users, (cfg.signature ? *cfg.signature : default_signature(code, cfg)).layout(code.n())});
      break;
    case SimMode::split: {
      const int per = cfg.users / cfg.groups;
      for (int g = 0; g < cfg.groups; ++g) {
        groups.push_back({g * per, per,
                          punctured_interleaved(per, code.n(), sent,
                                                stream_seed({layout_seed(cfg), static_cast<std::uint64_t>(g)}))});
      }
      break;
    }
  }
  return groups;
}

struct FrameOutcome {
  std::vector<long> bit_errors;
  std::vector<bool> user_failed;
  bool failed = false;
};

class Worker {
 public:
  Worker(const LiftedCode& code, const std::vector<Group>& groups, const ChannelConfig& base, const Schedule& s)
      : code_(code), groups_(groups) {
    for (const auto& g : groups_) {
      ChannelConfig cfg = base;
      cfg.users = g.users;
      channels_.push_back(cfg);
      decoders_.push_back(std::make_unique<JointDecoder>(code_, g.layout, cfg, s));
    }
  }

  FrameOutcome run(int users, std::uint64_t frame_seed) {
    Rng rng(frame_seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<Bits> info(static_cast<std::size_t>(users), Bits(code_.k()));
    std::vector<Bits> words;
    for (auto& u : info) {
      for (auto& b : u) b = coin(rng) ? 1 : 0;
      words.push_back(code_.encode(u));
    }
    FrameOutcome out;
    out.bit_errors.assign(info.size(), 0);
    out.user_failed.assign(info.size(), false);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const auto first = static_cast<std::size_t>(groups_[g].first_user);
      const auto count = static_cast<std::size_t>(groups_[g].users);
      std::vector<Bits> sub(words.begin() + static_cast<std::ptrdiff_t>(first),
                            words.begin() + static_cast<std::ptrdiff_t>(first + count));
      const auto y = transmit(channels_[g], groups_[g].layout, sub, rng);
      const auto res = decoders_[g]->decode(y);
      for (std::size_t t = 0; t < count; ++t) {
        const auto decoded = code_.encoder().extract_info(res.codewords[t]);
        long errs = 0;
        for (std::size_t i = 0; i < decoded.size(); ++i) errs += decoded[i] != info[first + t][i];
        out.bit_errors[first + t] = errs;
        if (res.codewords[t] != words[first + t]) {
          out.user_failed[first + t] = true;
          out.failed = true;
        }
      }
    }
    return out;
  }

 private:
  const LiftedCode& code_;
  const std::vector<Group>& groups_;
  std::vector<ChannelConfig> channels_;
  std::vector<std::unique_ptr<JointDecoder>> decoders_;
};

}  // namespace

std::vector<FerPoint> run_fer_sweep(const LiftedCode& code, const SimConfig& cfg) {
  cfg.validate(code);
  const std::size_t sent = cfg.transmitted == 0 ? code.n() : cfg.transmitted;
  const double rate = static_cast<double>(code.k()) / static_cast<double>(sent);
  const auto groups = make_groups(code, cfg, sent);
  const auto T = static_cast<std::size_t>(cfg.users);

  std::vector<FerPoint> points;
  for (std::size_t p = 0; p < cfg.ebn0_db.size(); ++p) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto channel = ChannelConfig::from_ebn0(cfg.users, rate, cfg.ebn0_db[p], cfg.power);
    FerPoint pt;
    pt.ebn0_db = cfg.ebn0_db[p];
    pt.seed = stream_seed({cfg.seed, p});
    pt.user_frame_errors.assign(T, 0);
    pt.user_bit_errors.assign(T, 0);

    std::vector<std::unique_ptr<Worker>> workers;
    for (int w = 0; w < cfg.threads; ++w) workers.push_back(std::make_unique<Worker>(code, groups, channel, cfg.schedule));

    const int batch = cfg.threads == 1 ? 1 : 8 * cfg.threads;
    bool done = false;
    for (int begin = 0; begin < cfg.frames && !done; begin += batch) {
      const int end = std::min(cfg.frames, begin + batch);
      std::vector<FrameOutcome> outcomes(static_cast<std::size_t>(end - begin));
      auto job = [&](int w) {
        for (int f = begin + w; f < end; f += cfg.threads) {
          outcomes[static_cast<std::size_t>(f - begin)] =
              workers[static_cast<std::size_t>(w)]->run(cfg.users, stream_seed({cfg.seed, p, static_cast<std::uint64_t>(f)}));
        }
      };
      if (cfg.threads == 1) {
        job(0);
      } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < cfg.threads; ++w) pool.emplace_back(job, w);
      }
      for (const auto& o : outcomes) {
        ++pt.frames;
        for (std::size_t t = 0; t < T; ++t) {
          pt.user_bit_errors[t] += o.bit_errors[t];
          pt.user_frame_errors[t] += o.user_failed[t];
        }
        pt.frame_errors += o.failed;
        if (cfg.stop_after_errors > 0 && pt.frame_errors >= cfg.stop_after_errors) {
          done = true;
          break;
        }
      }
    }

    long bit_errors = 0;
    for (auto e : pt.user_bit_errors) bit_errors += e;
    pt.fer = static_cast<double>(pt.frame_errors) / static_cast<double>(pt.frames);
    pt.ber = static_cast<double>(bit_errors) / (static_cast<double>(pt.frames) * static_cast<double>(T * code.k()));
    std::tie(pt.ci_low, pt.ci_high) = wilson_interval(pt.frame_errors, pt.frames);
    pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    points.push_back(std::move(pt));
  }
  return points;
}

std::string fer_csv(const std::vector<FerPoint>& points) {
  std::string out = "ebn0_db,frames,frame_errors,fer,ber,ci_low,ci_high,seed,seconds\n";
  char buf[256];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.4f,%ld,%ld,%.6e,%.6e,%.6e,%.6e,%llu,%.3f\n", p.ebn0_db, p.frames, p.frame_errors,
                  p.fer, p.ber, p.ci_low, p.ci_high, static_cast<unsigned long long>(p.seed), p.seconds);
    out += buf;
  }
  return out;
}

void write_fer_csv(const std::string& path, const std::vector<FerPoint>& points) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << fer_csv(points);
  if (!f) throw std::runtime_error("failed writing " + path);
}

double crossing_ebn0(const std::vector<FerPoint>& points, double target) {
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("target FER must be in (0, 1)");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const auto& a = points[i];
    const auto& b = points[i + 1];
    if (a.fer >= target && b.fer <= target) {
      if (a.fer == b.fer) return a.ebn0_db;
      // Zero-error points are floored at half an error for the log.
      const double la = std::log(std::max(a.fer, 0.5 / static_cast<double>(a.frames)));
      const double lb = std::log(std::max(b.fer, 0.5 / static_cast<double>(b.frames)));
      const double lt = std::log(target);
      if (la == lb) return a.ebn0_db;
      return a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db);
    }
  }
  throw std::runtime_error("FER sweep does not bracket the target");
}

}  // namespace gmacldpc
