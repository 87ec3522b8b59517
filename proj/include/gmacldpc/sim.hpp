#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gmacldpc/code.hpp"
#include "gmacldpc/gmac.hpp"
#include "gmacldpc/spreading.hpp"

namespace gmacldpc {

enum class SimMode {
  /// All users share `transmitted` chips through random interleavers.
  interleaved,
  /// Regular sparse spreading over `chips` chips.
  spread,
  /// Users split into `groups` equal groups, each decoded on its own
  /// interleaved sub-slot of `transmitted` chips.
  split,
};

SimMode parse_sim_mode(const std::string& name);
std::string to_string(SimMode m);

struct SimConfig {
  int users = 1;
  std::vector<double> ebn0_db{0.0};
  int frames = 1000;            ///< per point
  int stop_after_errors = 100;  ///< 0 disables
  Schedule schedule;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::interleaved;
  /// Coded bits actually sent per user; 0 means the full code length. The
  /// remaining trailing positions are punctured.
  std::size_t transmitted = 0;
  std::size_t chips = 0;  ///< spread mode slot length
  /// Spread mode signature; generated from the seed when absent.
  std::optional<SpreadingSignature> signature;
  int groups = 2;         ///< split mode
  int threads = 1;
  double power = 1.0;

  void validate(const LiftedCode& code) const;
};

struct FerPoint {
  double ebn0_db = 0.0;
  long frames = 0;
  long frame_errors = 0;  ///< frames where any user's decoded codeword is wrong
  std::vector<long> user_frame_errors;
  std::vector<long> user_bit_errors;  ///< information bit errors
  double fer = 0.0;
  double ber = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
};

/// Signature a spread-mode sweep uses when cfg.signature is empty.
SpreadingSignature default_signature(const LiftedCode& code, const SimConfig& cfg);

/// Wilson score interval for k successes out of n trials.
std::pair<double, double> wilson_interval(long k, long n, double z = 1.959963984540054);

/// Inclusive sweep start, start + step, ... up to stop (within 1e-9).
std::vector<double> ebn0_sweep(double start, double stop, double step);

/// Monte-Carlo FER/BER per Eb/N0 point. Frame f of point p draws everything
/// from stream_seed({seed, p, f}); frames run in batches across `threads`
/// and are tallied in frame order, so results do not depend on the thread
/// count. A point stops at `frames` or at the frame completing
/// `stop_after_errors` frame errors.
std::vector<FerPoint> run_fer_sweep(const LiftedCode& code, const SimConfig& cfg);

/// CSV with header ebn0_db,frames,frame_errors,fer,ber,ci_low,ci_high,seed,seconds.
std::string fer_csv(const std::vector<FerPoint>& points);
void write_fer_csv(const std::string& path, const std::vector<FerPoint>& points);

/// Eb/N0 where the FER curve crosses `target`, by log-linear interpolation
/// between the first pair of adjacent points that brackets it. Throws
/// std::runtime_error if the sweep does not bracket the target.
double crossing_ebn0(const std::vector<FerPoint>& points, double target);

}  // namespace gmacldpc
