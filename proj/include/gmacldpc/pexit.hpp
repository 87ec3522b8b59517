#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gmacldpc/gmac.hpp"
#include "gmacldpc/protograph.hpp"

namespace gmacldpc {

/// Mutual information between a bit and a consistent Gaussian LLR
/// L ~ N(sigma^2/2, sigma^2). Tabulated on first use; linear interpolation on
/// a 0.001 grid over [0, j_sigma_max()], saturating above it.
double j_func(double sigma);
/// Inverse of j_func. Throws std::domain_error for I >= 1, I < 0 or NaN.
/// Values above j_func(j_sigma_max()) map to j_sigma_max().
double j_inv(double mi);
double j_sigma_max();

/// Mutual information of a consistent Gaussian with the given mean
/// (variance 2 mean); 0 for non-positive means.
double consistent_info(double mean);

enum class Estimator { mean, mode, mixture };
enum class InterfererModel {
  /// Each interferer bit comes from a uniformly drawn protograph column.
  column_mixture,
  /// Interferers of column j share column j's incoming information.
  per_column,
};

Estimator parse_estimator(const std::string& name);
std::string to_string(Estimator e);
InterfererModel parse_interferer_model(const std::string& name);
std::string to_string(InterfererModel m);

/// Gaussian mixture whose components are consistent (variance 2 mean).
struct MixtureFit {
  std::vector<double> weights;
  std::vector<double> means;
  /// Sum of weights times the component mutual information.
  double info() const;
};

/// Histogram peak (Freedman-Diaconis bins). Counts are smoothed over a few
/// bins, then a parabola through the peak and its neighbours refines it.
double sample_mode(std::span<const double> samples);
/// EM fit with `components` consistent Gaussians; stops early once the
/// parameters settle.
MixtureFit fit_mixture(std::span<const double> samples, int components = 2, int iterations = 100);
/// Information implied by a sample of LLRs for a transmitted bit 0.
double estimate_info(std::span<const double> samples, Estimator estimator);

/// Draws state-to-user messages for a target sending bit 0. Each of the
/// cfg.users - 1 interferers sends a uniform bit with a prior LLR drawn from
/// the consistent Gaussian of information interferer_info[c], c uniform over
/// the list.
std::vector<double> sample_state_messages(const ChannelConfig& cfg, std::span<const double> interferer_info,
                                          std::size_t samples, std::uint64_t seed);

double estimate_state_info(const ChannelConfig& cfg, std::span<const double> interferer_info, Estimator estimator,
                           std::size_t samples, std::uint64_t seed);

/// Per-edge-class mutual informations, row-major rows x cols.
struct PexitState {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> i_av, i_ev, i_ac, i_ec;
  std::vector<double> i_evs, i_es, i_app;
  int iteration = 0;

  explicit PexitState(const Protograph& p);
  double& av(std::size_t i, std::size_t j) { return i_av[i * cols + j]; }
  double& ev(std::size_t i, std::size_t j) { return i_ev[i * cols + j]; }
  double& ac(std::size_t i, std::size_t j) { return i_ac[i * cols + j]; }
  double& ec(std::size_t i, std::size_t j) { return i_ec[i * cols + j]; }
  double min_app() const;
};

/// Information sent from column j towards the state nodes.
void pexit_variable_to_state(PexitState& s, const Protograph& p, std::size_t j);
/// Variable-to-check information on every edge class of column j.
void pexit_variable(PexitState& s, const Protograph& p, std::size_t j);
/// Check-to-variable information on every edge class of row i.
void pexit_check(PexitState& s, const Protograph& p, std::size_t i);
/// A-posteriori information of every column.
void pexit_app(PexitState& s, const Protograph& p);

/// Maps the per-column information flowing into the state nodes to the
/// per-column information flowing out, at a given iteration (1-based).
using StateInfoFn = std::function<std::vector<double>(std::span<const double> i_evs, int iteration)>;

struct PexitOptions {
  int max_iters = 1000;
  double target = 1.0 - 1e-4;
  /// Stop early once min I_APP has not improved by stall_tol for this many
  /// iterations; 0 disables.
  int stall_window = 50;
  double stall_tol = 1e-4;
  Estimator estimator = Estimator::mode;
  InterfererModel interferers = InterfererModel::column_mixture;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double search_lo_db = -2.0;
  double search_hi_db = 12.0;
  double resolution_db = 0.01;
  double power = 1.0;
};

struct TrajectoryPoint {
  int iteration = 0;
  double min_app = 0.0;
  std::vector<double> state_info;
};

struct Evolution {
  bool converged = false;
  int iterations = 0;
  std::vector<TrajectoryPoint> trajectory;
};

Evolution pexit_evolve(const Protograph& p, const StateInfoFn& state_info, const PexitOptions& opts);
/// Evolution over the `users`-user channel at the given Eb/N0, using the
/// protograph design rate.
Evolution pexit_evolve(const Protograph& p, int users, double ebn0_db, const PexitOptions& opts);

/// Sampling-based state information for one operating point. Seeds depend on
/// (opts.seed, iteration, column) only, so different Eb/N0 share random numbers.
StateInfoFn sampled_state_info(const ChannelConfig& cfg, const PexitOptions& opts);

struct ThresholdResult {
  double ebn0_db = 0.0;
  Evolution evolution;  ///< at the returned threshold
  int evaluations = 0;
};

/// Smallest Eb/N0 in [search_lo_db, search_hi_db] at which the evolution
/// converges, by bisection to resolution_db. Throws std::runtime_error
/// ("no threshold in range") if search_hi_db does not converge.
ThresholdResult pexit_threshold(const Protograph& p, int users, const PexitOptions& opts = {});
/// Same with a caller-supplied state-information model per Eb/N0.
ThresholdResult pexit_threshold(const Protograph& p, const std::function<StateInfoFn(double ebn0_db)>& model,
                                const PexitOptions& opts);

}  // namespace gmacldpc
