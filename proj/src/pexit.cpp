#include "gmacldpc/pexit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gmacldpc/rng.hpp"

namespace gmacldpc {

namespace {

constexpr double kSigmaMax = 15.0;
constexpr double kSigmaStep = 0.001;
constexpr double kModeSmoothingBins = 5.0;

double j_quadrature(double sigma) {
  if (sigma <= 0.0) return 0.0;
  const double mean = sigma * sigma / 2.0;
  // Standardized: L = mean + sigma z, z ~ N(0, 1).
  auto loss = [&](double z) {
    const double l = mean + sigma * z;
    const double softplus = l > 0.0 ? std::log1p(std::exp(-l)) : -l + std::log1p(std::exp(l));
    return std::exp(-0.5 * z * z) * softplus;
  };
  // The Gaussian weight is below 1e-40 beyond 14 standard deviations.
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(loss, -14.0, 14.0, 10, 1e-12);
  return 1.0 - integral / (std::sqrt(2.0 * M_PI) * std::log(2.0));
}

struct JTable {
  std::vector<double> values;

  JTable() {
    const auto points = static_cast<std::size_t>(std::lround(kSigmaMax / kSigmaStep)) + 1;
    values.resize(points);
    for (std::size_t i = 0; i < points; ++i) values[i] = std::clamp(j_quadrature(i * kSigmaStep), 0.0, 1.0);
    // Quadrature noise at large sigma must not break monotonicity.
    for (std::size_t i = 1; i < points; ++i) values[i] = std::max(values[i], values[i - 1]);
  }
};

const JTable& table() {
  static const JTable t;
  return t;
}

// Inverse without the domain check: everything at or beyond the top of the
// table maps to kSigmaMax.
double sigma_of(double mi) {
  const auto& v = table().values;
  if (!(mi > 0.0)) return 0.0;
  if (mi >= v.back()) return kSigmaMax;
  const auto hi = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), mi) - v.begin());
  const std::size_t lo = hi - 1;
  const double span = v[hi] - v[lo];
  const double frac = span > 0.0 ? (mi - v[lo]) / span : 0.0;
  return (static_cast<double>(lo) + frac) * kSigmaStep;
}

double sq(double x) { return x * x; }

}  // namespace

double j_sigma_max() { return kSigmaMax; }

double j_func(double sigma) {
  if (std::isnan(sigma)) throw std::domain_error("j_func of NaN");
  if (sigma <= 0.0) return 0.0;
  const auto& v = table().values;
  if (sigma >= kSigmaMax) return v.back();
  const double pos = sigma / kSigmaStep;
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double j_inv(double mi) {
  if (std::isnan(mi) || mi < 0.0) throw std::domain_error("j_inv needs mutual information in [0, 1)");
  if (mi >= 1.0) throw std::domain_error("j_inv(1) is unbounded");
  return sigma_of(mi);
}

double consistent_info(double mean) { return mean > 0.0 ? j_func(std::sqrt(2.0 * mean)) : 0.0; }

Estimator parse_estimator(const std::string& name) {
  if (name == "mean") return Estimator::mean;
  if (name == "mode") return Estimator::mode;
  if (name == "mixture") return Estimator::mixture;
  throw std::invalid_argument("unknown estimator '" + name + "' (mean, mode, mixture)");
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::mean: return "mean";
    case Estimator::mode: return "mode";
    case Estimator::mixture: return "mixture";
  }
  return "?";
}

InterfererModel parse_interferer_model(const std::string& name) {
  if (name == "column_mixture") return InterfererModel::column_mixture;
  if (name == "per_column") return InterfererModel::per_column;
  throw std::invalid_argument("unknown interferer model '" + name + "' (column_mixture, per_column)");
}

std::string to_string(InterfererModel m) {
  return m == InterfererModel::column_mixture ? "column_mixture" : "per_column";
}

// ---------------------------------------------------------------------------

double MixtureFit::info() const {
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * consistent_info(means[i]);
  return std::clamp(total, 0.0, 1.0);
}

double sample_mode(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("mode of an empty sample");
  std::vector<double> v(samples.begin(), samples.end());
  const std::size_t n = v.size();
  auto quantile = [&](double q) {
    auto k = static_cast<std::size_t>(q * static_cast<double>(n - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
  };
  const double q1 = quantile(0.25);
  const double q3 = quantile(0.75);
  const double median = quantile(0.5);
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double lo = *mn, hi = *mx;
  const double width = 2.0 * (q3 - q1) / std::cbrt(static_cast<double>(n));
  if (!(width > 0.0) || hi <= lo) return median;

  const auto bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 1.0, 100000.0));
  const double h = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> count(bins, 0);
  for (double x : v) ++count[std::min(bins - 1, static_cast<std::size_t>((x - lo) / h))];
  // Raw bin counts are too noisy to locate a flat peak; smooth them with a
  // Gaussian kernel a few bins wide first.
  const double kernel_sd = kModeSmoothingBins;
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(3.0 * kernel_sd));
  std::vector<double> weight(static_cast<std::size_t>(2 * reach + 1));
  for (std::ptrdiff_t d = -reach; d <= reach; ++d) {
    weight[static_cast<std::size_t>(d + reach)] = std::exp(-0.5 * sq(static_cast<double>(d) / kernel_sd));
  }
  std::vector<double> smooth(bins, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(bins);
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    for (std::ptrdiff_t d = -reach; d <= reach; ++d) {
      if (b + d >= 0 && b + d < nb) {
        smooth[static_cast<std::size_t>(b)] +=
            weight[static_cast<std::size_t>(d + reach)] * static_cast<double>(count[static_cast<std::size_t>(b + d)]);
      }
    }
  }
  const auto peak = static_cast<std::size_t>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
  double offset = 0.0;
  if (peak > 0 && peak + 1 < bins) {
    const double cm = smooth[peak - 1];
    const double c0 = smooth[peak];
    const double cp = smooth[peak + 1];
    const double curv = cm - 2.0 * c0 + cp;
    if (curv < 0.0) offset = std::clamp(0.5 * (cm - cp) / curv, -0.5, 0.5);
  }
  return lo + (static_cast<double>(peak) + 0.5 + offset) * h;
}

MixtureFit fit_mixture(std::span<const double> samples, int components, int iterations) {
  if (samples.empty()) throw std::invalid_argument("mixture fit of an empty sample");
  if (components < 1) throw std::invalid_argument("mixture needs at least one component");
  const std::size_t n = samples.size();
  const auto k = static_cast<std::size_t>(components);
  static constexpr double kMinMean = 1e-3;

  // For a consistent component the likelihood is maximized at
  // mean = sqrt(1 + E[x^2]) - 1 under the responsibilities.
  auto consistent_mean = [](double second_moment) {
    return std::max(kMinMean, std::sqrt(1.0 + second_moment) - 1.0);
  };

  // Start from equal-count slices of the sorted sample.
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  MixtureFit fit;
  fit.weights.assign(k, 1.0 / static_cast<double>(k));
  fit.means.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t b = c * n / k, e = std::max(b + 1, (c + 1) * n / k);
    double m2 = 0.0;
    for (std::size_t i = b; i < e; ++i) m2 += sorted[i] * sorted[i];
    fit.means[c] = consistent_mean(m2 / static_cast<double>(e - b));
  }

  std::vector<double> resp(n * k);
  std::vector<double> logp(k);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = samples[i];
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double m = fit.means[c];
        logp[c] = fit.weights[c] > 0.0
                      ? std::log(fit.weights[c]) - 0.5 * std::log(4.0 * M_PI * m) - sq(x - m) / (4.0 * m)
                      : -std::numeric_limits<double>::infinity();
        best = std::max(best, logp[c]);
      }
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) total += (resp[i * k + c] = std::exp(logp[c] - best));
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] /= total;
    }
    double change = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double r = 0.0, m2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        r += resp[i * k + c];
        m2 += resp[i * k + c] * samples[i] * samples[i];
      }
      const double w = r / static_cast<double>(n);
      const double m = r > 0.0 ? consistent_mean(m2 / r) : fit.means[c];
      change = std::max({change, std::fabs(w - fit.weights[c]), std::fabs(m - fit.means[c]) / (1.0 + m)});
      fit.weights[c] = w;
      fit.means[c] = m;
    }
    if (change < 1e-9) break;
  }
  return fit;
}

double estimate_info(std::span<const double> samples, Estimator estimator) {
  for (double x : samples) {
    if (!std::isfinite(x)) throw std::domain_error("non-finite state message sample");
  }
  switch (estimator) {
    case Estimator::mean: {
      const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
      return consistent_info(mean);
    }
    case Estimator::mode:
      return consistent_info(sample_mode(samples));
    case Estimator::mixture:
      return fit_mixture(samples).info();
  }
  return 0.0;
}

std::vector<double> sample_state_messages(const ChannelConfig& cfg, std::span<const double> interferer_info,
                                          std::size_t samples, std::uint64_t seed) {
  cfg.validate();
  const auto others = static_cast<std::size_t>(cfg.users - 1);
  if (others > 0 && interferer_info.empty()) throw std::invalid_argument("interferer information missing");
  std::vector<double> sigma(interferer_info.size());
  for (std::size_t c = 0; c < sigma.size(); ++c) sigma[c] = sigma_of(interferer_info[c]);

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> column(0, sigma.empty() ? 0 : sigma.size() - 1);
  const double a = cfg.amplitude();
  const double noise_sd = std::sqrt(cfg.noise_variance());
  std::vector<double> priors(others);
  std::vector<double> out(samples);
  for (auto& m : out) {
    double y = a;
    for (auto& prior : priors) {
      const double s = sigma.size() == 1 ? sigma[0] : sigma[column(rng)];
      const double x = (rng() & 1) ? -1.0 : 1.0;
      prior = clamp_llr(x * s * s / 2.0 + s * gauss(rng));
      y += a * x;
    }
    y += noise_sd * gauss(rng);
    m = functional_node_update(y, priors, cfg);
  }
  return out;
}

double estimate_state_info(const ChannelConfig& cfg, std::span<const double> interferer_info, Estimator estimator,
                           std::size_t samples, std::uint64_t seed) {
  return estimate_info(sample_state_messages(cfg, interferer_info, samples, seed), estimator);
}

// ---------------------------------------------------------------------------

PexitState::PexitState(const Protograph& p)
    : rows(p.rows()),
      cols(p.cols()),
      i_av(rows * cols, 0.0),
      i_ev(rows * cols, 0.0),
      i_ac(rows * cols, 0.0),
      i_ec(rows * cols, 0.0),
      i_evs(cols, 0.0),
      i_es(cols, 0.0),
      i_app(cols, 0.0) {}

double PexitState::min_app() const { return *std::min_element(i_app.begin(), i_app.end()); }

void pexit_variable_to_state(PexitState& s, const Protograph& p, std::size_t j) {
  double total = 0.0;
  for (std::size_t r = 0; r < p.rows(); ++r) total += p(r, j) * sq(sigma_of(s.av(r, j)));
  s.i_evs[j] = j_func(std::sqrt(total));
}

void pexit_variable(PexitState& s, const Protograph& p, std::size_t j) {
  const double state = sq(sigma_of(s.i_es[j]));
  for (std::size_t i = 0; i < p.rows(); ++i) {
    if (p(i, j) == 0) continue;
    double total = state;
    for (std::size_t r = 0; r < p.rows(); ++r) total += (p(r, j) - (r == i ? 1 : 0)) * sq(sigma_of(s.av(r, j)));
    s.ev(i, j) = j_func(std::sqrt(total));
  }
}

void pexit_check(PexitState& s, const Protograph& p, std::size_t i) {
  for (std::size_t j = 0; j < p.cols(); ++j) {
    if (p(i, j) == 0) continue;
    double total = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) total += (p(i, c) - (c == j ? 1 : 0)) * sq(sigma_of(1.0 - s.ac(i, c)));
    s.ec(i, j) = std::clamp(1.0 - j_func(std::sqrt(total)), 0.0, 1.0);
  }
}

void pexit_app(PexitState& s, const Protograph& p) {
  for (std::size_t j = 0; j < p.cols(); ++j) {
    double total = sq(sigma_of(s.i_es[j]));
    for (std::size_t r = 0; r < p.rows(); ++r) total += p(r, j) * sq(sigma_of(s.av(r, j)));
    s.i_app[j] = j_func(std::sqrt(total));
  }
}

Evolution pexit_evolve(const Protograph& p, const StateInfoFn& state_info, const PexitOptions& opts) {
  PexitState s(p);
  Evolution ev;
  double best = -1.0;
  int best_iter = 0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    s.iteration = it;
    for (std::size_t j = 0; j < p.cols(); ++j) pexit_variable_to_state(s, p, j);
    s.i_es = state_info(s.i_evs, it);
    if (s.i_es.size() != p.cols()) throw std::logic_error("state information has the wrong length");
    for (auto& x : s.i_es) x = std::clamp(x, 0.0, 1.0);
    for (std::size_t j = 0; j < p.cols(); ++j) pexit_variable(s, p, j);
    s.i_ac = s.i_ev;
    for (std::size_t i = 0; i < p.rows(); ++i) pexit_check(s, p, i);
    s.i_av = s.i_ec;
    pexit_app(s, p);

    const double m = s.min_app();
    ev.trajectory.push_back({it, m, s.i_es});
    ev.iterations = it;
    if (m >= opts.target) {
      ev.converged = true;
      break;
    }
    if (m > best + opts.stall_tol) {
      best = m;
      best_iter = it;
    } else if (opts.stall_window > 0 && it - best_iter >= opts.stall_window) {
      break;
    }
  }
  return ev;
}

StateInfoFn sampled_state_info(const ChannelConfig& cfg, const PexitOptions& opts) {
  return [cfg, opts](std::span<const double> i_evs, int iteration) {
    std::vector<double> out(i_evs.size());
    if (opts.interferers == InterfererModel::column_mixture) {
      const auto seed = stream_seed({opts.seed, static_cast<std::uint64_t>(iteration), 0});
      std::fill(out.begin(), out.end(), estimate_state_info(cfg, i_evs, opts.estimator, opts.samples, seed));
    } else {
      for (std::size_t j = 0; j < i_evs.size(); ++j) {
        const auto seed = stream_seed({opts.seed, static_cast<std::uint64_t>(iteration), j});
        out[j] = estimate_state_info(cfg, i_evs.subspan(j, 1), opts.estimator, opts.samples, seed);
      }
    }
    return out;
  };
}

Evolution pexit_evolve(const Protograph& p, int users, double ebn0_db, const PexitOptions& opts) {
  const auto cfg = ChannelConfig::from_ebn0(users, p.design_rate(), ebn0_db, opts.power);
  return pexit_evolve(p, sampled_state_info(cfg, opts), opts);
}

ThresholdResult pexit_threshold(const Protograph& p, const std::function<StateInfoFn(double)>& model,
                                const PexitOptions& opts) {
  if (!(opts.resolution_db > 0.0) || !(opts.search_hi_db > opts.search_lo_db)) {
    throw std::invalid_argument("invalid threshold search range");
  }
  ThresholdResult res;
  auto run = [&](double db) {
    ++res.evaluations;
    return pexit_evolve(p, model(db), opts);
  };
  double hi = opts.search_hi_db;
  Evolution at_hi = run(hi);
  if (!at_hi.converged) throw std::runtime_error("no threshold in range");
  double lo = opts.search_lo_db;
  Evolution at_lo = run(lo);
  if (at_lo.converged) {
    res.ebn0_db = lo;
    res.evolution = std::move(at_lo);
    return res;
  }
  while (hi - lo > opts.resolution_db) {
    const double mid = 0.5 * (lo + hi);
    Evolution e = run(mid);
    if (e.converged) {
      hi = mid;
      at_hi = std::move(e);
    } else {
      lo = mid;
    }
  }
  res.ebn0_db = hi;
  res.evolution = std::move(at_hi);
  return res;
}

ThresholdResult pexit_threshold(const Protograph& p, int users, const PexitOptions& opts) {
  if (users < 1) throw std::invalid_argument("threshold needs at least one user");
  return pexit_threshold(
      p,
      [&](double db) {
        return sampled_state_info(ChannelConfig::from_ebn0(users, p.design_rate(), db, opts.power), opts);
      },
      opts);
}

}  // namespace gmacldpc
