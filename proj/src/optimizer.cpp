#include "gmacldpc/optimizer.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gmacldpc/rng.hpp"

namespace gmacldpc {

void SearchConfig::validate() const {
  if (rows == 0 || cols <= rows) throw std::invalid_argument("search needs 0 < rows < cols");
  if (max_multiplicity < 1) throw std::invalid_argument("max_multiplicity must be at least 1");
  if (users < 1) throw std::invalid_argument("users must be at least 1");
  if (!(initial_temperature > 0.0)) throw std::invalid_argument("initial_temperature must be positive");
  if (!(cooling > 0.0 && cooling <= 1.0)) throw std::invalid_argument("cooling must be in (0, 1]");
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");
  if (chains < 1) throw std::invalid_argument("chains must be at least 1");
  if (start) {
    if (start->rows() != rows || start->cols() != cols) throw std::invalid_argument("start matrix has the wrong shape");
    if (start->max_multiplicity() > max_multiplicity) throw std::invalid_argument("start matrix exceeds max_multiplicity");
  }
}

namespace {

class ThresholdCache {
 public:
  ThresholdCache(const SearchConfig& cfg) : cfg_(cfg) {}

  // Returns the threshold (empty if none) and whether it came from the cache.
  std::pair<std::optional<double>, bool> get(const std::vector<int>& entries) {
    {
      std::lock_guard lock(mu_);
      if (auto it = memo_.find(entries); it != memo_.end()) return {it->second, true};
    }
    std::optional<double> value;
    try {
      value = pexit_threshold(Protograph(cfg_.rows, cfg_.cols, entries), cfg_.users, cfg_.pexit).ebn0_db;
    } catch (const std::runtime_error&) {
      value.reset();
    }
    std::lock_guard lock(mu_);
    // Another chain may have finished the same matrix first; the value is
    // identical either way.
    memo_.emplace(entries, value);
    return {value, false};
  }

  int size() const {
    std::lock_guard lock(mu_);
    return static_cast<int>(memo_.size());
  }

 private:
  const SearchConfig& cfg_;
  mutable std::mutex mu_;
  std::map<std::vector<int>, std::optional<double>> memo_;
};

bool connected(const std::vector<int>& e, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    int sum = 0;
    for (std::size_t j = 0; j < cols; ++j) sum += e[i * cols + j];
    if (sum == 0) return false;
  }
  for (std::size_t j = 0; j < cols; ++j) {
    int sum = 0;
    for (std::size_t i = 0; i < rows; ++i) sum += e[i * cols + j];
    if (sum == 0) return false;
  }
  return true;
}

double objective(const std::optional<double>& t) { return t ? *t : std::numeric_limits<double>::infinity(); }

std::vector<SearchStep> run_chain(const SearchConfig& cfg, const std::vector<int>& start, int chain,
                                  ThresholdCache& cache) {
  Rng rng(stream_seed({cfg.seed, static_cast<std::uint64_t>(chain)}));
  std::uniform_int_distribution<std::size_t> pick(0, start.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> state = start;
  double current = objective(cache.get(state).first);
  double best = current;
  double temperature = cfg.initial_temperature;
  std::vector<SearchStep> log;
  for (int step = 1; step <= cfg.steps; ++step) {
    std::vector<int> cand;
    for (;;) {
      cand = state;
      const std::size_t k = pick(rng);
      cand[k] += (rng() & 1) ? 1 : -1;
      if (cand[k] >= 0 && cand[k] <= cfg.max_multiplicity && connected(cand, cfg.rows, cfg.cols)) break;
    }
    auto [value, cached] = cache.get(cand);
    const double obj = objective(value);
    bool accept = false;
    if (obj <= current) {
      accept = true;
    } else if (std::isfinite(obj)) {
      accept = unit(rng) < std::exp(-(obj - current) / temperature);
    }
    if (accept) {
      state = cand;
      current = obj;
    }
    best = std::min(best, current);
    log.push_back({chain, step, cand, value, accept, cached, temperature, current, best});
    temperature *= cfg.cooling;
  }
  return log;
}

}  // namespace

SearchResult optimize_protograph(const SearchConfig& cfg) {
  cfg.validate();
  std::vector<int> start;
  if (cfg.start) {
    start = cfg.start->entries();
  } else if (cfg.rows == 3 && cfg.cols == 4) {
    start = repetition_protograph(Protograph({{3, 3}})).entries();
  } else {
    throw std::invalid_argument("a start matrix is required unless the shape is 3 x 4");
  }
  Protograph(cfg.rows, cfg.cols, start);

  ThresholdCache cache(cfg);
  std::vector<std::vector<SearchStep>> logs(static_cast<std::size_t>(cfg.chains));
  std::vector<std::exception_ptr> errors(logs.size());
  auto worker = [&](int c) {
    try {
      logs[static_cast<std::size_t>(c)] = run_chain(cfg, start, c, cache);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  if (cfg.chains == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> threads;
    for (int c = 0; c < cfg.chains; ++c) threads.emplace_back(worker, c);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Best-ever over chains; ties keep the earliest (chain, step) so the result
  // does not depend on scheduling.
  std::vector<int> best_entries = start;
  double best = objective(cache.get(start).first);
  SearchResult res{Protograph(cfg.rows, cfg.cols, start), best, {}, 0};
  for (auto& log : logs) {
    for (auto& s : log) {
      if (s.accepted && objective(s.threshold) < best) {
        best = objective(s.threshold);
        best_entries = s.candidate;
      }
      s.best = best;
      res.log.push_back(std::move(s));
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("no candidate has a threshold in range");
  res.best = Protograph(cfg.rows, cfg.cols, best_entries);
  res.threshold_db = best;
  res.evaluations = cache.size();
  return res;
}

}  // namespace gmacldpc
