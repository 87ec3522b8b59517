#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmacldpc/pexit.hpp"
#include "gmacldpc/protograph.hpp"

namespace gmacldpc {

struct SearchConfig {
  std::size_t rows = 3;
  std::size_t cols = 4;
  int max_multiplicity = 3;
  int users = 2;
  double initial_temperature = 0.5;  ///< in dB
  double cooling = 0.98;             ///< temperature factor per step
  int steps = 200;                   ///< proposals per chain
  int chains = 1;                    ///< independent chains, run on threads
  std::uint64_t seed = 1;
  /// Starting base matrix; defaults to the repetition construction of [[3,3]]
  /// when rows x cols is 3 x 4.
  std::optional<Protograph> start;
  PexitOptions pexit;

  void validate() const;
};

struct SearchStep {
  int chain = 0;
  int step = 0;
  std::vector<int> candidate;        ///< row-major entries
  std::optional<double> threshold;   ///< empty when no threshold in range
  bool accepted = false;
  bool cached = false;
  double temperature = 0.0;
  double current = 0.0;  ///< chain state threshold after the step
  double best = 0.0;     ///< best threshold over all chains so far
};

struct SearchResult {
  Protograph best;
  double threshold_db;
  std::vector<SearchStep> log;  ///< chain-major, step order within a chain
  int evaluations = 0;          ///< distinct matrices evaluated
};

/// Simulated annealing over base matrices with entries in
/// [0, max_multiplicity]. A move adds +-1 to one uniformly drawn entry;
/// proposals outside the range or with an empty row or column are redrawn.
/// Worse candidates are accepted with probability exp(-delta / temperature).
/// Thresholds are memoized per matrix. Deterministic in `seed` regardless of
/// thread timing. Throws std::runtime_error if no visited matrix has a
/// threshold.
SearchResult optimize_protograph(const SearchConfig& cfg);

}  // namespace gmacldpc
