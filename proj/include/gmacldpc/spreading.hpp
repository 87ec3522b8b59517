#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gmacldpc/gmac.hpp"

namespace gmacldpc {

/// Regular sparse spreading: user t places coded bit v on chip chip_of(t, v),
/// each user's map is injective and every chip carries exactly
/// degree() = users * bits / chips participants.
class SpreadingSignature {
 public:
  SpreadingSignature(std::size_t chips, std::vector<std::vector<std::uint32_t>> chip_of);

  std::size_t users() const { return chip_of_.size(); }
  std::size_t bits() const { return chip_of_.empty() ? 0 : chip_of_.front().size(); }
  std::size_t chips() const { return chips_; }
  std::size_t degree() const { return users() * bits() / chips_; }
  std::uint32_t chip_of(std::size_t user, std::size_t bit) const { return chip_of_[user][bit]; }
  const std::vector<std::vector<std::uint32_t>>& maps() const { return chip_of_; }

  /// Layout for codewords of length code_length >= bits(): bits beyond
  /// bits() are punctured.
  SlotLayout layout(std::size_t code_length) const;

  /// {"chips": n', "users": [[chip, ...], ...]}
  std::string to_json() const;
  static SpreadingSignature from_json(const std::string& text);

  bool operator==(const SpreadingSignature&) const = default;

 private:
  std::size_t chips_;
  std::vector<std::vector<std::uint32_t>> chip_of_;
};

struct SpreadingOptions {
  /// Repair moves allowed before giving up.
  std::size_t max_moves = 10'000'000;
};

/// Configuration-model construction: chip sockets (degree() per chip) are
/// shuffled and dealt to users in bit order, then sockets are swapped between
/// users (never increasing the total number of collisions) until every map
/// is injective. Deterministic in `seed`.
/// Throws std::invalid_argument for infeasible parameters and
/// std::runtime_error when the move budget runs out.
SpreadingSignature generate_signatures(int users, std::size_t bits, std::size_t chips, std::uint64_t seed,
                                       SpreadingOptions opts = {});

/// Unspread layout of `users` users over `transmitted` chips for codewords of
/// length code_length; bits at positions >= transmitted are punctured.
/// Equals SlotLayout::interleaved(random_interleavers(...)) when nothing is
/// punctured.
SlotLayout punctured_interleaved(int users, std::size_t code_length, std::size_t transmitted, std::uint64_t seed);

}  // namespace gmacldpc
