#include "gmacldpc/spreading.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "gmacldpc/rng.hpp"

namespace gmacldpc {

SpreadingSignature::SpreadingSignature(std::size_t chips, std::vector<std::vector<std::uint32_t>> chip_of)
    : chips_(chips), chip_of_(std::move(chip_of)) {
  if (chip_of_.empty()) throw std::invalid_argument("signature needs at least one user");
  if (chips_ == 0) throw std::invalid_argument("signature needs at least one chip");
  const std::size_t n = chip_of_.front().size();
  if (n == 0 || n > chips_) throw std::invalid_argument("bits per user must be in [1, chips]");
  if ((users() * n) % chips_ != 0) throw std::invalid_argument("users * bits must be a multiple of chips");
  std::vector<std::size_t> load(chips_, 0);
  for (std::size_t t = 0; t < users(); ++t) {
    if (chip_of_[t].size() != n) throw std::invalid_argument("all users must have the same number of bits");
    std::vector<bool> used(chips_, false);
    for (auto c : chip_of_[t]) {
      if (c >= chips_) throw std::invalid_argument("chip index out of range");
      if (used[c]) throw std::invalid_argument("user " + std::to_string(t) + " maps two bits to one chip");
      used[c] = true;
      ++load[c];
    }
  }
  const std::size_t d = degree();
  for (std::size_t c = 0; c < chips_; ++c) {
    if (load[c] != d) throw std::invalid_argument("chip " + std::to_string(c) + " is not of degree " + std::to_string(d));
  }
}

SlotLayout SpreadingSignature::layout(std::size_t code_length) const {
  if (code_length < bits()) throw std::invalid_argument("code shorter than the signature");
  std::vector<std::vector<std::int32_t>> chip_of(users(), std::vector<std::int32_t>(code_length, -1));
  for (std::size_t t = 0; t < users(); ++t) {
    for (std::size_t v = 0; v < bits(); ++v) chip_of[t][v] = static_cast<std::int32_t>(chip_of_[t][v]);
  }
  return SlotLayout(chips_, std::move(chip_of));
}

std::string SpreadingSignature::to_json() const {
  nlohmann::json j;
  j["chips"] = chips_;
  j["users"] = chip_of_;
  return j.dump();
}

SpreadingSignature SpreadingSignature::from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    return SpreadingSignature(j.at("chips").get<std::size_t>(), j.at("users").get<std::vector<std::vector<std::uint32_t>>>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed signature JSON: ") + e.what());
  }
}

SpreadingSignature generate_signatures(int users, std::size_t bits, std::size_t chips, std::uint64_t seed,
                                       SpreadingOptions opts) {
  if (users < 1) throw std::invalid_argument("users must be at least 1");
  if (bits == 0 || chips == 0) throw std::invalid_argument("bits and chips must be positive");
  if (bits > chips) throw std::invalid_argument("a user cannot have more bits than there are chips");
  const auto T = static_cast<std::size_t>(users);
  if ((T * bits) % chips != 0) throw std::invalid_argument("users * bits must be a multiple of chips");
  const std::size_t degree = T * bits / chips;

  Rng rng(seed);
  std::vector<std::uint32_t> socket(T * bits);
  for (std::size_t s = 0; s < socket.size(); ++s) socket[s] = static_cast<std::uint32_t>(s / degree);
  std::shuffle(socket.begin(), socket.end(), rng);

  // count[t * chips + c]: bits of user t on chip c.
  std::vector<std::uint32_t> count(T * chips, 0);
  for (std::size_t s = 0; s < socket.size(); ++s) ++count[(s / bits) * chips + socket[s]];

  // Excess of user t on chip c over one.
  auto excess = [&](std::size_t t, std::uint32_t c) { return count[t * chips + c] > 1 ? count[t * chips + c] - 1 : 0u; };
  std::uniform_int_distribution<std::size_t> any(0, socket.size() - 1);
  std::size_t moves = 0;
  for (;;) {
    std::vector<std::size_t> bad;
    for (std::size_t s = 0; s < socket.size(); ++s) {
      if (count[(s / bits) * chips + socket[s]] > 1) bad.push_back(s);
    }
    if (bad.empty()) break;
    for (auto s : bad) {
      const std::size_t t = s / bits;
      const auto c = socket[s];
      if (count[t * chips + c] <= 1) continue;
      // Trade sockets with another user; sideways moves that leave the total
      // excess unchanged are allowed so the search cannot get stuck.
      for (;;) {
        if (++moves > opts.max_moves) throw std::runtime_error("spreading repair budget exhausted");
        const std::size_t o = any(rng);
        const std::size_t u = o / bits;
        const auto c2 = socket[o];
        if (u == t || c2 == c) continue;
        const auto before = excess(t, c) + excess(t, c2) + excess(u, c) + excess(u, c2);
        --count[t * chips + c];
        --count[u * chips + c2];
        ++count[t * chips + c2];
        ++count[u * chips + c];
        const auto after = excess(t, c) + excess(t, c2) + excess(u, c) + excess(u, c2);
        if (after <= before) {
          std::swap(socket[s], socket[o]);
          break;
        }
        ++count[t * chips + c];
        ++count[u * chips + c2];
        --count[t * chips + c2];
        --count[u * chips + c];
      }
    }
  }

  std::vector<std::vector<std::uint32_t>> chip_of(T);
  for (std::size_t t = 0; t < T; ++t) chip_of[t].assign(socket.begin() + static_cast<std::ptrdiff_t>(t * bits),
                                                        socket.begin() + static_cast<std::ptrdiff_t>((t + 1) * bits));
  return SpreadingSignature(chips, std::move(chip_of));
}

SlotLayout punctured_interleaved(int users, std::size_t code_length, std::size_t transmitted, std::uint64_t seed) {
  if (transmitted == 0 || transmitted > code_length) throw std::invalid_argument("transmitted bits must be in [1, n]");
  auto perms = random_interleavers(users, transmitted, seed);
  std::vector<std::vector<std::int32_t>> chip_of;
  for (const auto& p : perms) {
    std::vector<std::int32_t> row(code_length, -1);
    std::copy(p.begin(), p.end(), row.begin());
    chip_of.push_back(std::move(row));
  }
  return SlotLayout(transmitted, std::move(chip_of));
}

}  // namespace gmacldpc
