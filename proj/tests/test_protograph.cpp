#include <doctest.h>

#include <random>

#include "gmacldpc/alist.hpp"
#include "gmacldpc/code.hpp"
#include "gmacldpc/protograph.hpp"
#include "oracles.hpp"

using namespace gmacldpc;

TEST_CASE("parse_protograph reads the (3,6) ensemble") {
  auto p = parse_protograph("1 2\n3 3\n");
  CHECK(p.rows() == 1);
  CHECK(p.cols() == 2);
  CHECK(p(0, 0) == 3);
  CHECK(p(0, 1) == 3);
  CHECK(p.design_rate() == doctest::Approx(0.5));
  CHECK(parse_protograph(p.to_text()) == p);
}

TEST_CASE("parse_protograph rejects invalid input") {
  SUBCASE("disconnected variable node") {
    try {
      parse_protograph("3 4\n1 0 1 1\n1 0 1 0\n0 0 1 1\n");
      FAIL("expected error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("disconnected variable node") != std::string::npos);
    }
  }
  SUBCASE("non-positive design rate") {
    try {
      parse_protograph("2 2\n1 1\n1 1\n");
      FAIL("expected error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("non-positive design rate") != std::string::npos);
    }
  }
  SUBCASE("negative entry names its line") {
    try {
      parse_protograph("2 3\n1 1 1\n1 -1 1\n");
      FAIL("expected error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("negative") != std::string::npos);
    }
  }
  SUBCASE("row count") { CHECK_THROWS_AS(parse_protograph("2 3\n1 1 1\n"), ParseError); }
  SUBCASE("column count") {
    try {
      parse_protograph("1 3\n1 1\n");
      FAIL("expected error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("garbage token") { CHECK_THROWS_AS(parse_protograph("1 2\n3 x\n"), ParseError); }
  SUBCASE("zero row") { CHECK_THROWS_AS(parse_protograph("2 3\n1 1 1\n0 0 0\n"), ParseError); }
}

TEST_CASE("repetition protograph of (3,6) is the rate-1/4 baseline") {
  auto b = repetition_protograph(Protograph({{3, 3}}));
  CHECK(b == Protograph({{3, 3, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}}));
  CHECK(b.design_rate() == doctest::Approx(0.25));
}

TEST_CASE("lift preserves the degree spectrum") {
  Protograph p({{3, 3, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}});
  for (std::uint64_t seed : {0ULL, 1ULL, 7ULL}) {
    auto H = lift_matrix(p, 13, seed);
    REQUIRE(H.n() == 4 * 13);
    REQUIRE(H.m() == 3 * 13);
    for (std::size_t v = 0; v < H.n(); ++v) CHECK(static_cast<int>(H.var_degree(v)) == p.column_degree(v / 13));
    for (std::size_t c = 0; c < H.m(); ++c) CHECK(static_cast<int>(H.check_degree(c)) == p.row_degree(c / 13));
  }
}

TEST_CASE("lift of (3,6) with Z=91") {
  auto code = lift(Protograph({{3, 3}}), 91, 1);
  const auto& H = code.H();
  CHECK(H.n() == 182);
  CHECK(H.m() == 91);
  for (std::size_t v = 0; v < H.n(); ++v) CHECK(H.var_degree(v) == 3);
  for (std::size_t c = 0; c < H.m(); ++c) CHECK(H.check_degree(c) == 6);
  CHECK(H.count_four_cycles() == 0);
  CHECK(oracle::girth(H) >= 6);
  CHECK(code.proto_col()[0] == 0);
  CHECK(code.proto_col()[181] == 1);
}

TEST_CASE("single-edge blocks lift to permutation matrices") {
  // A protograph entry of 1 becomes one Z x Z permutation block.
  auto H = lift_matrix(Protograph({{1, 1}}), 4, 0);
  auto d = oracle::dense(H);
  for (int block = 0; block < 2; ++block) {
    for (int r = 0; r < 4; ++r) {
      int row_sum = 0, col_sum = 0;
      for (int c = 0; c < 4; ++c) {
        row_sum += d[r][block * 4 + c];
        col_sum += d[c][block * 4 + r];
      }
      CHECK(row_sum == 1);
      CHECK(col_sum == 1);
    }
  }
}

TEST_CASE("lift is deterministic and seed dependent") {
  Protograph p({{2, 1, 1, 0}, {1, 1, 0, 1}, {0, 1, 2, 1}});
  CHECK(lift_matrix(p, 20, 5) == lift_matrix(p, 20, 5));
  CHECK(!(lift_matrix(p, 20, 5) == lift_matrix(p, 20, 6)));
}

TEST_CASE("lift rejects multiplicity above Z") {
  CHECK_THROWS_AS(lift_matrix(Protograph({{3, 3}}), 2, 0), std::invalid_argument);
}

TEST_CASE("derive_encoder on tiny codes") {
  SUBCASE("repetition code") {
    ParityCheckMatrix H(2, {{0, 1}});
    auto enc = derive_encoder(H);
    CHECK(enc.k() == 1);
    CHECK(enc.encode(Bits{0}) == Bits{0, 0});
    CHECK(enc.encode(Bits{1}) == Bits{1, 1});
  }
  SUBCASE("identity has no information bits") {
    ParityCheckMatrix H(4, {{0}, {1}, {2}, {3}});
    try {
      derive_encoder(H);
      FAIL("expected error");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()) == "zero-rate code");
    }
  }
  SUBCASE("rank deficiency raises k") {
    ParityCheckMatrix H(4, {{0, 1}, {2, 3}, {0, 1, 2, 3}});
    CHECK(derive_encoder(H).k() == 2);
  }
}

TEST_CASE("encoder dimension matches GF(2) rank and outputs codewords") {
  auto H = lift_matrix(Protograph({{3, 3}}), 91, 3);
  auto enc = derive_encoder(H);
  const int rank = oracle::gf2_rank(oracle::dense(H));
  CHECK(enc.rank() == static_cast<std::size_t>(rank));
  CHECK(enc.k() == H.n() - static_cast<std::size_t>(rank));
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Bits u(enc.k());
    for (auto& b : u) b = rng() & 1;
    auto c = enc.encode(u);
    CHECK(H.is_codeword(c));
    CHECK(enc.extract_info(c) == u);
  }
}

TEST_CASE("every information word encodes to a codeword (exhaustive, k <= 12)") {
  auto code = lift(Protograph({{2, 1, 1}}), 6, 4);
  REQUIRE(code.k() <= 12);
  std::size_t distinct = 0;
  std::vector<Bits> seen;
  for (std::uint32_t w = 0; w < (1U << code.k()); ++w) {
    Bits u(code.k());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = (w >> i) & 1U;
    auto c = code.encode(u);
    CHECK(code.H().is_codeword(c));
    seen.push_back(c);
  }
  std::sort(seen.begin(), seen.end());
  distinct = static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
  CHECK(distinct == (1U << code.k()));
}

TEST_CASE("repetition baseline of a (182,91) code is a (364,91) rate-1/4 code") {
  auto inner = lift(Protograph({{3, 3}}), 91, 1);
  auto base = build_repetition_baseline(inner);
  CHECK(base.n() == 364);
  CHECK(base.k() == inner.k());
  if (inner.k() == 91) CHECK(base.rate() == doctest::Approx(0.25));
  std::mt19937_64 rng(2);
  Bits u(base.k());
  for (auto& b : u) b = rng() & 1;
  auto c = base.encode(u);
  Bits first(c.begin(), c.begin() + 182), second(c.begin() + 182, c.end());
  CHECK(first == second);
  CHECK(inner.H().is_codeword(first));
  CHECK(base.proto_col()[182] == 2);
}

TEST_CASE("repetition baseline doubles the minimum distance") {
  // (8,4) extended Hamming code, d_min = 4.
  ParityCheckMatrix inner(8, {{0, 1, 2, 4}, {0, 1, 3, 5}, {0, 2, 3, 6}, {0, 1, 2, 3, 4, 5, 6, 7}});
  auto inner_words = oracle::enumerate_codewords(inner);
  REQUIRE(inner_words.size() == 16);
  auto base = build_repetition_baseline(inner);
  auto words = oracle::enumerate_codewords(base.H());
  CHECK(words.size() == 16);
  CHECK(oracle::min_distance(words) == 2 * oracle::min_distance(inner_words));
  CHECK(oracle::min_distance(words) == 8);
}

TEST_CASE("alist round trip preserves H") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto H = lift_matrix(Protograph({{2, 1, 1, 0}, {1, 1, 1, 1}}), 7 + seed, seed);
    CHECK(parse_alist(to_alist(H)) == H);
  }
  CHECK_THROWS(parse_alist("3 1\n1 1\n1 1 1\n"));
}
