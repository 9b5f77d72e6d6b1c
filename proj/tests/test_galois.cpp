#include <doctest.h>

#include <random>
#include <set>

#include "bsea/cipher.hpp"
#include "bsea/error.hpp"
#include "bsea/galois.hpp"

using namespace bsea;
using namespace bsea::galois;

namespace {

BinaryPolynomial random_poly(std::mt19937_64& rng, unsigned degree) {
  std::vector<unsigned> e{degree, 0};
  for (unsigned i = 1; i < degree; ++i) {
    if (rng() & 1u) e.push_back(i);
  }
  return BinaryPolynomial(e);
}

// Prime factorization by trial division (test-side only).
std::vector<std::uint64_t> factor(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t q = 2; q * q <= n; ++q) {
    while (n % q == 0) {
      out.push_back(q);
      n /= q;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

// Period of the state sequence starting at 1, by direct clocking.
std::uint64_t lfsr_period(const BinaryPolynomial& p) {
  Lfsr r(p, 1);
  std::uint64_t n = 0;
  do {
    r.clock();
    ++n;
  } while (r.state() != 1 && n <= (std::uint64_t{1} << p.degree()));
  return n;
}

bool brute_satisfies(const Gf2System& s, std::uint64_t x) {
  for (const auto& row : s.rows()) {
    if (parity(row.coefficients.words()[0] & x) != row.rhs) return false;
  }
  return true;
}

Gf2System random_system(std::mt19937_64& rng, std::size_t n, std::size_t rows) {
  Gf2System s(n);
  for (std::size_t r = 0; r < rows; ++r) {
    BitVector v(n);
    for (std::size_t i = 0; i < n; ++i) v.set(i, rng() & 1u);
    s.add_row(std::move(v), rng() & 1u);
  }
  return s;
}

}  // namespace

TEST_CASE("BinaryPolynomial invariants") {
  const BinaryPolynomial p{3, 1, 0};
  CHECK(p.degree() == 3);
  CHECK(p.tap_mask() == 0b011);
  CHECK(p.to_string() == "[3,1,0]");
  CHECK_THROWS_AS(BinaryPolynomial({3, 1}), Error);  // no constant term
  CHECK_THROWS_AS(BinaryPolynomial({0}), Error);     // degree 0
}

TEST_CASE("lfsr_clock: x^3+x+1 from 001 cycles through all 7 nonzero states") {
  Lfsr r({3, 1, 0}, 0b001);
  CHECK(r.clock() == true);
  r.set_state(0b001);
  std::set<std::uint64_t> seen;
  std::vector<int> outputs;
  for (int i = 0; i < 14; ++i) {
    seen.insert(r.state());
    outputs.push_back(r.clock());
  }
  CHECK(seen.size() == 7);
  CHECK(r.state() == 0b001);
  for (int i = 0; i < 7; ++i) CHECK(outputs[i] == outputs[i + 7]);
  // Enumerated by hand: states 001,100,010,101,110,111,011 emit 1,0,0,1,0,1,1.
  CHECK(outputs == std::vector<int>{1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1});
}

TEST_CASE("lfsr_clock: zero state is a fixed point") {
  for (unsigned L : {3u, 23u, 37u}) {
    std::mt19937_64 rng(L);
    Lfsr r(random_poly(rng, L), 0);
    for (int i = 0; i < 100; ++i) {
      CHECK(r.clock() == false);
      CHECK(r.state() == 0);
    }
  }
}

TEST_CASE("lfsr_clock: BSEA-1 R0 register has period exactly 2^23-1") {
  const auto p0 = cipher::CipherParams::bsea1().polys[0];
  const std::uint64_t start = 0x2A5F1C;
  Lfsr r(p0, start);
  const std::uint64_t expected = (std::uint64_t{1} << 23) - 1;
  std::vector<std::uint8_t> first;
  first.reserve(expected);
  std::uint64_t steps = 0;
  do {
    first.push_back(r.clock());
    ++steps;
  } while (r.state() != start && steps <= expected);
  REQUIRE(steps == expected);
  bool periodic = true;
  for (std::uint64_t i = 0; i < expected; ++i) periodic &= r.clock() == first[i];
  CHECK(periodic);
}

TEST_CASE("symbolic_clock mirrors lfsr_clock") {
  SUBCASE("first output is initial cell 0") {
    SymbolicLfsr s({5, 2, 0});
    CHECK(s.clock().coefficients == BitVector::unit(5, 0));
  }
  SUBCASE("x^3+x+1, 4th output, all 8 initial states") {
    SymbolicLfsr s({3, 1, 0});
    LinearForm form;
    for (int t = 0; t < 4; ++t) form = s.clock();
    for (std::uint64_t v = 0; v < 8; ++v) {
      Lfsr r({3, 1, 0}, v);
      bool out = false;
      for (int t = 0; t < 4; ++t) out = r.clock();
      CHECK(form.evaluate(BitVector::from_words(3, std::vector<std::uint64_t>{v})) == out);
    }
  }
  SUBCASE("1000 random (poly, init, t) triples") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
      const unsigned L = 2 + static_cast<unsigned>(rng() % 40);
      const auto poly = random_poly(rng, L);
      const std::uint64_t init = rng() & ((std::uint64_t{1} << L) - 1);
      const std::size_t t = 1 + rng() % 300;
      SymbolicLfsr s(poly);
      Lfsr r(poly, init);
      LinearForm form;
      bool out = false;
      for (std::size_t i = 0; i < t; ++i) {
        form = s.clock();
        out = r.clock();
      }
      const auto v = BitVector::from_words(L, std::vector<std::uint64_t>{init});
      REQUIRE(form.evaluate(v) == out);
      REQUIRE(s.cell(0).evaluate(v) == r.output());
    }
  }
}

TEST_CASE("symbolic registers in a joint unknown space") {
  SymbolicLfsr a({5, 2, 0}, 12, 0);
  SymbolicLfsr b({7, 1, 0}, 12, 5);
  CHECK(a.cell(0).coefficients == BitVector::unit(12, 0));
  CHECK(b.cell(6).coefficients == BitVector::unit(12, 11));
  CHECK_THROWS_AS(SymbolicLfsr({7, 1, 0}, 12, 6), Error);
}

TEST_CASE("LFSR output is linear in the initial state") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const unsigned L = 3 + static_cast<unsigned>(rng() % 35);
    const auto poly = random_poly(rng, L);
    const std::uint64_t m = (std::uint64_t{1} << L) - 1;
    const std::uint64_t v = rng() & m, w = rng() & m;
    Lfsr rv(poly, v), rw(poly, w), rvw(poly, v ^ w);
    for (int t = 0; t < 200; ++t) REQUIRE(rvw.clock() == (rv.clock() ^ rw.clock()));
  }
}

TEST_CASE("poly_is_primitive: worked examples") {
  const std::vector<std::uint64_t> f7{7};
  const std::vector<std::uint64_t> f15{3, 5};
  CHECK(poly_is_primitive({3, 1, 0}, f7));
  CHECK_FALSE(poly_is_primitive({3, 0}, f7));             // (x+1)(x^2+x+1)
  CHECK_FALSE(poly_is_primitive({4, 3, 2, 1, 0}, f15));   // irreducible, order 5
  CHECK(poly_is_irreducible({4, 3, 2, 1, 0}));
  CHECK_THROWS_AS(poly_is_primitive({3, 1, 0}, std::vector<std::uint64_t>{3}), Error);
  CHECK_THROWS_AS(poly_is_primitive({4, 1, 0}, std::vector<std::uint64_t>{15}), Error);
}

TEST_CASE("poly_is_primitive agrees with brute-force period for every polynomial up to degree 10") {
  int primitive_count = 0;
  for (unsigned d = 1; d <= 10; ++d) {
    const auto factors = factor((std::uint64_t{1} << d) - 1);
    for (std::uint64_t middle = 0; middle < (std::uint64_t{1} << (d - 1)); ++middle) {
      std::vector<unsigned> e{d, 0};
      for (unsigned i = 1; i < d; ++i) {
        if ((middle >> (i - 1)) & 1u) e.push_back(i);
      }
      const BinaryPolynomial p(e);
      const bool by_period = lfsr_period(p) == (std::uint64_t{1} << d) - 1;
      REQUIRE(poly_is_primitive(p, factors) == by_period);
      primitive_count += by_period;
    }
  }
  // Number of primitive polynomials of degree d is phi(2^d-1)/d; summed over 1..10.
  CHECK(primitive_count == 1 + 1 + 2 + 2 + 6 + 6 + 18 + 16 + 48 + 60);
}

TEST_CASE("order factorizations of the standard register lengths") {
  for (std::size_t r = 0; r < 4; ++r) {
    const unsigned L = cipher::CipherParams::bsea1().length(r);
    std::uint64_t product = 1;
    for (auto q : cipher::bsea1_order_factors(r)) {
      CHECK(factor(q) == std::vector<std::uint64_t>{q});  // each factor is prime
      product *= q;
    }
    CHECK(product == (std::uint64_t{1} << L) - 1);
  }
}

TEST_CASE("gf2_solve: fixed cases") {
  SUBCASE("identity") {
    Gf2System s(5);
    const std::vector<bool> b{true, false, true, true, false};
    for (std::size_t i = 0; i < 5; ++i) s.add_row(BitVector::unit(5, i), b[i]);
    const auto r = gf2_solve(s);
    REQUIRE(r.verdict == Verdict::Unique);
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.assignment.get(i) == b[i]);
  }
  SUBCASE("x0+x1=1 and x0+x1=0") {
    Gf2System s(2);
    BitVector v(2);
    v.set(0);
    v.set(1);
    s.add_row(v, true);
    s.add_row(v, false);
    CHECK(gf2_solve(s).verdict == Verdict::Inconsistent);
  }
  SUBCASE("rank") {
    CHECK(gf2_rank(Gf2System(10)) == 0);
    Gf2System s(97);
    for (std::size_t i = 0; i < 97; ++i) s.add_row(BitVector::unit(97, i), false);
    CHECK(gf2_rank(s) == 97);
  }
  SUBCASE("row width must match") {
    Gf2System s(4);
    CHECK_THROWS_AS(s.add_row(BitVector(5), true), Error);
  }
}

TEST_CASE("gf2_solve matches exhaustive enumeration on 200 random systems") {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const std::size_t rows = rng() % (n + 5);
    const auto s = random_system(rng, n, rows);

    std::vector<std::uint64_t> solutions;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      if (brute_satisfies(s, x)) solutions.push_back(x);
    }
    const auto r = gf2_solve(s);
    switch (r.verdict) {
      case Verdict::Unique:
        mismatches += !(solutions.size() == 1 && r.assignment.words()[0] == solutions[0]);
        break;
      case Verdict::Inconsistent:
        mismatches += !solutions.empty();
        break;
      case Verdict::Underdetermined:
        mismatches += solutions.size() != (std::size_t{1} << (n - r.rank));
        break;
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("gf2_rank matches row-space enumeration") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    const std::size_t rows = rng() % 12;
    const auto s = random_system(rng, n, rows);
    std::set<std::uint64_t> span{0};
    for (const auto& row : s.rows()) {
      std::set<std::uint64_t> next = span;
      for (auto v : span) next.insert(v ^ row.coefficients.words()[0]);
      span = std::move(next);
    }
    REQUIRE((std::size_t{1} << gf2_rank(s)) == span.size());
  }
}

TEST_CASE("Gf2Eliminator: incremental verdicts and solution space match enumeration") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const auto s = random_system(rng, n, rng() % (n + 4));
    Gf2Eliminator e(n);
    for (const auto& row : s.rows()) e.add(row.coefficients, row.rhs);

    std::set<std::uint64_t> brute;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      if (brute_satisfies(s, x)) brute.insert(x);
    }
    REQUIRE(e.consistent() == !brute.empty());
    REQUIRE(e.rank() == gf2_rank(s));
    if (!e.consistent()) continue;

    const auto space = e.solution_space();
    REQUIRE(space.directions.size() == n - e.rank());
    std::set<std::uint64_t> spanned;
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << space.directions.size()); ++z) {
      BitVector x = space.particular;
      for (std::size_t d = 0; d < space.directions.size(); ++d) {
        if ((z >> d) & 1u) x ^= space.directions[d];
      }
      spanned.insert(x.words()[0]);
    }
    REQUIRE(spanned == brute);
  }
}

TEST_CASE("Gf2Eliminator reports contradictions and clears for reuse") {
  Gf2Eliminator e(70);
  auto v = BitVector::unit(70, 65);
  CHECK(e.add(v, true) == Gf2Eliminator::Insert::Independent);
  CHECK(e.add(v, true) == Gf2Eliminator::Insert::Redundant);
  CHECK(e.add(v, false) == Gf2Eliminator::Insert::Contradiction);
  CHECK_FALSE(e.consistent());
  e.clear();
  CHECK(e.consistent());
  CHECK(e.rank() == 0);
}
