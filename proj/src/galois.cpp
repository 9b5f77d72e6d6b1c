#include "bsea/galois.hpp"

#include <algorithm>
#include <bit>

#include "bsea/error.hpp"

namespace bsea::galois {

// ---------------------------------------------------------------- BitVector

BitVector::BitVector(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

BitVector BitVector::unit(std::size_t width, std::size_t index) {
  BitVector v(width);
  v.set(index);
  return v;
}

BitVector BitVector::from_words(std::size_t width, std::span<const std::uint64_t> words) {
  BitVector v(width);
  if (words.size() != v.words_.size()) {
    throw Error(Errc::WidthMismatch, "word count does not match bit width");
  }
  std::copy(words.begin(), words.end(), v.words_.begin());
  if (width % 64 != 0) v.words_.back() &= (std::uint64_t{1} << (width % 64)) - 1;
  return v;
}

void BitVector::set(std::size_t i, bool value) noexcept {
  const std::uint64_t bit = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= bit;
  } else {
    words_[i / 64] &= ~bit;
  }
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.width_ != width_) throw Error(Errc::WidthMismatch, "xor of vectors with different widths");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

bool BitVector::dot(const BitVector& other) const {
  if (other.width_ != width_) throw Error(Errc::WidthMismatch, "dot of vectors with different widths");
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & other.words_[i];
  return parity(acc);
}

bool BitVector::any() const noexcept {
  return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

std::size_t BitVector::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string BitVector::to_string() const {
  std::string s(width_, '0');
  for (std::size_t i = 0; i < width_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

bool LinearForm::evaluate(const BitVector& assignment) const {
  return coefficients.dot(assignment) ^ constant;
}

// --------------------------------------------------------- BinaryPolynomial

BinaryPolynomial::BinaryPolynomial(std::vector<unsigned> exponents) : exponents_(std::move(exponents)) {
  std::sort(exponents_.begin(), exponents_.end(), std::greater<>());
  exponents_.erase(std::unique(exponents_.begin(), exponents_.end()), exponents_.end());
  if (exponents_.empty()) throw Error(Errc::InvalidPolynomial, "polynomial has no terms");
  if (exponents_.back() != 0) throw Error(Errc::InvalidPolynomial, "polynomial lacks a constant term");
  if (exponents_.front() < 1) throw Error(Errc::InvalidPolynomial, "polynomial degree must be at least 1");
  if (exponents_.front() > 64) throw Error(Errc::InvalidPolynomial, "polynomial degree above 64 is unsupported");
}

bool BinaryPolynomial::has(unsigned e) const noexcept {
  return std::find(exponents_.begin(), exponents_.end(), e) != exponents_.end();
}

std::uint64_t BinaryPolynomial::tap_mask() const noexcept {
  std::uint64_t m = 0;
  for (auto e : exponents_) {
    if (e < degree()) m |= std::uint64_t{1} << e;
  }
  return m;
}

std::uint64_t BinaryPolynomial::mask() const {
  if (degree() > 63) throw Error(Errc::InvalidPolynomial, "degree too large for mask form");
  return tap_mask() | (std::uint64_t{1} << degree());
}

std::string BinaryPolynomial::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(exponents_[i]);
  }
  return s + "]";
}

// --------------------------------------------------------------------- LFSRs

Lfsr::Lfsr(const BinaryPolynomial& poly, std::uint64_t state)
    : length_(poly.degree()), taps_(poly.tap_mask()) {
  set_state(state);
}

SymbolicLfsr::SymbolicLfsr(const BinaryPolynomial& poly)
    : SymbolicLfsr(poly, poly.degree(), 0) {}

SymbolicLfsr::SymbolicLfsr(const BinaryPolynomial& poly, std::size_t unknown_count,
                           std::size_t offset)
    : length_(poly.degree()), taps_(poly.tap_mask()) {
  if (offset + length_ > unknown_count) {
    throw Error(Errc::WidthMismatch, "register does not fit in the unknown space");
  }
  cells_.reserve(length_);
  for (unsigned j = 0; j < length_; ++j) {
    cells_.push_back(LinearForm{BitVector::unit(unknown_count, offset + j), false});
  }
}

LinearForm SymbolicLfsr::clock() {
  LinearForm out = cells_[head_];
  LinearForm feedback{BitVector(out.coefficients.width()), false};
  for (unsigned j = 0; j < length_; ++j) {
    if ((taps_ >> j) & 1u) {
      const auto& c = cell(j);
      feedback.coefficients ^= c.coefficients;
      feedback.constant ^= c.constant;
    }
  }
  // Old cell 0 slot becomes the new cell L-1.
  cells_[head_] = std::move(feedback);
  head_ = (head_ + 1) % length_;
  return out;
}

// -------------------------------------------------------------- primitivity

namespace {

// Residues modulo p are polynomials of degree < d <= 63 held in a uint64.
std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p, unsigned d) {
  const std::uint64_t top = std::uint64_t{1} << d;
  std::uint64_t r = 0;
  while (b) {
    if (b & 1u) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a & top) a ^= p;
  }
  return r;
}

std::uint64_t powmod_x(std::uint64_t e, std::uint64_t p, unsigned d) {
  std::uint64_t result = 1;
  std::uint64_t base = d == 1 ? (2 ^ p) : 2;  // x mod p
  while (e) {
    if (e & 1u) result = mulmod(result, base, p, d);
    base = mulmod(base, base, p, d);
    e >>= 1;
  }
  return result;
}

// x^(2^k) mod p by k squarings.
std::uint64_t frobenius_x(unsigned k, std::uint64_t p, unsigned d) {
  std::uint64_t r = d == 1 ? (2 ^ p) : 2;
  for (unsigned i = 0; i < k; ++i) r = mulmod(r, r, p, d);
  return r;
}

int poly_degree(std::uint64_t a) { return a ? 63 - std::countl_zero(a) : -1; }

std::uint64_t poly_gcd(std::uint64_t a, std::uint64_t b) {
  while (b) {
    const int db = poly_degree(b);
    while (poly_degree(a) >= db) a ^= b << (poly_degree(a) - db);
    std::swap(a, b);
  }
  return a;
}

std::vector<unsigned> distinct_prime_factors(unsigned n) {
  std::vector<unsigned> out;
  for (unsigned q = 2; q * q <= n; ++q) {
    if (n % q == 0) {
      out.push_back(q);
      while (n % q == 0) n /= q;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

__extension__ typedef unsigned __int128 uint128;

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<uint128>(a) * b % m);
}

// Deterministic Miller-Rabin for 64-bit integers.
bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  static constexpr std::uint64_t bases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (auto b : bases) {
    if (n % b == 0) return n == b;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1u) == 0) {
    d >>= 1;
    ++s;
  }
  for (auto a : bases) {
    std::uint64_t x = 1, base = a, e = d;
    while (e) {
      if (e & 1u) x = mulmod_u64(x, base, n);
      base = mulmod_u64(base, base, n);
      e >>= 1;
    }
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (unsigned r = 1; r < s && witness; ++r) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) witness = false;
    }
    if (witness) return false;
  }
  return true;
}

void require_supported_degree(const BinaryPolynomial& p) {
  if (p.degree() > 63) throw Error(Errc::InvalidPolynomial, "primitivity test supports degree <= 63");
}

}  // namespace

bool poly_is_irreducible(const BinaryPolynomial& p) {
  require_supported_degree(p);
  const unsigned d = p.degree();
  const std::uint64_t m = p.mask();
  const std::uint64_t x = d == 1 ? (2 ^ m) : 2;
  if (frobenius_x(d, m, d) != x) return false;
  for (unsigned r : distinct_prime_factors(d)) {
    const std::uint64_t h = frobenius_x(d / r, m, d) ^ x;
    if (poly_gcd(m, h) != 1) return false;
  }
  return true;
}

bool poly_is_primitive(const BinaryPolynomial& p, std::span<const std::uint64_t> factorization) {
  require_supported_degree(p);
  const unsigned d = p.degree();
  const std::uint64_t order = (std::uint64_t{1} << d) - 1;

  std::uint64_t product = 1;
  for (auto q : factorization) {
    if (!is_prime_u64(q)) {
      throw Error(Errc::InvalidFactorization, std::to_string(q) + " is not prime");
    }
    if (product > order / q) {
      throw Error(Errc::InvalidFactorization, "factorization does not multiply to 2^" +
                                                  std::to_string(d) + "-1");
    }
    product *= q;
  }
  if (product != order) {
    throw Error(Errc::InvalidFactorization,
                "factorization multiplies to " + std::to_string(product) + ", expected 2^" +
                    std::to_string(d) + "-1 = " + std::to_string(order));
  }

  if (!poly_is_irreducible(p)) return false;
  const std::uint64_t m = p.mask();
  if (powmod_x(order, m, d) != 1) return false;
  for (auto q : factorization) {
    if (powmod_x(order / q, m, d) == 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------- Gf2System

void Gf2System::add_row(BitVector coefficients, bool rhs) {
  if (coefficients.width() != unknown_count_) {
    throw Error(Errc::WidthMismatch, "row width " + std::to_string(coefficients.width()) +
                                         " does not match " + std::to_string(unknown_count_) +
                                         " unknowns");
  }
  rows_.push_back(Gf2Row{std::move(coefficients), rhs});
}

namespace {

struct Reduced {
  std::vector<Gf2Row> rows;
  std::vector<std::size_t> pivot_columns;  // pivot_columns[i] belongs to rows[i]
};

Reduced reduce(const Gf2System& system) {
  Reduced r{system.rows(), {}};
  auto& rows = r.rows;
  std::size_t next = 0;
  for (std::size_t col = 0; col < system.unknown_count() && next < rows.size(); ++col) {
    std::size_t pivot = next;
    while (pivot < rows.size() && !rows[pivot].coefficients.get(col)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[next]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != next && rows[i].coefficients.get(col)) {
        rows[i].coefficients ^= rows[next].coefficients;
        rows[i].rhs ^= rows[next].rhs;
      }
    }
    r.pivot_columns.push_back(col);
    ++next;
  }
  return r;
}

}  // namespace

SolveResult gf2_solve(const Gf2System& system) {
  const Reduced r = reduce(system);
  const std::size_t rank = r.pivot_columns.size();
  for (std::size_t i = rank; i < r.rows.size(); ++i) {
    if (r.rows[i].rhs) return {Verdict::Inconsistent, rank, {}};
  }
  if (rank < system.unknown_count()) return {Verdict::Underdetermined, rank, {}};
  BitVector x(system.unknown_count());
  for (std::size_t i = 0; i < rank; ++i) x.set(r.pivot_columns[i], r.rows[i].rhs);
  return {Verdict::Unique, rank, std::move(x)};
}

std::size_t gf2_rank(const Gf2System& system) { return reduce(system).pivot_columns.size(); }

// ------------------------------------------------------------ Gf2Eliminator

Gf2Eliminator::Gf2Eliminator(std::size_t unknown_count)
    : unknown_count_(unknown_count), words_((unknown_count + 63) / 64), scratch_(words_) {
  rows_.reserve(words_ * unknown_count);
  rhs_.reserve(unknown_count);
  pivots_.reserve(unknown_count);
}

Gf2Eliminator::Insert Gf2Eliminator::add(std::span<const std::uint64_t> coefficients, bool rhs) {
  if (coefficients.size() != words_) throw Error(Errc::WidthMismatch, "row word count mismatch");
  std::copy(coefficients.begin(), coefficients.end(), scratch_.begin());
  bool b = rhs;
  for (std::size_t i = 0; i < pivots_.size(); ++i) {
    const std::uint32_t pc = pivots_[i];
    if ((scratch_[pc / 64] >> (pc % 64)) & 1u) {
      const std::uint64_t* row = rows_.data() + i * words_;
      for (std::size_t w = 0; w < words_; ++w) scratch_[w] ^= row[w];
      b ^= rhs_[i] != 0;
    }
  }
  for (std::size_t w = 0; w < words_; ++w) {
    if (scratch_[w]) {
      pivots_.push_back(static_cast<std::uint32_t>(w * 64 + std::countr_zero(scratch_[w])));
      rows_.insert(rows_.end(), scratch_.begin(), scratch_.end());
      rhs_.push_back(b);
      return Insert::Independent;
    }
  }
  if (b) {
    consistent_ = false;
    return Insert::Contradiction;
  }
  return Insert::Redundant;
}

void Gf2Eliminator::clear() noexcept {
  rows_.clear();
  rhs_.clear();
  pivots_.clear();
  consistent_ = true;
}

AffineSolutionSpace Gf2Eliminator::solution_space() const {
  const std::size_t n = unknown_count_;
  const std::size_t r = pivots_.size();
  std::vector<std::uint8_t> is_pivot(n, 0);
  for (auto pc : pivots_) is_pivot[pc] = 1;

  // Row i holds no pivot of rows 0..i-1, so back substitution runs in reverse
  // insertion order: every other pivot appearing in row i is already solved.
  auto substitute = [&](BitVector& x, bool homogeneous) {
    for (std::size_t k = r; k-- > 0;) {
      bool v = homogeneous ? false : rhs_[k] != 0;
      const std::uint64_t* row = rows_.data() + k * words_;
      std::uint64_t acc = 0;
      for (std::size_t w = 0; w < words_; ++w) acc ^= row[w] & x.words()[w];
      v ^= parity(acc);  // pivot bit of x is still 0 here
      x.set(pivots_[k], v);
    }
  };

  AffineSolutionSpace space{BitVector(n), {}};
  substitute(space.particular, false);
  for (std::size_t col = 0; col < n; ++col) {
    if (is_pivot[col]) continue;
    BitVector d(n);
    d.set(col);
    substitute(d, true);
    space.directions.push_back(std::move(d));
  }
  return space;
}

}  // namespace bsea::galois
