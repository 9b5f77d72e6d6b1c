#pragma once

// GF(2) foundations: bit vectors, binary polynomials, concrete and symbolic
// LFSRs, primitivity testing and dense linear-system solving.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace bsea::galois {

inline bool parity(std::uint64_t x) noexcept { return __builtin_parityll(x); }

/// Fixed-width bit vector over GF(2), packed into 64-bit words (bit i lives in
/// word i/64 at position i%64). Bits past `width` are always zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t width);

  static BitVector unit(std::size_t width, std::size_t index);
  static BitVector from_words(std::size_t width, std::span<const std::uint64_t> words);

  std::size_t width() const noexcept { return width_; }
  bool get(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i, bool value = true) noexcept;
  void flip(std::size_t i) noexcept { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  BitVector& operator^=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  bool operator==(const BitVector& other) const = default;

  /// Inner product over GF(2).
  bool dot(const BitVector& other) const;
  bool any() const noexcept;
  std::size_t popcount() const noexcept;

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  std::string to_string() const;  // bit 0 first

 private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Affine form ⟨coefficients, x⟩ ⊕ constant over a declared unknown space.
struct LinearForm {
  BitVector coefficients;
  bool constant = false;

  bool evaluate(const BitVector& assignment) const;
};

/// P(x) = Σ x^e over the stored exponents. Exponents are kept sorted in
/// descending order; the constant term and the leading term must be present.
class BinaryPolynomial {
 public:
  BinaryPolynomial() = default;
  explicit BinaryPolynomial(std::vector<unsigned> exponents);
  BinaryPolynomial(std::initializer_list<unsigned> exponents)
      : BinaryPolynomial(std::vector<unsigned>(exponents)) {}

  unsigned degree() const noexcept { return exponents_.front(); }
  const std::vector<unsigned>& exponents() const noexcept { return exponents_; }
  bool has(unsigned e) const noexcept;

  /// LFSR tap mask: bit e set for every exponent e below the degree.
  std::uint64_t tap_mask() const noexcept;
  /// The whole polynomial as a bit mask (needs degree <= 63).
  std::uint64_t mask() const;

  std::string to_string() const;  // "[23,22,...,0]"
  bool operator==(const BinaryPolynomial&) const = default;

 private:
  std::vector<unsigned> exponents_{1, 0};
};

/// Fibonacci register with cell 0 as the output cell and bit i of `state()`
/// holding cell i. A clock returns cell 0, shifts every cell toward index 0 and
/// feeds parity(state & taps) into cell L-1.
class Lfsr {
 public:
  Lfsr(const BinaryPolynomial& poly, std::uint64_t state = 0);

  unsigned length() const noexcept { return length_; }
  std::uint64_t taps() const noexcept { return taps_; }
  std::uint64_t state() const noexcept { return state_; }
  void set_state(std::uint64_t state) noexcept { state_ = state & width_mask(); }
  bool output() const noexcept { return state_ & 1u; }

  bool clock() noexcept {
    const bool out = state_ & 1u;
    const std::uint64_t fb = parity(state_ & taps_);
    state_ = (state_ >> 1) | (fb << (length_ - 1));
    return out;
  }

  std::uint64_t width_mask() const noexcept {
    return length_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << length_) - 1;
  }

 private:
  unsigned length_;
  std::uint64_t taps_;
  std::uint64_t state_ = 0;
};

/// Register whose cells are linear forms over initial-state unknowns. Cell j of
/// the register starts as the unit vector (offset + j) in a space of
/// `unknown_count` unknowns, so several registers can share one joint space.
class SymbolicLfsr {
 public:
  explicit SymbolicLfsr(const BinaryPolynomial& poly);
  SymbolicLfsr(const BinaryPolynomial& poly, std::size_t unknown_count,
               std::size_t offset);

  unsigned length() const noexcept { return length_; }
  const LinearForm& cell(std::size_t j) const { return cells_[(head_ + j) % length_]; }

  /// Returns the pre-shift form of cell 0, then advances.
  LinearForm clock();

 private:
  unsigned length_;
  std::uint64_t taps_;
  std::vector<LinearForm> cells_;  // ring buffer; logical cell j at head_+j
  std::size_t head_ = 0;
};

/// true iff `p` is primitive: irreducible, and x has multiplicative order
/// exactly 2^d - 1 modulo p. `factorization` is the complete prime
/// factorization of 2^d - 1, repeated primes listed repeatedly; a product
/// other than 2^d - 1 raises InvalidFactorization. Supports degrees 1..63.
bool poly_is_primitive(const BinaryPolynomial& p,
                       std::span<const std::uint64_t> factorization);

/// Irreducibility over GF(2) (Rabin's test), degrees 1..63.
bool poly_is_irreducible(const BinaryPolynomial& p);

struct Gf2Row {
  BitVector coefficients;
  bool rhs = false;
};

class Gf2System {
 public:
  explicit Gf2System(std::size_t unknown_count) : unknown_count_(unknown_count) {}

  std::size_t unknown_count() const noexcept { return unknown_count_; }
  const std::vector<Gf2Row>& rows() const noexcept { return rows_; }
  void add_row(BitVector coefficients, bool rhs);
  void add_row(const LinearForm& lhs, bool rhs) {
    add_row(lhs.coefficients, rhs ^ lhs.constant);
  }

 private:
  std::size_t unknown_count_;
  std::vector<Gf2Row> rows_;
};

enum class Verdict { Unique, Inconsistent, Underdetermined };

struct SolveResult {
  Verdict verdict;
  std::size_t rank = 0;
  BitVector assignment;  // set only for Unique
};

/// Gauss-Jordan elimination. Pivot for column j is the first not-yet-used row
/// with bit j set.
SolveResult gf2_solve(const Gf2System& system);
std::size_t gf2_rank(const Gf2System& system);

/// Particular solution plus a basis of the homogeneous solution space.
struct AffineSolutionSpace {
  BitVector particular;
  std::vector<BitVector> directions;
};

/// Incremental row-echelon elimination for systems assembled one equation at
/// a time. Each inserted row is reduced against the rows already kept (in
/// insertion order) and stored with its lowest remaining bit as pivot.
/// Rows are stored flat; `clear()` keeps the allocation for reuse.
class Gf2Eliminator {
 public:
  enum class Insert { Independent, Redundant, Contradiction };

  explicit Gf2Eliminator(std::size_t unknown_count);

  std::size_t unknown_count() const noexcept { return unknown_count_; }
  std::size_t words_per_row() const noexcept { return words_; }
  std::size_t rank() const noexcept { return pivots_.size(); }
  bool consistent() const noexcept { return consistent_; }

  /// `coefficients` must hold words_per_row() words with no bits past the
  /// unknown count.
  Insert add(std::span<const std::uint64_t> coefficients, bool rhs);
  Insert add(const BitVector& coefficients, bool rhs) {
    return add(coefficients.words(), rhs);
  }

  void clear() noexcept;

  /// Requires consistent().
  AffineSolutionSpace solution_space() const;

 private:
  std::size_t unknown_count_;
  std::size_t words_;
  std::vector<std::uint64_t> rows_;
  std::vector<std::uint8_t> rhs_;
  std::vector<std::uint32_t> pivots_;
  std::vector<std::uint64_t> scratch_;
  bool consistent_ = true;
};

}  // namespace bsea::galois
