#pragma once

// 3-input Boolean functions held as 8-bit truth tables.
//
// f(v) is bit v of the table with v = x1 + 2*x2 + 4*x3. Walsh masks u use the
// same layout: bit 0 of u selects x1, bit 1 selects x2, bit 2 selects x3.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bsea::boolfn {

struct TruthTable3 {
  std::uint8_t table = 0;

  constexpr bool operator()(unsigned v) const noexcept { return (table >> (v & 7u)) & 1u; }
  constexpr bool operator==(const TruthTable3&) const = default;
  constexpr auto operator<=>(const TruthTable3&) const = default;
};

constexpr bool evaluate(TruthTable3 f, bool x1, bool x2, bool x3) noexcept {
  return f(static_cast<unsigned>(x1) | static_cast<unsigned>(x2) << 1 |
           static_cast<unsigned>(x3) << 2);
}

/// ⟨v, u⟩ over GF(2).
constexpr bool inner(unsigned v, unsigned u) noexcept { return __builtin_parity(v & u & 7u); }

using WalshSpectrum = std::array<int, 8>;

/// Fast butterfly transform of (-1)^f.
WalshSpectrum walsh_transform(TruthTable3 f);
/// Direct summation Σ_x (-1)^(f(x) ⊕ ⟨x,u⟩); must agree with the butterfly.
WalshSpectrum walsh_transform_direct(TruthTable3 f);

struct BackdoorClass {
  enum class Kind { Affine, Biased };

  Kind kind = Kind::Biased;
  std::uint8_t mask = 0;      // u
  bool complement = false;    // c: the approximation is ⟨x,u⟩ ⊕ c
  double probability = 0.5;   // P[f(x) = ⟨x,u⟩ ⊕ c]

  bool affine() const noexcept { return kind == Kind::Affine; }
  std::string to_string() const;  // "Affine(u=7,c=1)" / "Biased(u=4,c=1,p=0.875)"
};

/// Best affine approximation; ties on |spectrum| go to the smallest mask.
BackdoorClass classify(TruthTable3 f);

/// Precomputed classify() for all 256 tables.
const BackdoorClass& classification(TruthTable3 f) noexcept;

/// Every table whose classification is Affine, ascending.
std::vector<TruthTable3> backdoor_set();

inline bool in_backdoor_set(TruthTable3 f) noexcept { return classification(f).affine(); }

struct Properties {
  bool balanced = false;
  int nonlinearity = 0;
};

Properties properties(TruthTable3 f);

std::string to_string(TruthTable3 f);               // "0x6B"
std::string to_string(const WalshSpectrum& s);      // "(0,0,0,0,0,0,0,-8)"
TruthTable3 parse_truth_table(std::string_view text);

}  // namespace bsea::boolfn
