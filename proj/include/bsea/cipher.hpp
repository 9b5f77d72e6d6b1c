#pragma once

// The BSEA combination-generator family: four LFSRs, R0 irregularly clocked and
// mutating the combining truth table at every step.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsea/bitio.hpp"
#include "bsea/boolfn.hpp"
#include "bsea/galois.hpp"

namespace bsea::cipher {

enum class UpdateRule {
  Full,         // f ^= pattern
  HalfPattern,  // f ^= (pi << 4) | pi, pi = low nibble of pattern
};

std::string_view to_string(UpdateRule rule);
UpdateRule parse_update_rule(std::string_view name);

struct CipherParams {
  std::array<galois::BinaryPolynomial, 4> polys;
  boolfn::TruthTable3 initial_f{0x6B};
  UpdateRule update_rule = UpdateRule::Full;

  /// The standard instance: lengths (23, 29, 31, 37), initial table 0x6B.
  static CipherParams bsea1();
  /// Same architecture with primitive registers of lengths (9, 11, 13, 17),
  /// small enough to decode every register exhaustively.
  static CipherParams reduced();

  unsigned length(std::size_t reg) const { return polys[reg].degree(); }
  unsigned total_bits() const;
  /// Throws InvalidParams unless L0 >= 6 and every register fits in 64 cells.
  void validate() const;
};

/// Complete prime factorizations of 2^L - 1 for the standard register lengths.
std::vector<std::uint64_t> bsea1_order_factors(std::size_t reg);

/// Key bits in order. The first L0 bits fill R0, the next L1 fill R1 and so
/// on; inside a segment the first bit lands in the highest cell, so a segment
/// read as a big-endian integer is exactly the register state.
class SecretKey {
 public:
  SecretKey() = default;
  explicit SecretKey(Bits bits) : bits_(std::move(bits)) {}

  static SecretKey from_states(const CipherParams& params, const std::array<std::uint64_t, 4>& states);
  /// ceil(total/4) hex digits; the first key bit is the most significant bit
  /// of the total-bit integer, leading pad bits must be zero.
  static SecretKey from_hex(std::string_view hex, const CipherParams& params);

  const Bits& bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return bits_.size(); }
  std::uint64_t register_state(const CipherParams& params, std::size_t reg) const;
  std::string to_hex() const;

  bool operator==(const SecretKey&) const = default;

 private:
  Bits bits_;
};

struct StepTrace {
  std::size_t t = 0;
  unsigned s = 0;
  unsigned tau = 0;
  std::uint8_t pattern = 0;
  bool x0 = false, x1 = false, x2 = false, x3 = false;
  boolfn::TruthTable3 f_before_output{};
  bool sigma = false;
};

class CipherState {
 public:
  CipherState(const CipherParams& params, const SecretKey& key);

  const galois::Lfsr& reg(std::size_t i) const { return regs_[i]; }
  boolfn::TruthTable3 f() const noexcept { return f_; }
  std::size_t t() const noexcept { return t_; }

  StepTrace next_bit();

 private:
  std::array<galois::Lfsr, 4> regs_;
  boolfn::TruthTable3 f_;
  UpdateRule rule_;
  std::size_t t_ = 0;
};

/// Throws WrongKeyLength or DegenerateKey (any all-zero register segment).
CipherState key_setup(const SecretKey& key, const CipherParams& params);

Bits keystream(const SecretKey& key, const CipherParams& params, std::size_t n);
Bits encrypt(const SecretKey& key, const CipherParams& params, std::span<const std::uint8_t> plaintext);
Bits decrypt(const SecretKey& key, const CipherParams& params, std::span<const std::uint8_t> ciphertext);

/// Params file (JSON): {"polys": [[23,22,...,0], ...], "initial_f": "0x6B",
/// "update_rule": "full" | "half"}.
CipherParams params_from_json(std::string_view text);
std::string params_to_json(const CipherParams& params);

}  // namespace bsea::cipher
