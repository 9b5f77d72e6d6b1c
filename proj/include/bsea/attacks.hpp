#pragma once

// Backdoor exploitation.
//
// Known plaintext: every R0 initial state i0 fixes the whole truth-table trace,
// so for a candidate i0 each step whose table is affine gives one exact linear
// equation over the R1..R3 key bits. Constant tables (0x00/0xFF) give a
// parity check on x0 alone and prune wrong candidates cheaply.
//
// Ciphertext only: steps whose table has a strong (non-exact) affine
// approximation give noisy equations, decoded register by register.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsea/bitio.hpp"
#include "bsea/boolfn.hpp"
#include "bsea/cipher.hpp"
#include "bsea/galois.hpp"

namespace bsea::attacks {

struct KeystreamSample {
  Bits sigma;
};

/// sigma_t = c_t xor p_t. Throws LengthMismatch.
KeystreamSample derive_keystream(std::span<const std::uint8_t> plaintext,
                                 std::span<const std::uint8_t> ciphertext);

/// R0-only replay of the generator: step count, x0 and the truth table used
/// for output at every step. Uses precomputed multi-clock feedback masks
/// instead of clocking one cell at a time.
class R0Walker {
 public:
  explicit R0Walker(const cipher::CipherParams& params);

  void reset(std::uint64_t i0) noexcept {
    state_ = i0;
    f_ = initial_f_;
  }

  void step() noexcept {
    const unsigned s = static_cast<unsigned>(state_ & 3u) + 1;
    last_s_ = s;
    std::uint64_t next = state_ >> s;
    for (unsigned j = 0; j < s; ++j) {
      next |= static_cast<std::uint64_t>(galois::parity(state_ & feedback_[j])) << (length_ - s + j);
    }
    state_ = next;
    const unsigned tau = static_cast<unsigned>((state_ >> 3) & 7u);
    const std::uint8_t pattern = static_cast<std::uint8_t>((state_ >> tau) & 0xFFu);
    f_ ^= half_ ? static_cast<std::uint8_t>((pattern & 0xFu) << 4 | (pattern & 0xFu)) : pattern;
  }

  bool x0() const noexcept { return state_ & 1u; }
  std::uint8_t f() const noexcept { return f_; }
  unsigned last_step_count() const noexcept { return last_s_; }
  std::uint64_t state() const noexcept { return state_; }

 private:
  unsigned length_;
  std::uint64_t feedback_[4];  // feedback_[j]: the j-th fed-back bit as a mask over the pre-step state
  std::uint8_t initial_f_;
  bool half_;
  std::uint64_t state_ = 0;
  std::uint8_t f_ = 0;
  unsigned last_s_ = 0;
};

struct R0Step {
  unsigned s = 0;
  bool x0 = false;
  boolfn::TruthTable3 f{};
};

/// n steps of R0's sub-dynamics from initial state i0 (i0 != 0).
std::vector<R0Step> simulate_r0(std::uint64_t i0, const cipher::CipherParams& params, std::size_t n);

/// R0 initial states whose first step lands on the same state as i0's. Their
/// truth-table and x0 traces coincide from the first output on, so together
/// with any R1..R3 they give identical keystreams. Sorted, includes i0.
std::vector<std::uint64_t> first_step_equivalents(std::uint64_t i0, const cipher::CipherParams& params);

/// Half-open interval [lo, hi) of R0 initial states.
struct SearchRange {
  std::uint64_t lo = 1;
  std::uint64_t hi = 0;

  std::uint64_t size() const noexcept { return hi > lo ? hi - lo : 0; }
  bool operator==(const SearchRange&) const = default;
};

SearchRange full_range(const cipher::CipherParams& params);
/// Parses "lo:hi" (decimal or 0x-prefixed hex).
SearchRange parse_range(std::string_view text);

using ProgressFn = std::function<void(double fraction_done)>;

struct AttackConfig {
  cipher::CipherParams params = cipher::CipherParams::bsea1();
  std::optional<SearchRange> search_range;  // default: every nonzero R0 state
  std::size_t max_plaintext_bits = 0;       // 0: use the whole sample
  double plaintext_zero_bias = 0.6;         // COA only
  unsigned workers = 1;
  unsigned max_free_dimension = 24;         // largest solution space enumerated per candidate
  // When affine episodes leave free unknowns, also use the non-affine steps:
  // f(x) = target confines x to a preimage whose affine hull gives exact equations.
  bool preimage_equations = true;
  bool record_discarded = false;            // also report candidates killed by the constant filter
  double coa_probability_floor = 0.875;
  unsigned coa_max_register_length = 26;
  ProgressFn progress;
};

enum class Outcome {
  DiscardedByConstant,
  Inconsistent,
  Underdetermined,
  FailedVerification,  // solver produced keys but none regenerates the sample
  VerifiedKey,
};

std::string_view to_string(Outcome outcome);

struct CandidateReport {
  std::uint64_t i0 = 0;
  std::size_t equations_harvested = 0;  // from affine episodes
  std::size_t preimage_equations = 0;   // independent rows added from non-affine steps
  std::size_t rank = 0;
  Outcome outcome = Outcome::DiscardedByConstant;
  std::size_t stopped_at = 0;       // step index where the candidate died, or N
  std::optional<cipher::SecretKey> key;  // VerifiedKey only
};

struct KpaReport {
  SearchRange searched_range;
  std::size_t sample_bits = 0;
  std::uint64_t candidates_searched = 0;
  std::uint64_t discarded_by_constant = 0;
  std::uint64_t inconsistent = 0;
  std::uint64_t underdetermined = 0;
  std::uint64_t failed_verification = 0;
  /// Ordered by i0. Candidates discarded by the constant filter appear only
  /// when AttackConfig::record_discarded is set.
  std::vector<CandidateReport> candidates;
  std::vector<cipher::SecretKey> verified_keys;
  double wall_seconds = 0.0;

  std::string to_json() const;
};

/// Exhaustive search over the configured R0 range. Throws EmptySearchRange.
KpaReport kpa_attack(const KeystreamSample& sample, const AttackConfig& cfg);

/// Combines reports of disjoint shards; the result is ordered by i0.
KpaReport merge_reports(const std::vector<KpaReport>& shards);

// ------------------------------------------------------- ciphertext only

struct NoisyEquation {
  std::size_t t = 0;            // 1-based step index
  unsigned register_index = 0;  // 1, 2 or 3
  galois::LinearForm form;      // over that register's own initial cells
  bool rhs = false;
  double confidence = 0.5;
};

/// P[equation holds] when the table approximation holds with p and a
/// plaintext bit is zero with q.
constexpr double coa_confidence(double p, double q) noexcept { return p * q + (1 - p) * (1 - q); }

/// One equation per step whose table approximation has probability at least
/// cfg.coa_probability_floor and a single-register mask (u in {1,2,4}).
/// Equations with confidence <= 0.5 carry no information and are dropped.
/// Throws InvalidBias when the bias is outside [0.5, 1].
std::vector<NoisyEquation> coa_harvest(std::span<const std::uint8_t> ciphertext, std::uint64_t i0,
                                       const AttackConfig& cfg);

std::vector<NoisyEquation> equations_for_register(std::span<const NoisyEquation> eqs, unsigned reg);

struct RankedState {
  std::uint64_t state = 0;
  std::int64_t score = 0;  // number of satisfied equations
  bool operator==(const RankedState&) const = default;
};

/// Maximum-likelihood decoding by exhaustive scoring of every nonzero state,
/// computed for all states at once with a Walsh-Hadamard transform. Sorted by
/// score descending, then state ascending; `keep` > 0 truncates the list.
/// Throws TooLargeToEnumerate when register_length > max_length.
std::vector<RankedState> coa_decode_register(std::span<const NoisyEquation> eqs, unsigned register_length,
                                             std::size_t keep = 0, unsigned max_length = 26);

}  // namespace bsea::attacks
