#pragma once

// FIPS 140-2 statistical battery (monobit, poker, runs, long run) on
// 20,000-bit blocks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bsea::randtests {

inline constexpr std::size_t block_bits = 20000;

struct TestVerdict {
  std::string name;
  std::vector<double> statistics;
  bool pass = false;
  std::string bounds;
};

// All four throw WrongBlockLength unless bits.size() == block_bits.

/// Pass iff 9725 < #ones < 10275.
TestVerdict monobit(std::span<const std::uint8_t> bits);
/// X = 16/5000 * Σ f_i^2 - 5000 over the 5000 4-bit nibbles; pass iff 2.16 < X < 46.17.
TestVerdict poker(std::span<const std::uint8_t> bits);
/// Counts of 0-runs and 1-runs of length 1..5 and 6+, each inside its interval.
/// Statistics: the six 0-run counts followed by the six 1-run counts.
TestVerdict runs(std::span<const std::uint8_t> bits);
/// Fails when any run is 26 bits or longer.
TestVerdict longest_run(std::span<const std::uint8_t> bits);

std::vector<TestVerdict> fips_battery(std::span<const std::uint8_t> bits);
bool all_pass(const std::vector<TestVerdict>& verdicts);

}  // namespace bsea::randtests
