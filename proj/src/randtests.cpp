#include "bsea/randtests.hpp"

#include <algorithm>
#include <array>

#include "bsea/error.hpp"

namespace bsea::randtests {

namespace {

void require_block(std::span<const std::uint8_t> bits) {
  if (bits.size() != block_bits) {
    throw Error(Errc::WrongBlockLength,
                "FIPS 140-2 tests need exactly 20000 bits, got " + std::to_string(bits.size()));
  }
}

// FIPS 140-2 (change notice 1) acceptance intervals, inclusive.
struct Interval {
  int lo, hi;
};
constexpr std::array<Interval, 6> run_intervals{{
    {2315, 2685}, {1114, 1386}, {527, 723}, {240, 384}, {103, 209}, {103, 209}}};
constexpr int long_run_limit = 26;

// Run lengths per bit value, in order of appearance.
template <typename Fn>
void for_each_run(std::span<const std::uint8_t> bits, Fn&& fn) {
  std::size_t i = 0;
  while (i < bits.size()) {
    std::size_t j = i + 1;
    while (j < bits.size() && (bits[j] & 1u) == (bits[i] & 1u)) ++j;
    fn(bits[i] & 1u, j - i);
    i = j;
  }
}

}  // namespace

TestVerdict monobit(std::span<const std::uint8_t> bits) {
  require_block(bits);
  const auto ones = std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b & 1u; });
  return {"monobit", {static_cast<double>(ones)}, 9725 < ones && ones < 10275, "9725 < X < 10275"};
}

TestVerdict poker(std::span<const std::uint8_t> bits) {
  require_block(bits);
  std::array<long, 16> freq{};
  for (std::size_t i = 0; i < block_bits; i += 4) {
    const unsigned nibble = (bits[i] & 1u) << 3 | (bits[i + 1] & 1u) << 2 | (bits[i + 2] & 1u) << 1 |
                            (bits[i + 3] & 1u);
    ++freq[nibble];
  }
  double sum = 0;
  for (long f : freq) sum += static_cast<double>(f) * static_cast<double>(f);
  const double x = 16.0 / 5000.0 * sum - 5000.0;
  return {"poker", {x}, 2.16 < x && x < 46.17, "2.16 < X < 46.17"};
}

TestVerdict runs(std::span<const std::uint8_t> bits) {
  require_block(bits);
  std::array<std::array<int, 6>, 2> counts{};
  for_each_run(bits, [&](unsigned value, std::size_t len) {
    ++counts[value][std::min<std::size_t>(len, 6) - 1];
  });
  TestVerdict v{"runs", {}, true, "len1 2315-2685, len2 1114-1386, len3 527-723, len4 240-384, len5+ 103-209"};
  for (const auto& per_value : counts) {
    for (std::size_t k = 0; k < 6; ++k) {
      v.statistics.push_back(per_value[k]);
      if (per_value[k] < run_intervals[k].lo || per_value[k] > run_intervals[k].hi) v.pass = false;
    }
  }
  return v;
}

TestVerdict longest_run(std::span<const std::uint8_t> bits) {
  require_block(bits);
  std::size_t longest = 0;
  for_each_run(bits, [&](unsigned, std::size_t len) { longest = std::max(longest, len); });
  return {"long_run", {static_cast<double>(longest)}, longest < long_run_limit, "longest run < 26"};
}

std::vector<TestVerdict> fips_battery(std::span<const std::uint8_t> bits) {
  return {monobit(bits), poker(bits), runs(bits), longest_run(bits)};
}

bool all_pass(const std::vector<TestVerdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const TestVerdict& v) { return v.pass; });
}

}  // namespace bsea::randtests
