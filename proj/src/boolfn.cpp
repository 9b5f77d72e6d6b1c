#include "bsea/boolfn.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "bsea/error.hpp"

namespace bsea::boolfn {

WalshSpectrum walsh_transform(TruthTable3 f) {
  WalshSpectrum s{};
  for (unsigned v = 0; v < 8; ++v) s[v] = f(v) ? -1 : 1;
  for (unsigned h = 1; h < 8; h <<= 1) {
    for (unsigned i = 0; i < 8; i += 2 * h) {
      for (unsigned j = i; j < i + h; ++j) {
        const int a = s[j];
        const int b = s[j + h];
        s[j] = a + b;
        s[j + h] = a - b;
      }
    }
  }
  return s;
}

WalshSpectrum walsh_transform_direct(TruthTable3 f) {
  WalshSpectrum s{};
  for (unsigned u = 0; u < 8; ++u) {
    for (unsigned v = 0; v < 8; ++v) s[u] += (f(v) ^ inner(v, u)) ? -1 : 1;
  }
  return s;
}

BackdoorClass classify(TruthTable3 f) {
  const auto s = walsh_transform(f);
  unsigned best = 0;
  for (unsigned u = 1; u < 8; ++u) {
    if (std::abs(s[u]) > std::abs(s[best])) best = u;
  }
  BackdoorClass c;
  c.mask = static_cast<std::uint8_t>(best);
  c.complement = s[best] < 0;
  c.probability = 0.5 * (1.0 + std::abs(s[best]) / 8.0);
  c.kind = std::abs(s[best]) == 8 ? BackdoorClass::Kind::Affine : BackdoorClass::Kind::Biased;
  return c;
}

const BackdoorClass& classification(TruthTable3 f) noexcept {
  static const auto table = [] {
    std::array<BackdoorClass, 256> t{};
    for (unsigned i = 0; i < 256; ++i) t[i] = classify(TruthTable3{static_cast<std::uint8_t>(i)});
    return t;
  }();
  return table[f.table];
}

std::vector<TruthTable3> backdoor_set() {
  std::vector<TruthTable3> out;
  for (unsigned i = 0; i < 256; ++i) {
    const TruthTable3 f{static_cast<std::uint8_t>(i)};
    if (classify(f).affine()) out.push_back(f);
  }
  return out;
}

Properties properties(TruthTable3 f) {
  const auto s = walsh_transform(f);
  int peak = 0;
  for (int v : s) peak = std::max(peak, std::abs(v));
  return {s[0] == 0, 4 - peak / 2};
}

std::string BackdoorClass::to_string() const {
  const std::string u = "u=" + std::to_string(mask) + ",c=" + (complement ? "1" : "0");
  if (affine()) return "Affine(" + u + ")";
  char p[32];
  std::snprintf(p, sizeof p, "%g", probability);
  return "Biased(" + u + ",p=" + p + ")";
}

std::string to_string(TruthTable3 f) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", f.table);
  return buf;
}

std::string to_string(const WalshSpectrum& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + ")";
}

TruthTable3 parse_truth_table(std::string_view text) {
  std::string_view digits = text;
  int base = 10;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    digits.remove_prefix(2);
    base = 16;
  }
  unsigned value = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
  if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size() || value > 0xFF) {
    throw Error(Errc::InvalidParams, "invalid truth table '" + std::string(text) + "'");
  }
  return TruthTable3{static_cast<std::uint8_t>(value)};
}

}  // namespace bsea::boolfn
