#include <algorithm>
#include <queue>

#include "bsea/attacks.hpp"
#include "bsea/error.hpp"

namespace bsea::attacks {

std::vector<NoisyEquation> coa_harvest(std::span<const std::uint8_t> ciphertext, std::uint64_t i0,
                                       const AttackConfig& cfg) {
  const double q = cfg.plaintext_zero_bias;
  if (!(q >= 0.5 && q <= 1.0)) {
    throw Error(Errc::InvalidBias, "plaintext zero bias must lie in [0.5, 1]");
  }
  const auto& params = cfg.params;
  params.validate();
  if (i0 == 0 || i0 >= full_range(params).hi) {
    throw Error(Errc::DegenerateKey, "i0 must be a nonzero " + std::to_string(params.length(0)) + "-bit state");
  }

  R0Walker walker(params);
  walker.reset(i0);
  std::array<galois::SymbolicLfsr, 3> regs{galois::SymbolicLfsr(params.polys[1]),
                                           galois::SymbolicLfsr(params.polys[2]),
                                           galois::SymbolicLfsr(params.polys[3])};

  std::vector<NoisyEquation> out;
  for (std::size_t t = 0; t < ciphertext.size(); ++t) {
    walker.step();
    for (auto& r : regs) r.clock();

    const auto& cls = boolfn::classification(boolfn::TruthTable3{walker.f()});
    unsigned reg = 0;
    switch (cls.mask) {
      case 1: reg = 1; break;
      case 2: reg = 2; break;
      case 4: reg = 3; break;
      default: continue;  // constant or multi-register approximation
    }
    if (cls.probability < cfg.coa_probability_floor) continue;
    const double confidence = coa_confidence(cls.probability, q);
    if (confidence <= 0.5) continue;

    NoisyEquation eq;
    eq.t = t + 1;
    eq.register_index = reg;
    eq.form = regs[reg - 1].cell(0);
    eq.rhs = (ciphertext[t] & 1u) ^ walker.x0() ^ cls.complement;
    eq.confidence = confidence;
    out.push_back(std::move(eq));
  }
  return out;
}

std::vector<NoisyEquation> equations_for_register(std::span<const NoisyEquation> eqs, unsigned reg) {
  std::vector<NoisyEquation> out;
  std::copy_if(eqs.begin(), eqs.end(), std::back_inserter(out),
               [reg](const NoisyEquation& e) { return e.register_index == reg; });
  return out;
}

std::vector<RankedState> coa_decode_register(std::span<const NoisyEquation> eqs, unsigned register_length,
                                             std::size_t keep, unsigned max_length) {
  if (register_length == 0 || register_length > max_length || register_length > 40) {
    throw Error(Errc::TooLargeToEnumerate, "cannot enumerate 2^" + std::to_string(register_length) +
                                               " register states (limit 2^" + std::to_string(max_length) + ")");
  }
  const std::size_t size = std::size_t{1} << register_length;

  // acc[a] = Σ over equations with mask a of (-1)^rhs; after the transform
  // acc[s] = #satisfied - #violated for state s.
  std::vector<std::int32_t> acc(size, 0);
  for (const auto& e : eqs) {
    if (e.form.coefficients.width() != register_length) {
      throw Error(Errc::WidthMismatch, "equation width does not match register length");
    }
    const std::uint64_t mask = e.form.coefficients.words().empty() ? 0 : e.form.coefficients.words()[0];
    acc[mask] += (e.rhs ^ e.form.constant) ? -1 : 1;
  }
  for (std::size_t h = 1; h < size; h <<= 1) {
    for (std::size_t i = 0; i < size; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const std::int32_t a = acc[j];
        const std::int32_t b = acc[j + h];
        acc[j] = a + b;
        acc[j + h] = a - b;
      }
    }
  }

  const auto total = static_cast<std::int64_t>(eqs.size());
  auto score = [&](std::size_t s) { return (total + acc[s]) / 2; };
  auto better = [](const RankedState& a, const RankedState& b) {
    return a.score != b.score ? a.score > b.score : a.state < b.state;
  };

  const std::size_t candidates = size - 1;
  std::vector<RankedState> out;
  if (keep == 0 || keep >= candidates) {
    out.reserve(candidates);
    for (std::size_t s = 1; s < size; ++s) out.push_back({s, score(s)});
    std::sort(out.begin(), out.end(), better);
    return out;
  }

  // Bounded selection: the heap top is the worst of the best `keep` so far.
  std::priority_queue<RankedState, std::vector<RankedState>, decltype(better)> heap(better);
  for (std::size_t s = 1; s < size; ++s) {
    RankedState r{s, score(s)};
    if (heap.size() < keep) {
      heap.push(r);
    } else if (better(r, heap.top())) {
      heap.pop();
      heap.push(r);
    }
  }
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace bsea::attacks
