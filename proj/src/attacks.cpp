#include "bsea/attacks.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "bsea/error.hpp"

namespace bsea::attacks {

using cipher::CipherParams;
using cipher::SecretKey;

KeystreamSample derive_keystream(std::span<const std::uint8_t> plaintext,
                                 std::span<const std::uint8_t> ciphertext) {
  if (plaintext.size() != ciphertext.size()) {
    throw Error(Errc::LengthMismatch, "plaintext has " + std::to_string(plaintext.size()) +
                                          " bits but ciphertext has " + std::to_string(ciphertext.size()));
  }
  KeystreamSample out;
  out.sigma.resize(plaintext.size());
  for (std::size_t i = 0; i < plaintext.size(); ++i) {
    out.sigma[i] = static_cast<std::uint8_t>((plaintext[i] ^ ciphertext[i]) & 1u);
  }
  return out;
}

// ------------------------------------------------------------------ R0Walker

R0Walker::R0Walker(const CipherParams& params)
    : length_(params.length(0)),
      initial_f_(params.initial_f.table),
      half_(params.update_rule == cipher::UpdateRule::HalfPattern) {
  params.validate();
  // Track every cell as a mask over the initial state and record the four
  // feedback bits produced by four consecutive clocks.
  const std::uint64_t taps = params.polys[0].tap_mask();
  std::vector<std::uint64_t> cells(length_);
  for (unsigned i = 0; i < length_; ++i) cells[i] = std::uint64_t{1} << i;
  for (unsigned j = 0; j < 4; ++j) {
    std::uint64_t fb = 0;
    for (unsigned i = 0; i < length_; ++i) {
      if ((taps >> i) & 1u) fb ^= cells[i];
    }
    feedback_[j] = fb;
    std::rotate(cells.begin(), cells.begin() + 1, cells.end());
    cells.back() = fb;
  }
}

std::vector<R0Step> simulate_r0(std::uint64_t i0, const CipherParams& params, std::size_t n) {
  if (i0 == 0) throw Error(Errc::DegenerateKey, "R0 initial state must be nonzero");
  R0Walker walker(params);
  walker.reset(i0);
  std::vector<R0Step> out(n);
  for (auto& step : out) {
    walker.step();
    step = {walker.last_step_count(), walker.x0(), boolfn::TruthTable3{walker.f()}};
  }
  return out;
}

std::vector<std::uint64_t> first_step_equivalents(std::uint64_t i0, const CipherParams& params) {
  if (i0 == 0) throw Error(Errc::DegenerateKey, "R0 initial state must be nonzero");
  const unsigned length = params.length(0);
  const std::uint64_t taps = params.polys[0].tap_mask();
  R0Walker walker(params);
  walker.reset(i0);
  walker.step();
  // Walk back from the landing state; a predecessor k clocks earlier
  // belongs to the class when its own step count is k.
  std::vector<std::uint64_t> out;
  std::uint64_t state = walker.state();
  for (unsigned k = 1; k <= 4; ++k) {
    const std::uint64_t upper = (state << 1) & ((std::uint64_t{1} << length) - 1);
    const bool fed = (state >> (length - 1)) & 1u;
    state = upper | static_cast<std::uint64_t>(fed ^ galois::parity(upper & taps));
    if ((state & 3u) + 1 == k) out.push_back(state);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SearchRange full_range(const CipherParams& params) {
  return {1, std::uint64_t{1} << params.length(0)};
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
  int base = 10;
  if (text.starts_with("0x") || text.starts_with("0X")) {
    text.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw Error(Errc::EmptySearchRange, "invalid number '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

SearchRange parse_range(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::EmptySearchRange, "range must be lo:hi");
  return {parse_u64(text.substr(0, colon)), parse_u64(text.substr(colon + 1))};
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::DiscardedByConstant: return "DiscardedByConstant";
    case Outcome::Inconsistent: return "Inconsistent";
    case Outcome::Underdetermined: return "Underdetermined";
    case Outcome::FailedVerification: return "FailedVerification";
    case Outcome::VerifiedKey: return "VerifiedKey";
  }
  return "Unknown";
}

// ---------------------------------------------------------------- KPA search

namespace {

// Shared, read-only state of one attack run.
struct SearchContext {
  const CipherParams* params = nullptr;
  std::span<const std::uint8_t> sigma;       // the N bits used to build equations
  std::span<const std::uint8_t> full_sample; // what a key must regenerate
  std::size_t unknowns = 0;
  std::size_t words = 0;
  std::array<std::size_t, 4> offsets{};      // unknown index of cell 0 of R1..R3
  unsigned max_free_dimension = 24;
  bool record_discarded = false;
  bool preimage_equations = true;
  // Output forms of x1, x2, x3 at every step over the joint unknown space:
  // forms[((t * 3) + i) * words + w]. They do not depend on i0.
  std::vector<std::uint64_t> forms;

  const std::uint64_t* form(std::size_t t, unsigned i) const { return forms.data() + (t * 3 + i) * words; }
};

SearchContext make_context(const KeystreamSample& sample, const AttackConfig& cfg) {
  SearchContext ctx;
  ctx.params = &cfg.params;
  const std::size_t n = cfg.max_plaintext_bits ? std::min(cfg.max_plaintext_bits, sample.sigma.size())
                                               : sample.sigma.size();
  ctx.sigma = std::span(sample.sigma).first(n);
  ctx.full_sample = sample.sigma;
  ctx.unknowns = cfg.params.length(1) + cfg.params.length(2) + cfg.params.length(3);
  ctx.words = (ctx.unknowns + 63) / 64;
  ctx.offsets = {0, 0, cfg.params.length(1), cfg.params.length(1) + cfg.params.length(2)};
  ctx.max_free_dimension = std::min(cfg.max_free_dimension, 32u);
  ctx.record_discarded = cfg.record_discarded;
  ctx.preimage_equations = cfg.preimage_equations;

  std::array<galois::SymbolicLfsr, 3> regs{
      galois::SymbolicLfsr(cfg.params.polys[1], ctx.unknowns, ctx.offsets[1]),
      galois::SymbolicLfsr(cfg.params.polys[2], ctx.unknowns, ctx.offsets[2]),
      galois::SymbolicLfsr(cfg.params.polys[3], ctx.unknowns, ctx.offsets[3])};
  ctx.forms.reserve(n * 3 * ctx.words);
  for (std::size_t t = 0; t < n; ++t) {
    for (auto& r : regs) {
      r.clock();
      const auto w = r.cell(0).coefficients.words();
      ctx.forms.insert(ctx.forms.end(), w.begin(), w.end());
    }
  }
  return ctx;
}

bool dot_words(const std::uint64_t* a, std::span<const std::uint64_t> b) {
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < b.size(); ++w) acc ^= a[w] & b[w];
  return galois::parity(acc);
}

// A non-affine step re-expressed over the free coordinates z of the solution
// space: x_i = constant_i xor <masks_i, z>.
struct FreeCheck {
  std::uint32_t masks[3];
  std::uint8_t constants;  // bit i for x_(i+1)
  std::uint8_t f;
  bool target;             // sigma_t xor x0_t
};

// Linear relations <a, x> = b (a != 0) holding on every x with f(x) = target.
struct HullEquations {
  std::uint8_t count = 0;
  std::uint8_t masks[7];
  std::uint8_t rhs[7];
};

const HullEquations& hull_equations(std::uint8_t f, bool target) {
  static const auto table = [] {
    std::array<HullEquations, 512> out{};
    for (unsigned g = 0; g < 256; ++g) {
      for (unsigned b = 0; b < 2; ++b) {
        auto& h = out[g * 2 + b];
        for (unsigned a = 1; a < 8; ++a) {
          int value = -1;
          bool holds = true;
          for (unsigned x = 0; x < 8 && holds; ++x) {
            if (((g >> x) & 1u) != b) continue;
            const int v = boolfn::inner(x, a);
            if (value < 0) value = v;
            holds = value == v;
          }
          if (holds && value >= 0) {
            h.masks[h.count] = static_cast<std::uint8_t>(a);
            h.rhs[h.count] = static_cast<std::uint8_t>(value);
            ++h.count;
          }
        }
      }
    }
    return out;
  }();
  return table[f * 2u + target];
}

struct PendingStep {
  std::uint32_t t;
  std::uint8_t f;
  bool target;
};

class Worker {
 public:
  explicit Worker(const SearchContext& ctx)
      : ctx_(ctx), walker_(*ctx.params), elim_(ctx.unknowns), row_(ctx.words) {}

  void run(std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i0 = lo; i0 < hi; ++i0) candidate(i0);
  }

  std::uint64_t searched = 0;
  std::uint64_t discarded = 0;
  std::uint64_t inconsistent = 0;
  std::uint64_t underdetermined = 0;
  std::uint64_t failed = 0;
  std::vector<CandidateReport> reports;

 private:
  void candidate(std::uint64_t i0) {
    ++searched;
    const auto sigma = ctx_.sigma;
    walker_.reset(i0);
    for (std::size_t t = 0; t < sigma.size(); ++t) {
      walker_.step();
      const std::uint8_t f = walker_.f();
      // Constant table: sigma_t must equal x0 (0x00) or its complement (0xFF).
      if (static_cast<std::uint8_t>(f + 1) <= 1 && sigma[t] != (walker_.x0() ^ (f & 1u))) {
        ++discarded;
        if (ctx_.record_discarded) {
          reports.push_back({i0, 0, 0, 0, Outcome::DiscardedByConstant, t + 1, std::nullopt});
        }
        return;
      }
    }
    solve(i0);
  }

  void solve(std::uint64_t i0) {
    const auto sigma = ctx_.sigma;
    CandidateReport rep{i0, 0, 0, 0, Outcome::Underdetermined, sigma.size(), std::nullopt};
    elim_.clear();
    pending_.clear();
    walker_.reset(i0);
    for (std::size_t t = 0; t < sigma.size(); ++t) {
      walker_.step();
      const boolfn::TruthTable3 f{walker_.f()};
      const bool target = sigma[t] ^ walker_.x0();
      const auto& cls = boolfn::classification(f);
      if (!cls.affine()) {
        pending_.push_back({static_cast<std::uint32_t>(t), f.table, target});
        continue;
      }
      if (cls.mask == 0) continue;  // constant table, already checked
      std::fill(row_.begin(), row_.end(), 0);
      for (unsigned i = 0; i < 3; ++i) {
        if ((cls.mask >> i) & 1u) {
          const auto* form = ctx_.form(t, i);
          for (std::size_t w = 0; w < ctx_.words; ++w) row_[w] ^= form[w];
        }
      }
      ++rep.equations_harvested;
      if (elim_.add(row_, target ^ cls.complement) == galois::Gf2Eliminator::Insert::Contradiction) {
        rep.rank = elim_.rank();
        rep.outcome = Outcome::Inconsistent;
        rep.stopped_at = t + 1;
        ++inconsistent;
        reports.push_back(std::move(rep));
        return;
      }
    }
    if (ctx_.preimage_equations && elim_.rank() < ctx_.unknowns && !add_preimage_equations(rep)) {
      ++inconsistent;
      reports.push_back(std::move(rep));
      return;
    }
    rep.rank = elim_.rank();
    const std::size_t free_dims = ctx_.unknowns - rep.rank;
    if (free_dims > ctx_.max_free_dimension) {
      ++underdetermined;
      reports.push_back(std::move(rep));
      return;
    }
    enumerate(rep, free_dims);
  }

  // False on contradiction (rep is then filled in as Inconsistent).
  bool add_preimage_equations(CandidateReport& rep) {
    for (const auto& p : pending_) {
      const auto& h = hull_equations(p.f, p.target);
      for (unsigned e = 0; e < h.count; ++e) {
        std::fill(row_.begin(), row_.end(), 0);
        for (unsigned i = 0; i < 3; ++i) {
          if ((h.masks[e] >> i) & 1u) {
            const auto* form = ctx_.form(p.t, i);
            for (std::size_t w = 0; w < ctx_.words; ++w) row_[w] ^= form[w];
          }
        }
        const auto r = elim_.add(row_, h.rhs[e]);
        if (r == galois::Gf2Eliminator::Insert::Contradiction) {
          rep.rank = elim_.rank();
          rep.outcome = Outcome::Inconsistent;
          rep.stopped_at = p.t + 1;
          return false;
        }
        rep.preimage_equations += r == galois::Gf2Eliminator::Insert::Independent;
      }
      if (elim_.rank() == ctx_.unknowns) break;
    }
    return true;
  }

  void enumerate(CandidateReport& rep, std::size_t free_dims) {
    const auto space = elim_.solution_space();
    const auto particular = space.particular.words();

    // Enough checks to make a wrong assignment's survival negligible; any
    // survivor is still verified against the full sample.
    const std::size_t k = std::min(pending_.size(), free_dims + 64);
    checks_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      auto& c = checks_[j];
      c.constants = 0;
      c.f = pending_[j].f;
      c.target = pending_[j].target;
      for (unsigned i = 0; i < 3; ++i) {
        const auto* form = ctx_.form(pending_[j].t, i);
        c.constants |= static_cast<std::uint8_t>(dot_words(form, particular) << i);
        std::uint32_t m = 0;
        for (std::size_t d = 0; d < free_dims; ++d) {
          m |= static_cast<std::uint32_t>(dot_words(form, space.directions[d].words())) << d;
        }
        c.masks[i] = m;
      }
    }

    bool found = false;
    const std::uint64_t count = std::uint64_t{1} << free_dims;
    for (std::uint64_t z = 0; z < count; ++z) {
      const auto zz = static_cast<std::uint32_t>(z);
      bool ok = true;
      for (const auto& c : checks_) {
        const unsigned v = (c.constants ^ (__builtin_parity(c.masks[0] & zz) |
                                           __builtin_parity(c.masks[1] & zz) << 1 |
                                           __builtin_parity(c.masks[2] & zz) << 2)) & 7u;
        if (((c.f >> v) & 1u) != c.target) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      galois::BitVector x = space.particular;
      for (std::size_t d = 0; d < free_dims; ++d) {
        if ((z >> d) & 1u) x ^= space.directions[d];
      }
      if (auto key = verify(rep.i0, x)) {
        CandidateReport hit = rep;
        hit.outcome = Outcome::VerifiedKey;
        hit.key = std::move(key);
        reports.push_back(std::move(hit));
        found = true;
      }
    }
    if (!found) {
      rep.outcome = Outcome::FailedVerification;
      ++failed;
      reports.push_back(std::move(rep));
    }
  }

  std::optional<SecretKey> verify(std::uint64_t i0, const galois::BitVector& x) const {
    const auto& params = *ctx_.params;
    std::array<std::uint64_t, 4> states{i0, 0, 0, 0};
    for (std::size_t r = 1; r < 4; ++r) {
      for (unsigned j = 0; j < params.length(r); ++j) {
        if (x.get(ctx_.offsets[r] + j)) states[r] |= std::uint64_t{1} << j;
      }
      if (states[r] == 0) return std::nullopt;
    }
    auto key = SecretKey::from_states(params, states);
    auto state = cipher::key_setup(key, params);
    for (auto bit : ctx_.full_sample) {
      if (state.next_bit().sigma != static_cast<bool>(bit)) return std::nullopt;
    }
    return key;
  }

  const SearchContext& ctx_;
  R0Walker walker_;
  galois::Gf2Eliminator elim_;
  std::vector<std::uint64_t> row_;
  std::vector<PendingStep> pending_;
  std::vector<FreeCheck> checks_;
};

constexpr std::uint64_t chunk_size = 1u << 14;

}  // namespace

KpaReport kpa_attack(const KeystreamSample& sample, const AttackConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.params.validate();
  const SearchRange limit = full_range(cfg.params);
  const SearchRange range = cfg.search_range.value_or(limit);
  if (range.size() == 0 || range.lo < limit.lo || range.hi > limit.hi) {
    throw Error(Errc::EmptySearchRange, "search range must be a nonempty subset of [1, 2^L0)");
  }
  if (sample.sigma.empty()) throw Error(Errc::LengthMismatch, "keystream sample is empty");

  const SearchContext ctx = make_context(sample, cfg);
  const std::uint64_t chunks = (range.size() + chunk_size - 1) / chunk_size;
  const unsigned workers = static_cast<unsigned>(std::clamp<std::uint64_t>(cfg.workers, 1, chunks));

  std::vector<Worker> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(ctx);

  auto chunk_bounds = [&](std::uint64_t c) {
    const std::uint64_t lo = range.lo + c * chunk_size;
    return std::pair{lo, std::min(range.hi, lo + chunk_size)};
  };

  if (workers == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) {
      const auto [lo, hi] = chunk_bounds(c);
      pool[0].run(lo, hi);
      if (cfg.progress) cfg.progress(static_cast<double>(c + 1) / static_cast<double>(chunks));
    }
  } else {
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> done{0};
    std::atomic<unsigned> exited{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> threads;
      for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
          try {
            for (std::uint64_t c = next++; c < chunks; c = next++) {
              const auto [lo, hi] = chunk_bounds(c);
              pool[w].run(lo, hi);
              ++done;
            }
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = chunks;
          }
          ++exited;
        });
      }
      if (cfg.progress) {
        while (exited.load() < workers) {
          std::this_thread::sleep_for(std::chrono::milliseconds(100));
          cfg.progress(static_cast<double>(done.load()) / static_cast<double>(chunks));
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
    if (cfg.progress) cfg.progress(1.0);
  }

  KpaReport report;
  report.searched_range = range;
  report.sample_bits = ctx.sigma.size();
  for (auto& w : pool) {
    report.candidates_searched += w.searched;
    report.discarded_by_constant += w.discarded;
    report.inconsistent += w.inconsistent;
    report.underdetermined += w.underdetermined;
    report.failed_verification += w.failed;
    std::move(w.reports.begin(), w.reports.end(), std::back_inserter(report.candidates));
  }
  std::stable_sort(report.candidates.begin(), report.candidates.end(),
                   [](const auto& a, const auto& b) { return a.i0 < b.i0; });
  for (const auto& c : report.candidates) {
    if (c.key) report.verified_keys.push_back(*c.key);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

KpaReport merge_reports(const std::vector<KpaReport>& shards) {
  KpaReport out;
  if (shards.empty()) return out;
  out.searched_range = shards.front().searched_range;
  out.sample_bits = shards.front().sample_bits;
  for (const auto& s : shards) {
    out.searched_range.lo = std::min(out.searched_range.lo, s.searched_range.lo);
    out.searched_range.hi = std::max(out.searched_range.hi, s.searched_range.hi);
    out.candidates_searched += s.candidates_searched;
    out.discarded_by_constant += s.discarded_by_constant;
    out.inconsistent += s.inconsistent;
    out.underdetermined += s.underdetermined;
    out.failed_verification += s.failed_verification;
    out.wall_seconds += s.wall_seconds;
    out.candidates.insert(out.candidates.end(), s.candidates.begin(), s.candidates.end());
  }
  std::stable_sort(out.candidates.begin(), out.candidates.end(),
                   [](const auto& a, const auto& b) { return a.i0 < b.i0; });
  for (const auto& c : out.candidates) {
    if (c.key) out.verified_keys.push_back(*c.key);
  }
  return out;
}

std::string KpaReport::to_json() const {
  nlohmann::json j;
  j["searched_range"] = {{"lo", searched_range.lo}, {"hi", searched_range.hi}};
  j["sample_bits"] = sample_bits;
  j["candidates_searched"] = candidates_searched;
  j["candidates_discarded_by_constant"] = discarded_by_constant;
  j["candidates_inconsistent"] = inconsistent;
  j["candidates_underdetermined"] = underdetermined;
  j["candidates_failed_verification"] = failed_verification;
  j["verified_keys"] = nlohmann::json::array();
  for (const auto& k : verified_keys) j["verified_keys"].push_back(k.to_hex());
  j["wall_time"] = wall_seconds;
  return j.dump(2);
}

}  // namespace bsea::attacks
