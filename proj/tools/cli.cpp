#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "bsea/attacks.hpp"
#include "bsea/boolfn.hpp"
#include "bsea/cipher.hpp"
#include "bsea/error.hpp"
#include "bsea/randtests.hpp"

namespace bsea::cli {

namespace {

using cipher::CipherParams;
using cipher::SecretKey;

// Raised for bad flag combinations that CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string params_path;
  std::string format = "raw";

  CipherParams params(const CipherParams& fallback = CipherParams::bsea1()) const {
    if (params_path.empty()) return fallback;
    const auto bytes = read_file(params_path);
    return cipher::params_from_json(std::string(bytes.begin(), bytes.end()));
  }
  BitFormat bit_format() const { return parse_bit_format(format); }
};

struct KeyOptions {
  std::string hex;
  std::string file;

  bool given() const { return !hex.empty() || !file.empty(); }
  SecretKey load(const CipherParams& params) const {
    if (!hex.empty() && !file.empty()) throw UsageError("give either --key or --key-file, not both");
    if (!given()) throw UsageError("a key is required (--key or --key-file)");
    std::string text = hex;
    if (!file.empty()) {
      const auto bytes = read_file(file);
      text.assign(bytes.begin(), bytes.end());
      while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    }
    return SecretKey::from_hex(text, params);
  }
};

void add_key_options(CLI::App* cmd, KeyOptions& key) {
  cmd->add_option("--key", key.hex, "key as hex digits");
  cmd->add_option("--key-file", key.file, "file holding the hex key");
}

void add_common(CLI::App* cmd, Common& c, bool with_format = true) {
  cmd->add_option("--params", c.params_path, "cipher parameters (JSON)");
  if (with_format) {
    cmd->add_option("--format", c.format, "bit file format")->check(CLI::IsMember({"raw", "hexbits"}));
  }
}

// Key bits drawn MSB-first from successive 64-bit outputs; zero register
// segments are redrawn.
SecretKey draw_key(std::mt19937_64& rng, const CipherParams& params) {
  for (;;) {
    Bits bits(params.total_bits());
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (i % 64 == 0) word = rng();
      bits[i] = static_cast<std::uint8_t>((word >> (63 - i % 64)) & 1u);
    }
    SecretKey key(std::move(bits));
    bool degenerate = false;
    for (std::size_t r = 0; r < 4; ++r) degenerate |= key.register_state(params, r) == 0;
    if (!degenerate) return key;
  }
}

void emit_bits(const std::string& path, BitFormat format, std::span<const std::uint8_t> bits, std::ostream& out) {
  if (!path.empty() && path != "-") {
    write_bits(path, format, bits);
    return;
  }
  const auto bytes = pack_msb_first(bits);
  if (format == BitFormat::HexBits) {
    out << to_hex(bytes) << '\n';
  } else {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

std::optional<std::size_t> opt_n(std::size_t n) { return n ? std::optional<std::size_t>(n) : std::nullopt; }

std::uint64_t parse_u64(const std::string& text, const char* what) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(std::string(what) + ": not a number: " + text);
  return v;
}

std::string hex_state(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

// ------------------------------------------------------------------ commands

int cmd_keygen(const Common& c, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const auto params = c.params();
  params.validate();
  std::mt19937_64 rng(seed);
  const auto hex = draw_key(rng, params).to_hex();
  if (!out_path.empty()) {
    const std::string line = hex + "\n";
    write_file(out_path, std::span(reinterpret_cast<const std::uint8_t*>(line.data()), line.size()));
  }
  out << hex << '\n';
  return ok;
}

int cmd_crypt(const Common& c, const KeyOptions& k, const std::string& in, const std::string& out_path,
              std::size_t n, std::ostream& out) {
  const auto params = c.params();
  const auto key = k.load(params);
  const auto bits = read_bits(in, c.bit_format(), opt_n(n));
  emit_bits(out_path, c.bit_format(), cipher::encrypt(key, params, bits), out);
  return ok;
}

int cmd_keystream(const Common& c, const KeyOptions& k, std::size_t n, const std::string& out_path,
                  std::ostream& out) {
  const auto params = c.params();
  emit_bits(out_path, c.bit_format(), cipher::keystream(k.load(params), params, n), out);
  return ok;
}

void describe_table(boolfn::TruthTable3 f, std::ostream& out) {
  const auto spectrum = boolfn::walsh_transform(f);
  const auto cls = boolfn::classify(f);
  const auto props = boolfn::properties(f);
  out << "truth table     " << boolfn::to_string(f) << '\n'
      << "walsh spectrum  " << boolfn::to_string(spectrum) << '\n'
      << "classification  " << cls.to_string() << '\n'
      << "balanced        " << (props.balanced ? "yes" : "no") << '\n'
      << "nonlinearity    " << props.nonlinearity << '\n'
      << "backdoor member: " << (boolfn::in_backdoor_set(f) ? "yes" : "no") << '\n';
}

int cmd_analyze(const std::string& table, bool all, std::ostream& out) {
  if (all == !table.empty()) throw UsageError("give one truth table or --all");
  if (!all) {
    describe_table(boolfn::parse_truth_table(table), out);
    return ok;
  }
  std::size_t members = 0;
  for (unsigned v = 0; v < 256; ++v) {
    const boolfn::TruthTable3 f{static_cast<std::uint8_t>(v)};
    const bool member = boolfn::in_backdoor_set(f);
    members += member;
    out << boolfn::to_string(f) << ' ' << boolfn::to_string(boolfn::walsh_transform(f)) << ' '
        << boolfn::classify(f).to_string() << (member ? " backdoor" : "") << '\n';
  }
  out << "backdoor set: " << members << " of 256 tables\n";
  return ok;
}

struct KpaOptions {
  std::string plaintext, ciphertext, keystream, range, report;
  std::size_t n = 0;
  unsigned workers = 1;
  unsigned max_free = 24;
  bool affine_only = false;
  bool quiet = false;
};

bool one_class(const std::vector<SecretKey>& keys, const CipherParams& params) {
  const auto& first = keys.front();
  const auto cls = attacks::first_step_equivalents(first.register_state(params, 0), params);
  return std::all_of(keys.begin(), keys.end(), [&](const SecretKey& k) {
    for (std::size_t r = 1; r < 4; ++r) {
      if (k.register_state(params, r) != first.register_state(params, r)) return false;
    }
    return std::binary_search(cls.begin(), cls.end(), k.register_state(params, 0));
  });
}

int cmd_kpa(const Common& c, const KpaOptions& o, std::ostream& out, std::ostream& err) {
  const bool pair = !o.plaintext.empty() || !o.ciphertext.empty();
  if (pair == !o.keystream.empty()) {
    throw UsageError("give --plaintext and --ciphertext, or --keystream");
  }
  if (pair && (o.plaintext.empty() || o.ciphertext.empty())) {
    throw UsageError("--plaintext and --ciphertext go together");
  }
  const auto params = c.params();
  const auto fmt = c.bit_format();
  attacks::KeystreamSample sample;
  if (pair) {
    sample = attacks::derive_keystream(read_bits(o.plaintext, fmt, opt_n(o.n)),
                                       read_bits(o.ciphertext, fmt, opt_n(o.n)));
  } else {
    sample.sigma = read_bits(o.keystream, fmt, opt_n(o.n));
  }

  const auto range = o.range.empty() ? attacks::full_range(params) : attacks::parse_range(o.range);
  const unsigned shards = static_cast<unsigned>(std::clamp<std::uint64_t>(o.workers, 1, std::max<std::uint64_t>(range.size(), 1)));

  // One independent attack per contiguous sub-range, merged afterwards.
  std::vector<attacks::KpaReport> reports(shards);
  std::vector<std::atomic<double>> progress(shards);
  std::atomic<unsigned> finished{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto start = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> threads;
    for (unsigned s = 0; s < shards; ++s) {
      const std::uint64_t lo = range.lo + range.size() * s / shards;
      const std::uint64_t hi = range.lo + range.size() * (s + 1) / shards;
      threads.emplace_back([&, s, lo, hi] {
        try {
          attacks::AttackConfig cfg;
          cfg.params = params;
          cfg.search_range = attacks::SearchRange{lo, hi};
          cfg.max_free_dimension = o.max_free;
          cfg.preimage_equations = !o.affine_only;
          cfg.progress = [&, s](double f) { progress[s] = f; };
          reports[s] = attacks::kpa_attack(sample, cfg);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
        ++finished;
      });
    }
    while (finished.load() < shards) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      if (o.quiet) continue;
      double sum = 0;
      for (const auto& p : progress) sum += p.load();
      err << "\rsearching R0 states: " << static_cast<int>(100 * sum / shards) << "%" << std::flush;
    }
    if (!o.quiet) err << "\rsearching R0 states: done\n";
  }
  if (failure) std::rethrow_exception(failure);

  auto merged = attacks::merge_reports(reports);
  merged.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  out << "searched range     " << merged.searched_range.lo << ":" << merged.searched_range.hi << " ("
      << merged.candidates_searched << " candidates, " << shards << " shard" << (shards > 1 ? "s" : "") << ")\n"
      << "sample bits        " << merged.sample_bits << '\n'
      << "constant filter    " << merged.discarded_by_constant << '\n'
      << "inconsistent       " << merged.inconsistent << '\n'
      << "underdetermined    " << merged.underdetermined << '\n'
      << "failed verify      " << merged.failed_verification << '\n'
      << "verified keys      " << merged.verified_keys.size() << '\n';
  for (const auto& k : merged.verified_keys) out << "key " << k.to_hex() << '\n';
  if (merged.verified_keys.size() > 1 && one_class(merged.verified_keys, params)) {
    out << "note: these keys differ only in R0 and merge after the first step; they give identical keystreams\n";
  }
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.2f", merged.wall_seconds);
  out << "wall time          " << wall << " s\n";

  if (!o.report.empty()) {
    const auto json = merged.to_json() + "\n";
    write_file(o.report, std::span(reinterpret_cast<const std::uint8_t*>(json.data()), json.size()));
  }
  return merged.verified_keys.empty() ? no_key_found : ok;
}

struct CoaOptions {
  std::string ciphertext, i0;
  KeyOptions key;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  double bias = 0.6;
  double floor = 0.875;
  std::size_t top = 3;
};

int cmd_coa(const Common& c, const CoaOptions& o, std::ostream& out) {
  const auto params = c.params(CipherParams::reduced());
  params.validate();
  const bool simulate = o.seed.has_value();
  if (simulate == !o.ciphertext.empty()) {
    throw UsageError("give --ciphertext with --i0, or --seed to simulate");
  }
  if (simulate && !o.i0.empty()) throw UsageError("--i0 is taken from the simulated key");

  Bits ciphertext;
  std::uint64_t i0 = 0;
  std::optional<SecretKey> truth;
  if (simulate) {
    std::mt19937_64 rng(*o.seed);
    truth = o.key.given() ? o.key.load(params) : draw_key(rng, params);
    std::bernoulli_distribution one(1.0 - o.bias);
    Bits plaintext(o.n.value_or(50000));
    for (auto& b : plaintext) b = one(rng);
    ciphertext = cipher::encrypt(*truth, params, plaintext);
    i0 = truth->register_state(params, 0);
    out << "simulated key      " << truth->to_hex() << '\n';
  } else {
    if (o.i0.empty()) throw UsageError("--i0 is required with --ciphertext");
    ciphertext = read_bits(o.ciphertext, c.bit_format(), o.n);
    i0 = parse_u64(o.i0, "--i0");
  }

  attacks::AttackConfig cfg;
  cfg.params = params;
  cfg.plaintext_zero_bias = o.bias;
  cfg.coa_probability_floor = o.floor;
  const auto eqs = attacks::coa_harvest(ciphertext, i0, cfg);
  out << "ciphertext bits    " << ciphertext.size() << '\n'
      << "i0                 " << hex_state(i0) << '\n'
      << "noisy equations    " << eqs.size() << '\n';

  bool all_first = true;
  for (unsigned r = 1; r <= 3; ++r) {
    const auto sub = attacks::equations_for_register(eqs, r);
    const auto ranked = attacks::coa_decode_register(sub, params.length(r), o.top);
    out << "R" << r << " (L=" << params.length(r) << ", " << sub.size() << " equations):";
    for (const auto& s : ranked) out << ' ' << hex_state(s.state) << "/" << s.score;
    out << '\n';
    if (truth) {
      const auto want = truth->register_state(params, r);
      const bool first = !ranked.empty() && ranked.front().state == want;
      all_first &= first;
      out << "  true state " << hex_state(want) << (first ? " ranked first" : " not ranked first") << '\n';
    }
  }
  return truth && !all_first ? no_key_found : ok;
}

struct FipsOptions {
  std::string in;
  KeyOptions key;
  std::size_t n = 0;
};

int cmd_fips(const Common& c, const FipsOptions& o, std::ostream& out) {
  if (o.in.empty() == !o.key.given()) throw UsageError("give --in or a key");
  Bits bits;
  if (!o.in.empty()) {
    bits = read_bits(o.in, c.bit_format(), opt_n(o.n));
  } else {
    const auto params = c.params();
    bits = cipher::keystream(o.key.load(params), params, o.n ? o.n : randtests::block_bits);
  }
  const std::size_t blocks = bits.size() / randtests::block_bits;
  if (blocks == 0) {
    throw Error(Errc::WrongBlockLength, "need at least 20000 bits, got " + std::to_string(bits.size()));
  }
  std::size_t passed = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto block = std::span(bits).subspan(b * randtests::block_bits, randtests::block_bits);
    const auto verdicts = randtests::fips_battery(block);
    const bool pass = randtests::all_pass(verdicts);
    passed += pass;
    out << "block " << b << ':';
    for (const auto& v : verdicts) {
      out << ' ' << v.name << '=';
      if (v.statistics.size() == 1) {
        out << v.statistics[0];
      } else {
        out << '(';
        for (std::size_t i = 0; i < v.statistics.size(); ++i) out << (i ? "," : "") << v.statistics[i];
        out << ')';
      }
      out << (v.pass ? " pass" : " FAIL");
    }
    out << (pass ? "  => PASS" : "  => FAIL") << '\n';
  }
  out << passed << "/" << blocks << " blocks pass the FIPS 140-2 battery\n";
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"BSEA-1 stream cipher toolkit: cipher, truth-table analysis, key recovery, FIPS tests", "bsea"};
  app.require_subcommand(1);

  Common common;
  KeyOptions key;
  std::string in, out_path;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  auto* keygen = app.add_subcommand("keygen", "draw a random non-degenerate key");
  keygen->add_option("--seed", seed, "RNG seed")->required();
  keygen->add_option("--out", out_path, "also write the key to this file");
  add_common(keygen, common, false);

  auto* encrypt = app.add_subcommand("encrypt", "XOR a bit file with the keystream");
  auto* decrypt = app.add_subcommand("decrypt", "inverse of encrypt");
  for (auto* cmd : {encrypt, decrypt}) {
    add_key_options(cmd, key);
    add_common(cmd, common);
    cmd->add_option("--in", in, "input bit file")->required();
    cmd->add_option("--out", out_path, "output bit file (default: stdout)");
    cmd->add_option("--n", n, "use only the first n bits");
  }

  auto* keystream = app.add_subcommand("keystream", "emit n keystream bits");
  add_key_options(keystream, key);
  add_common(keystream, common);
  keystream->add_option("--n", n, "number of bits")->required();
  keystream->add_option("--out", out_path, "output bit file (default: stdout)");

  std::string table;
  bool all = false;
  auto* analyze = app.add_subcommand("analyze-f", "Walsh spectrum and classification of a truth table");
  analyze->add_option("table", table, "8-bit truth table, e.g. 0x69");
  analyze->add_flag("--all", all, "scan all 256 tables");

  KpaOptions kpa;
  auto* attack_kpa = app.add_subcommand("attack-kpa", "known-plaintext key recovery over R0 states");
  add_common(attack_kpa, common);
  attack_kpa->add_option("--plaintext", kpa.plaintext, "plaintext bit file");
  attack_kpa->add_option("--ciphertext", kpa.ciphertext, "ciphertext bit file");
  attack_kpa->add_option("--keystream", kpa.keystream, "keystream bit file");
  attack_kpa->add_option("--n", kpa.n, "use only the first n bits");
  attack_kpa->add_option("--range", kpa.range, "R0 states lo:hi (half-open)");
  attack_kpa->add_option("--workers", kpa.workers, "number of range shards searched in parallel")
      ->check(CLI::Range(1u, 256u));
  attack_kpa->add_option("--max-free", kpa.max_free, "largest solution space enumerated per candidate (log2)")
      ->check(CLI::Range(0u, 32u));
  attack_kpa->add_flag("--affine-only", kpa.affine_only, "use affine episodes only, no preimage equations");
  attack_kpa->add_option("--report", kpa.report, "write a JSON report");
  attack_kpa->add_flag("--quiet", kpa.quiet, "no progress on stderr");

  CoaOptions coa;
  auto* attack_coa = app.add_subcommand("attack-coa", "ciphertext-only correlation decoding (reduced instance by default)");
  add_common(attack_coa, common);
  add_key_options(attack_coa, coa.key);
  attack_coa->add_option("--ciphertext", coa.ciphertext, "ciphertext bit file");
  attack_coa->add_option("--i0", coa.i0, "R0 initial state");
  attack_coa->add_option("--seed", coa.seed, "simulate: draw key (unless given) and biased plaintext");
  attack_coa->add_option("--n", coa.n, "ciphertext bits (simulation default 50000)");
  attack_coa->add_option("--bias", coa.bias, "probability of a zero plaintext bit")->check(CLI::Range(0.5, 1.0));
  attack_coa->add_option("--floor", coa.floor, "smallest table approximation probability used");
  attack_coa->add_option("--top", coa.top, "states listed per register");

  FipsOptions fips;
  auto* fips_cmd = app.add_subcommand("fips", "FIPS 140-2 battery on 20000-bit blocks");
  add_common(fips_cmd, common);
  add_key_options(fips_cmd, fips.key);
  fips_cmd->add_option("--in", fips.in, "bit file to test");
  fips_cmd->add_option("--n", fips.n, "bits to test (keystream length, or file prefix)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "bsea: " << e.what() << '\n';
    return usage_error;
  }

  try {
    if (*keygen) return cmd_keygen(common, seed, out_path, out);
    if (*encrypt || *decrypt) return cmd_crypt(common, key, in, out_path, n, out);
    if (*keystream) return cmd_keystream(common, key, n, out_path, out);
    if (*analyze) return cmd_analyze(table, all, out);
    if (*attack_kpa) return cmd_kpa(common, kpa, out, err);
    if (*attack_coa) return cmd_coa(common, coa, out);
    if (*fips_cmd) return cmd_fips(common, fips, out);
  } catch (const UsageError& e) {
    err << "bsea: " << e.what() << '\n';
    return usage_error;
  } catch (const Error& e) {
    err << "bsea: " << errc_name(e.code()) << ": " << e.what() << '\n';
    return data_error;
  } catch (const std::exception& e) {
    err << "bsea: internal error: " << e.what() << '\n';
    return internal_error;
  }
  return usage_error;
}

}  // namespace bsea::cli
