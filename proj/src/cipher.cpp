#include "bsea/cipher.hpp"

#include <json.hpp>

#include "bsea/error.hpp"

namespace bsea::cipher {

std::string_view to_string(UpdateRule rule) {
  return rule == UpdateRule::Full ? "full" : "half";
}

UpdateRule parse_update_rule(std::string_view name) {
  if (name == "full" || name == "Full") return UpdateRule::Full;
  if (name == "half" || name == "HalfPattern") return UpdateRule::HalfPattern;
  throw Error(Errc::InvalidParams, "unknown update rule '" + std::string(name) + "'");
}

CipherParams CipherParams::bsea1() {
  CipherParams p;
  p.polys = {
      galois::BinaryPolynomial{23, 22, 20, 18, 17, 13, 11, 10, 9, 8, 4, 3, 2, 1, 0},
      galois::BinaryPolynomial{29, 28, 27, 25, 24, 23, 22, 21, 18, 17, 13, 11, 10, 6, 5, 3, 2, 1, 0},
      galois::BinaryPolynomial{31, 30, 27, 25, 24, 23, 22, 21, 20, 16, 15, 13, 12, 11, 10, 9, 8, 4, 3, 1, 0},
      galois::BinaryPolynomial{37, 34, 33, 32, 30, 29, 26, 24, 20, 19, 18, 17, 16, 13, 11, 8, 7, 6, 4, 2, 0},
  };
  p.initial_f = boolfn::TruthTable3{0x6B};
  p.update_rule = UpdateRule::Full;
  return p;
}

CipherParams CipherParams::reduced() {
  CipherParams p = bsea1();
  p.polys = {galois::BinaryPolynomial{9, 4, 0}, galois::BinaryPolynomial{11, 2, 0},
             galois::BinaryPolynomial{13, 4, 3, 1, 0}, galois::BinaryPolynomial{17, 3, 0}};
  return p;
}

std::vector<std::uint64_t> bsea1_order_factors(std::size_t reg) {
  switch (reg) {
    case 0: return {47, 178481};
    case 1: return {233, 1103, 2089};
    case 2: return {2147483647};
    case 3: return {223, 616318177};
  }
  throw Error(Errc::InvalidParams, "register index out of range");
}

unsigned CipherParams::total_bits() const {
  unsigned n = 0;
  for (const auto& p : polys) n += p.degree();
  return n;
}

void CipherParams::validate() const {
  // S reads cells 0..1 and tau reads cells 3..5.
  if (length(0) < 6) throw Error(Errc::InvalidParams, "R0 must have at least 6 cells");
  for (const auto& p : polys) {
    if (p.degree() > 64) throw Error(Errc::InvalidParams, "register longer than 64 cells");
  }
}

// ---------------------------------------------------------------- SecretKey

SecretKey SecretKey::from_states(const CipherParams& params, const std::array<std::uint64_t, 4>& states) {
  Bits bits;
  bits.reserve(params.total_bits());
  for (std::size_t r = 0; r < 4; ++r) {
    const unsigned len = params.length(r);
    for (unsigned i = len; i-- > 0;) bits.push_back((states[r] >> i) & 1u);
  }
  return SecretKey(std::move(bits));
}

SecretKey SecretKey::from_hex(std::string_view hex, const CipherParams& params) {
  const std::size_t total = params.total_bits();
  const std::size_t digits = (total + 3) / 4;
  std::string clean;
  for (char c : hex) {
    if (c != '\n' && c != '\r' && c != ' ') clean.push_back(c);
  }
  if (clean.starts_with("0x") || clean.starts_with("0X")) clean.erase(0, 2);
  if (clean.size() != digits) {
    throw Error(Errc::WrongKeyLength, "key must be " + std::to_string(digits) + " hex characters, got " +
                                          std::to_string(clean.size()));
  }
  // Left-pad to whole bytes for the hex decoder.
  if (clean.size() % 2) clean.insert(clean.begin(), '0');
  const auto raw = unpack_msb_first(bsea::from_hex(clean));
  const std::size_t pad = raw.size() - total;
  for (std::size_t i = 0; i < pad; ++i) {
    if (raw[i]) throw Error(Errc::InvalidKeyFormat, "key has bits set above bit " + std::to_string(total - 1));
  }
  return SecretKey(Bits(raw.begin() + static_cast<std::ptrdiff_t>(pad), raw.end()));
}

std::uint64_t SecretKey::register_state(const CipherParams& params, std::size_t reg) const {
  std::size_t offset = 0;
  for (std::size_t r = 0; r < reg; ++r) offset += params.length(r);
  std::uint64_t state = 0;
  for (unsigned i = 0; i < params.length(reg); ++i) state = state << 1 | bits_[offset + i];
  return state;
}

std::string SecretKey::to_hex() const {
  const std::size_t digits = (bits_.size() + 3) / 4;
  Bits padded(digits * 4 - bits_.size(), 0);
  padded.insert(padded.end(), bits_.begin(), bits_.end());
  if (padded.size() % 8) padded.insert(padded.begin(), 4, 0);
  auto hex = bsea::to_hex(pack_msb_first(padded));
  return hex.substr(hex.size() - digits);
}

// ------------------------------------------------------------- CipherState

namespace {

std::array<galois::Lfsr, 4> make_registers(const CipherParams& params, const SecretKey& key) {
  return {galois::Lfsr(params.polys[0], key.register_state(params, 0)),
          galois::Lfsr(params.polys[1], key.register_state(params, 1)),
          galois::Lfsr(params.polys[2], key.register_state(params, 2)),
          galois::Lfsr(params.polys[3], key.register_state(params, 3))};
}

}  // namespace

CipherState::CipherState(const CipherParams& params, const SecretKey& key)
    : regs_(make_registers(params, key)), f_(params.initial_f), rule_(params.update_rule) {}

StepTrace CipherState::next_bit() {
  StepTrace tr;
  tr.t = ++t_;
  auto& r0 = regs_[0];

  tr.s = static_cast<unsigned>(r0.state() & 3u) + 1;
  for (unsigned i = 0; i < tr.s; ++i) r0.clock();

  const std::uint64_t s0 = r0.state();
  tr.x0 = s0 & 1u;
  tr.tau = static_cast<unsigned>((s0 >> 3) & 7u);
  tr.pattern = static_cast<std::uint8_t>((s0 >> tr.tau) & 0xFFu);
  if (rule_ == UpdateRule::Full) {
    f_.table ^= tr.pattern;
  } else {
    const unsigned pi = tr.pattern & 0xFu;
    f_.table ^= static_cast<std::uint8_t>(pi << 4 | pi);
  }

  // x1..x3 are read from cell 0 after the clock.
  regs_[1].clock();
  regs_[2].clock();
  regs_[3].clock();
  tr.x1 = regs_[1].output();
  tr.x2 = regs_[2].output();
  tr.x3 = regs_[3].output();

  tr.f_before_output = f_;
  tr.sigma = boolfn::evaluate(f_, tr.x1, tr.x2, tr.x3) ^ tr.x0;
  return tr;
}

CipherState key_setup(const SecretKey& key, const CipherParams& params) {
  params.validate();
  if (key.size() != params.total_bits()) {
    throw Error(Errc::WrongKeyLength, "key has " + std::to_string(key.size()) + " bits, expected " +
                                          std::to_string(params.total_bits()));
  }
  for (std::size_t r = 0; r < 4; ++r) {
    if (key.register_state(params, r) == 0) {
      throw Error(Errc::DegenerateKey, "key segment for R" + std::to_string(r) + " is all zero");
    }
  }
  return CipherState(params, key);
}

Bits keystream(const SecretKey& key, const CipherParams& params, std::size_t n) {
  auto state = key_setup(key, params);
  Bits out(n);
  for (auto& b : out) b = state.next_bit().sigma;
  return out;
}

Bits encrypt(const SecretKey& key, const CipherParams& params, std::span<const std::uint8_t> plaintext) {
  auto state = key_setup(key, params);
  Bits out(plaintext.size());
  for (std::size_t i = 0; i < plaintext.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((plaintext[i] & 1u) ^ state.next_bit().sigma);
  }
  return out;
}

Bits decrypt(const SecretKey& key, const CipherParams& params, std::span<const std::uint8_t> ciphertext) {
  return encrypt(key, params, ciphertext);
}

// ------------------------------------------------------------- params file

CipherParams params_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParams, std::string("params file is not valid JSON: ") + e.what());
  }
  CipherParams p = CipherParams::bsea1();
  try {
    if (j.contains("polys")) {
      const auto& polys = j.at("polys");
      if (!polys.is_array() || polys.size() != 4) {
        throw Error(Errc::InvalidParams, "\"polys\" must list exactly four exponent arrays");
      }
      for (std::size_t r = 0; r < 4; ++r) {
        p.polys[r] = galois::BinaryPolynomial(polys[r].get<std::vector<unsigned>>());
      }
    }
    if (j.contains("initial_f")) {
      const auto& f = j.at("initial_f");
      p.initial_f = f.is_string() ? boolfn::parse_truth_table(f.get<std::string>())
                                  : boolfn::TruthTable3{static_cast<std::uint8_t>(f.get<unsigned>())};
    }
    if (j.contains("update_rule")) p.update_rule = parse_update_rule(j.at("update_rule").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParams, std::string("malformed params file: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::InvalidParams, e.what());
  }
  p.validate();
  return p;
}

std::string params_to_json(const CipherParams& params) {
  nlohmann::json j;
  j["polys"] = nlohmann::json::array();
  for (const auto& poly : params.polys) j["polys"].push_back(poly.exponents());
  j["initial_f"] = boolfn::to_string(params.initial_f);
  j["update_rule"] = std::string(to_string(params.update_rule));
  return j.dump(2);
}

}  // namespace bsea::cipher
