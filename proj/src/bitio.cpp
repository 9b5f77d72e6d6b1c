#include "bsea/bitio.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "bsea/error.hpp"

namespace bsea {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidPolynomial: return "InvalidPolynomial";
    case Errc::InvalidFactorization: return "InvalidFactorization";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::WrongKeyLength: return "WrongKeyLength";
    case Errc::DegenerateKey: return "DegenerateKey";
    case Errc::InvalidKeyFormat: return "InvalidKeyFormat";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptySearchRange: return "EmptySearchRange";
    case Errc::InvalidBias: return "InvalidBias";
    case Errc::TooLargeToEnumerate: return "TooLargeToEnumerate";
    case Errc::WrongBlockLength: return "WrongBlockLength";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::vector<std::uint8_t> pack_msb_first(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] & 1u) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return bytes;
}

Bits unpack_msb_first(std::span<const std::uint8_t> bytes,
                      std::optional<std::size_t> nbits) {
  const std::size_t available = bytes.size() * 8;
  const std::size_t n = nbits.value_or(available);
  if (n > available) {
    throw Error(Errc::LengthMismatch,
                "requested " + std::to_string(n) + " bits but input holds only " +
                    std::to_string(available));
  }
  Bits bits(n);
  for (std::size_t i = 0; i < n; ++i) {
    bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  }
  return bits;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::string digits;
  for (char c : hex) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (hex_value(c) < 0) {
      throw Error(Errc::InvalidKeyFormat, std::string("invalid hex character '") + c + "'");
    }
    digits.push_back(c);
  }
  if (digits.size() % 2 != 0) {
    throw Error(Errc::InvalidKeyFormat, "hex text has an odd number of digits");
  }
  std::vector<std::uint8_t> out(digits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(hex_value(digits[2 * i]) << 4 |
                                       hex_value(digits[2 * i + 1]));
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

BitFormat parse_bit_format(std::string_view name) {
  if (name == "raw") return BitFormat::Raw;
  if (name == "hexbits") return BitFormat::HexBits;
  throw Error(Errc::Io, "unknown bit format '" + std::string(name) + "'");
}

Bits read_bits(const std::filesystem::path& path, BitFormat format,
               std::optional<std::size_t> nbits) {
  auto bytes = read_file(path);
  if (format == BitFormat::HexBits) {
    bytes = from_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                      bytes.size()));
  }
  return unpack_msb_first(bytes, nbits);
}

void write_bits(const std::filesystem::path& path, BitFormat format,
                std::span<const std::uint8_t> bits) {
  auto bytes = pack_msb_first(bits);
  if (format == BitFormat::HexBits) {
    auto text = to_hex(bytes);
    text.push_back('\n');
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                               text.size()));
  } else {
    write_file(path, bytes);
  }
}

}  // namespace bsea
