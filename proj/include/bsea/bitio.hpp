#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bsea {

/// A bit sequence, one element per bit, each element 0 or 1.
using Bits = std::vector<std::uint8_t>;

/// Packs bits into bytes, most-significant bit of each byte first. The final
/// byte is zero-padded.
std::vector<std::uint8_t> pack_msb_first(std::span<const std::uint8_t> bits);

/// Inverse of pack_msb_first. When `nbits` is given the result is trimmed to
/// that many bits; asking for more bits than the bytes hold is an error.
Bits unpack_msb_first(std::span<const std::uint8_t> bytes,
                      std::optional<std::size_t> nbits = std::nullopt);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

enum class BitFormat { Raw, HexBits };

BitFormat parse_bit_format(std::string_view name);

// Bit files: raw packed bytes, or the same bytes as hex text ("hexbits").
Bits read_bits(const std::filesystem::path& path, BitFormat format,
               std::optional<std::size_t> nbits = std::nullopt);
void write_bits(const std::filesystem::path& path, BitFormat format,
                std::span<const std::uint8_t> bits);

}  // namespace bsea
