#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsea {

enum class Errc {
  InvalidPolynomial,
  InvalidFactorization,
  InvalidParams,
  WrongKeyLength,
  DegenerateKey,
  InvalidKeyFormat,
  LengthMismatch,
  EmptySearchRange,
  InvalidBias,
  TooLargeToEnumerate,
  WrongBlockLength,
  WidthMismatch,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bsea
