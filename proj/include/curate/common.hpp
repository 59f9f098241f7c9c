// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_COMMON_HPP
#define CURATE_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace curate {

// Error taxonomy shared by the C++ core and the C API.
enum class ErrorCode {
  internal = 1,
  rejected = 2,
  validation_failed = 3,
  review_incomplete = 4,
  invalid_argument = 5,
  domain_error = 6,
  dimension_mismatch = 7,
  format_mismatch = 8,
  stale_delta = 9,
  edit_conflict = 10,
  empty_proposal = 11,
  stale_review = 12,
  numeric_error = 13,
  io_error = 14,
};

class CurateError : public std::runtime_error {
 public:
  CurateError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw CurateError(code, what);
}

// A cell value. Text that parses as a canonical base-10 integer ("0", "42",
// "-7"; no leading zeros, no sign on zero) is stored numerically, everything
// else stays an exact byte string. Equality is therefore exact in both cases.
using Scalar = std::variant<std::int64_t, std::string>;

Scalar parse_scalar(std::string_view text);
std::string format_scalar(const Scalar& value);

inline bool scalar_eq(const Scalar& a, const Scalar& b) { return a == b; }

// FNV-1a, used for content fingerprints and stable edit ids.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

}  // namespace curate

#endif  // CURATE_COMMON_HPP
