#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hfl {

using U128 = unsigned __int128;
using I128 = __int128;

// Widths are in bits; legal register widths are 1, 8, 16, 32 and 64.
// Symbolic expressions additionally use doubled widths up to 128 for
// exact overflow conditions.
using Width = uint8_t;

inline U128 maskOf(Width w) {
  if (w >= 128) return ~U128{0};
  return (U128{1} << w) - 1;
}

inline U128 truncTo(U128 v, Width w) { return v & maskOf(w); }

// Sign-extend the low `w` bits of v to 128 bits.
inline I128 signExtend(U128 v, Width w) {
  v = truncTo(v, w);
  if (w >= 128) return static_cast<I128>(v);
  U128 signBit = U128{1} << (w - 1);
  if (v & signBit) return static_cast<I128>(v | ~maskOf(w));
  return static_cast<I128>(v);
}

inline uint64_t lo64(U128 v) { return static_cast<uint64_t>(v); }

class Error : public std::runtime_error {
public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Lexical or grammatical problem in IR text, with 1-based position.
class ParseError : public Error {
public:
  ParseError(int line, int col, const std::string &msg)
      : Error("parse error at " + std::to_string(line) + ":" +
              std::to_string(col) + ": " + msg),
        line(line), col(col) {}
  int line, col;
};

// Structurally well-formed program that breaks a static rule.
class ValidationError : public Error {
public:
  ValidationError(int line, const std::string &msg)
      : Error("validation error at line " + std::to_string(line) + ": " + msg),
        line(line) {}
  int line;
};

} // namespace hfl
