#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>

#include "storytopics/errors.hpp"

namespace storytopics::binio {

template <typename T>
void put_le(std::ostream& out, T value) {
  using Bits = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const auto bits = std::bit_cast<Bits>(value);
  char bytes[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
  out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in, std::string_view what) {
  using Bits = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw TruncatedFile(std::string(what) + ": unexpected end of file");
  }
  Bits bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) bits |= static_cast<Bits>(bytes[k]) << (8 * k);
  return std::bit_cast<T>(bits);
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  char got[4] = {};
  if (!in.read(got, 4) || std::string_view(got, 4) != magic) {
    throw FormatError("bad magic, expected " + std::string(magic));
  }
}

}  // namespace storytopics::binio
