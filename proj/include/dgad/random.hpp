#pragma once

#include <cstdint>
#include <string_view>

namespace dgad {

// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent, reproducible sub-stream seed for a named purpose.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                                    std::uint64_t index = 0) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : stream) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001B3ULL;
  return mix64(base ^ mix64(h ^ mix64(index)));
}

}  // namespace dgad
