#pragma once

// Bit-at-a-time address slicing. Field order, low to high:
// byte, column, channel, bank, row.

#include <array>
#include <cstdint>

namespace oracle {

struct Fields {
  std::uint64_t byte, column, channel, bank, row;
};

inline Fields slice(std::uint64_t addr, const std::array<unsigned, 5>& widths) {
  std::array<std::uint64_t, 5> out{};
  unsigned bit = 0;
  for (std::size_t f = 0; f < 5; ++f) {
    for (unsigned i = 0; i < widths[f]; ++i, ++bit) {
      if ((addr >> bit) & 1u) out[f] |= std::uint64_t{1} << i;
    }
  }
  return {out[0], out[1], out[2], out[3], out[4]};
}

inline std::uint64_t join(const Fields& f, const std::array<unsigned, 5>& widths) {
  const std::array<std::uint64_t, 5> v{f.byte, f.column, f.channel, f.bank, f.row};
  std::uint64_t addr = 0;
  unsigned bit = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    for (unsigned i = 0; i < widths[k]; ++i, ++bit) {
      if ((v[k] >> i) & 1u) addr |= std::uint64_t{1} << bit;
    }
  }
  return addr;
}

}  // namespace oracle
