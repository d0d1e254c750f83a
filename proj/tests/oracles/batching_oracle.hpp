#pragma once

// Thread-level enumeration of page footprints, plus brute-force stride and
// contiguous-split minimizers.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct Matrix {
  std::uint64_t base = 0;
  std::uint64_t elem = 4;
  std::uint64_t row_len = 1;
  bool clustered = true;
  std::uint64_t accesses = 1;
};

struct Kernel {
  std::uint64_t gx = 1, gy = 1;  // grid in blocks
  std::uint64_t bx = 1, by = 1;  // block in threads
  std::vector<Matrix> matrices;
  std::uint64_t blocks() const { return gx * gy; }
};

using PageKey = std::pair<std::size_t, std::uint64_t>;  // (matrix, page)

// Pages touched by linear block `b` (row-major over the grid).
inline std::set<PageKey> block_pages(const Kernel& k, std::uint64_t b, std::uint64_t page) {
  std::set<PageKey> out;
  const std::uint64_t cx = b % k.gx, cy = b / k.gx;
  const std::uint64_t threads = k.bx * k.by;
  for (std::size_t m = 0; m < k.matrices.size(); ++m) {
    const Matrix& mx = k.matrices[m];
    for (std::uint64_t ty = 0; ty < k.by; ++ty) {
      for (std::uint64_t tx = 0; tx < k.bx; ++tx) {
        for (std::uint64_t a = 0; a < mx.accesses; ++a) {
          std::uint64_t e;
          if (mx.clustered) {
            e = b * threads * mx.accesses + a * threads + ty * k.bx + tx;
          } else {
            const std::uint64_t row = cy * k.by + ty;
            const std::uint64_t col = cx * k.bx * mx.accesses + tx + a * k.bx;
            e = row * mx.row_len + col;
          }
          out.insert({m, (e * mx.elem) / page});
        }
      }
    }
  }
  return out;
}

inline std::uint64_t shared_pages(const Kernel& k, std::uint64_t page, std::uint64_t stride) {
  std::map<PageKey, std::set<std::uint64_t>> owners;
  for (std::uint64_t b = 0; b < k.blocks(); ++b) {
    for (const auto& p : block_pages(k, b, page)) owners[p].insert(b / stride);
  }
  std::uint64_t n = 0;
  for (const auto& [p, s] : owners) n += s.size() > 1 ? 1 : 0;
  return n;
}

// Smallest stride in [1, max_stride] with the fewest shared pages.
inline std::uint64_t best_stride(const Kernel& k, std::uint64_t page, std::uint64_t max_stride = 16) {
  std::uint64_t best = 1, best_n = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t s = 1; s <= max_stride; ++s) {
    const auto n = shared_pages(k, page, s);
    if (n < best_n) {
      best_n = n;
      best = s;
    }
  }
  return best;
}

// distance (last batch - first batch touching the page) -> page count, for
// batches given as lists of linear block ids.
inline std::map<std::uint64_t, std::uint64_t> sharing_bins(const Kernel& k, std::uint64_t page,
                                                           const std::vector<std::vector<std::uint64_t>>& batches) {
  std::map<PageKey, std::pair<std::uint64_t, std::uint64_t>> range;
  for (std::uint64_t i = 0; i < batches.size(); ++i) {
    for (auto b : batches[i]) {
      for (const auto& p : block_pages(k, b, page)) {
        auto it = range.find(p);
        if (it == range.end()) range[p] = {i, i};
        else it->second = {std::min(it->second.first, i), std::max(it->second.second, i)};
      }
    }
  }
  std::map<std::uint64_t, std::uint64_t> bins;
  for (const auto& [p, r] : range) ++bins[r.second - r.first];
  return bins;
}

// Minimum over all splits of `sizes` into `parts` contiguous (possibly
// empty) groups of the largest group sum.
inline std::uint64_t best_max_load(const std::vector<std::uint64_t>& sizes, std::size_t parts) {
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::size_t> cut(parts + 1, 0);
  cut[parts] = sizes.size();
  auto rec = [&](auto&& self, std::size_t idx, std::size_t from) -> void {
    if (idx == parts) {
      std::uint64_t worst = 0;
      for (std::size_t g = 0; g < parts; ++g) {
        std::uint64_t sum = 0;
        for (std::size_t i = cut[g]; i < cut[g + 1]; ++i) sum += sizes[i];
        worst = std::max(worst, sum);
      }
      best = std::min(best, worst);
      return;
    }
    for (std::size_t c = from; c <= sizes.size(); ++c) {
      cut[idx] = c;
      self(self, idx + 1, c);
    }
  };
  cut[0] = 0;
  if (parts == 1) {
    std::uint64_t sum = 0;
    for (auto s : sizes) sum += s;
    return sum;
  }
  rec(rec, 1, 0);
  return best;
}

}  // namespace oracle
