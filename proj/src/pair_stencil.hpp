#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "pdgamma/grid.hpp"
#include "pdgamma/kernels.hpp"

namespace pdgamma::detail {

struct StencilEntry {
  std::array<int, kMaxDim> offset{0, 0, 0};
  std::ptrdiff_t flat = 0;
  double r = 0.0;
  double rk = 0.0;  // radius at which radial material data is read: min(r, R (1 - 1e-12))
  std::array<double, kMaxDim> e{0.0, 0.0, 0.0};  // unit bond direction
  double weight = 0.0;                           // rho(r) times the partial-volume fraction
};

// All lattice offsets within the kernel support; `half` keeps one of each
// +/- pair. Weights carry a partial-volume fraction clamp((R - r)/h + 1/2, 0, 1)
// so the outermost shell counts only the part of its cell inside the ball.
struct PairStencil {
  std::vector<StencilEntry> full;
  std::vector<StencilEntry> half;
};

// Cached per (grid layout, profile signature).
std::shared_ptr<const PairStencil> pair_stencil(const Grid& grid, const RadialProfile& rho);

// Visits every stencil neighbour of node i whose multi-index stays on the grid.
template <class F>
inline void for_each_neighbour(const Grid& grid, std::size_t i, const std::vector<StencilEntry>& entries, F&& f) {
  const MultiIndex idx = grid.multi_index(i);
  const int d = grid.dim();
  for (const StencilEntry& s : entries) {
    bool ok = true;
    for (int a = 0; a < d; ++a) {
      const int k = idx[a] + s.offset[a];
      if (k < 0 || k >= grid.cells(a)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    f(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + s.flat), s);
  }
}

}  // namespace pdgamma::detail
