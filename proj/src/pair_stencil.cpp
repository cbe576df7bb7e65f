#include "pair_stencil.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pdgamma::detail {

namespace {

std::shared_ptr<const PairStencil> build(const Grid& grid, const RadialProfile& rho) {
  const int d = grid.dim();
  const double R = rho.support;
  const double h = grid.mean_spacing();
  std::array<int, kMaxDim> reach{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    reach[a] = std::min(static_cast<int>(std::ceil(R / grid.spacing(a) + 0.5)), grid.cells(a) - 1);
  }
  auto st = std::make_shared<PairStencil>();
  std::array<int, kMaxDim> o{0, 0, 0};
  const double r_eval = R * (1.0 - 1e-12);
  for (o[2] = -reach[2]; o[2] <= reach[2]; ++o[2]) {
    for (o[1] = -reach[1]; o[1] <= reach[1]; ++o[1]) {
      for (o[0] = -reach[0]; o[0] <= reach[0]; ++o[0]) {
        if (o[0] == 0 && o[1] == 0 && o[2] == 0) continue;
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          const double x = o[a] * grid.spacing(a);
          r2 += x * x;
        }
        const double r = std::sqrt(r2);
        const double frac = std::clamp((R - r) / h + 0.5, 0.0, 1.0);
        if (frac <= 0.0) continue;
        const double value = rho.value(std::min(r, r_eval));
        if (!(value >= 0.0) || !std::isfinite(value)) {
          throw std::invalid_argument("kernel profile must be finite and nonnegative off the diagonal");
        }
        if (value == 0.0) continue;
        StencilEntry e;
        e.offset = o;
        e.r = r;
        e.rk = std::min(r, r_eval);
        std::ptrdiff_t flat = 0;
        for (int a = 0; a < d; ++a) {
          e.e[a] = o[a] * grid.spacing(a) / r;
          flat += static_cast<std::ptrdiff_t>(o[a]) * static_cast<std::ptrdiff_t>(grid.stride(a));
        }
        e.flat = flat;
        e.weight = value * frac;
        st->full.push_back(e);
        // Positive half: first nonzero component (from the slowest axis) > 0.
        bool positive = false;
        for (int a = d - 1; a >= 0; --a) {
          if (o[a] != 0) {
            positive = o[a] > 0;
            break;
          }
        }
        if (positive) st->half.push_back(e);
      }
    }
  }
  return st;
}

}  // namespace

std::shared_ptr<const PairStencil> pair_stencil(const Grid& grid, const RadialProfile& rho) {
  if (grid.dim() != rho.dim) throw std::invalid_argument("kernel and grid dimensions differ");
  if (!(rho.support > 0.0)) throw std::invalid_argument("kernel support must be positive");
  std::ostringstream key;
  key << std::setprecision(17) << grid.dim();
  for (int a = 0; a < grid.dim(); ++a) key << "," << grid.spacing(a) << "x" << grid.cells(a);
  key << "|" << rho.support << "|" << rho.signature;
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const PairStencil>> cache;
  if (!rho.signature.empty()) {
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
  }
  auto st = build(grid, rho);
  if (!rho.signature.empty()) {
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() >= 64) cache.clear();
    cache.emplace(key.str(), st);
  }
  return st;
}

}  // namespace pdgamma::detail
