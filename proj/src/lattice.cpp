#include "capq/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "capq/errors.hpp"

namespace capq {

Lattice Lattice::covering(int dim, const Vec3& lo, const Vec3& hi, double h) {
  if (h <= 0) throw Error(Errc::config_error, "lattice spacing must be positive");
  if (dim < 1 || dim > 3) throw Error(Errc::config_error, "lattice dim must be 1, 2 or 3");
  Lattice l;
  l.dim = dim;
  l.h = h;
  for (int a = 0; a < 3; ++a) {
    if (a >= dim) {
      l.cells[a] = 1;
      l.origin[a] = 0.0;
      continue;
    }
    int n = (int)std::ceil((hi[a] - lo[a]) / h);
    n = std::max(n, 8);  // rasterization below 8 cells per axis is meaningless
    l.cells[a] = n;
    // center the covered span on [lo, hi]
    double span = n * h;
    double mid = 0.5 * (lo[a] + hi[a]);
    l.origin[a] = mid - span / 2 + h / 2;
  }
  return l;
}

bool Lattice::same_geometry(const Lattice& o) const {
  return dim == o.dim && cells == o.cells && std::abs(h - o.h) < 1e-15 &&
         std::abs(origin.x - o.origin.x) < 1e-12 && std::abs(origin.y - o.origin.y) < 1e-12 &&
         std::abs(origin.z - o.origin.z) < 1e-12;
}

void Lattice::locate(const Vec3& p, int& i, int& j, int& k) const {
  auto clamp_axis = [&](double w, int a) {
    int c = (int)std::lround((w - origin[a]) / h);
    return std::clamp(c, 0, cells[a] - 1);
  };
  i = clamp_axis(p.x, 0);
  j = clamp_axis(p.y, 1);
  k = clamp_axis(p.z, 2);
}

double Field::interp(const Vec3& p) const {
  const Lattice& l = lat;
  double fx = (p.x - l.origin.x) / l.h;
  double fy = (p.y - l.origin.y) / l.h;
  double fz = (p.z - l.origin.z) / l.h;
  auto split = [](double f, int n, int& i0, double& t) {
    if (n == 1) { i0 = 0; t = 0.0; return; }
    double c = std::clamp(f, 0.0, (double)(n - 1));
    i0 = std::min((int)std::floor(c), n - 2);
    t = c - i0;
  };
  int i0, j0, k0;
  double tx, ty, tz;
  split(fx, l.cells[0], i0, tx);
  split(fy, l.cells[1], j0, ty);
  split(fz, l.cells[2], k0, tz);
  double acc = 0.0;
  for (int dk = 0; dk <= (l.cells[2] > 1 ? 1 : 0); ++dk)
    for (int dj = 0; dj <= (l.cells[1] > 1 ? 1 : 0); ++dj)
      for (int di = 0; di <= (l.cells[0] > 1 ? 1 : 0); ++di) {
        double w = (di ? tx : (l.cells[0] > 1 ? 1 - tx : 1.0)) *
                   (dj ? ty : (l.cells[1] > 1 ? 1 - ty : 1.0)) *
                   (dk ? tz : (l.cells[2] > 1 ? 1 - tz : 1.0));
        acc += w * v[(std::size_t)l.index(i0 + di, j0 + dj, k0 + dk)];
      }
  return acc;
}

std::int64_t Mask::count() const {
  std::int64_t n = 0;
  for (auto b : m) n += b;
  return n;
}

std::vector<std::int64_t> Mask::cells() const {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < (std::int64_t)m.size(); ++i)
    if (m[(std::size_t)i]) out.push_back(i);
  return out;
}

}  // namespace capq
