#include "capq/raster.hpp"

#include <cmath>

#include "capq/errors.hpp"
#include "capq/parallel.hpp"

namespace capq {

Raster rasterize(const SetDescriptor& desc, const Lattice& lat) {
  if (desc.is_empty()) throw Error(Errc::empty_result, "rasterize: descriptor is empty");
  double feat = desc.feature_scale();
  if (feat < 2 * lat.h)
    throw Error(Errc::lattice_too_coarse,
                "rasterize: smallest feature " + std::to_string(feat) + " below 2h = " +
                    std::to_string(2 * lat.h));
  Raster r{Mask(lat), Field(lat)};
  const double half = lat.h / 2;
  par::for_range(lat.size(), [&](std::int64_t idx) {
    double d = desc.distance(lat.center(idx));
    r.dist[idx] = d;
    r.mask.m[(std::size_t)idx] = d <= half ? 1 : 0;
  });
  return r;
}

int shell_index_of_distance(double dist) {
  // T_m covers [2^-(m+1), 2^-m]; exact powers of two belong to the coarser
  // shell, matching the convention that the shell scan stops at M.
  double l = -std::log2(dist);
  double c = std::ceil(l);
  if (c == l) return (int)c - 1;
  return (int)std::floor(l);
}

void default_shell_range(const SetDescriptor& F, const Vec3& x, double h, int& m_min,
                         int& m_max) {
  Vec3 lo, hi;
  F.bounds(lo, hi);
  Vec3 mid = (lo + hi) * 0.5;
  double reach = F.diameter() + norm(x - mid);
  reach = std::max(reach, 1e-12);
  // coarsest shell whose outer radius still reaches all of F
  m_min = (int)std::floor(-std::log2(reach));
  // finest shell resolvable at spacing h
  m_max = (int)std::ceil(-std::log2(2 * h));
  if (m_max < m_min) m_max = m_min;
}

ShellDecomposition shell_decompose(const SetDescriptor& F, const Vec3& x, int m_min, int m_max,
                                   const Lattice& lat) {
  if (m_min > m_max) throw Error(Errc::degenerate_range, "shell_decompose: m_min > m_max");
  ShellDecomposition out;
  out.center = x;
  out.m_min = m_min;
  out.m_max = m_max;

  double d = F.distance(x);
  out.M = d > 0 ? shell_index_of_distance(d) : m_max;

  const double half = lat.h / 2;
  bool any = false;
  for (int m = m_min; m <= m_max; ++m) {
    ShellEntry e;
    e.m = m;
    double rout = std::pow(2.0, -m), rin = rout / 2;
    e.piece = F.clip_annulus(x, rin, rout);
    e.cumulative = F.clip_annulus(x, 0.0, rout);
    e.piece_mask = Mask(lat);
    std::int64_t cnt = 0;
    for (std::int64_t idx = 0; idx < lat.size(); ++idx) {
      if (e.piece.distance(lat.center(idx)) <= half) {
        e.piece_mask.set(idx, true);
        ++cnt;
      }
    }
    e.nonempty = cnt > 0;
    any = any || e.nonempty;
    out.entries.push_back(std::move(e));
  }
  if (!any && d > 0 && (out.M < m_min || out.M > m_max))
    throw Error(Errc::degenerate_range, "shell_decompose: no shell meets the lattice");
  return out;
}

SetDescriptor rescale_to_unit(const SetDescriptor& piece, const Vec3& x, int m) {
  if (piece.is_empty()) return SetDescriptor::empty();
  return piece.dilate(x, std::pow(2.0, m));
}

}  // namespace capq
