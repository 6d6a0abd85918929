#include <algorithm>
#include <cmath>

#include "capq/elliptic_detail.hpp"
#include "capq/errors.hpp"
#include "capq/parallel.hpp"

namespace capq {

double ko_constant(double q) {
  if (q <= 1) throw Error(Errc::domain_error, "ko_bound: q must exceed 1");
  return std::pow(2 * (q + 1) / ((q - 1) * (q - 1)), 1.0 / (q - 1));
}

double ko_bound(double d, double q) {
  if (d <= 0) throw Error(Errc::domain_error, "ko_bound: distance must be positive");
  return ko_constant(q) * std::pow(d, -2.0 / (q - 1));
}

EllipticDomain EllipticDomain::plain_box(const Lattice& box) {
  EllipticDomain dom;
  dom.lat = box;
  dom.delta = -1;
  dom.sdist = Field(box, std::numeric_limits<double>::infinity());
  dom.state.assign((std::size_t)box.size(), (std::uint8_t)CellState::interior);
  dom.bc.assign((std::size_t)box.size(), 0.0);
  const auto& l = box;
  par::for_range(l.size(), [&](std::int64_t idx) {
    int i, j, k;
    l.coords(idx, i, j, k);
    bool ring = false;
    for (int a = 0; a < l.dim; ++a) {
      int c = a == 0 ? i : (a == 1 ? j : k);
      if (c == 0 || c == l.cells[a] - 1) ring = true;
    }
    if (ring) dom.state[(std::size_t)idx] = (std::uint8_t)CellState::dir_outer;
  });
  return dom;
}

EllipticDomain EllipticDomain::exterior_of(const SetDescriptor& F, const Lattice& box,
                                           double delta) {
  EllipticDomain dom = plain_box(box);
  dom.delta = delta;
  if (F.is_empty() || delta < 0) return dom;
  const auto& l = box;
  par::for_range(l.size(), [&](std::int64_t idx) {
    dom.sdist[idx] = F.signed_distance(l.center(idx));
  });
  par::for_range(l.size(), [&](std::int64_t idx) {
    if (dom.sdist[idx] <= delta)
      dom.state[(std::size_t)idx] = (std::uint8_t)CellState::dir_set;
  });
  // cells of the set with no interior neighbor never enter any stencil
  par::for_range(l.size(), [&](std::int64_t idx) {
    if (dom.state[(std::size_t)idx] != (std::uint8_t)CellState::dir_set) return;
    int i, j, k;
    l.coords(idx, i, j, k);
    for (int a = 0; a < l.dim; ++a)
      for (int s = -1; s <= 1; s += 2) {
        int ii = i + (a == 0 ? s : 0), jj = j + (a == 1 ? s : 0), kk = k + (a == 2 ? s : 0);
        if (!l.in_bounds(ii, jj, kk)) continue;
        if (dom.state[(std::size_t)l.index(ii, jj, kk)] == (std::uint8_t)CellState::interior)
          return;
      }
    dom.state[(std::size_t)idx] = (std::uint8_t)CellState::excluded;
  });
  return dom;
}

void EllipticDomain::set_interface_value(double n) {
  for (std::int64_t i = 0; i < (std::int64_t)state.size(); ++i)
    if (state[(std::size_t)i] == (std::uint8_t)CellState::dir_set) bc[(std::size_t)i] = n;
}

void EllipticDomain::set_outer_values(const std::function<double(const Vec3&)>& g) {
  for (std::int64_t i = 0; i < (std::int64_t)state.size(); ++i)
    if (state[(std::size_t)i] == (std::uint8_t)CellState::dir_outer)
      bc[(std::size_t)i] = g(lat.center(i));
}

std::int64_t EllipticDomain::interior_count() const {
  std::int64_t n = 0;
  for (auto s : state)
    if (s == (std::uint8_t)CellState::interior) ++n;
  return n;
}

}  // namespace capq

namespace capq::detail {

namespace {
constexpr double kThetaMin = 0.05;
}

FineOp FineOp::assemble(const EllipticDomain& dom) {
  FineOp op;
  op.lat = dom.lat;
  const Lattice& l = dom.lat;
  const double h2 = l.h * l.h;
  op.inv_h2 = 1.0 / h2;
  op.interior.assign((std::size_t)l.size(), 0);
  op.diag_lin.assign((std::size_t)l.size(), 0.0);
  op.rhs_bc.assign((std::size_t)l.size(), 0.0);

  par::for_range(l.size(), [&](std::int64_t idx) {
    if (dom.state[(std::size_t)idx] != (std::uint8_t)CellState::interior) return;
    op.interior[(std::size_t)idx] = 1;
    int i, j, k;
    l.coords(idx, i, j, k);
    double diag = 0, rhs = 0;
    for (int a = 0; a < l.dim; ++a)
      for (int s = -1; s <= 1; s += 2) {
        int ii = i + (a == 0 ? s : 0), jj = j + (a == 1 ? s : 0), kk = k + (a == 2 ? s : 0);
        std::int64_t nb = l.index(ii, jj, kk);  // interior cells never sit on the ring
        CellState cs = dom.at(nb);
        if (cs == CellState::interior) {
          diag += 1.0 / h2;
        } else if (cs == CellState::dir_outer) {
          diag += 1.0 / h2;
          rhs += dom.bc[(std::size_t)nb] / h2;
        } else {
          // ghost arm toward the {sdist = delta} interface
          double si = dom.sdist[idx], sj = dom.sdist[nb];
          double theta = 1.0;
          if (si > sj) theta = std::clamp((si - dom.delta) / (si - sj), kThetaMin, 1.0);
          diag += 1.0 / (theta * h2);
          rhs += dom.bc[(std::size_t)nb] / (theta * h2);
        }
      }
    op.diag_lin[(std::size_t)idx] = diag;
    op.rhs_bc[(std::size_t)idx] = rhs;
  });
  return op;
}

void FineOp::apply(const std::vector<double>& x, const std::vector<double>& diag_extra,
                   std::vector<double>& y) const {
  const Lattice& l = lat;
  const int nx = l.cells[0], ny = l.cells[1];
  const std::int64_t sx = 1, sy = nx, sz = (std::int64_t)nx * ny;
  const std::int64_t strides[3] = {sx, sy, sz};
  y.assign((std::size_t)l.size(), 0.0);
  const bool has_extra = !diag_extra.empty();
  par::for_range(l.size(), [&](std::int64_t idx) {
    if (!interior[(std::size_t)idx]) return;
    double acc = (diag_lin[(std::size_t)idx] + (has_extra ? diag_extra[(std::size_t)idx] : 0.0)) *
                 x[(std::size_t)idx];
    for (int a = 0; a < l.dim; ++a) {
      std::int64_t nb = idx - strides[a];
      if (interior[(std::size_t)nb]) acc -= inv_h2 * x[(std::size_t)nb];
      nb = idx + strides[a];
      if (interior[(std::size_t)nb]) acc -= inv_h2 * x[(std::size_t)nb];
    }
    y[(std::size_t)idx] = acc;
  });
}

void MgLevel::apply(const std::vector<double>& in, std::vector<double>& out) const {
  const int nx = n[0], ny = n[1], nz = n[2];
  const std::int64_t sx = 1, sy = nx, sz = (std::int64_t)nx * ny;
  out.assign(in.size(), 0.0);
  par::for_range(size(), [&](std::int64_t idx) {
    if (!interior[(std::size_t)idx]) return;
    int i = (int)(idx % nx), j = (int)((idx / nx) % ny), k = (int)(idx / sz);
    double acc = diag[(std::size_t)idx] * in[(std::size_t)idx];
    if (i > 0) acc -= cp[0][(std::size_t)(idx - sx)] * in[(std::size_t)(idx - sx)];
    if (i + 1 < nx) acc -= cp[0][(std::size_t)idx] * in[(std::size_t)(idx + sx)];
    if (j > 0) acc -= cp[1][(std::size_t)(idx - sy)] * in[(std::size_t)(idx - sy)];
    if (j + 1 < ny) acc -= cp[1][(std::size_t)idx] * in[(std::size_t)(idx + sy)];
    if (k > 0) acc -= cp[2][(std::size_t)(idx - sz)] * in[(std::size_t)(idx - sz)];
    if (k + 1 < nz) acc -= cp[2][(std::size_t)idx] * in[(std::size_t)(idx + sz)];
    out[(std::size_t)idx] = acc;
  });
}

void MgLevel::smooth(int sweeps, bool reverse) {
  const int nx = n[0], ny = n[1], nz = n[2];
  const std::int64_t sx = 1, sy = nx, sz = (std::int64_t)nx * ny;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int c = 0; c < 2; ++c) {
      int color = reverse ? 1 - c : c;
      par::for_range(size(), [&](std::int64_t idx) {
        if (!interior[(std::size_t)idx]) return;
        int i = (int)(idx % nx), j = (int)((idx / nx) % ny), k = (int)(idx / sz);
        if (((i + j + k) & 1) != color) return;
        double acc = b[(std::size_t)idx];
        if (i > 0) acc += cp[0][(std::size_t)(idx - sx)] * x[(std::size_t)(idx - sx)];
        if (i + 1 < nx) acc += cp[0][(std::size_t)idx] * x[(std::size_t)(idx + sx)];
        if (j > 0) acc += cp[1][(std::size_t)(idx - sy)] * x[(std::size_t)(idx - sy)];
        if (j + 1 < ny) acc += cp[1][(std::size_t)idx] * x[(std::size_t)(idx + sy)];
        if (k > 0) acc += cp[2][(std::size_t)(idx - sz)] * x[(std::size_t)(idx - sz)];
        if (k + 1 < nz) acc += cp[2][(std::size_t)idx] * x[(std::size_t)(idx + sz)];
        x[(std::size_t)idx] = acc / diag[(std::size_t)idx];
      });
    }
  }
}

void MgLevel::residual() {
  apply(x, r);
  par::for_range(size(), [&](std::int64_t i) {
    r[(std::size_t)i] = interior[(std::size_t)i] ? b[(std::size_t)i] - r[(std::size_t)i] : 0.0;
  });
}

MgPcg::MgPcg(const FineOp& op, const std::vector<double>& diag_extra) : op_(op) {
  const std::int64_t nfull = op.lat.size();
  diag_full_.assign((std::size_t)nfull, 0.0);
  for (std::int64_t i = 0; i < nfull; ++i)
    diag_full_[(std::size_t)i] =
        op.diag_lin[(std::size_t)i] + (diag_extra.empty() ? 0.0 : diag_extra[(std::size_t)i]);

  // level 0 mirrors the fine grid
  MgLevel l0;
  l0.n = op.lat.cells;
  l0.interior = op.interior;
  l0.diag = diag_full_;
  for (int a = 0; a < 3; ++a) l0.cp[(std::size_t)a].assign((std::size_t)nfull, 0.0);
  const int nx = l0.n[0], ny = l0.n[1], nz = l0.n[2];
  const std::int64_t strides[3] = {1, nx, (std::int64_t)nx * ny};
  par::for_range(nfull, [&](std::int64_t idx) {
    if (!l0.interior[(std::size_t)idx]) return;
    int i = (int)(idx % nx), j = (int)((idx / nx) % ny), k = (int)(idx / strides[2]);
    int pos[3] = {i, j, k};
    for (int a = 0; a < 3; ++a) {
      if (pos[a] + 1 >= l0.n[a]) continue;
      std::int64_t nb = idx + strides[a];
      if (l0.interior[(std::size_t)nb]) l0.cp[(std::size_t)a][(std::size_t)idx] = op.inv_h2;
    }
  });
  l0.x.assign((std::size_t)nfull, 0.0);
  l0.b.assign((std::size_t)nfull, 0.0);
  l0.r.assign((std::size_t)nfull, 0.0);
  levels_.push_back(std::move(l0));

  // Galerkin coarsening with piecewise-constant transfer
  while (true) {
    const MgLevel& f = levels_.back();
    int mx = std::max(1, (f.n[0] + 1) / 2), my = std::max(1, (f.n[1] + 1) / 2),
        mz = std::max(1, (f.n[2] + 1) / 2);
    if ((std::int64_t)mx * my * mz < 64 || (mx == f.n[0] && my == f.n[1] && mz == f.n[2])) break;
    MgLevel c;
    c.n = {mx, my, mz};
    std::int64_t csz = c.size();
    c.interior.assign((std::size_t)csz, 0);
    c.diag.assign((std::size_t)csz, 0.0);
    for (int a = 0; a < 3; ++a) c.cp[(std::size_t)a].assign((std::size_t)csz, 0.0);
    c.x.assign((std::size_t)csz, 0.0);
    c.b.assign((std::size_t)csz, 0.0);
    c.r.assign((std::size_t)csz, 0.0);

    const std::int64_t fsx = 1, fsy = f.n[0], fsz = (std::int64_t)f.n[0] * f.n[1];
    const std::int64_t fstr[3] = {fsx, fsy, fsz};
    auto fidx = [&](int i, int j, int k) { return (fsz * k) + (std::int64_t)f.n[0] * j + i; };

    for (int K = 0; K < mz; ++K)
      for (int J = 0; J < my; ++J)
        for (int I = 0; I < mx; ++I) {
          std::int64_t ci = c.index(I, J, K);
          double diag = 0;
          bool any = false;
          for (int dk = 0; dk < 2; ++dk)
            for (int dj = 0; dj < 2; ++dj)
              for (int di = 0; di < 2; ++di) {
                int i = 2 * I + di, j = 2 * J + dj, k = 2 * K + dk;
                if (i >= f.n[0] || j >= f.n[1] || k >= f.n[2]) continue;
                std::int64_t fi = fidx(i, j, k);
                if (!f.interior[(std::size_t)fi]) continue;
                any = true;
                diag += f.diag[(std::size_t)fi];
                const int coarse_pos[3] = {I, J, K};
                for (int a = 0; a < 3; ++a) {
                  int q[3] = {i, j, k};
                  q[a] += 1;
                  if (q[a] >= f.n[a]) continue;
                  std::int64_t nb = fi + fstr[a];
                  if (!f.interior[(std::size_t)nb]) continue;
                  double w = f.cp[(std::size_t)a][(std::size_t)fi];
                  if (q[a] / 2 == coarse_pos[a]) {
                    // neighbor inside the same coarse cell: the coupling
                    // cancels twice from the summed diagonal
                    diag -= 2 * w;
                  } else if (q[a] / 2 == coarse_pos[a] + 1) {
                    c.cp[(std::size_t)a][(std::size_t)ci] += w;
                  }
                }
              }
          c.interior[(std::size_t)ci] = any ? 1 : 0;
          c.diag[(std::size_t)ci] = any ? diag : 1.0;
        }
    levels_.push_back(std::move(c));
    if (levels_.size() >= 12) break;
  }
}

void MgPcg::vcycle(int level) {
  MgLevel& l = levels_[(std::size_t)level];
  if (level + 1 >= (int)levels_.size()) {
    l.smooth(40, false);
    return;
  }
  l.smooth(2, false);
  l.residual();

  MgLevel& c = levels_[(std::size_t)level + 1];
  std::fill(c.x.begin(), c.x.end(), 0.0);
  // restriction: gather child residuals per coarse cell
  const int mx = c.n[0], my = c.n[1];
  par::for_range(c.size(), [&](std::int64_t ci) {
    int I = (int)(ci % mx), J = (int)((ci / mx) % my), K = (int)(ci / ((std::int64_t)mx * my));
    double acc = 0;
    for (int dk = 0; dk < 2; ++dk)
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          int i = 2 * I + di, j = 2 * J + dj, k = 2 * K + dk;
          if (i >= l.n[0] || j >= l.n[1] || k >= l.n[2]) continue;
          std::int64_t fi = ((std::int64_t)k * l.n[1] + j) * l.n[0] + i;
          if (l.interior[(std::size_t)fi]) acc += l.r[(std::size_t)fi];
        }
    c.b[(std::size_t)ci] = acc;
  });
  vcycle(level + 1);
  // prolongation: piecewise-constant correction
  par::for_range(l.size(), [&](std::int64_t fi) {
    if (!l.interior[(std::size_t)fi]) return;
    int i = (int)(fi % l.n[0]), j = (int)((fi / l.n[0]) % l.n[1]),
        k = (int)(fi / ((std::int64_t)l.n[0] * l.n[1]));
    std::int64_t ci = ((std::int64_t)(k / 2) * my + (j / 2)) * mx + (i / 2);
    l.x[(std::size_t)fi] += c.x[(std::size_t)ci];
  });
  l.smooth(2, true);
}

void MgPcg::precondition(const std::vector<double>& r, std::vector<double>& z) {
  MgLevel& l0 = levels_[0];
  std::copy(r.begin(), r.end(), l0.b.begin());
  std::fill(l0.x.begin(), l0.x.end(), 0.0);
  vcycle(0);
  z.assign(l0.x.begin(), l0.x.end());
}

int MgPcg::solve(const std::vector<double>& b, std::vector<double>& x, double rel_tol,
                 int max_iter) {
  const std::int64_t n = op_.lat.size();
  if ((std::int64_t)x.size() != n) x.assign((std::size_t)n, 0.0);
  std::vector<double> r((std::size_t)n, 0.0), z, p, Ap;

  levels_[0].apply(x, r);
  par::for_range(n, [&](std::int64_t i) {
    r[(std::size_t)i] =
        levels_[0].interior[(std::size_t)i] ? b[(std::size_t)i] - r[(std::size_t)i] : 0.0;
  });
  double bnorm = par::max_abs(b);
  if (bnorm == 0) {
    std::fill(x.begin(), x.end(), 0.0);
    return 0;
  }
  double rnorm = par::max_abs(r);
  if (rnorm <= rel_tol * bnorm) return 0;

  precondition(r, z);
  p = z;
  double rz = par::dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    levels_[0].apply(p, Ap);
    double pAp = par::dot(p, Ap);
    if (!(pAp > 0)) return -it;
    double alpha = rz / pAp;
    par::for_range(n, [&](std::int64_t i) {
      x[(std::size_t)i] += alpha * p[(std::size_t)i];
      r[(std::size_t)i] -= alpha * Ap[(std::size_t)i];
    });
    rnorm = par::max_abs(r);
    if (rnorm <= rel_tol * bnorm) return it;
    precondition(r, z);
    double rz_new = par::dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    par::for_range(n, [&](std::int64_t i) {
      p[(std::size_t)i] = z[(std::size_t)i] + beta * p[(std::size_t)i];
    });
  }
  return -max_iter;
}

}  // namespace capq::detail
