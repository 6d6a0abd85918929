#pragma once

// Assembled linear operator and the multigrid-preconditioned CG solver used
// by the Newton iterations. Internal to the elliptic module; exposed in a
// header so the tests can exercise the linear pieces directly.

#include <array>
#include <memory>
#include <vector>

#include "capq/elliptic.hpp"

namespace capq::detail {

// Fine-level discretization of -Δ_h with Dirichlet folded into diag/rhs.
// Couplings between interior neighbors are the constant 1/h^2, so only the
// diagonal and the boundary contribution to the right side are stored.
struct FineOp {
  Lattice lat;
  std::vector<std::uint8_t> interior;
  std::vector<double> diag_lin;  // Laplacian diagonal incl. ghost-arm factors
  std::vector<double> rhs_bc;    // Dirichlet data folded to the right side
  double inv_h2 = 0;

  static FineOp assemble(const EllipticDomain& dom);

  // y = (A + diag_extra) x  restricted to interior cells (x, y full grids)
  void apply(const std::vector<double>& x, const std::vector<double>& diag_extra,
             std::vector<double>& y) const;
};

// Galerkin multigrid hierarchy over the fine operator with piecewise-constant
// transfer; coarse couplings become general per-face weights.
struct MgLevel {
  std::array<int, 3> n{1, 1, 1};
  std::vector<std::uint8_t> interior;
  std::vector<double> diag;
  std::array<std::vector<double>, 3> cp;  // coupling to the +axis neighbor
  std::vector<double> x, b, r;

  std::int64_t size() const { return (std::int64_t)n[0] * n[1] * n[2]; }
  std::int64_t index(int i, int j, int k) const {
    return ((std::int64_t)k * n[1] + j) * n[0] + i;
  }
  void apply(const std::vector<double>& in, std::vector<double>& out) const;
  void smooth(int sweeps, bool reverse);
  void residual();
};

class MgPcg {
 public:
  // diag_extra: nonnegative zeroth-order term added to the fine diagonal
  MgPcg(const FineOp& op, const std::vector<double>& diag_extra);

  // solves (A + diag_extra) x = b to the given relative residual; returns
  // iterations used (negative when the cap was hit)
  int solve(const std::vector<double>& b, std::vector<double>& x, double rel_tol, int max_iter);

 private:
  void vcycle(int level);
  void precondition(const std::vector<double>& r, std::vector<double>& z);

  const FineOp& op_;
  std::vector<double> diag_full_;  // diag_lin + diag_extra
  std::vector<MgLevel> levels_;    // levels_[0] mirrors the fine grid
};

}  // namespace capq::detail
