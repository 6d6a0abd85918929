#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "capq/descriptor.hpp"
#include "capq/lattice.hpp"

namespace capq {

// Keller-Osserman envelope c_q d^{-2/(q-1)} with c_q = [2(q+1)/(q-1)^2]^{1/(q-1)}.
double ko_constant(double q);
double ko_bound(double d, double q);

enum class CellState : std::uint8_t { interior = 0, dir_set = 1, dir_outer = 2, excluded = 3 };

// Cell classification for solves of -Δu + u^q = f on a box lattice, with
// Dirichlet data imposed on the level set {signed_dist = delta} of a set F
// (via linear ghost arms, so the interface is located to second order) and
// on the outer box ring.
struct EllipticDomain {
  Lattice lat;
  std::vector<std::uint8_t> state;
  std::vector<double> bc;  // values at dir_set / dir_outer cells
  Field sdist;             // signed distance to F
  double delta = 0;        // interface offset (fattening radius)

  // Exterior of F inside the box: interior cells have sdist > delta. When
  // delta < 0 no set is present (plain box problem). The outermost cell ring
  // is dir_outer.
  static EllipticDomain exterior_of(const SetDescriptor& F, const Lattice& box, double delta);
  static EllipticDomain plain_box(const Lattice& box);

  void set_interface_value(double n);
  void set_outer_values(const std::function<double(const Vec3&)>& g);

  std::int64_t interior_count() const;
  CellState at(std::int64_t i) const { return (CellState)state[(std::size_t)i]; }
};

struct LadderStep {
  double n = 0;               // blow-up boundary value
  double probe_sup = 0;       // sup of u on the probe annulus
  double increment = 0;       // sup-norm increment on the probe annulus
  int newton_iters = 0;
};

struct SolveReport {
  Field u;
  double residual_norm = 0;   // sup-norm of the discrete residual
  double residual_scale = 1;  // normalization used for the stop test
  bool converged = true;
  int newton_iters = 0;
  std::vector<LadderStep> ladder;
  double bracket_rel_width = 0;  // maximal_solution: closure gap on the probe annulus
  Field ko_ratio;                // u dist^{2/(q-1)} / c_q where dist > 0
};

struct SolveOptions {
  double newton_tol = 1e-8;        // relative to residual_scale
  int max_newton = 60;
  int max_cg = 800;
  double ladder_increment_tol = 1e-3;
  int ladder_max_rungs = 24;
  double bracket_max = 0.05;       // relative closure-bracket width accepted
  double probe_lo = 0;             // probe annulus [lo, hi] in dist-to-F units
  double probe_hi = 0;             // 0 -> defaults from the lattice
  bool throw_on_wide_bracket = true;
};

// Discrete solution of -Δ_h u + u^q = f with the boundary data already
// recorded in `dom`. Damped Newton starting from the linear (harmonic
// majorant) solve; inner systems by multigrid-preconditioned CG.
SolveReport solve_poisson_like(const EllipticDomain& dom, double q, const Field& f,
                               const SolveOptions& opt = {}, const Field* init = nullptr);

// spec surface: Dirichlet problem with bounded data (f = 0)
SolveReport solve_dirichlet(const EllipticDomain& dom, double q, const SolveOptions& opt = {});

// Maximal solution U_F on box \ F by the monotone boundary blow-up ladder
// n = 2^k, bracketing the outer-box closure between zero data and the
// Keller-Osserman envelope. Reports the upper-closure field.
SolveReport maximal_solution(const SetDescriptor& F, const Lattice& box, double q,
                             const SolveOptions& opt = {});

// -Δu + u^q = mu with zero outer data (mu a nonnegative density).
SolveReport solve_measure_data(const SetDescriptor& F, const Lattice& box, double q,
                               const Field& mu, const SolveOptions& opt = {});

// Fattening radius used for a set on a given lattice: 0 for sets with
// interior (the interface is the true boundary), h for thin sets.
double default_fattening(const SetDescriptor& F, double h);

struct RadialProfile {
  double R = 0;      // blow-up radius
  double u0 = 0;     // center value
  double qexp = 0;   // nonlinearity exponent
  double pole_match = 1.0;
  std::vector<double> r, u;
  double value(double rr) const;  // interpolated; KO asymptote near the pole
};

// Large solution of u'' + (N-1)/r u' = u^q on [0, R), u'(0) = 0, by shooting
// on u(0) until the blow-up radius matches R to 1e-6 relative.
RadialProfile radial_large_solution(double R, double q, int N);

}  // namespace capq
