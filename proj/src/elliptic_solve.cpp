#include <algorithm>
#include <cmath>
#include <limits>

#include "capq/elliptic_detail.hpp"
#include "capq/errors.hpp"
#include "capq/parallel.hpp"

namespace capq {

namespace {

// u^p with fast paths for the common integer exponents
inline double pow_q(double u, double p) {
  if (u <= 0) return 0.0;
  double ip;
  if (std::modf(p, &ip) == 0.0 && ip >= 2 && ip <= 8) {
    double r = u;
    for (int k = 1; k < (int)ip; ++k) r *= u;
    return r;
  }
  return std::pow(u, p);
}

double residual_scale(const detail::FineOp& op, const std::vector<double>& f, double bc_max,
                      double q) {
  // characteristic size of the residual terms at the boundary data level
  double s = 1.0;
  s = std::max(s, bc_max * op.inv_h2);
  s = std::max(s, pow_q(bc_max, q));
  for (double v : f) s = std::max(s, std::abs(v));
  return s;
}

struct NewtonOut {
  double residual = 0;
  double scale = 1;
  bool converged = false;
  int iters = 0;
};

// Damped Newton for  A_lin u + u^q = f  from a supersolution start.
NewtonOut newton_solve(const detail::FineOp& op, double q, const std::vector<double>& f,
                       std::vector<double>& u, const SolveOptions& opt, double bc_max) {
  const std::int64_t n = op.lat.size();
  std::vector<double> r((std::size_t)n), diag_nl((std::size_t)n), d, u_try((std::size_t)n);

  auto eval_residual = [&](const std::vector<double>& w, std::vector<double>& out) {
    op.apply(w, {}, out);
    par::for_range(n, [&](std::int64_t i) {
      if (!op.interior[(std::size_t)i]) {
        out[(std::size_t)i] = 0;
        return;
      }
      out[(std::size_t)i] += pow_q(w[(std::size_t)i], q) - op.rhs_bc[(std::size_t)i] -
                             f[(std::size_t)i];
    });
  };

  NewtonOut res;
  res.scale = residual_scale(op, f, bc_max, q);
  const double target = opt.newton_tol * res.scale;

  eval_residual(u, r);
  double rn = par::max_abs(r);
  int it = 0;
  for (it = 0; it < opt.max_newton && rn > target; ++it) {
    par::for_range(n, [&](std::int64_t i) {
      double w = u[(std::size_t)i];
      diag_nl[(std::size_t)i] =
          op.interior[(std::size_t)i] && w > 0 ? q * pow_q(w, q - 1.0) : 0.0;
    });
    detail::MgPcg pcg(op, diag_nl);
    par::for_range(n, [&](std::int64_t i) { r[(std::size_t)i] = -r[(std::size_t)i]; });
    d.assign((std::size_t)n, 0.0);
    pcg.solve(r, d, 1e-4, opt.max_cg);

    double s = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 14; ++ls) {
      par::for_range(n, [&](std::int64_t i) {
        u_try[(std::size_t)i] = std::max(0.0, u[(std::size_t)i] + s * d[(std::size_t)i]);
      });
      eval_residual(u_try, r);
      double rn_try = par::max_abs(r);
      if (rn_try < rn * (1.0 - 1e-4 * s) || rn_try <= target) {
        u.swap(u_try);
        rn = rn_try;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      eval_residual(u, r);
      rn = par::max_abs(r);
      break;
    }
  }
  res.residual = rn;
  res.converged = rn <= target;
  res.iters = it;
  return res;
}

// linear solve A_lin u = f + bc  (the harmonic majorant used as the Newton start)
void linear_start(const detail::FineOp& op, const std::vector<double>& f,
                  std::vector<double>& u, const SolveOptions& opt) {
  const std::int64_t n = op.lat.size();
  std::vector<double> rhs((std::size_t)n, 0.0);
  par::for_range(n, [&](std::int64_t i) {
    if (op.interior[(std::size_t)i])
      rhs[(std::size_t)i] = op.rhs_bc[(std::size_t)i] + f[(std::size_t)i];
  });
  detail::MgPcg pcg(op, {});
  u.assign((std::size_t)n, 0.0);
  pcg.solve(rhs, u, 1e-10, opt.max_cg);
  par::for_range(n, [&](std::int64_t i) {
    u[(std::size_t)i] = std::max(0.0, u[(std::size_t)i]);
  });
}

void fill_ko_ratio(const EllipticDomain& dom, double q, SolveReport& rep) {
  rep.ko_ratio = Field(dom.lat, 0.0);
  const double cq = ko_constant(q);
  const double e = 2.0 / (q - 1.0);
  par::for_range(dom.lat.size(), [&](std::int64_t i) {
    double d = dom.sdist[i] - dom.delta;
    if (dom.at(i) == CellState::interior && d > 0 && std::isfinite(d))
      rep.ko_ratio[i] = rep.u[i] * std::pow(d, e) / cq;
  });
}

double probe_sup(const EllipticDomain& dom, const Field& u, double lo, double hi) {
  double s = 0;
  for (std::int64_t i = 0; i < dom.lat.size(); ++i) {
    double d = dom.sdist[i] - dom.delta;
    if (dom.at(i) == CellState::interior && d >= lo && d <= hi) s = std::max(s, u[i]);
  }
  return s;
}

}  // namespace

SolveReport solve_poisson_like(const EllipticDomain& dom, double q, const Field& f,
                               const SolveOptions& opt, const Field* init) {
  for (std::int64_t i = 0; i < dom.lat.size(); ++i)
    if (dom.at(i) != CellState::interior && dom.bc[(std::size_t)i] < 0)
      throw Error(Errc::domain_error, "solve: negative boundary data");

  detail::FineOp op = detail::FineOp::assemble(dom);
  double bc_max = 0;
  for (std::int64_t i = 0; i < dom.lat.size(); ++i)
    if (dom.at(i) != CellState::interior) bc_max = std::max(bc_max, dom.bc[(std::size_t)i]);

  SolveReport rep;
  rep.u = Field(dom.lat, 0.0);
  if (init && init->lat.same_geometry(dom.lat))
    rep.u.v = init->v;
  else
    linear_start(op, f.v, rep.u.v, opt);

  NewtonOut nres = newton_solve(op, q, f.v, rep.u.v, opt, bc_max);
  rep.residual_norm = nres.residual;
  rep.residual_scale = nres.scale;
  rep.converged = nres.converged;
  rep.newton_iters = nres.iters;
  fill_ko_ratio(dom, q, rep);
  return rep;
}

SolveReport solve_dirichlet(const EllipticDomain& dom, double q, const SolveOptions& opt) {
  return solve_poisson_like(dom, q, Field(dom.lat, 0.0), opt);
}

double default_fattening(const SetDescriptor& F, double h) {
  return F.has_interior() ? 0.0 : h;
}

namespace {

// One blow-up ladder at fixed outer closure; warm-starts every rung. Rung
// values are capped at first-cell consistency: with interface data n, the
// cell half a spacing away balances u^q ~ n/(θ h²), so data beyond
// n* = θ h² ko(θ h)^q just overshoots the resolvable profile and leaks
// outward instead of sharpening the limit.
SolveReport run_ladder(EllipticDomain& dom, double q, const SolveOptions& opt, double plo,
                       double phi, const Field* warm) {
  SolveReport rep;
  Field u = warm ? *warm : Field(dom.lat, 0.0);
  const Field zero(dom.lat, 0.0);
  const double h = dom.lat.h;
  const double n_cap = 0.5 * h * h * std::pow(ko_bound(0.5 * h, q), q);
  double prev_sup = -1;
  bool first = true;
  for (int k = 0; k < opt.ladder_max_rungs; ++k) {
    double n = std::pow(2.0, k);
    bool last = false;
    if (n >= n_cap) {
      n = n_cap;
      last = true;
    }
    dom.set_interface_value(n);
    SolveReport step =
        solve_poisson_like(dom, q, zero, opt, (first && !warm) ? nullptr : &u);
    first = false;
    u = step.u;
    LadderStep ls;
    ls.n = n;
    ls.probe_sup = probe_sup(dom, u, plo, phi);
    ls.increment = prev_sup < 0 ? ls.probe_sup : ls.probe_sup - prev_sup;
    ls.newton_iters = step.newton_iters;
    prev_sup = ls.probe_sup;
    rep.ladder.push_back(ls);
    rep.u = u;
    rep.residual_norm = step.residual_norm;
    rep.residual_scale = step.residual_scale;
    rep.converged = step.converged;
    if (last) break;
    if (k >= 3 && std::abs(ls.increment) <= opt.ladder_increment_tol * std::max(1.0, ls.probe_sup))
      break;
  }
  return rep;
}

}  // namespace

SolveReport maximal_solution(const SetDescriptor& F, const Lattice& box, double q,
                             const SolveOptions& opt) {
  if (F.is_empty()) throw Error(Errc::empty_result, "maximal_solution: empty set");
  double feat = F.feature_scale();
  if (feat < 2 * box.h)
    throw Error(Errc::fattening_unresolved,
                "maximal_solution: set features below 2h cannot be fattened on this lattice");

  double delta = default_fattening(F, box.h);
  EllipticDomain dom = EllipticDomain::exterior_of(F, box, delta);
  if (dom.interior_count() == 0)
    throw Error(Errc::degenerate_range, "maximal_solution: no interior cells");

  // probe annulus for the monotone-limit stop rule
  double dmax = 0;
  for (std::int64_t i = 0; i < box.size(); ++i)
    if (dom.at(i) == CellState::interior && std::isfinite(dom.sdist[i]))
      dmax = std::max(dmax, dom.sdist[i] - delta);
  double plo = opt.probe_lo > 0 ? opt.probe_lo : std::max(4 * box.h, 0.15 * dmax);
  double phi = opt.probe_hi > 0 ? opt.probe_hi : std::max(plo * 1.5, 0.35 * dmax);

  bool has_outer = false;
  for (std::int64_t i = 0; i < box.size(); ++i)
    if (dom.at(i) == CellState::dir_outer) { has_outer = true; break; }

  // lower closure: zero outer data
  dom.set_outer_values([](const Vec3&) { return 0.0; });
  SolveReport lower = run_ladder(dom, q, opt, plo, phi, nullptr);

  if (!has_outer) {
    lower.bracket_rel_width = 0;
    fill_ko_ratio(dom, q, lower);
    return lower;
  }

  // upper closure: Keller-Osserman envelope on the box ring
  dom.set_outer_values([&](const Vec3& p) {
    double d = std::max(F.distance(p) - delta, box.h);
    return ko_bound(d, q);
  });
  SolveReport upper = run_ladder(dom, q, opt, plo, phi, &lower.u);

  double slo = probe_sup(dom, lower.u, plo, phi);
  double shi = probe_sup(dom, upper.u, plo, phi);
  upper.bracket_rel_width = shi > 0 ? (shi - slo) / shi : 0.0;
  if (opt.throw_on_wide_bracket && upper.bracket_rel_width > opt.bracket_max)
    throw Error(Errc::bracket_too_wide,
                "maximal_solution: closure bracket " + std::to_string(upper.bracket_rel_width) +
                    " exceeds " + std::to_string(opt.bracket_max) + " (box too small)");
  fill_ko_ratio(dom, q, upper);
  return upper;
}

SolveReport solve_measure_data(const SetDescriptor& F, const Lattice& box, double q,
                               const Field& mu, const SolveOptions& opt) {
  for (double v : mu.v)
    if (v < 0) throw Error(Errc::domain_error, "solve_measure_data: negative density");
  EllipticDomain dom = EllipticDomain::plain_box(box);
  dom.set_outer_values([](const Vec3&) { return 0.0; });
  SolveReport rep = solve_poisson_like(dom, q, mu, opt);
  if (!F.is_empty()) {
    // distance diagnostics relative to F for the ko_ratio field
    par::for_range(box.size(), [&](std::int64_t i) {
      dom.sdist[i] = F.signed_distance(box.center(i));
    });
    rep.ko_ratio = Field(box, 0.0);
    const double cq = ko_constant(q);
    for (std::int64_t i = 0; i < box.size(); ++i) {
      double d = dom.sdist[i];
      if (dom.at(i) == CellState::interior && d > 0)
        rep.ko_ratio[i] = rep.u[i] * std::pow(d, 2.0 / (q - 1.0)) / cq;
    }
  }
  return rep;
}

}  // namespace capq
