#include "capq/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capq/errors.hpp"
#include "capq/parallel.hpp"

namespace capq {

double critical_exponent(int dim) { return dim <= 2 ? 1.0 : dim / (dim - 2.0); }

namespace {

struct DualState {
  // everything needed to evaluate D(mu) and its gradient
  const Lattice* lat;
  const KernelConvolver* conv;
  double q, qp, kappa, vol;
  std::vector<std::int64_t> cells;

  std::vector<double> density;  // scratch: masses spread as density
  std::vector<double> gmu;      // G * mu on the lattice

  void apply(const std::vector<double>& w) {
    density.assign((std::size_t)lat->size(), 0.0);
    const double inv_vol = 1.0 / vol;
    for (std::size_t i = 0; i < cells.size(); ++i)
      density[(std::size_t)cells[i]] = w[i] * inv_vol;
    conv->convolve(density, gmu);
  }

  double mass(const std::vector<double>& w) const {
    double m = 0;
    for (double v : w) m += v;
    return m;
  }

  double energy() const {  // ∫ (G mu)^q
    const double qq = q;
    std::vector<double> p(gmu.size());
    par::for_range((std::int64_t)gmu.size(), [&](std::int64_t i) {
      double v = gmu[(std::size_t)i];
      p[(std::size_t)i] = v > 0 ? std::pow(v, qq) : 0.0;
    });
    return vol * par::sum(p);
  }

  double dual_value(double m, double e) const { return m - kappa * e; }

  // optimal positive rescale of mu: t* = (M / (q kappa E))^(1/(q-1));
  // at t* the dual equals (M / ||G mu||_q)^{q'}
  double rescale(std::vector<double>& w, double& m, double& e) {
    if (m <= 0 || e <= 0) return 0.0;
    double t = std::pow(m / (q * kappa * e), 1.0 / (q - 1.0));
    for (auto& v : w) v *= t;
    for (auto& v : gmu) v *= t;
    m *= t;
    e *= std::pow(t, q);
    return dual_value(m, e);
  }
};

}  // namespace

CapacityResult capacity(const Mask& K, double q, const KernelConvolver& conv,
                        const CapacityOptions& opt) {
  const Lattice& lat = conv.lattice();
  if (!K.lat.same_geometry(lat))
    throw Error(Errc::domain_error, "capacity: mask and convolver lattices differ");
  if (q <= 1) throw Error(Errc::domain_error, "capacity: q must exceed 1");
  if (lat.dim >= 3 && q < critical_exponent(lat.dim) - 1e-12)
    throw Error(Errc::domain_error, "capacity: q below the supercritical threshold N/(N-2)");

  CapacityResult out;
  out.cells = K.cells();
  out.est.q_prime = q / (q - 1.0);
  if (out.cells.empty()) {
    // infimum over the unconstrained problem
    out.est = CapacityEstimate{0, 0, 0, q / (q - 1.0), 0, 0, 0, true};
    return out;
  }

  DualState st;
  st.lat = &lat;
  st.conv = &conv;
  st.q = q;
  st.qp = q / (q - 1.0);
  st.kappa = (st.qp - 1.0) / std::pow(st.qp, q);
  st.vol = std::pow(lat.h, lat.dim);
  st.cells = out.cells;

  const std::size_t nk = st.cells.size();
  std::vector<double> w(nk, 1.0);
  if (opt.warm_masses && opt.warm_cells && !opt.warm_masses->empty()) {
    std::map<std::int64_t, double> m;
    for (std::size_t i = 0; i < opt.warm_cells->size(); ++i)
      m[(*opt.warm_cells)[i]] = (*opt.warm_masses)[i];
    double carry = 0;
    for (double v : *opt.warm_masses) carry += v;
    carry /= (double)opt.warm_masses->size();
    for (std::size_t i = 0; i < nk; ++i) {
      auto it = m.find(st.cells[i]);
      w[i] = it != m.end() ? it->second : carry * 0.1;
    }
  }

  st.apply(w);
  double mass = st.mass(w), energy = st.energy();
  double dual = st.rescale(w, mass, energy);

  double best_dual = std::max(0.0, dual);
  double best_upper = std::numeric_limits<double>::infinity();
  std::vector<double> gtil, v;

  auto primal_bracket = [&]() {
    // g = (G mu / q')^{q-1} rescaled to meet the constraint on K
    gtil.resize(st.gmu.size());
    const double qp = st.qp, qm1 = q - 1.0;
    par::for_range((std::int64_t)st.gmu.size(), [&](std::int64_t i) {
      double a = st.gmu[(std::size_t)i];
      gtil[(std::size_t)i] = a > 0 ? std::pow(a / qp, qm1) : 0.0;
    });
    conv.convolve(gtil, v);
    double s = std::numeric_limits<double>::infinity();
    for (auto c : st.cells) s = std::min(s, v[(std::size_t)c]);
    if (!(s > 0)) return;
    std::vector<double> p(gtil.size());
    par::for_range((std::int64_t)gtil.size(), [&](std::int64_t i) {
      p[(std::size_t)i] = std::pow(gtil[(std::size_t)i], qp);
    });
    double obj = st.vol * par::sum(p) / std::pow(s, qp);
    best_upper = std::min(best_upper, obj);
  };

  std::vector<double> grad(nk), w_prev, grad_prev, psi, gpsi, w_try(nk);
  double step = 1.0;
  int it = 0;
  double grad_norm = 0;

  for (it = 1; it <= opt.max_iter; ++it) {
    // gradient of D at w: 1 - q kappa (G * (G mu)^{q-1})(x_i)
    psi.resize(st.gmu.size());
    const double qm1 = q - 1.0;
    par::for_range((std::int64_t)st.gmu.size(), [&](std::int64_t i) {
      double a = st.gmu[(std::size_t)i];
      psi[(std::size_t)i] = a > 0 ? std::pow(a, qm1) : 0.0;
    });
    conv.convolve(psi, gpsi);
    grad_norm = 0;
    for (std::size_t i = 0; i < nk; ++i) {
      grad[i] = 1.0 - q * st.kappa * gpsi[(std::size_t)st.cells[i]];
      // projected gradient norm: ignore blocked descent directions at w = 0
      double g = grad[i];
      if (!(w[i] <= 0 && g < 0)) grad_norm = std::max(grad_norm, std::abs(g));
    }

    // Barzilai-Borwein step from the previous accepted pair
    if (!w_prev.empty()) {
      double sy = 0, yy = 0;
      for (std::size_t i = 0; i < nk; ++i) {
        double s_i = w[i] - w_prev[i];
        double y_i = grad[i] - grad_prev[i];
        sy += s_i * y_i;
        yy += y_i * y_i;
      }
      if (yy > 0 && sy < 0) step = std::min(-sy / yy, step * 8);
    }

    w_prev = w;
    grad_prev = grad;

    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      for (std::size_t i = 0; i < nk; ++i) w_try[i] = std::max(0.0, w[i] + step * grad[i]);
      st.apply(w_try);
      double m_try = st.mass(w_try), e_try = st.energy();
      double d_try = st.rescale(w_try, m_try, e_try);
      if (d_try >= dual - 1e-14 * std::max(1.0, std::abs(dual))) {
        w.swap(w_try);
        mass = m_try;
        energy = e_try;
        dual = d_try;
        accepted = true;
        step *= 1.25;
        break;
      }
      step *= 0.35;
    }
    if (!accepted) st.apply(w);  // restore gmu for the bracket

    best_dual = std::max(best_dual, dual);
    if (it % opt.bracket_every == 0 || it == opt.max_iter || !accepted) primal_bracket();

    if (std::isfinite(best_upper)) {
      double gap = (best_upper - best_dual) / std::max(best_upper, 1e-300);
      if (gap <= opt.gap_tol) break;
    }
    if (!accepted && it > 8) break;  // stationary to machine precision
  }
  if (!std::isfinite(best_upper)) primal_bracket();

  CapacityEstimate& e = out.est;
  e.dual_lower = best_dual;
  e.primal_upper = std::isfinite(best_upper) ? best_upper : best_dual;
  if (e.primal_upper < e.dual_lower) e.primal_upper = e.dual_lower;
  e.value = e.primal_upper;
  e.iterations = std::min(it, opt.max_iter);
  e.gap = (e.primal_upper - e.dual_lower) / std::max(e.primal_upper, 1e-300);
  e.grad_norm = grad_norm;
  e.converged = e.gap <= opt.gap_tol;
  out.masses = std::move(w);
  return out;
}

double dual_lower_bound(const Mask& K, double q, const KernelConvolver& conv,
                        const std::vector<std::int64_t>& cells,
                        const std::vector<double>& masses) {
  if (cells.size() != masses.size())
    throw Error(Errc::domain_error, "dual_lower_bound: cells/masses size mismatch");
  double total = 0;
  for (double m : masses) {
    if (m < 0) throw Error(Errc::zero_measure, "dual_lower_bound: negative mass");
    total += m;
  }
  if (total <= 0) throw Error(Errc::zero_measure, "dual_lower_bound: zero measure");
  for (auto c : cells)
    if (!K[(std::size_t)c])
      throw Error(Errc::domain_error, "dual_lower_bound: measure not supported in K");

  DualState st;
  st.lat = &conv.lattice();
  st.conv = &conv;
  st.q = q;
  st.qp = q / (q - 1.0);
  st.kappa = (st.qp - 1.0) / std::pow(st.qp, q);
  st.vol = std::pow(conv.lattice().h, conv.lattice().dim);
  st.cells = cells;
  std::vector<double> w = masses;
  st.apply(w);
  double m = st.mass(w), e = st.energy();
  return st.rescale(w, m, e);
}

ConvolverCache::ConvolverCache(int dim) : kernel_(dim) {}

std::shared_ptr<const KernelConvolver> ConvolverCache::get(const Lattice& lat) {
  auto key = std::make_tuple(lat.dim, lat.cells[0], lat.cells[1], lat.cells[2],
                             (long long)std::llround(lat.h * 1e12));
  std::lock_guard<std::mutex> lk(mu_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto conv = std::make_shared<const KernelConvolver>(lat, kernel_);
  cache_[key] = conv;
  return conv;
}

}  // namespace capq
