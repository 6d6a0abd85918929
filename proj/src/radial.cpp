#include <algorithm>
#include <cmath>

#include "capq/elliptic.hpp"
#include "capq/errors.hpp"

namespace capq {

namespace {

struct ShootResult {
  double r_blow = 0;
  bool blew_up = false;
};

constexpr double kBlowCap = 1e11;

// integrates u'' + (N-1)/r u' = u^q from u(0)=a, u'(0)=0 until blow-up or
// r_stop; optionally records the trajectory
ShootResult shoot(double a, double q, int N, double r_stop, std::vector<double>* rs,
                  std::vector<double>* us) {
  double r = 1e-9;
  double u = a + std::pow(a, q) * r * r / (2 * N);
  double v = std::pow(a, q) * r / N;

  auto f = [&](double rr, double uu, double vv, double& du, double& dv) {
    du = vv;
    dv = std::pow(std::max(uu, 0.0), q) - (N - 1) / rr * vv;
  };

  const double cq = ko_constant(q);
  const double ctrl = 0.004;
  if (rs) { rs->push_back(r); us->push_back(u); }
  while (r < r_stop) {
    if (u > kBlowCap) {
      ShootResult out;
      out.blew_up = true;
      // remaining distance to the pole from the KO profile
      out.r_blow = r + std::pow(cq / u, (q - 1) / 2.0);
      return out;
    }
    double scale_v = u / (std::abs(v) + 1e-30);
    double scale_q = std::sqrt(u / (std::pow(u, q) + 1e-30));
    double dr = ctrl * std::min({scale_v, scale_q, 0.5});
    dr = std::min(dr, r_stop - r + 1e-14);
    dr = std::max(dr, 1e-14 * std::max(1.0, r));

    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    f(r, u, v, k1u, k1v);
    f(r + dr / 2, u + dr / 2 * k1u, v + dr / 2 * k1v, k2u, k2v);
    f(r + dr / 2, u + dr / 2 * k2u, v + dr / 2 * k2v, k3u, k3v);
    f(r + dr, u + dr * k3u, v + dr * k3v, k4u, k4v);
    u += dr / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += dr / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    r += dr;
    if (rs) { rs->push_back(r); us->push_back(u); }
  }
  return {};
}

}  // namespace

double RadialProfile::value(double rr) const {
  if (rr < 0) throw Error(Errc::domain_error, "radial profile: r must be >= 0");
  if (rr >= R) throw Error(Errc::domain_error, "radial profile: r must be below the pole");
  if (r.empty() || rr >= r.back()) {
    // KO continuation near the pole
    double q_eff = qexp;
    return ko_constant(q_eff) * std::pow(R - rr, -2.0 / (q_eff - 1.0)) * pole_match;
  }
  auto it = std::upper_bound(r.begin(), r.end(), rr);
  std::size_t hi = (std::size_t)std::max<std::ptrdiff_t>(1, it - r.begin());
  hi = std::min(hi, r.size() - 1);
  std::size_t lo = hi - 1;
  double t = (rr - r[lo]) / (r[hi] - r[lo]);
  return u[lo] * (1 - t) + u[hi] * t;
}

RadialProfile radial_large_solution(double R, double q, int N) {
  if (R <= 0 || q <= 1) throw Error(Errc::domain_error, "radial_large_solution: need R>0, q>1");

  auto blow_radius = [&](double a) {
    ShootResult s = shoot(a, q, N, 64 * R, nullptr, nullptr);
    return s.blew_up ? s.r_blow : 64 * R;  // no blow-up within range: treat as late
  };

  // bracket: larger center value blows up earlier
  double a_hi = ko_bound(R, q);  // blows before R (KO supersolution comparison)
  double a_lo = a_hi;
  int guard = 0;
  while (blow_radius(a_lo) <= R) {
    a_lo /= 4;
    if (++guard > 60)
      throw Error(Errc::shooting_bracket_failure, "radial shooting: no lower bracket");
  }
  guard = 0;
  while (blow_radius(a_hi) >= R) {
    a_hi *= 4;
    if (++guard > 60)
      throw Error(Errc::shooting_bracket_failure, "radial shooting: no upper bracket");
  }

  for (int it = 0; it < 200; ++it) {
    double mid = std::sqrt(a_lo * a_hi);
    double rb = blow_radius(mid);
    if (std::abs(rb - R) <= 1e-6 * R && it > 20) {
      a_lo = a_hi = mid;
      break;
    }
    if (rb > R)
      a_lo = mid;
    else
      a_hi = mid;
    if (a_hi / a_lo < 1 + 1e-14) break;
  }

  double a = std::sqrt(a_lo * a_hi);
  RadialProfile prof;
  prof.R = R;
  prof.u0 = a;
  prof.qexp = q;
  shoot(a, q, N, R * (1 - 1e-9), &prof.r, &prof.u);
  // trim entries beyond the KO trust zone and record the matching factor
  while (!prof.u.empty() && prof.u.back() > 1e9) {
    prof.r.pop_back();
    prof.u.pop_back();
  }
  if (!prof.u.empty()) {
    double d = R - prof.r.back();
    prof.pole_match = prof.u.back() / (ko_constant(q) * std::pow(d, -2.0 / (q - 1.0)));
  }
  return prof;
}

}  // namespace capq
