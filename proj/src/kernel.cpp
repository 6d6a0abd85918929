#include "capq/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "capq/errors.hpp"

namespace capq {

namespace {

constexpr double kPi = 3.14159265358979323846;

// log of the heat-kernel integrand after t = e^u
double log_integrand(double u, double r, int N) {
  double t = std::exp(u);
  return -r * r / (4 * t) - t + u * (1.0 - N / 2.0) - (N / 2.0) * std::log(4 * kPi);
}

}  // namespace

double KernelTable::quadrature_value(double r) const {
  if (r <= 0) throw Error(Errc::domain_error, "bessel kernel: r must be positive");
  const int N = dim_;
  // maximizer of the exponent: e^u = [(1-N/2) + sqrt((1-N/2)^2 + r^2)]/2
  double a = 1.0 - N / 2.0;
  double v = 0.5 * (a + std::sqrt(a * a + r * r));
  double u0 = std::log(std::max(v, 1e-300));
  double peak = log_integrand(u0, r, N);

  const double du = 0.05;
  const double drop = 60.0;  // integrate until the integrand falls by e^-60
  double sum = std::exp(log_integrand(u0, r, N) - peak);
  for (int s = -1; s <= 1; s += 2) {
    for (int i = 1; i < 40000; ++i) {
      double le = log_integrand(u0 + s * i * du, r, N) - peak;
      if (le < -drop) break;
      sum += std::exp(le);
    }
  }
  return sum * du * std::exp(peak);
}

KernelTable::KernelTable(int dim) : dim_(dim) {
  if (dim < 1 || dim > 3) throw Error(Errc::config_error, "kernel dim must be 1, 2 or 3");
  r_min_ = 1e-4;
  r_max_ = 40.0;
  const int n = 6144;
  ln_r_.resize(n);
  ln_g_.resize(n);
  double l0 = std::log(r_min_), l1 = std::log(r_max_);
  for (int i = 0; i < n; ++i) {
    double lr = l0 + (l1 - l0) * i / (n - 1);
    ln_r_[(std::size_t)i] = lr;
    ln_g_[(std::size_t)i] = std::log(quadrature_value(std::exp(lr)));
  }
  finish_setup();
}

KernelTable::KernelTable(int dim, std::vector<double> ln_r, std::vector<double> ln_g)
    : dim_(dim), ln_r_(std::move(ln_r)), ln_g_(std::move(ln_g)) {
  r_min_ = std::exp(ln_r_.front());
  r_max_ = std::exp(ln_r_.back());
  finish_setup();
}

void KernelTable::finish_setup() {
  const std::size_t n = ln_r_.size();
  slope_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = i == 0 ? 0 : i - 1;
    std::size_t b = i + 1 == n ? i : i + 1;
    slope_[i] = (ln_g_[b] - ln_g_[a]) / (ln_r_[b] - ln_r_[a]);
  }
  // near-origin: G ~ c r^(2-N) for N=3, (1/2π)(-ln r + c) for N=2, ~1/2 for N=1
  double r0 = r_min_;
  double g0 = std::exp(ln_g_.front());
  if (dim_ == 3)
    near_coeff_ = g0 * r0;  // G ≈ near_coeff / r
  else if (dim_ == 2)
    near_coeff_ = g0 + std::log(r0) / (2 * kPi);  // G ≈ -ln(r)/2π + near_coeff
  else
    near_coeff_ = g0;  // flat
  double rn = r_max_;
  far_coeff_ = std::exp(ln_g_.back()) * std::exp(rn) * std::pow(rn, (dim_ - 1) / 2.0);
}

double KernelTable::interp_ln(double lr) const {
  const auto& xs = ln_r_;
  std::size_t n = xs.size();
  std::size_t hi = (std::size_t)(std::upper_bound(xs.begin(), xs.end(), lr) - xs.begin());
  hi = std::clamp<std::size_t>(hi, 1, n - 1);
  std::size_t lo = hi - 1;
  double hseg = xs[hi] - xs[lo];
  double t = (lr - xs[lo]) / hseg;
  double y0 = ln_g_[lo], y1 = ln_g_[hi];
  double m0 = slope_[lo] * hseg, m1 = slope_[hi] * hseg;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * m1;
}

double KernelTable::value(double r) const {
  if (r <= 0) throw Error(Errc::domain_error, "bessel kernel: r must be positive");
  if (r < r_min_) {
    if (dim_ == 3) return near_coeff_ / r;
    if (dim_ == 2) return -std::log(r) / (2 * kPi) + near_coeff_;
    return near_coeff_;
  }
  if (r > r_max_) return far_coeff_ * std::exp(-r) * std::pow(r, -(dim_ - 1) / 2.0);
  return std::exp(interp_ln(std::log(r)));
}

double KernelTable::cell_average(const Vec3& offset, double h) const {
  double r = norm(offset);
  if (r > 3.0 * h) return value(r);
  if (r < h * 1e-9) {
    // self cell: integrate over the sphere of equal volume
    if (dim_ == 3) {
      double rho = std::cbrt(3.0 / (4.0 * kPi)) * h;
      // ∫_{B_rho} e^{-r'}/(4π r') dV = ∫_0^rho r' e^{-r'} dr' exactly for the
      // Newtonian-with-decay form; for the tabulated kernel integrate r'^2 G
      // numerically (16-point Gauss is plenty for a monotone integrand).
      double acc = 0;
      const int ng = 24;
      for (int i = 0; i < ng; ++i) {
        double t = (i + 0.5) / ng;
        double rr = rho * t;
        acc += rr * rr * value(std::max(rr, 1e-12)) * (rho / ng);
      }
      return acc * 4 * kPi / (h * h * h);
    }
    if (dim_ == 2) {
      double rho = h / std::sqrt(kPi);
      double acc = 0;
      const int ng = 24;
      for (int i = 0; i < ng; ++i) {
        double t = (i + 0.5) / ng;
        double rr = rho * t;
        acc += rr * value(std::max(rr, 1e-12)) * (rho / ng);
      }
      return acc * 2 * kPi / (h * h);
    }
    double rho = h / 2;
    double acc = 0;
    const int ng = 24;
    for (int i = 0; i < ng; ++i) {
      double t = (i + 0.5) / ng;
      acc += value(std::max(rho * t, 1e-12)) * (rho / ng);
    }
    return acc * 2 / h;
  }
  // near cell: midpoint subsample
  const int ns = 5;
  int nx = ns, ny = dim_ >= 2 ? ns : 1, nz = dim_ >= 3 ? ns : 1;
  double acc = 0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        Vec3 d{offset.x + ((i + 0.5) / nx - 0.5) * h,
               offset.y + (ny > 1 ? ((j + 0.5) / ny - 0.5) * h : 0.0),
               offset.z + (nz > 1 ? ((k + 0.5) / nz - 0.5) * h : 0.0)};
        acc += value(std::max(norm(d), 1e-12));
      }
  return acc / (nx * ny * nz);
}

void KernelTable::export_table(std::ostream& os, int count) const {
  os.precision(16);
  double l0 = std::log(r_min_), l1 = std::log(r_max_);
  for (int i = 0; i < count; ++i) {
    double r = std::exp(l0 + (l1 - l0) * i / (count - 1));
    os << r << ' ' << value(r) << '\n';
  }
}

KernelTable KernelTable::import_table(int dim, std::istream& is) {
  std::vector<double> lr, lg;
  double r, g;
  while (is >> r >> g) {
    if (r <= 0 || g <= 0) throw Error(Errc::config_error, "kernel import: nonpositive sample");
    lr.push_back(std::log(r));
    lg.push_back(std::log(g));
  }
  if (lr.size() < 8) throw Error(Errc::config_error, "kernel import: too few samples");
  return KernelTable(dim, std::move(lr), std::move(lg));
}

}  // namespace capq
