#include "capq/convolve.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>

#include "capq/errors.hpp"
#include "capq/parallel.hpp"

namespace capq {

namespace {

// fftw planning is not thread-safe; new-array execution on distinct buffers is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

int next_fast_size(int n) {
  // smallest 2^a 3^b 5^c >= n
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

struct FftwReal {
  double* p = nullptr;
  explicit FftwReal(std::int64_t n) { p = fftw_alloc_real((std::size_t)n); }
  ~FftwReal() { fftw_free(p); }
};
struct FftwCplx {
  fftw_complex* p = nullptr;
  explicit FftwCplx(std::int64_t n) { p = (fftw_complex*)fftw_alloc_complex((std::size_t)n); }
  ~FftwCplx() { fftw_free(p); }
};

}  // namespace

struct KernelConvolver::Impl {
  std::array<int, 3> pad{1, 1, 1};  // padded dims, x fastest
  std::int64_t real_n = 0, cplx_n = 0;
  std::vector<std::complex<double>> kernel_hat;
  fftw_plan fwd = nullptr, inv = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lk(plan_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
  }
};

KernelConvolver::KernelConvolver(const Lattice& lat, const KernelTable& kernel) : lat_(lat) {
  impl_ = std::make_unique<Impl>();
  auto& im = *impl_;
  for (int a = 0; a < 3; ++a)
    im.pad[(std::size_t)a] =
        lat.cells[(std::size_t)a] > 1 ? next_fast_size(2 * lat.cells[(std::size_t)a]) : 1;
  const int px = im.pad[0], py = im.pad[1], pz = im.pad[2];
  im.real_n = (std::int64_t)px * py * pz;
  im.cplx_n = (std::int64_t)(px / 2 + 1) * py * pz;

  FftwReal work(im.real_n);
  FftwCplx spec(im.cplx_n);
  {
    std::lock_guard<std::mutex> lk(plan_mutex());
    // fftw is row-major; our x index is fastest, so pass (pz, py, px)
    im.fwd = fftw_plan_dft_r2c_3d(pz, py, px, work.p, spec.p, FFTW_MEASURE);
    im.inv = fftw_plan_dft_c2r_3d(pz, py, px, spec.p, work.p, FFTW_MEASURE);
  }

  // kernel samples arranged circularly: offset index i holds wrap(i)
  const double h = lat.h;
  std::memset(work.p, 0, sizeof(double) * (std::size_t)im.real_n);
  auto wrap_offset = [](int i, int p) { return i <= p / 2 ? i : i - p; };
  par::for_range(im.real_n, [&](std::int64_t idx) {
    int i = (int)(idx % px);
    int j = (int)((idx / px) % py);
    int k = (int)(idx / ((std::int64_t)px * py));
    Vec3 off{wrap_offset(i, px) * h, py > 1 ? wrap_offset(j, py) * h : 0.0,
             pz > 1 ? wrap_offset(k, pz) * h : 0.0};
    work.p[idx] = kernel.cell_average(off, h);
  });
  fftw_execute_dft_r2c(im.fwd, work.p, spec.p);
  im.kernel_hat.resize((std::size_t)im.cplx_n);
  const double vol = std::pow(h, lat.dim);
  const double scale = vol / (double)im.real_n;  // h^N weight and inverse-FFT normalization
  for (std::int64_t i = 0; i < im.cplx_n; ++i)
    im.kernel_hat[(std::size_t)i] = std::complex<double>(spec.p[i][0], spec.p[i][1]) * scale;
}

KernelConvolver::~KernelConvolver() = default;

void KernelConvolver::convolve(const std::vector<double>& in, std::vector<double>& out) const {
  const auto& im = *impl_;
  const int nx = lat_.cells[0], ny = lat_.cells[1], nz = lat_.cells[2];
  const int px = im.pad[0], py = im.pad[1];
  if ((std::int64_t)in.size() != lat_.size())
    throw Error(Errc::domain_error, "convolve: size mismatch");

  FftwReal work(im.real_n);
  FftwCplx spec(im.cplx_n);
  std::memset(work.p, 0, sizeof(double) * (std::size_t)im.real_n);
  par::for_range((std::int64_t)nz * ny, [&](std::int64_t jk) {
    int j = (int)(jk % ny), k = (int)(jk / ny);
    const double* src = in.data() + ((std::int64_t)k * ny + j) * nx;
    double* dst = work.p + ((std::int64_t)k * py + j) * px;
    std::memcpy(dst, src, sizeof(double) * (std::size_t)nx);
  });
  fftw_execute_dft_r2c(im.fwd, work.p, spec.p);
  par::for_range(im.cplx_n, [&](std::int64_t i) {
    std::complex<double> v(spec.p[i][0], spec.p[i][1]);
    v *= im.kernel_hat[(std::size_t)i];
    spec.p[i][0] = v.real();
    spec.p[i][1] = v.imag();
  });
  fftw_execute_dft_c2r(im.inv, spec.p, work.p);
  out.resize((std::size_t)lat_.size());
  par::for_range((std::int64_t)nz * ny, [&](std::int64_t jk) {
    int j = (int)(jk % ny), k = (int)(jk / ny);
    const double* src = work.p + ((std::int64_t)k * py + j) * px;
    double* dst = out.data() + ((std::int64_t)k * ny + j) * nx;
    std::memcpy(dst, src, sizeof(double) * (std::size_t)nx);
  });
}

namespace {

template <class ForRange>
std::vector<double> convolve_direct(const Lattice& lat, const KernelTable& kernel,
                                    const std::vector<double>& in, ForRange&& fr) {
  const double vol = std::pow(lat.h, lat.dim);
  std::vector<double> out((std::size_t)lat.size(), 0.0);
  fr(lat.size(), [&](std::int64_t ia) {
    Vec3 xa = lat.center(ia);
    double acc = 0;
    for (std::int64_t ib = 0; ib < lat.size(); ++ib) {
      double w = in[(std::size_t)ib];
      if (w == 0) continue;
      acc += kernel.cell_average(xa - lat.center(ib), lat.h) * w;
    }
    out[(std::size_t)ia] = acc * vol;
  });
  return out;
}

}  // namespace

std::vector<double> KernelConvolver::convolve_direct_serial(const Lattice& lat,
                                                            const KernelTable& kernel,
                                                            const std::vector<double>& in) {
  return convolve_direct(lat, kernel, in,
                         [](std::int64_t n, auto&& f) { par::serial::for_range(n, f); });
}

std::vector<double> KernelConvolver::convolve_direct_omp(const Lattice& lat,
                                                         const KernelTable& kernel,
                                                         const std::vector<double>& in) {
  return convolve_direct(lat, kernel, in,
                         [](std::int64_t n, auto&& f) { par::omp::for_range(n, f); });
}

}  // namespace capq
