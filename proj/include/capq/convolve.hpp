#pragma once

#include <memory>
#include <vector>

#include "capq/kernel.hpp"
#include "capq/lattice.hpp"

namespace capq {

// Discrete kernel convolution on a lattice:
//
//   (G ⋆ f)(x) = h^N · Σ_y K̄(x - y) f(y)
//
// with K̄ the cell-averaged kernel. The production path zero-pads to at
// least twice the extent per axis and multiplies in Fourier space, which is
// exact linear convolution for lattice-supported data. plan setup is done
// once per lattice geometry.
class KernelConvolver {
 public:
  KernelConvolver(const Lattice& lat, const KernelTable& kernel);
  ~KernelConvolver();

  KernelConvolver(const KernelConvolver&) = delete;
  KernelConvolver& operator=(const KernelConvolver&) = delete;

  const Lattice& lattice() const { return lat_; }

  // FFT path. Input and output are cell-center values on the lattice.
  void convolve(const std::vector<double>& in, std::vector<double>& out) const;

  // Direct O(n^2) reference paths (testing and benchmarking only).
  static std::vector<double> convolve_direct_serial(const Lattice& lat,
                                                    const KernelTable& kernel,
                                                    const std::vector<double>& in);
  static std::vector<double> convolve_direct_omp(const Lattice& lat, const KernelTable& kernel,
                                                 const std::vector<double>& in);

 private:
  struct Impl;
  Lattice lat_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace capq
