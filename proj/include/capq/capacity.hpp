#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "capq/convolve.hpp"
#include "capq/kernel.hpp"
#include "capq/lattice.hpp"

namespace capq {

// Output of the constrained convex program behind C_{2,q'}. `value` is the
// objective of the best feasible primal iterate, so dual_lower <= value ==
// primal_upper holds by construction; `gap` is the achieved relative bracket
// width.
struct CapacityEstimate {
  double value = 0;
  double primal_upper = 0;
  double dual_lower = 0;
  double q_prime = 0;
  int iterations = 0;
  double gap = 0;
  double grad_norm = 0;
  bool converged = true;
};

struct CapacityOptions {
  double gap_tol = 1e-3;
  int max_iter = 5000;
  int bracket_every = 5;
  // optional warm-start masses, aligned with K.cells() or carried over from a
  // subset mask on the same lattice (cells absent from K are dropped)
  const std::vector<double>* warm_masses = nullptr;
  const std::vector<std::int64_t>* warm_cells = nullptr;
};

struct CapacityResult {
  CapacityEstimate est;
  std::vector<std::int64_t> cells;  // constraint cells (K)
  std::vector<double> masses;       // optimizing measure on those cells
};

// Bessel capacity of a rasterized compact set via the dual-kernel program
//
//   minimize  h^N Σ g(y)^{q'}   over g >= 0 on the lattice
//   subject to (G_2 ⋆ g)(x) >= 1 at every cell center x in K,
//
// solved through its concave dual (measures on K) by projected gradient
// ascent with Barzilai-Borwein steps; feasible primal iterates are recovered
// from the dual variable to produce the upper side of the bracket.
CapacityResult capacity(const Mask& K, double q, const KernelConvolver& conv,
                        const CapacityOptions& opt = {});

// Dual value induced by a trial positive measure (masses on `cells`); always
// a lower bound for the capacity. Throws zero_measure for a vanishing input.
double dual_lower_bound(const Mask& K, double q, const KernelConvolver& conv,
                        const std::vector<std::int64_t>& cells,
                        const std::vector<double>& masses);

double critical_exponent(int dim);  // q_c = N/(N-2), or 1 when N <= 2

// Convolver cache keyed by lattice geometry (dims and spacing; the kernel
// offsets do not depend on the origin). Shared across capacity calls.
class ConvolverCache {
 public:
  explicit ConvolverCache(int dim);
  const KernelTable& kernel() const { return kernel_; }
  std::shared_ptr<const KernelConvolver> get(const Lattice& lat);

 private:
  KernelTable kernel_;
  std::mutex mu_;
  std::map<std::tuple<int, int, int, int, long long>, std::shared_ptr<const KernelConvolver>>
      cache_;
};

}  // namespace capq
