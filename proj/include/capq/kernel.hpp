#pragma once

#include <iosfwd>
#include <vector>

#include "capq/geom.hpp"

namespace capq {

// Radial table of the Bessel kernel G_2, the Green function of (I - Δ) in
// R^N. Values are produced by quadrature of the heat-kernel representation
//
//   G_2(r) = ∫_0^∞ (4π t)^{-N/2} exp(-r²/(4t) - t) dt
//
// and stored as cubic-Hermite data in (ln r, ln G). Below the table the
// near-origin asymptotic is used, above it the exponential far field
// A e^{-r} r^{-(N-1)/2}.
class KernelTable {
 public:
  explicit KernelTable(int dim);

  int dim() const { return dim_; }
  static constexpr double order() { return 2.0; }

  // G_2(r); throws domain_error for r <= 0.
  double value(double r) const;

  // Direct quadrature of the heat-kernel integral (no table); the oracle the
  // table is checked against.
  double quadrature_value(double r) const;

  // Average of G_2 over a lattice cell of spacing h centered at `offset`.
  // The self cell (offset 0) integrates G_2 exactly over the equivalent-
  // volume sphere; near cells are subsampled; far cells use the midpoint.
  double cell_average(const Vec3& offset, double h) const;

  // Two-column plain text (r, G_2(r)) for audit.
  void export_table(std::ostream& os, int count = 512) const;
  static KernelTable import_table(int dim, std::istream& is);

  double table_r_min() const { return r_min_; }
  double table_r_max() const { return r_max_; }

 private:
  KernelTable(int dim, std::vector<double> ln_r, std::vector<double> ln_g);
  void finish_setup();
  double interp_ln(double lr) const;

  int dim_;
  double r_min_, r_max_;
  std::vector<double> ln_r_, ln_g_, slope_;
  double near_coeff_ = 0;  // leading near-origin coefficient (kind depends on N)
  double far_coeff_ = 0;   // A in A e^{-r} r^{-(N-1)/2}
};

}  // namespace capq
