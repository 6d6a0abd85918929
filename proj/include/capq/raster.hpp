#pragma once

#include <vector>

#include "capq/descriptor.hpp"
#include "capq/lattice.hpp"

namespace capq {

struct Raster {
  Mask mask;    // cell centers within h/2 of the set
  Field dist;   // exact analytic distance sampled at cell centers
};

// Samples the descriptor's distance function at every cell center and marks
// cells within h/2 of the set. Throws lattice_too_coarse when the set's
// smallest feature is below 2h, and empty_result for the empty set.
Raster rasterize(const SetDescriptor& desc, const Lattice& lat);

struct ShellEntry {
  int m = 0;
  SetDescriptor piece;        // F ∩ T_m(x), analytic
  SetDescriptor cumulative;   // F ∩ closed ball of radius 2^-m about x
  Mask piece_mask;            // piece rasterized on the source lattice
  bool nonempty = false;
};

struct ShellDecomposition {
  Vec3 center;
  int m_min = 0, m_max = 0;
  int M = 0;                  // largest m with a nonempty shell piece
  std::vector<ShellEntry> entries;
};

// Dyadic shell decomposition about x: T_m(x) is the closed annulus
// 2^-(m+1) <= |y-x| <= 2^-m. Cells at a shell boundary belong to both
// adjacent shells (closed annuli). M is computed from the analytic distance;
// exact dyadic ties resolve to the coarser shell.
ShellDecomposition shell_decompose(const SetDescriptor& F, const Vec3& x, int m_min, int m_max,
                                   const Lattice& lat);

// Default shell range for a set and evaluation point: m_min is the coarsest
// shell that can meet F, m_max the finest one resolvable at spacing h.
void default_shell_range(const SetDescriptor& F, const Vec3& x, double h, int& m_min, int& m_max);

// Dyadic index of the shell containing the nearest point of F (ties go to
// the coarser shell). Requires dist > 0.
int shell_index_of_distance(double dist);

// Dilation of a shell piece by 2^m about x: maps T_m(x) onto the closed unit
// annulus about x. The returned descriptor stays analytic.
SetDescriptor rescale_to_unit(const SetDescriptor& piece, const Vec3& x, int m);

}  // namespace capq
