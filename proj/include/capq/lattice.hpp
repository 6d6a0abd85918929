#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "capq/geom.hpp"

namespace capq {

// Uniform cell-centered grid. `origin` is the world position of the center
// of cell (0,0,0); spacing is identical on every axis. Axes beyond `dim`
// have a single cell.
struct Lattice {
  int dim = 3;
  Vec3 origin{};
  double h = 1.0;
  std::array<int, 3> cells{1, 1, 1};

  static Lattice covering(int dim, const Vec3& lo, const Vec3& hi, double h);

  std::int64_t size() const {
    return (std::int64_t)cells[0] * cells[1] * cells[2];
  }
  std::int64_t index(int i, int j, int k) const {
    return ((std::int64_t)k * cells[1] + j) * cells[0] + i;
  }
  void coords(std::int64_t idx, int& i, int& j, int& k) const {
    i = (int)(idx % cells[0]);
    j = (int)((idx / cells[0]) % cells[1]);
    k = (int)(idx / ((std::int64_t)cells[0] * cells[1]));
  }
  Vec3 center(int i, int j, int k) const {
    return {origin.x + i * h, origin.y + j * h, origin.z + k * h};
  }
  Vec3 center(std::int64_t idx) const {
    int i, j, k;
    coords(idx, i, j, k);
    return center(i, j, k);
  }
  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && i < cells[0] && j >= 0 && j < cells[1] && k >= 0 && k < cells[2];
  }
  Vec3 lo_corner() const { return origin - Vec3{h / 2, h / 2, h / 2}; }
  Vec3 hi_corner() const {
    return {origin.x + (cells[0] - 0.5) * h, origin.y + (cells[1] - 0.5) * h,
            origin.z + (cells[2] - 0.5) * h};
  }
  bool same_geometry(const Lattice& o) const;

  // Nearest cell to a world point (clamped to bounds).
  void locate(const Vec3& p, int& i, int& j, int& k) const;
};

struct Field {
  Lattice lat;
  std::vector<double> v;

  Field() = default;
  explicit Field(const Lattice& l, double fill = 0.0) : lat(l), v((std::size_t)l.size(), fill) {}
  double& operator[](std::int64_t i) { return v[(std::size_t)i]; }
  double operator[](std::int64_t i) const { return v[(std::size_t)i]; }

  // Multilinear interpolation at a world point (clamps outside the
  // cell-center hull).
  double interp(const Vec3& p) const;
};

struct Mask {
  Lattice lat;
  std::vector<std::uint8_t> m;

  Mask() = default;
  explicit Mask(const Lattice& l, bool fill = false)
      : lat(l), m((std::size_t)l.size(), fill ? 1 : 0) {}
  bool operator[](std::int64_t i) const { return m[(std::size_t)i] != 0; }
  void set(std::int64_t i, bool b) { m[(std::size_t)i] = b ? 1 : 0; }
  std::int64_t count() const;
  std::vector<std::int64_t> cells() const;
  bool empty() const { return count() == 0; }
};

}  // namespace capq
