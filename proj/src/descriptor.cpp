#include "capq/descriptor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include "capq/errors.hpp"

namespace capq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double dist_point_box(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    double d = std::max({lo[a] - x[a], x[a] - hi[a], 0.0});
    s += d * d;
  }
  return std::sqrt(s);
}

double signed_dist_box(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  double outside = dist_point_box(x, lo, hi);
  if (outside > 0) return outside;
  double inside = kInf;
  for (int a = 0; a < 3; ++a) inside = std::min({inside, x[a] - lo[a], hi[a] - x[a]});
  return -inside;
}

double dist_point_segment(const Vec3& x, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double L2 = dot(ab, ab);
  if (L2 == 0) return norm(x - a);
  double t = std::clamp(dot(x - a, ab) / L2, 0.0, 1.0);
  return norm(x - (a + ab * t));
}
}  // namespace

struct PointsData { std::vector<Vec3> pts; };
struct BallData { Vec3 c; double r; };
struct SegmentData { Vec3 a, b; };
struct BoxData { Vec3 lo, hi; };
struct CantorData {
  Vec3 lo, hi;
  double ratio;
  int depth;
  std::vector<int> coords;  // sorted, unique
};
struct UnionData { std::vector<SetDescriptor> parts; };
struct ClipData {
  std::shared_ptr<const SetDescriptor::Node> inner;
  Vec3 center;
  double rin, rout;
};
struct ComplementData { std::shared_ptr<const SetDescriptor::Node> inner; };

struct SetDescriptor::Node {
  using Data = std::variant<std::monostate, PointsData, BallData, SegmentData, BoxData,
                            CantorData, UnionData, ClipData, ComplementData>;
  Kind kind = Kind::empty;
  Data data;
};

namespace {

using Node = SetDescriptor::Node;

SetDescriptor wrap(Node n) { return SetDescriptor(std::make_shared<Node>(std::move(n))); }

// Distance to the depth-d Cantor construction inside box [lo, hi]: recurse
// into the two children along each fractal coordinate, pruning subtrees whose
// bounding box is already farther than the best distance found.
double cantor_dist(const Vec3& x, Vec3 lo, Vec3 hi, double ratio, int depth,
                   const std::vector<int>& coords, double best) {
  double bound = dist_point_box(x, lo, hi);
  if (bound >= best) return best;
  if (depth == 0) return std::min(best, bound);
  // children along all fractal coordinates at once: 2^k boxes
  int k = (int)coords.size();
  int nchild = 1 << k;
  for (int c = 0; c < nchild; ++c) {
    Vec3 clo = lo, chi = hi;
    for (int b = 0; b < k; ++b) {
      int a = coords[(std::size_t)b];
      double L = hi[a] - lo[a];
      if (c & (1 << b)) {
        clo[a] = hi[a] - ratio * L;
      } else {
        chi[a] = lo[a] + ratio * L;
      }
    }
    best = cantor_dist(x, clo, chi, ratio, depth - 1, coords, best);
  }
  return best;
}

}  // namespace

SetDescriptor::SetDescriptor() : node_(std::make_shared<Node>()) {}

SetDescriptor SetDescriptor::empty() { return SetDescriptor(); }

SetDescriptor SetDescriptor::point_cloud(std::vector<Vec3> pts) {
  if (pts.empty()) return empty();
  Node n;
  n.kind = Kind::points;
  n.data = PointsData{std::move(pts)};
  return wrap(std::move(n));
}

SetDescriptor SetDescriptor::closed_ball(const Vec3& center, double radius) {
  if (radius < 0) throw Error(Errc::config_error, "ball radius must be >= 0");
  Node n;
  n.kind = Kind::ball;
  n.data = BallData{center, radius};
  return wrap(std::move(n));
}

SetDescriptor SetDescriptor::segment(const Vec3& a, const Vec3& b) {
  Node n;
  n.kind = Kind::segment;
  n.data = SegmentData{a, b};
  return wrap(std::move(n));
}

SetDescriptor SetDescriptor::box(const Vec3& lo, const Vec3& hi) {
  for (int a = 0; a < 3; ++a)
    if (lo[a] > hi[a]) throw Error(Errc::config_error, "box lo must be <= hi");
  Node n;
  n.kind = Kind::box;
  n.data = BoxData{lo, hi};
  return wrap(std::move(n));
}

SetDescriptor SetDescriptor::cantor(const Vec3& lo, const Vec3& hi, double ratio, int depth,
                                    std::vector<int> fractal_coords) {
  if (!(ratio > 0 && ratio < 0.5))
    throw Error(Errc::config_error, "cantor ratio must lie in (0, 1/2)");
  if (depth < 0) throw Error(Errc::config_error, "cantor depth must be >= 0");
  std::sort(fractal_coords.begin(), fractal_coords.end());
  fractal_coords.erase(std::unique(fractal_coords.begin(), fractal_coords.end()),
                       fractal_coords.end());
  if (fractal_coords.empty() || fractal_coords.front() < 0 || fractal_coords.back() > 2)
    throw Error(Errc::config_error, "cantor fractal coords must name axes 0..2");
  Node n;
  n.kind = Kind::cantor;
  n.data = CantorData{lo, hi, ratio, depth, std::move(fractal_coords)};
  return wrap(std::move(n));
}

SetDescriptor SetDescriptor::set_union(std::vector<SetDescriptor> parts) {
  std::vector<SetDescriptor> kept;
  for (auto& p : parts)
    if (!p.is_empty()) kept.push_back(std::move(p));
  if (kept.empty()) return empty();
  if (kept.size() == 1) return kept[0];
  Node n;
  n.kind = Kind::set_union;
  n.data = UnionData{std::move(kept)};
  return wrap(std::move(n));
}

SetDescriptor SetDescriptor::complement(const SetDescriptor& inner) {
  Node n;
  n.kind = Kind::complement;
  n.data = ComplementData{inner.node_};
  return wrap(std::move(n));
}

SetDescriptor::Kind SetDescriptor::kind() const { return node_->kind; }

bool SetDescriptor::is_empty() const { return node_->kind == Kind::empty; }

double SetDescriptor::distance(const Vec3& x) const {
  switch (node_->kind) {
    case Kind::empty:
      return kInf;
    case Kind::points: {
      const auto& d = std::get<PointsData>(node_->data);
      double best = kInf;
      for (const auto& p : d.pts) best = std::min(best, norm(x - p));
      return best;
    }
    case Kind::ball: {
      const auto& d = std::get<BallData>(node_->data);
      return std::max(0.0, norm(x - d.c) - d.r);
    }
    case Kind::segment: {
      const auto& d = std::get<SegmentData>(node_->data);
      return dist_point_segment(x, d.a, d.b);
    }
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      return dist_point_box(x, d.lo, d.hi);
    }
    case Kind::cantor: {
      const auto& d = std::get<CantorData>(node_->data);
      return cantor_dist(x, d.lo, d.hi, d.ratio, d.depth, d.coords, kInf);
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      double best = kInf;
      for (const auto& p : d.parts) best = std::min(best, p.distance(x));
      return best;
    }
    case Kind::clip: {
      const auto& d = std::get<ClipData>(node_->data);
      double r = norm(x - d.center);
      double ann = std::max({d.rin - r, r - d.rout, 0.0});
      SetDescriptor inner(d.inner);
      return std::max(inner.distance(x), ann);
    }
    case Kind::complement: {
      const auto& d = std::get<ComplementData>(node_->data);
      SetDescriptor inner(d.inner);
      return std::max(0.0, -inner.signed_distance(x));
    }
  }
  return kInf;
}

double SetDescriptor::signed_distance(const Vec3& x) const {
  switch (node_->kind) {
    case Kind::ball: {
      const auto& d = std::get<BallData>(node_->data);
      return norm(x - d.c) - d.r;
    }
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      return signed_dist_box(x, d.lo, d.hi);
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      double best = kInf;
      for (const auto& p : d.parts) best = std::min(best, p.signed_distance(x));
      return best;
    }
    case Kind::complement: {
      const auto& d = std::get<ComplementData>(node_->data);
      SetDescriptor inner(d.inner);
      return -inner.signed_distance(x);
    }
    default:
      return distance(x);
  }
}

void SetDescriptor::bounds(Vec3& lo, Vec3& hi) const {
  switch (node_->kind) {
    case Kind::empty:
      lo = {0, 0, 0};
      hi = {0, 0, 0};
      return;
    case Kind::points: {
      const auto& d = std::get<PointsData>(node_->data);
      lo = hi = d.pts[0];
      for (const auto& p : d.pts)
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], p[a]);
          hi[a] = std::max(hi[a], p[a]);
        }
      return;
    }
    case Kind::ball: {
      const auto& d = std::get<BallData>(node_->data);
      lo = d.c - Vec3{d.r, d.r, d.r};
      hi = d.c + Vec3{d.r, d.r, d.r};
      return;
    }
    case Kind::segment: {
      const auto& d = std::get<SegmentData>(node_->data);
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(d.a[a], d.b[a]);
        hi[a] = std::max(d.a[a], d.b[a]);
      }
      return;
    }
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      lo = d.lo;
      hi = d.hi;
      return;
    }
    case Kind::cantor: {
      const auto& d = std::get<CantorData>(node_->data);
      lo = d.lo;
      hi = d.hi;
      return;
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      d.parts[0].bounds(lo, hi);
      for (const auto& p : d.parts) {
        Vec3 plo, phi;
        p.bounds(plo, phi);
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], plo[a]);
          hi[a] = std::max(hi[a], phi[a]);
        }
      }
      return;
    }
    case Kind::clip: {
      const auto& d = std::get<ClipData>(node_->data);
      Vec3 ilo, ihi;
      SetDescriptor(d.inner).bounds(ilo, ihi);
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(ilo[a], d.center[a] - d.rout);
        hi[a] = std::min(ihi[a], d.center[a] + d.rout);
        if (lo[a] > hi[a]) lo[a] = hi[a];
      }
      return;
    }
    case Kind::complement:
      // unbounded; report the inner bounds as a hint
      SetDescriptor(std::get<ComplementData>(node_->data).inner).bounds(lo, hi);
      return;
  }
}

double SetDescriptor::diameter() const {
  if (is_empty()) return 0.0;
  Vec3 lo, hi;
  bounds(lo, hi);
  return norm(hi - lo);
}

double SetDescriptor::feature_scale() const {
  switch (node_->kind) {
    case Kind::empty:
      return kInf;
    case Kind::points: {
      const auto& d = std::get<PointsData>(node_->data);
      if (d.pts.size() < 2) return kInf;
      double best = kInf;
      for (std::size_t i = 0; i < d.pts.size(); ++i)
        for (std::size_t j = i + 1; j < d.pts.size(); ++j)
          best = std::min(best, norm(d.pts[i] - d.pts[j]));
      return best;
    }
    case Kind::ball:
      return std::get<BallData>(node_->data).r;
    case Kind::segment: {
      const auto& d = std::get<SegmentData>(node_->data);
      return norm(d.b - d.a);
    }
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      double s = kInf;
      for (int a = 0; a < 3; ++a) {
        double L = d.hi[a] - d.lo[a];
        if (L > 0) s = std::min(s, L);
      }
      return s;
    }
    case Kind::cantor: {
      const auto& d = std::get<CantorData>(node_->data);
      double s = kInf;
      for (int a : d.coords) s = std::min(s, (d.hi[a] - d.lo[a]) * std::pow(d.ratio, d.depth));
      return s;
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      double s = kInf;
      for (const auto& p : d.parts) s = std::min(s, p.feature_scale());
      return s;
    }
    case Kind::clip:
      return SetDescriptor(std::get<ClipData>(node_->data).inner).feature_scale();
    case Kind::complement:
      return SetDescriptor(std::get<ComplementData>(node_->data).inner).feature_scale();
  }
  return kInf;
}

bool SetDescriptor::has_interior() const {
  switch (node_->kind) {
    case Kind::ball:
      return std::get<BallData>(node_->data).r > 0;
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      for (int a = 0; a < 3; ++a)
        if (!(d.hi[a] > d.lo[a])) return false;
      return true;
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      for (const auto& p : d.parts)
        if (p.has_interior()) return true;
      return false;
    }
    case Kind::complement:
      return true;
    default:
      return false;
  }
}

SetDescriptor SetDescriptor::dilate(const Vec3& center, double factor) const {
  if (factor <= 0) throw Error(Errc::config_error, "dilation factor must be positive");
  auto map = [&](const Vec3& p) { return center + (p - center) * factor; };
  switch (node_->kind) {
    case Kind::empty:
      return empty();
    case Kind::points: {
      auto d = std::get<PointsData>(node_->data);
      for (auto& p : d.pts) p = map(p);
      return point_cloud(std::move(d.pts));
    }
    case Kind::ball: {
      const auto& d = std::get<BallData>(node_->data);
      return closed_ball(map(d.c), d.r * factor);
    }
    case Kind::segment: {
      const auto& d = std::get<SegmentData>(node_->data);
      return segment(map(d.a), map(d.b));
    }
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      return box(map(d.lo), map(d.hi));
    }
    case Kind::cantor: {
      const auto& d = std::get<CantorData>(node_->data);
      return cantor(map(d.lo), map(d.hi), d.ratio, d.depth, d.coords);
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      std::vector<SetDescriptor> parts;
      for (const auto& p : d.parts) parts.push_back(p.dilate(center, factor));
      return set_union(std::move(parts));
    }
    case Kind::clip: {
      const auto& d = std::get<ClipData>(node_->data);
      SetDescriptor inner = SetDescriptor(d.inner).dilate(center, factor);
      return inner.clip_annulus(map(d.center), d.rin * factor, d.rout * factor);
    }
    case Kind::complement: {
      const auto& d = std::get<ComplementData>(node_->data);
      return complement(SetDescriptor(d.inner).dilate(center, factor));
    }
  }
  return empty();
}

SetDescriptor SetDescriptor::translate(const Vec3& shift) const {
  auto map = [&](const Vec3& p) { return p + shift; };
  switch (node_->kind) {
    case Kind::points: {
      auto d = std::get<PointsData>(node_->data);
      for (auto& p : d.pts) p = map(p);
      return point_cloud(std::move(d.pts));
    }
    case Kind::ball: {
      const auto& d = std::get<BallData>(node_->data);
      return closed_ball(map(d.c), d.r);
    }
    case Kind::segment: {
      const auto& d = std::get<SegmentData>(node_->data);
      return segment(map(d.a), map(d.b));
    }
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      return box(map(d.lo), map(d.hi));
    }
    case Kind::cantor: {
      const auto& d = std::get<CantorData>(node_->data);
      return cantor(map(d.lo), map(d.hi), d.ratio, d.depth, d.coords);
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      std::vector<SetDescriptor> parts;
      for (const auto& p : d.parts) parts.push_back(p.translate(shift));
      return set_union(std::move(parts));
    }
    case Kind::clip: {
      const auto& d = std::get<ClipData>(node_->data);
      return SetDescriptor(d.inner).translate(shift).clip_annulus(map(d.center), d.rin, d.rout);
    }
    case Kind::complement: {
      const auto& d = std::get<ComplementData>(node_->data);
      return complement(SetDescriptor(d.inner).translate(shift));
    }
    case Kind::empty:
      return empty();
  }
  return empty();
}

SetDescriptor SetDescriptor::clip_annulus(const Vec3& center, double rin, double rout) const {
  if (is_empty()) return empty();
  Node n;
  n.kind = Kind::clip;
  n.data = ClipData{node_, center, rin, rout};
  return wrap(std::move(n));
}

long long SetDescriptor::cantor_box_count() const {
  switch (node_->kind) {
    case Kind::cantor: {
      const auto& d = std::get<CantorData>(node_->data);
      return 1LL << ((long long)d.depth * (long long)d.coords.size());
    }
    case Kind::clip:
      return SetDescriptor(std::get<ClipData>(node_->data).inner).cantor_box_count();
    default:
      return 0;
  }
}

// ---------------------------------------------------------------------------
// serialization

namespace {

void fmt_num(std::ostream& os, double v) {
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  os << tmp.str();
}

void fmt_vec(std::ostream& os, const Vec3& v) {
  os << '[';
  fmt_num(os, v.x);
  os << ", ";
  fmt_num(os, v.y);
  os << ", ";
  fmt_num(os, v.z);
  os << ']';
}

}  // namespace

std::string SetDescriptor::to_string() const {
  std::ostringstream os;
  switch (node_->kind) {
    case Kind::empty:
      os << "empty()";
      break;
    case Kind::points: {
      const auto& d = std::get<PointsData>(node_->data);
      os << "points(";
      for (std::size_t i = 0; i < d.pts.size(); ++i) {
        if (i) os << ", ";
        fmt_vec(os, d.pts[i]);
      }
      os << ')';
      break;
    }
    case Kind::ball: {
      const auto& d = std::get<BallData>(node_->data);
      os << "ball(center=";
      fmt_vec(os, d.c);
      os << ", radius=";
      fmt_num(os, d.r);
      os << ')';
      break;
    }
    case Kind::segment: {
      const auto& d = std::get<SegmentData>(node_->data);
      os << "segment(a=";
      fmt_vec(os, d.a);
      os << ", b=";
      fmt_vec(os, d.b);
      os << ')';
      break;
    }
    case Kind::box: {
      const auto& d = std::get<BoxData>(node_->data);
      os << "box(lo=";
      fmt_vec(os, d.lo);
      os << ", hi=";
      fmt_vec(os, d.hi);
      os << ')';
      break;
    }
    case Kind::cantor: {
      const auto& d = std::get<CantorData>(node_->data);
      os << "cantor(lo=";
      fmt_vec(os, d.lo);
      os << ", hi=";
      fmt_vec(os, d.hi);
      os << ", ratio=";
      fmt_num(os, d.ratio);
      os << ", depth=" << d.depth << ", coords=[";
      for (std::size_t i = 0; i < d.coords.size(); ++i) {
        if (i) os << ", ";
        os << d.coords[i];
      }
      os << "])";
      break;
    }
    case Kind::set_union: {
      const auto& d = std::get<UnionData>(node_->data);
      os << "union(";
      for (std::size_t i = 0; i < d.parts.size(); ++i) {
        if (i) os << "; ";
        os << d.parts[i].to_string();
      }
      os << ')';
      break;
    }
    case Kind::clip: {
      const auto& d = std::get<ClipData>(node_->data);
      os << "clip(" << SetDescriptor(d.inner).to_string() << "; center=";
      fmt_vec(os, d.center);
      os << ", rin=";
      fmt_num(os, d.rin);
      os << ", rout=";
      fmt_num(os, d.rout);
      os << ')';
      break;
    }
    case Kind::complement: {
      const auto& d = std::get<ComplementData>(node_->data);
      os << "complement(" << SetDescriptor(d.inner).to_string() << ')';
      break;
    }
  }
  return os.str();
}

// Recursive-descent parser for the functional form above.
namespace {

struct Cursor {
  const std::string& s;
  std::size_t p = 0;

  void skip_ws() {
    while (p < s.size() && std::isspace((unsigned char)s[p])) ++p;
  }
  bool eat(char c) {
    skip_ws();
    if (p < s.size() && s[p] == c) {
      ++p;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c))
      throw Error(Errc::config_error,
                  "descriptor parse: expected '" + std::string(1, c) + "' at offset " +
                      std::to_string(p) + " in \"" + s + "\"");
  }
  std::string ident() {
    skip_ws();
    std::size_t b = p;
    while (p < s.size() && (std::isalnum((unsigned char)s[p]) || s[p] == '_' || s[p] == '-')) ++p;
    if (b == p) throw Error(Errc::config_error, "descriptor parse: identifier expected in \"" + s + "\"");
    return s.substr(b, p - b);
  }
  double number() {
    skip_ws();
    std::size_t b = p;
    while (p < s.size() && (std::isdigit((unsigned char)s[p]) || s[p] == '+' || s[p] == '-' ||
                            s[p] == '.' || s[p] == 'e' || s[p] == 'E'))
      ++p;
    try {
      return std::stod(s.substr(b, p - b));
    } catch (...) {
      throw Error(Errc::config_error, "descriptor parse: number expected at offset " +
                                          std::to_string(b) + " in \"" + s + "\"");
    }
  }
  Vec3 vec() {
    expect('[');
    Vec3 v;
    v.x = number();
    expect(',');
    v.y = number();
    expect(',');
    v.z = number();
    expect(']');
    return v;
  }
  bool peek(char c) {
    skip_ws();
    return p < s.size() && s[p] == c;
  }
};

SetDescriptor parse_desc(Cursor& c) {
  std::string name = c.ident();
  c.expect('(');
  auto arg_name = [&]() -> std::string {
    // lookahead for "ident=" form
    std::size_t save = c.p;
    c.skip_ws();
    std::size_t b = c.p;
    while (c.p < c.s.size() && (std::isalnum((unsigned char)c.s[c.p]) || c.s[c.p] == '_')) ++c.p;
    std::size_t e = c.p;
    c.skip_ws();
    if (e > b && c.p < c.s.size() && c.s[c.p] == '=') {
      ++c.p;
      return c.s.substr(b, e - b);
    }
    c.p = save;
    return {};
  };

  if (name == "empty") {
    c.expect(')');
    return SetDescriptor::empty();
  }
  if (name == "points") {
    std::vector<Vec3> pts;
    if (!c.peek(')')) {
      pts.push_back(c.vec());
      while (c.eat(',')) pts.push_back(c.vec());
    }
    c.expect(')');
    return SetDescriptor::point_cloud(std::move(pts));
  }
  if (name == "ball") {
    Vec3 center{};
    double radius = -1;
    do {
      std::string a = arg_name();
      if (a == "center")
        center = c.vec();
      else if (a == "radius")
        radius = c.number();
      else
        throw Error(Errc::config_error, "ball: unknown argument '" + a + "'");
    } while (c.eat(','));
    c.expect(')');
    return SetDescriptor::closed_ball(center, radius);
  }
  if (name == "segment") {
    Vec3 a{}, b{};
    do {
      std::string an = arg_name();
      if (an == "a")
        a = c.vec();
      else if (an == "b")
        b = c.vec();
      else
        throw Error(Errc::config_error, "segment: unknown argument '" + an + "'");
    } while (c.eat(','));
    c.expect(')');
    return SetDescriptor::segment(a, b);
  }
  if (name == "box") {
    Vec3 lo{}, hi{};
    do {
      std::string an = arg_name();
      if (an == "lo")
        lo = c.vec();
      else if (an == "hi")
        hi = c.vec();
      else
        throw Error(Errc::config_error, "box: unknown argument '" + an + "'");
    } while (c.eat(','));
    c.expect(')');
    return SetDescriptor::box(lo, hi);
  }
  if (name == "cantor") {
    Vec3 lo{}, hi{};
    double ratio = 0;
    int depth = -1;
    std::vector<int> coords;
    do {
      std::string an = arg_name();
      if (an == "lo")
        lo = c.vec();
      else if (an == "hi")
        hi = c.vec();
      else if (an == "ratio")
        ratio = c.number();
      else if (an == "depth")
        depth = (int)std::lround(c.number());
      else if (an == "coords") {
        c.expect('[');
        if (!c.peek(']')) {
          coords.push_back((int)std::lround(c.number()));
          while (c.eat(',')) coords.push_back((int)std::lround(c.number()));
        }
        c.expect(']');
      } else
        throw Error(Errc::config_error, "cantor: unknown argument '" + an + "'");
    } while (c.eat(','));
    c.expect(')');
    return SetDescriptor::cantor(lo, hi, ratio, depth, std::move(coords));
  }
  if (name == "union") {
    std::vector<SetDescriptor> parts;
    parts.push_back(parse_desc(c));
    while (c.eat(';')) parts.push_back(parse_desc(c));
    c.expect(')');
    return SetDescriptor::set_union(std::move(parts));
  }
  if (name == "clip") {
    SetDescriptor inner = parse_desc(c);
    c.expect(';');
    Vec3 center{};
    double rin = 0, rout = 0;
    do {
      std::string an = arg_name();
      if (an == "center")
        center = c.vec();
      else if (an == "rin")
        rin = c.number();
      else if (an == "rout")
        rout = c.number();
      else
        throw Error(Errc::config_error, "clip: unknown argument '" + an + "'");
    } while (c.eat(','));
    c.expect(')');
    return inner.clip_annulus(center, rin, rout);
  }
  if (name == "complement") {
    SetDescriptor inner = parse_desc(c);
    c.expect(')');
    return SetDescriptor::complement(inner);
  }
  throw Error(Errc::config_error, "unknown descriptor kind '" + name + "'");
}

}  // namespace

SetDescriptor SetDescriptor::parse(const std::string& text) {
  Cursor c{text};
  SetDescriptor d = parse_desc(c);
  c.skip_ws();
  if (c.p != text.size())
    throw Error(Errc::config_error, "descriptor parse: trailing input in \"" + text + "\"");
  return d;
}

}  // namespace capq
