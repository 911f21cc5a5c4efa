#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dirlap/common.hpp"

namespace dirlap {

// ------------------------------------------------------------- primitives

struct Interval {
  double a, b;
};
struct Rect {
  double x0, y0, x1, y1;
};
struct Disc {
  double cx, cy, r;
};
using Primitive = std::variant<Interval, Rect, Disc>;

inline double min_extent(const Primitive& p) {
  if (auto* iv = std::get_if<Interval>(&p)) return iv->b - iv->a;
  if (auto* rc = std::get_if<Rect>(&p))
    return std::min(rc->x1 - rc->x0, rc->y1 - rc->y0);
  return 2.0 * std::get<Disc>(p).r;
}

// Strict membership with a symmetric boundary margin. Disc uses a squared
// comparison so ties at lattice points resolve identically across builds.
inline bool contains(const Primitive& p, double x, double y, double margin) {
  if (auto* iv = std::get_if<Interval>(&p))
    return x > iv->a + margin && x < iv->b - margin;
  if (auto* rc = std::get_if<Rect>(&p))
    return x > rc->x0 + margin && x < rc->x1 - margin && y > rc->y0 + margin &&
           y < rc->y1 - margin;
  const Disc& dc = std::get<Disc>(p);
  const double dx = x - dc.cx, dy = y - dc.cy, rm = dc.r - margin;
  return dx * dx + dy * dy < rm * rm;
}

// ------------------------------------------------------------- DomainSpec

struct DomainSpec {
  int dim = 1;
  std::vector<Primitive> primitives;

  bool contains_point(double x, double y, double margin) const {
    for (const auto& p : primitives)
      if (contains(p, x, y, margin)) return true;
    return false;
  }

  // xmin, ymin, xmax, ymax (1D: y entries 0)
  std::array<double, 4> bounding_box() const {
    if (primitives.empty()) throw Error("parse", "domain has no primitives");
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = dim == 2 ? x0 : 0.0, y1 = dim == 2 ? -x0 : 0.0;
    for (const auto& p : primitives) {
      if (auto* iv = std::get_if<Interval>(&p)) {
        x0 = std::min(x0, iv->a);
        x1 = std::max(x1, iv->b);
      } else if (auto* rc = std::get_if<Rect>(&p)) {
        x0 = std::min(x0, rc->x0);
        x1 = std::max(x1, rc->x1);
        y0 = std::min(y0, rc->y0);
        y1 = std::max(y1, rc->y1);
      } else {
        const Disc& dc = std::get<Disc>(p);
        x0 = std::min(x0, dc.cx - dc.r);
        x1 = std::max(x1, dc.cx + dc.r);
        y0 = std::min(y0, dc.cy - dc.r);
        y1 = std::max(y1, dc.cy + dc.r);
      }
    }
    return {x0, y0, x1, y1};
  }

  DomainSpec scaled(double factor) const {
    DomainSpec out;
    out.dim = dim;
    out.primitives.reserve(primitives.size());
    for (const auto& p : primitives) {
      if (auto* iv = std::get_if<Interval>(&p))
        out.primitives.push_back(Interval{factor * iv->a, factor * iv->b});
      else if (auto* rc = std::get_if<Rect>(&p))
        out.primitives.push_back(Rect{factor * rc->x0, factor * rc->y0,
                                      factor * rc->x1, factor * rc->y1});
      else {
        const Disc& dc = std::get<Disc>(p);
        out.primitives.push_back(Disc{factor * dc.cx, factor * dc.cy, factor * dc.r});
      }
    }
    return out;
  }

  // Normalized one-statement-per-line text form; also the hashing basis.
  std::string canonical() const {
    std::ostringstream os;
    os << "dim=" << dim << "\n";
    for (const auto& p : primitives) {
      if (auto* iv = std::get_if<Interval>(&p))
        os << "interval " << format_double(iv->a) << " " << format_double(iv->b)
           << "\n";
      else if (auto* rc = std::get_if<Rect>(&p))
        os << "rect " << format_double(rc->x0) << " " << format_double(rc->y0)
           << " " << format_double(rc->x1) << " " << format_double(rc->y1)
           << "\n";
      else {
        const Disc& dc = std::get<Disc>(p);
        os << "disc " << format_double(dc.cx) << " " << format_double(dc.cy)
           << " " << format_double(dc.r) << "\n";
      }
    }
    return os.str();
  }
};

// ---------------------------------------------------------------- presets

// m unit discs on a line with centers 3 apart; components are
// lattice-congruent whenever 3/h is an integer, so their discrete spectra
// coincide exactly.
inline DomainSpec preset_disjoint_balls(int m) {
  if (m < 1) throw Error("parse", "disjoint_balls requires m >= 1");
  DomainSpec s;
  s.dim = 2;
  for (int i = 0; i < m; ++i) s.primitives.push_back(Disc{3.0 * i, 0.0, 1.0});
  return s;
}

// m unit discs at the vertices of a regular m-gon with edge length 3,
// joined along each edge by an eps-wide passage. m = 2 uses an exact
// axis-aligned rectangle; m >= 3 uses a sausage of eps/2-radius discs
// spaced eps/4 along each (generally oblique) edge.
inline DomainSpec preset_dumbbell(int m, double eps) {
  if (m < 2) throw Error("parse", "dumbbell requires m >= 2");
  if (!(eps > 0)) throw Error("parse", "dumbbell requires eps > 0");
  DomainSpec s;
  s.dim = 2;
  if (m == 2) {
    s.primitives.push_back(Disc{0.0, 0.0, 1.0});
    s.primitives.push_back(Disc{3.0, 0.0, 1.0});
    s.primitives.push_back(Rect{0.0, -eps / 2, 3.0, eps / 2});
    return s;
  }
  const double pi = 3.14159265358979323846;
  const double R = 3.0 / (2.0 * std::sin(pi / m));
  std::vector<std::array<double, 2>> v(m);
  for (int i = 0; i < m; ++i)
    v[i] = {R * std::cos(2 * pi * i / m), R * std::sin(2 * pi * i / m)};
  for (int i = 0; i < m; ++i) s.primitives.push_back(Disc{v[i][0], v[i][1], 1.0});
  for (int i = 0; i < m; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % m];
    const int steps = static_cast<int>(std::ceil(3.0 / (eps / 4))) ;
    for (int k = 0; k <= steps; ++k) {
      const double s01 = std::min(1.0, double(k) / steps);
      s.primitives.push_back(Disc{a[0] + s01 * (b[0] - a[0]),
                                  a[1] + s01 * (b[1] - a[1]), eps / 2});
    }
  }
  return s;
}

// Disjoint open intervals laid left to right from 0 with unit gaps.
inline DomainSpec preset_interval_union(const std::vector<double>& lengths) {
  if (lengths.empty()) throw Error("parse", "interval_union requires lengths");
  DomainSpec s;
  s.dim = 1;
  double x = 0.0;
  for (double l : lengths) {
    if (!(l > 0)) throw Error("parse", "interval_union lengths must be positive");
    s.primitives.push_back(Interval{x, x + l});
    x += l + 1.0;
  }
  return s;
}

// Deterministic freeze-and-subdivide packing of (0,1)^2 by disjoint open
// squares whose closures tile in the limit: each generation freezes the
// lower-left quadrant of every active square and subdivides the rest.
// Takes the first K frozen squares in (generation, y, x) order.
inline DomainSpec preset_packed_cubes(int K) {
  if (K < 1) throw Error("parse", "packed_cubes requires K >= 1");
  DomainSpec s;
  s.dim = 2;
  struct Sq {
    double x, y, side;
  };
  std::vector<Sq> active{{0.0, 0.0, 1.0}};
  int taken = 0;
  while (taken < K) {
    std::vector<Sq> frozen, next;
    for (const Sq& q : active) {
      const double hs = q.side / 2;
      frozen.push_back({q.x, q.y, hs});
      next.push_back({q.x + hs, q.y, hs});
      next.push_back({q.x, q.y + hs, hs});
      next.push_back({q.x + hs, q.y + hs, hs});
    }
    std::sort(frozen.begin(), frozen.end(), [](const Sq& a, const Sq& b) {
      return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    for (const Sq& q : frozen) {
      if (taken == K) break;
      s.primitives.push_back(Rect{q.x, q.y, q.x + q.side, q.y + q.side});
      ++taken;
    }
    active = std::move(next);
  }
  return s;
}

// ------------------------------------------------------------------ parse

namespace detail {
inline double parse_number(const std::string& tok) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error("parse", "bad number: '" + tok + "'");
  }
}
}  // namespace detail

// "name(a,b,...)" -> preset spec
inline DomainSpec parse_preset(const std::string& text) {
  const auto open = text.find('(');
  std::string name = text.substr(0, open);
  std::vector<double> args;
  if (open != std::string::npos) {
    const auto close = text.rfind(')');
    if (close == std::string::npos || close < open)
      throw Error("parse", "unbalanced parentheses in preset: " + text);
    std::string inner = text.substr(open + 1, close - open - 1);
    std::string tok;
    std::istringstream is(inner);
    while (std::getline(is, tok, ',')) {
      // trim
      const auto b = tok.find_first_not_of(" \t");
      const auto e = tok.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      args.push_back(detail::parse_number(tok.substr(b, e - b + 1)));
    }
  }
  auto as_int = [&](std::size_t i) {
    double v = args.at(i);
    long n = std::lround(v);
    if (std::abs(v - n) > 1e-9) throw Error("parse", "expected integer argument");
    return static_cast<int>(n);
  };
  if (name == "dumbbell") {
    if (args.size() != 2) throw Error("parse", "dumbbell(m,eps) takes 2 arguments");
    return preset_dumbbell(as_int(0), args[1]);
  }
  if (name == "disjoint_balls") {
    if (args.size() != 1) throw Error("parse", "disjoint_balls(m) takes 1 argument");
    return preset_disjoint_balls(as_int(0));
  }
  if (name == "interval_union") return preset_interval_union(args);
  if (name == "packed_cubes") {
    if (args.size() != 1) throw Error("parse", "packed_cubes(K) takes 1 argument");
    return preset_packed_cubes(as_int(0));
  }
  throw Error("parse", "unknown preset: " + name);
}

// One statement per line: dim=<1|2>, interval a b, rect x0 y0 x1 y1,
// disc cx cy r, preset name(args). '#' starts a comment.
inline DomainSpec parse_domain(const std::string& text) {
  DomainSpec s;
  bool have_dim = false;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::string head;
    if (!(is >> head)) continue;
    auto need = [&](int k) {
      std::vector<double> v;
      std::string tok;
      while (is >> tok) v.push_back(detail::parse_number(tok));
      if (static_cast<int>(v.size()) != k)
        throw Error("parse", head + " expects " + std::to_string(k) + " numbers");
      return v;
    };
    if (head.rfind("dim=", 0) == 0) {
      s.dim = static_cast<int>(detail::parse_number(head.substr(4)));
      if (s.dim != 1 && s.dim != 2) throw Error("parse", "dim must be 1 or 2");
      have_dim = true;
    } else if (head == "interval") {
      auto v = need(2);
      if (!(v[0] < v[1])) throw Error("parse", "interval requires a < b");
      s.primitives.push_back(Interval{v[0], v[1]});
    } else if (head == "rect") {
      auto v = need(4);
      if (!(v[0] < v[2] && v[1] < v[3]))
        throw Error("parse", "rect requires x0 < x1 and y0 < y1");
      s.primitives.push_back(Rect{v[0], v[1], v[2], v[3]});
    } else if (head == "disc") {
      auto v = need(3);
      if (!(v[2] > 0)) throw Error("parse", "disc requires r > 0");
      s.primitives.push_back(Disc{v[0], v[1], v[2]});
    } else if (head == "preset") {
      std::string rest;
      std::getline(is, rest);
      const auto b = rest.find_first_not_of(" \t");
      if (b == std::string::npos) throw Error("parse", "preset needs a name");
      DomainSpec p = parse_preset(rest.substr(b));
      if (have_dim && p.dim != s.dim)
        throw Error("parse", "preset dimension conflicts with dim=");
      s.dim = p.dim;
      have_dim = true;
      for (auto& q : p.primitives) s.primitives.push_back(q);
    } else {
      throw Error("parse", "unknown statement: " + head);
    }
  }
  if (s.primitives.empty()) throw Error("parse", "domain has no primitives");
  for (const auto& p : s.primitives) {
    const bool is1d = std::holds_alternative<Interval>(p);
    if (is1d != (s.dim == 1))
      throw Error("parse", "primitive dimension does not match dim=");
  }
  return s;
}

// --------------------------------------------------------------- GridMask

// Interior lattice nodes x = index*h on the global lattice anchored at the
// origin. Nodes are ordered row-major, y-index outer.
struct GridMask {
  int dim = 1;
  double h = 0;
  std::array<long, 2> lo{{0, 0}}, hi{{-1, 0}};  // inclusive index ranges
  std::vector<std::int64_t> cell_node;          // box scan -> node id or -1
  std::vector<std::array<long, 2>> nodes;       // node id -> lattice index

  long nx() const { return hi[0] - lo[0] + 1; }
  long ny() const { return dim == 2 ? hi[1] - lo[1] + 1 : 1; }
  std::int64_t n_nodes() const { return static_cast<std::int64_t>(nodes.size()); }

  std::int64_t node_at(long i, long j) const {
    if (i < lo[0] || i > hi[0]) return -1;
    if (dim == 2 && (j < lo[1] || j > hi[1])) return -1;
    return cell_node[(dim == 2 ? (j - lo[1]) * nx() : 0) + (i - lo[0])];
  }
  double x(std::int64_t n) const { return nodes[n][0] * h; }
  double y(std::int64_t n) const { return dim == 2 ? nodes[n][1] * h : 0.0; }
};

inline GridMask rasterize(const DomainSpec& spec, double h) {
  if (!(h > 0)) throw Error("usage", "mesh width must be positive");
  const double margin = 1e-12 * h;
  const auto bb = spec.bounding_box();
  GridMask m;
  m.dim = spec.dim;
  m.h = h;
  m.lo[0] = static_cast<long>(std::floor(bb[0] / h)) - 1;
  m.hi[0] = static_cast<long>(std::ceil(bb[2] / h)) + 1;
  if (spec.dim == 2) {
    m.lo[1] = static_cast<long>(std::floor(bb[1] / h)) - 1;
    m.hi[1] = static_cast<long>(std::ceil(bb[3] / h)) + 1;
  } else {
    m.lo[1] = m.hi[1] = 0;
  }
  m.cell_node.assign(static_cast<std::size_t>(m.nx()) * m.ny(), -1);
  std::vector<std::int64_t> per_prim(spec.primitives.size(), 0);
  for (long j = m.lo[1]; j <= m.hi[1]; ++j) {
    for (long i = m.lo[0]; i <= m.hi[0]; ++i) {
      const double px = i * h, py = spec.dim == 2 ? j * h : 0.0;
      bool inside = false;
      for (std::size_t k = 0; k < spec.primitives.size(); ++k) {
        if (contains(spec.primitives[k], px, py, margin)) {
          if (!inside) {
            inside = true;
            m.cell_node[(j - m.lo[1]) * m.nx() + (i - m.lo[0])] =
                static_cast<std::int64_t>(m.nodes.size());
            m.nodes.push_back({i, j});
          }
          ++per_prim[k];
        }
      }
    }
  }
  for (std::size_t k = 0; k < spec.primitives.size(); ++k) {
    const double ext = min_extent(spec.primitives[k]);
    if (ext < h || per_prim[k] == 0) {
      std::ostringstream os;
      os << "unresolved feature: primitive " << k << " (min extent "
         << format_double(ext) << ") is not resolved at h = " << format_double(h)
         << "; use h <= " << format_double(ext / 2);
      throw Error("unresolved", os.str());
    }
  }
  return m;
}

// Volume of the largest lattice-resolved axis-aligned cube: a k x k block of
// interior nodes spans an open cube of side (k-1)h. Dynamic programming over
// the mask; returns a lower approximation of the true inscribed-cube volume.
inline double largest_inscribed_cube(const GridMask& m) {
  if (m.nodes.empty()) return 0.0;
  long best = 0;
  if (m.dim == 1) {
    long run = 0;
    for (long i = m.lo[0]; i <= m.hi[0]; ++i) {
      run = m.node_at(i, 0) >= 0 ? run + 1 : 0;
      best = std::max(best, run);
    }
    return (best - 1) * m.h;
  }
  const long nx = m.nx(), ny = m.ny();
  std::vector<long> prev(nx, 0), cur(nx, 0);
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      if (m.cell_node[j * nx + i] < 0) {
        cur[i] = 0;
      } else if (i == 0 || j == 0) {
        cur[i] = 1;
      } else {
        cur[i] = 1 + std::min({prev[i], cur[i - 1], prev[i - 1]});
      }
      best = std::max(best, cur[i]);
    }
    std::swap(prev, cur);
  }
  const double a = (best - 1) * m.h;
  return a * a;
}

// Connected components under lattice adjacency; labels assigned in node
// scan order starting from 0.
inline std::vector<int> component_labels(const GridMask& m) {
  std::vector<int> label(m.nodes.size(), -1);
  int next = 0;
  std::vector<std::int64_t> stack;
  for (std::int64_t seed = 0; seed < m.n_nodes(); ++seed) {
    if (label[seed] >= 0) continue;
    label[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::int64_t n = stack.back();
      stack.pop_back();
      const long i = m.nodes[n][0], j = m.nodes[n][1];
      const std::array<std::int64_t, 4> nb{
          m.node_at(i - 1, j), m.node_at(i + 1, j),
          m.dim == 2 ? m.node_at(i, j - 1) : -1,
          m.dim == 2 ? m.node_at(i, j + 1) : -1};
      for (std::int64_t q : nb) {
        if (q >= 0 && label[q] < 0) {
          label[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  return label;
}

inline int component_count(const std::vector<int>& labels) {
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  return mx + 1;
}

// Mask restricted to a kept node subset, preserving lattice and scan order.
inline GridMask submask_where(const GridMask& m, const std::vector<char>& keep) {
  GridMask out;
  out.dim = m.dim;
  out.h = m.h;
  out.lo = m.lo;
  out.hi = m.hi;
  out.cell_node.assign(m.cell_node.size(), -1);
  for (std::int64_t n = 0; n < m.n_nodes(); ++n) {
    if (!keep[n]) continue;
    const long i = m.nodes[n][0], j = m.nodes[n][1];
    out.cell_node[(m.dim == 2 ? (j - m.lo[1]) * m.nx() : 0) + (i - m.lo[0])] =
        static_cast<std::int64_t>(out.nodes.size());
    out.nodes.push_back(m.nodes[n]);
  }
  return out;
}

}  // namespace dirlap
