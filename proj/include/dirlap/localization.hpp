#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "dirlap/common.hpp"
#include "dirlap/geometry.hpp"
#include "dirlap/spectral.hpp"

namespace dirlap {

namespace detail {

// standard bump profile on (-1,1)
inline double bump_f(double u) {
  const double q = 1.0 - u * u;
  return q > 0 ? std::exp(-1.0 / q) : 0.0;
}

inline double bump_fp(double u) {
  const double q = 1.0 - u * u;
  if (!(q > 0)) return 0.0;
  return std::exp(-1.0 / q) * (-2.0 * u / (q * q));
}

inline double bump_fpp(double u) {
  const double q = 1.0 - u * u;
  if (!(q > 0)) return 0.0;
  return std::exp(-1.0 / q) *
         (4.0 * u * u / (q * q * q * q) - 2.0 * (1.0 + 3.0 * u * u) / (q * q * q));
}

}  // namespace detail

// -------------------------------------------------------------- mollifier

// Radial bump supported in the ball of radius 1/2, normalized to unit mass
// by midpoint quadrature at the given resolution (samples per unit length).
struct Mollifier {
  int dim = 1;
  int resolution = 0;
  double normalization = 0;  // multiplicative constant
  double laplacian_l1 = 0;   // quadrature of |Δρ|
  double m = 1;              // max(1, laplacian_l1)
  std::vector<double> samples;  // cell-centered over [-1/2,1/2]^dim, row-major

  double value(double x, double y = 0) const {
    const double r2 = dim == 2 ? x * x + y * y : x * x;
    return normalization * detail::bump_f(2.0 * std::sqrt(r2));
  }
};

inline Mollifier build_mollifier(int dim, int resolution = 2048) {
  if (dim != 1 && dim != 2) throw Error("usage", "mollifier dimension must be 1 or 2");
  if (resolution < 64) throw Error("usage", "mollifier resolution must be >= 64");
  Mollifier out;
  out.dim = dim;
  out.resolution = resolution;
  const int N = resolution;
  const double dx = 1.0 / N;
  auto coord = [&](int i) { return -0.5 + (i + 0.5) * dx; };
  if (dim == 1) {
    double raw = 0, lap = 0;
    for (int i = 0; i < N; ++i) {
      const double u = 2.0 * coord(i);
      raw += detail::bump_f(u) * dx;
      lap += std::abs(4.0 * detail::bump_fpp(u)) * dx;
    }
    out.normalization = 1.0 / raw;
    out.laplacian_l1 = out.normalization * lap;
    out.samples.resize(N);
    for (int i = 0; i < N; ++i) out.samples[i] = out.value(coord(i));
  } else {
    double raw = 0, lap = 0;
    for (int j = 0; j < N; ++j) {
      const double y = coord(j);
      for (int i = 0; i < N; ++i) {
        const double x = coord(i);
        const double s = 2.0 * std::sqrt(x * x + y * y);
        raw += detail::bump_f(s) * dx * dx;
        // radial Laplacian f''(s) + f'(s)/s, chain factor 4
        const double rad =
            s < 1e-8 ? 2.0 * detail::bump_fpp(0.0)
                     : detail::bump_fpp(s) + detail::bump_fp(s) / s;
        lap += std::abs(4.0 * rad) * dx * dx;
      }
    }
    out.normalization = 1.0 / raw;
    out.laplacian_l1 = out.normalization * lap;
    out.samples.resize(static_cast<std::size_t>(N) * N);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i)
        out.samples[static_cast<std::size_t>(j) * N + i] = out.value(coord(i), coord(j));
  }
  out.m = std::max(1.0, out.laplacian_l1);
  return out;
}

// ---------------------------------------------------------- IMS partition

// Per-axis bump g(s) = exp(4/3 - 1/(1-s^2)) on (-1,1); g >= 1 on [-1/2,1/2].
// The normalized member Psi = g/sqrt(sum_j g(.-j)^2) tiles with sum of
// squares identically 1; members at scale n live on cubes of edge 2n
// spaced n apart.
namespace detail {

inline double ims_g(double s) {
  const double q = 1.0 - s * s;
  return q > 0 ? std::exp(4.0 / 3.0 - 1.0 / q) : 0.0;
}

inline double ims_gp(double s) {
  const double q = 1.0 - s * s;
  if (!(q > 0)) return 0.0;
  return std::exp(4.0 / 3.0 - 1.0 / q) * (-2.0 * s / (q * q));
}

struct ImsAxis {
  double psi, dpsi;
};

inline ImsAxis ims_axis(double s) {
  // window of translates overlapping s (g supported on width 2)
  const long base = static_cast<long>(std::floor(s));
  double w = 0, wp = 0;
  for (long k = base - 1; k <= base + 2; ++k) {
    const double gs = ims_g(s - k);
    w += gs * gs;
    wp += 2.0 * gs * ims_gp(s - k);
  }
  const double g = ims_g(s), gp = ims_gp(s);
  const double rw = std::sqrt(w);
  return {g / rw, gp / rw - g * wp / (2.0 * w * rw)};
}

}  // namespace detail

// sup |grad Psi| of the unit-scale member, measured on the fixed
// 1024-per-axis cell-centered reference grid over (-1,1)
inline double ims_reference_c0(int dim) {
  const int N = 1024;
  std::vector<double> psi(N), psip(N);
  for (int i = 0; i < N; ++i) {
    const double s = -1.0 + (2.0 * i + 1.0) / N;
    const auto a = detail::ims_axis(s);
    psi[i] = a.psi;
    psip[i] = a.dpsi;
  }
  double best = 0;
  if (dim == 1) {
    for (int i = 0; i < N; ++i) best = std::max(best, std::abs(psip[i]));
    return best;
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      best = std::max(best, psip[i] * psip[i] * psi[j] * psi[j] +
                                psi[i] * psi[i] * psip[j] * psip[j]);
  return std::sqrt(best);
}

struct ImsPartition {
  int dim = 1;
  long n = 1;
  double c0 = 0;
  std::vector<std::array<long, 2>> cubes;   // member indices j
  std::vector<Eigen::VectorXd> weights;     // sampled member values on mask

  double member_value(std::array<long, 2> j, double x, double y = 0) const {
    double v = detail::ims_axis(x / n - j[0]).psi;
    if (dim == 2) v *= detail::ims_axis(y / n - j[1]).psi;
    return v;
  }

  std::array<double, 2> member_grad(std::array<long, 2> j, double x,
                                    double y = 0) const {
    const auto ax = detail::ims_axis(x / n - j[0]);
    if (dim == 1) return {ax.dpsi / n, 0.0};
    const auto ay = detail::ims_axis(y / n - j[1]);
    return {ax.dpsi * ay.psi / n, ax.psi * ay.dpsi / n};
  }
};

inline ImsPartition build_ims_partition(long n, const GridMask& mask) {
  if (n < 1) throw Error("usage", "partition scale must be >= 1");
  ImsPartition out;
  out.dim = mask.dim;
  out.n = n;
  out.c0 = ims_reference_c0(mask.dim);
  std::array<long, 2> jlo{{0, 0}}, jhi{{0, 0}};
  for (int a = 0; a < mask.dim; ++a) {
    jlo[a] = static_cast<long>(std::floor(double(mask.lo[a]) * mask.h / n)) - 1;
    jhi[a] = static_cast<long>(std::floor(double(mask.hi[a]) * mask.h / n)) + 1;
  }
  for (long j1 = jlo[1]; j1 <= jhi[1]; ++j1) {
    for (long j0 = jlo[0]; j0 <= jhi[0]; ++j0) {
      const std::array<long, 2> j{{j0, j1}};
      Eigen::VectorXd w(mask.n_nodes());
      bool any = false;
      for (std::int64_t q = 0; q < mask.n_nodes(); ++q) {
        w[q] = out.member_value(j, mask.x(q), mask.y(q));
        any = any || w[q] != 0.0;
      }
      if (any) {
        out.cubes.push_back(j);
        out.weights.push_back(std::move(w));
      }
    }
  }
  return out;
}

// --------------------------------------------------------- decay parameters

struct DecayParams {
  int dim = 1;
  double r = 1, t = 2;
  double beta = 0;   // (t - r)/2
  double alpha = 0;  // min(beta,1)/(16 m r)
  double s = 0;      // (r + t)/2
  double n0 = 0;     // 2^{dim/2} c0 / sqrt(beta)
  double m = 1, c0 = 0;
};

inline DecayParams make_decay_params(int dim, double m, double c0, double r,
                                     double t) {
  if (!(1.0 <= r && r < t))
    throw Error("precondition", "decay parameters need 1 <= r < t");
  DecayParams p;
  p.dim = dim;
  p.r = r;
  p.t = t;
  p.m = m;
  p.c0 = c0;
  p.beta = (t - r) / 2.0;
  p.alpha = std::min(p.beta, 1.0) / (16.0 * m * r);
  p.s = (r + t) / 2.0;
  p.n0 = std::pow(2.0, dim / 2.0) * c0 / std::sqrt(p.beta);
  return p;
}

// ------------------------------------------------------------- cube cover

// Covering cubes of edge 2n centered at the n-lattice; a cube is a member
// when the ground state of the domain restricted to its open interior lies
// strictly below t. The enlarged unions (half-widths 2n and 3n) carry the
// boundary lattice set Z and the exterior cell list Y.
struct CubeCover {
  int dim = 1;
  long n = 1;
  double t = 0;

  struct Cell {
    std::array<long, 2> j;
    std::int64_t n_cell_nodes;
    double lambda1;  // +inf when empty
    bool member;
    bool low_confidence;  // fewer than 10 nodes resolved
  };
  std::vector<Cell> cells;                  // all visited nonempty cells
  std::vector<std::array<long, 2>> members; // the index set of bad cubes
  std::vector<std::array<long, 2>> Z;       // lattice points on the boundary
                                            // of the doubled union
  std::vector<std::array<long, 2>> Y;       // occupied unit cells outside the
                                            // tripled union

  bool in_union(double x, double y, double halfwidth) const {
    for (const auto& j : members) {
      const double dx = std::abs(x - double(n) * j[0]);
      const double dy = dim == 2 ? std::abs(y - double(n) * j[1]) : 0.0;
      if (dx <= halfwidth && dy <= halfwidth) return true;
    }
    return false;
  }
  bool in_F(double x, double y = 0) const { return in_union(x, y, double(n)); }
  bool in_F2(double x, double y = 0) const { return in_union(x, y, 2.0 * n); }
  bool in_F3(double x, double y = 0) const { return in_union(x, y, 3.0 * n); }
};

inline CubeCover build_cube_cover(const GridMask& mask, long n, double t) {
  if (n < 1) throw Error("usage", "cube scale must be >= 1");
  if (!(t > 0)) throw Error("usage", "threshold must be positive");
  CubeCover cover;
  cover.dim = mask.dim;
  cover.n = n;
  cover.t = t;

  std::array<long, 2> jlo{{0, 0}}, jhi{{0, 0}};
  for (int a = 0; a < mask.dim; ++a) {
    jlo[a] = static_cast<long>(std::floor(double(mask.lo[a]) * mask.h / n)) - 1;
    jhi[a] = static_cast<long>(std::floor(double(mask.hi[a]) * mask.h / n)) + 1;
  }
  for (long j1 = jlo[1]; j1 <= jhi[1]; ++j1) {
    for (long j0 = jlo[0]; j0 <= jhi[0]; ++j0) {
      std::vector<char> keep(mask.n_nodes(), 0);
      std::int64_t cnt = 0;
      for (std::int64_t q = 0; q < mask.n_nodes(); ++q) {
        const bool inx = std::abs(mask.x(q) - double(n) * j0) < double(n);
        const bool iny =
            mask.dim == 2 ? std::abs(mask.y(q) - double(n) * j1) < double(n) : true;
        if (inx && iny) {
          keep[q] = 1;
          ++cnt;
        }
      }
      if (cnt == 0) continue;
      double lam1;
      try {
        lam1 = lowest_eigenvalue(assemble_laplacian(submask_where(mask, keep)));
      } catch (const Error& e) {
        throw Error(e.kind, "cell (" + std::to_string(j0) + "," +
                                std::to_string(j1) + "): " + e.what());
      }
      CubeCover::Cell cell;
      cell.j = {j0, j1};
      cell.n_cell_nodes = cnt;
      cell.lambda1 = lam1;
      cell.member = lam1 < t;
      cell.low_confidence = cnt < 10;
      cover.cells.push_back(cell);
      if (cell.member) cover.members.push_back(cell.j);
    }
  }

  if (!cover.members.empty()) {
    // boundary lattice points of the doubled union: in the closed union but
    // with some probe point of the surrounding quarter-grid outside (all
    // faces lie on integer planes, so quarter offsets decide exactly)
    std::array<long, 2> zlo{{0, 0}}, zhi{{0, 0}};
    for (int a = 0; a < mask.dim; ++a) {
      zlo[a] = std::numeric_limits<long>::max();
      zhi[a] = std::numeric_limits<long>::min();
    }
    for (const auto& j : cover.members)
      for (int a = 0; a < mask.dim; ++a) {
        zlo[a] = std::min(zlo[a], n * j[a] - 2 * n);
        zhi[a] = std::max(zhi[a], n * j[a] + 2 * n);
      }
    for (long z1 = mask.dim == 2 ? zlo[1] : 0; z1 <= (mask.dim == 2 ? zhi[1] : 0);
         ++z1) {
      for (long z0 = zlo[0]; z0 <= zhi[0]; ++z0) {
        if (!cover.in_F2(z0, z1)) continue;
        bool boundary = false;
        for (int q1 = -1; q1 <= (mask.dim == 2 ? 1 : -1) && !boundary; ++q1)
          for (int q0 = -1; q0 <= 1 && !boundary; ++q0)
            if (!cover.in_F2(z0 + 0.25 * q0, z1 + 0.25 * q1)) boundary = true;
        if (mask.dim == 1) {
          boundary = false;
          for (int q0 = -1; q0 <= 1 && !boundary; ++q0)
            if (!cover.in_F2(z0 + 0.25 * q0, 0)) boundary = true;
        }
        if (boundary) cover.Z.push_back({z0, z1});
      }
    }
  }

  // occupied unit cells (centered at lattice points) outside the tripled union
  std::set<std::array<long, 2>> occupied;
  for (std::int64_t q = 0; q < mask.n_nodes(); ++q) {
    const long c0 = static_cast<long>(std::floor(mask.x(q) + 0.5));
    const long c1 =
        mask.dim == 2 ? static_cast<long>(std::floor(mask.y(q) + 0.5)) : 0;
    occupied.insert({c0, c1});
  }
  for (const auto& c : occupied)
    if (!cover.in_F3(double(c[0]), double(c[1]))) cover.Y.push_back(c);
  return cover;
}

// ------------------------------------------------------ smoothed indicator

// Mollification of the indicator of the doubled union with the unit-scale
// bump: exactly 1 deep inside, exactly 0 well outside, gradient supported
// within distance 1/2 of the union boundary. Evaluated by a fixed midpoint
// stencil normalized so the interior value is exactly 1.
struct SmoothedIndicator {
  const CubeCover* cover = nullptr;
  int dim = 1;
  std::vector<double> off;  // stencil offsets per axis
  std::vector<double> wgt;  // bump weights (row-major in 2D)
  double wsum = 0;

  double value(double x, double y = 0) const {
    const long n = cover->n;
    // exact fast paths: the stencil square spans less than 1/2 per axis
    for (const auto& j : cover->members) {
      const double dx = std::abs(x - double(n) * j[0]);
      const double dy = dim == 2 ? std::abs(y - double(n) * j[1]) : 0.0;
      if (dx <= 2.0 * n - 0.5 && dy <= 2.0 * n - 0.5) return 1.0;
    }
    bool far = true;
    for (const auto& j : cover->members) {
      const double dx = std::abs(x - double(n) * j[0]);
      const double dy = dim == 2 ? std::abs(y - double(n) * j[1]) : 0.0;
      if (dx < 2.0 * n + 0.5 && dy < 2.0 * n + 0.5) far = false;
    }
    if (far) return 0.0;
    const int N = static_cast<int>(off.size());
    double acc = 0;
    if (dim == 1) {
      for (int i = 0; i < N; ++i)
        if (cover->in_F2(x - off[i], 0)) acc += wgt[i];
    } else {
      for (int jj = 0; jj < N; ++jj)
        for (int i = 0; i < N; ++i) {
          const double w = wgt[static_cast<std::size_t>(jj) * N + i];
          if (w != 0.0 && cover->in_F2(x - off[i], y - off[jj])) acc += w;
        }
    }
    return acc / wsum;
  }
};

inline SmoothedIndicator make_smoothed_indicator(const CubeCover& cover,
                                                 const Mollifier& rho) {
  SmoothedIndicator xi;
  xi.cover = &cover;
  xi.dim = cover.dim;
  const int N = 64;
  xi.off.resize(N);
  for (int i = 0; i < N; ++i) xi.off[i] = -0.5 + (i + 0.5) / N;
  if (cover.dim == 1) {
    xi.wgt.resize(N);
    for (int i = 0; i < N; ++i) xi.wgt[i] = rho.value(xi.off[i]);
  } else {
    xi.wgt.resize(static_cast<std::size_t>(N) * N);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i)
        xi.wgt[static_cast<std::size_t>(j) * N + i] =
            rho.value(xi.off[i], xi.off[j]);
  }
  xi.wsum = 0;
  for (double w : xi.wgt) xi.wsum += w;
  return xi;
}

// ------------------------------------------------------------ decay profile

// Per-unit-cell L1 masses of (1 - xi) Phi with an exponential fit of the
// log-mass against distance to the boundary lattice set.
struct DecayProfile {
  struct Cell {
    std::array<long, 2> j;
    double dist;  // Euclidean distance to nearest Z member (inf if Z empty)
    double mass;
  };
  std::vector<Cell> cells;
  double total_mass = 0;   // equals the l1 norm of (1-xi)Phi by construction
  double fitted_rate = 0;  // decay per unit distance
  long fit_points = 0;
  bool reliable = false;  // at least 4 cells above the mass floor
};

inline DecayProfile decay_profile(const Eigen::VectorXd& phi,
                                  const GridMask& mask, const CubeCover& cover,
                                  const Mollifier& rho) {
  const SmoothedIndicator xi = make_smoothed_indicator(cover, rho);
  const double w = std::pow(mask.h, mask.dim);
  std::map<std::array<long, 2>, double> mass;
  for (std::int64_t q = 0; q < mask.n_nodes(); ++q) {
    const double v = 1.0 - xi.value(mask.x(q), mask.y(q));
    if (v == 0.0) continue;
    const std::array<long, 2> c{
        static_cast<long>(std::floor(mask.x(q) + 0.5)),
        mask.dim == 2 ? static_cast<long>(std::floor(mask.y(q) + 0.5)) : 0};
    mass[c] += w * std::abs(v * phi[q]);
  }
  DecayProfile out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [c, m] : mass) {
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& z : cover.Z) {
      const double dx = double(c[0] - z[0]), dy = double(c[1] - z[1]);
      dist = std::min(dist, std::sqrt(dx * dx + dy * dy));
    }
    out.cells.push_back({c, dist, m});
    out.total_mass += m;
    if (m > 1e-14 && std::isfinite(dist)) {
      const double lx = dist, ly = std::log(m);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++out.fit_points;
    }
  }
  out.reliable = out.fit_points >= 4;
  if (out.fit_points >= 2) {
    const double den = out.fit_points * sxx - sx * sx;
    if (den > 0) out.fitted_rate = -(out.fit_points * sxy - sx * sy) / den;
  }
  return out;
}

// ------------------------------------------------------------ remainder gap

// Ground state of the part of the domain not covered by the member cubes.
struct RemainderGap {
  bool vacuous = false;  // remainder empty: bound holds trivially
  std::int64_t n_nodes = 0;
  double lambda1 = std::numeric_limits<double>::infinity();
};

inline RemainderGap remainder_gap(const GridMask& mask, const CubeCover& cover) {
  std::vector<char> keep(mask.n_nodes(), 0);
  std::int64_t cnt = 0;
  for (std::int64_t q = 0; q < mask.n_nodes(); ++q) {
    if (!cover.in_F(mask.x(q), mask.y(q))) {
      keep[q] = 1;
      ++cnt;
    }
  }
  RemainderGap out;
  out.n_nodes = cnt;
  if (cnt == 0) {
    out.vacuous = true;
    return out;
  }
  out.lambda1 = lowest_eigenvalue(assemble_laplacian(submask_where(mask, keep)));
  return out;
}

// --------------------------------------------------------- resolvent blocks

// Operator norms of the unit-cell blocks of (H_G - lambda)^{-1}, estimated
// with a short fixed-iteration power method per block pair.
struct ResolventBlocks {
  std::vector<std::array<long, 2>> cells;  // occupied unit cells of G
  Eigen::MatrixXd norms;                   // pairwise block norms
  double lambda = 0;                       // spectral point
  double lambda1 = 0;                      // computed ground state of G
};

inline ResolventBlocks resolvent_block_norms(const GridMask& mask_G,
                                             double lambda) {
  if (mask_G.n_nodes() == 0) throw Error("precondition", "empty remainder mask");
  const auto A = assemble_laplacian(mask_G);
  ResolventBlocks out;
  out.lambda = lambda;
  out.lambda1 = lowest_eigenvalue(A);
  if (!(lambda < out.lambda1 - 1e-6 * std::max(1.0, out.lambda1)))
    throw Error("precondition",
                "spectral point not safely below the remainder ground state");
  Eigen::SparseMatrix<double> B = A;
  for (long i = 0; i < B.rows(); ++i) B.coeffRef(i, i) -= lambda;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(B);
  if (ldlt.info() != Eigen::Success)
    throw Error("solver", "resolvent factorization failed");

  std::map<std::array<long, 2>, std::vector<std::int64_t>> cells;
  for (std::int64_t q = 0; q < mask_G.n_nodes(); ++q) {
    const std::array<long, 2> c{
        static_cast<long>(std::floor(mask_G.x(q) + 0.5)),
        mask_G.dim == 2 ? static_cast<long>(std::floor(mask_G.y(q) + 0.5)) : 0};
    cells[c].push_back(q);
  }
  for (const auto& [c, v] : cells) out.cells.push_back(c);
  const long nc = static_cast<long>(out.cells.size());
  out.norms.resize(nc, nc);
  const long n = mask_G.n_nodes();
  for (long a = 0; a < nc; ++a) {
    const auto& src = cells.at(out.cells[a]);
    for (long b = 0; b < nc; ++b) {
      const auto& dst = cells.at(out.cells[b]);
      DeterministicRng rng(0x5851F42D4C957F2DULL + 131 * a + b);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (std::int64_t q : src) v[q] = 1.0 + 0.05 * rng.next_sym();
      v /= v.norm();
      double est = 0;
      for (int it = 0; it < 8; ++it) {
        Eigen::VectorXd full = ldlt.solve(v);
        Eigen::VectorXd uk = Eigen::VectorXd::Zero(n);
        for (std::int64_t q : dst) uk[q] = full[q];
        Eigen::VectorXd wfull = ldlt.solve(uk);
        Eigen::VectorXd wl = Eigen::VectorXd::Zero(n);
        for (std::int64_t q : src) wl[q] = wfull[q];
        const double nw = wl.norm();
        if (nw == 0) {
          est = 0;
          break;
        }
        est = std::sqrt(nw);
        v = wl / nw;
      }
      out.norms(b, a) = est;
    }
  }
  return out;
}

}  // namespace dirlap
