#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dirlap/common.hpp"
#include "dirlap/geometry.hpp"
#include "dirlap/spectral.hpp"

namespace dirlap {

// ---------------------------------------------------------------- tails

namespace detail {

// sum_{j >= j0} e^{-a j^2} <= e^{-a j0^2} / (1 - e^{-a (2 j0 + 1)})
inline double gaussian_sum_tail(double a, long j0) {
  const double head = std::exp(-a * double(j0) * double(j0));
  const double q = std::exp(-a * (2.0 * j0 + 1.0));
  return head / (1.0 - q);
}

struct ComponentInfo {
  double length = 0;
  long modes = 0;  // contiguous frequencies 1..modes are present
};

inline std::map<int, ComponentInfo> interval_components(const EigenData& eig) {
  std::map<int, ComponentInfo> out;
  for (const auto& m : eig.modes) {
    auto& c = out[m.component];
    c.length = m.length;
    c.modes = std::max(c.modes, static_cast<long>(m.index));
  }
  return out;
}

// Full trace of the bounding-box lattice operator at inverse temperature s.
// The mask operator is a principal submatrix of the box operator, so its
// ordered eigenvalues dominate the box ones and the box trace dominates the
// mask trace. The box spectrum factors over axes, giving a closed form.
inline double box_trace(const EigenData& eig, double s) {
  double prod = 1.0;
  for (int ax = 0; ax < eig.dim; ++ax) {
    const double n = double(eig.box[ax]);
    double sum = 0;
    for (long i = 1; i <= eig.box[ax]; ++i) {
      const double sn = std::sin(0.5 * PI * double(i) / (n + 1.0));
      sum += std::exp(-s * (4.0 / (eig.h * eig.h)) * sn * sn);
    }
    prod *= sum;
  }
  return prod;
}

}  // namespace detail

// Upper bound for the part of the trace sum carried by eigenvalues the data
// set does not resolve. Exact interval data admits a sharp geometric-series
// bound; grid data falls back on counting the missing discrete modes or on
// splitting off a quarter of the exponent, whichever is smaller.
struct TraceTail {
  double bound = 0;
  std::string method;  // "exact-tail", "discrete", "device", "none"
};

inline TraceTail trace_tail(const EigenData& eig, double t) {
  if (!(t > 0)) throw Error("usage", "time must be positive");
  TraceTail out;
  if (!std::isfinite(eig.complete_below)) {
    out.method = "none";
    return out;
  }
  if (eig.source == "exact1d") {
    double acc = 0;
    for (const auto& [c, info] : detail::interval_components(eig)) {
      const double a = t * PI * PI / (info.length * info.length);
      acc += detail::gaussian_sum_tail(a, info.modes + 1);
    }
    out.bound = acc;
    out.method = "exact-tail";
    return out;
  }
  const double L = eig.complete_below;
  const double missing =
      std::max<double>(0.0, double(eig.n_nodes) - double(eig.eigenvalues.size()));
  const double discrete = missing * std::exp(-t * L);
  double zq = 0;  // partial trace at t/4 plus its own discrete tail
  for (double lam : eig.eigenvalues) zq += std::exp(-(t / 4.0) * lam);
  zq += missing * std::exp(-(t / 4.0) * L);
  if (eig.box[0] > 0 && eig.h > 0)
    zq = std::min(zq, detail::box_trace(eig, t / 4.0));
  const double device = std::exp(-0.75 * t * L) * zq;
  if (discrete <= device) {
    out.bound = discrete;
    out.method = "discrete";
  } else {
    out.bound = device;
    out.method = "device";
  }
  return out;
}

inline double domain_volume(const EigenData& eig) {
  if (eig.source == "exact1d") {
    double v = 0;
    for (const auto& [c, info] : detail::interval_components(eig)) v += info.length;
    return v;
  }
  return double(eig.n_nodes) * std::pow(eig.h, eig.dim);
}

// ------------------------------------------------------------- heat series

struct HeatSeries {
  std::vector<double> times;
  std::vector<double> Z;        // partial trace sums
  std::vector<double> Q;        // partial content sums, (integral of mode)^2 weights
  std::vector<double> Z_tail;   // upper bounds on the omitted part of Z
  std::vector<double> Q_tail;   // volume * Z_tail (integral^2 <= volume)
  std::vector<std::string> tail_method;
  std::vector<bool> warn;       // tail above 1% of the partial sum
  std::size_t K = 0;            // modes used
  std::string source_hash;
};

inline HeatSeries heat_series(const EigenData& eig,
                              const std::vector<double>& times) {
  if (times.empty()) throw Error("usage", "empty time grid");
  HeatSeries out;
  out.times = times;
  out.K = eig.eigenvalues.size();
  out.source_hash = eig.source_hash;
  const double vol = domain_volume(eig);
  if (eig.integrals.size() != eig.eigenvalues.size())
    throw Error("precondition", "eigen data has no mode integrals");
  for (double t : times) {
    if (!(t > 0)) throw Error("usage", "time must be positive");
    double z = 0, q = 0;
    for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
      const double e = std::exp(-t * eig.eigenvalues[k]);
      z += e;
      q += e * eig.integrals[k] * eig.integrals[k];
    }
    const TraceTail tail = trace_tail(eig, t);
    out.Z.push_back(z);
    out.Q.push_back(q);
    out.Z_tail.push_back(tail.bound);
    out.Q_tail.push_back(vol * tail.bound);
    out.tail_method.push_back(tail.method);
    out.warn.push_back(tail.bound > 0.01 * std::max(z, 1e-300));
  }
  return out;
}

// ------------------------------------------------- time-stepped heat content

// Crank-Nicolson march of u' = -A u from u = 1, reporting the discrete
// integral of u at the final time. The scheme matrix is SPD, factored once.
inline double heat_content_timestep(const GridMask& mask,
                                    const Eigen::SparseMatrix<double>& A,
                                    double t, long steps) {
  if (!(t > 0)) throw Error("usage", "time must be positive");
  if (steps < 16) throw Error("usage", "time stepping needs at least 16 steps");
  const double dt = t / double(steps);
  const long n = A.rows();
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  Eigen::SparseMatrix<double> M = I + (dt / 2.0) * A;
  Eigen::SparseMatrix<double> P = I - (dt / 2.0) * A;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(M);
  if (llt.info() != Eigen::Success)
    throw Error("solver", "time-step factorization failed");
  Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
  for (long s = 0; s < steps; ++s) u = llt.solve(P * u);
  return std::pow(mask.h, mask.dim) * u.sum();
}

// Step count keeping the O(dt^2) consistency error of the march near 1e-3
// relative for modes up to the ground state scale.
inline long cn_auto_steps(double t, double h, double lambda1) {
  const double a = t / h;
  const double b = t * std::sqrt(t * lambda1 * lambda1 * lambda1 / 3e-3);
  double s = std::max({16.0, std::ceil(a), std::ceil(b)});
  return static_cast<long>(std::min(s, 2e5));
}

// ------------------------------------------------------------ heat kernels

// Spectral heat kernel at a pair of grid nodes, with the crude sup-norm
// tail bound (node values of a normalized mode cannot exceed h^{-dim/2}).
struct KernelValue {
  double value = 0;
  double tail = 0;
};

inline KernelValue heat_kernel_grid(const EigenData& eig, std::int64_t qx,
                                    std::int64_t qy, double t) {
  if (eig.vectors.size() != eig.eigenvalues.size())
    throw Error("precondition", "kernel evaluation needs kept eigenvectors");
  if (qx < 0 || qy < 0 || qx >= eig.n_nodes || qy >= eig.n_nodes)
    throw Error("usage", "kernel node index out of range");
  KernelValue out;
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k)
    out.value += std::exp(-t * eig.eigenvalues[k]) * eig.vectors[k][qx] *
                 eig.vectors[k][qy];
  if (std::isfinite(eig.complete_below)) {
    const double missing =
        std::max<double>(0.0, double(eig.n_nodes) - double(eig.eigenvalues.size()));
    out.tail = missing * std::exp(-t * eig.complete_below) *
               std::pow(eig.h, -double(eig.dim));
  }
  return out;
}

inline KernelValue heat_kernel_exact1d(const EigenData& eig, double x, double y,
                                       double t) {
  if (eig.source != "exact1d")
    throw Error("usage", "closed-form kernel needs exact interval data");
  KernelValue out;
  for (std::size_t k = 0; k < eig.modes.size(); ++k) {
    const auto& m = eig.modes[k];
    const double a = m.offset, L = m.length;
    if (x <= a || x >= a + L || y <= a || y >= a + L) continue;
    const double px = std::sqrt(2.0 / L) * std::sin(PI * m.index * (x - a) / L);
    const double py = std::sqrt(2.0 / L) * std::sin(PI * m.index * (y - a) / L);
    out.value += std::exp(-t * eig.eigenvalues[k]) * px * py;
  }
  if (std::isfinite(eig.complete_below)) {
    for (const auto& [c, info] : detail::interval_components(eig)) {
      const double a = t * PI * PI / (info.length * info.length);
      out.tail += (2.0 / info.length) *
                  detail::gaussian_sum_tail(a, info.modes + 1);
    }
  }
  return out;
}

// ----------------------------------------------------------------- reports

// One row per requested time; the time-stepped column is optional.
struct HeatRow {
  double t = 0;
  double Z = 0;
  double Q_spectral = 0;
  double Q_timestep = std::numeric_limits<double>::quiet_NaN();
  double trunc_bound = 0;  // Z tail
  std::string tail_method;
  bool warn = false;
};

inline std::vector<HeatRow> heat_rows(const EigenData& eig,
                                      const std::vector<double>& times,
                                      const GridMask* mask,
                                      const Eigen::SparseMatrix<double>* A,
                                      double lambda1, bool with_timestep) {
  const HeatSeries series = heat_series(eig, times);
  std::vector<HeatRow> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    HeatRow r;
    r.t = times[i];
    r.Z = series.Z[i];
    r.Q_spectral = series.Q[i];
    r.trunc_bound = series.Z_tail[i];
    r.tail_method = series.tail_method[i];
    r.warn = series.warn[i];
    if (with_timestep && mask && A)
      r.Q_timestep = heat_content_timestep(
          *mask, *A, r.t, cn_auto_steps(r.t, mask->h, lambda1));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dirlap
