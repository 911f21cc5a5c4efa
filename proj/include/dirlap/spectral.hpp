#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dirlap/common.hpp"
#include "dirlap/geometry.hpp"

namespace dirlap {

// ------------------------------------------------------------- data model

struct NormTriple {
  double l1 = 0, l2 = 0, linf = 0;
};

struct EigenData {
  int dim = 1;
  double h = 0;                 // 0 for exact1d / synthetic
  std::string source;           // "grid" | "exact1d" | "synthetic"
  std::string domain;           // canonical spec text ("" if synthetic)
  std::uint64_t source_hash = 0;
  double complete_below = 0;    // every eigenvalue < this is present
  std::vector<double> eigenvalues;  // ascending
  std::vector<NormTriple> norms;
  std::vector<double> integrals;    // signed volume integrals
  std::int64_t n_nodes = 0;
  // grid: interior node counts of the bounding-box lattice per axis; the mask
  // operator is a principal submatrix of the box operator, so the box trace
  // dominates the mask trace (used for truncation tail bounds)
  std::array<long, 2> box{0, 0};

  // exact1d: (component, mode index, interval offset and length) per eigenvalue
  struct Mode {
    int component;
    long index;
    double offset;
    double length;
  };
  std::vector<Mode> modes;

  // grid mode, optional: eigenvectors over mask nodes, normalized so that
  // h^dim * sum v^2 = 1
  std::vector<Eigen::VectorXd> vectors;

  // number of eigenvalues <= t, with multiplicity
  long counting(double t) const {
    if (!(t < complete_below))
      throw Error("incomplete",
                  "counting at t = " + format_double(t) +
                      " exceeds certified completeness threshold " +
                      format_double(complete_below));
    return static_cast<long>(
        std::upper_bound(eigenvalues.begin(), eigenvalues.end(), t) -
        eigenvalues.begin());
  }
};

struct SolveOptions {
  long count = 0;          // K lowest eigenpairs, or
  double threshold = 0;    // all eigenvalues <= threshold (certified)
  bool keep_vectors = true;
  double residual_tol = 1e-10;
  std::int64_t dof_cap = 400000;
};

// --------------------------------------------------------------- assembly

// Five-point (three-point in 1D) Dirichlet Laplacian over mask nodes:
// diagonal 2*dim/h^2, off-diagonal -1/h^2 for interior lattice neighbors.
inline Eigen::SparseMatrix<double> assemble_laplacian(const GridMask& m) {
  const double invh2 = 1.0 / (m.h * m.h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.nodes.size() * (1 + 2 * m.dim));
  for (std::int64_t n = 0; n < m.n_nodes(); ++n) {
    const long i = m.nodes[n][0], j = m.nodes[n][1];
    trip.emplace_back(n, n, 2.0 * m.dim * invh2);
    const std::array<std::int64_t, 4> nb{
        m.node_at(i - 1, j), m.node_at(i + 1, j),
        m.dim == 2 ? m.node_at(i, j - 1) : -1,
        m.dim == 2 ? m.node_at(i, j + 1) : -1};
    for (std::int64_t q : nb)
      if (q >= 0) trip.emplace_back(n, q, -invh2);
  }
  Eigen::SparseMatrix<double> A(m.n_nodes(), m.n_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

// ---------------------------------------------------------------- inertia

// Number of eigenvalues of A strictly below t, certified by the inertia of
// the LDL^T factorization of A - tI. Retries with a jittered shift when the
// unpivoted factorization hits a degenerate leading minor.
inline long inertia_below(const Eigen::SparseMatrix<double>& A, double t) {
  double scale = 0;
  for (long i = 0; i < A.rows(); ++i) scale = std::max(scale, std::abs(A.coeff(i, i)));
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double shift = t * (1.0 + attempt * 3e-10) + attempt * 1e-12;
    Eigen::SparseMatrix<double> B = A;
    for (long i = 0; i < B.rows(); ++i) B.coeffRef(i, i) -= shift;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(B);
    if (ldlt.info() != Eigen::Success) continue;
    const auto D = ldlt.vectorD();
    long neg = 0;
    bool ok = true;
    for (long i = 0; i < D.size(); ++i) {
      if (!std::isfinite(D[i]) || std::abs(D[i]) < 1e-13 * scale) {
        ok = false;
        break;
      }
      if (D[i] < 0) ++neg;
    }
    if (ok) return neg;
  }
  throw Error("solver", "inertia count failed: factorization degenerate after retries");
}

// Smallest eigenvalue only, via dense solve (small) or inverse power
// iteration on a Cholesky factor. Near-degenerate ground states converge
// slowly in angle but the Rayleigh value is accurate to the cluster width.
inline double lowest_eigenvalue(const Eigen::SparseMatrix<double>& A) {
  const long n = A.rows();
  if (n == 0) throw Error("solver", "empty operator");
  if (n <= 2000) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(A),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("solver", "dense eigensolver failed");
    return es.eigenvalues()[0];
  }
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  if (llt.info() != Eigen::Success)
    throw Error("solver", "Cholesky factorization failed");
  DeterministicRng rng;
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i) v[i] = 1.0 + 0.05 * rng.next_sym();
  v.normalize();
  double lam = 0;
  for (int it = 0; it < 400; ++it) {
    Eigen::VectorXd w = llt.solve(v);
    v = w / w.norm();
    const double next = v.dot(A * v);
    const bool settled = it > 4 && std::abs(next - lam) <= 1e-11 * next;
    lam = next;
    if (settled && (A * v - lam * v).norm() <= 1e-7 * std::max(1.0, lam))
      return lam;
  }
  if ((A * v - lam * v).norm() <= 1e-5 * std::max(1.0, lam)) return lam;
  throw Error("solver", "ground-state iteration did not converge");
}

// ------------------------------------------------- component eigensolver

namespace detail {

struct ComponentSpectrum {
  std::vector<double> values;            // ascending
  std::vector<Eigen::VectorXd> vectors;  // unit Euclidean norm
  bool complete = false;                 // full spectrum (dense path)
};

inline void orthogonalize_against(Eigen::VectorXd& w,
                                  const std::vector<Eigen::VectorXd>& basis) {
  for (const auto& b : basis) w -= b.dot(w) * b;
}

// Shift-invert Lanczos (shift 0) with full reorthogonalization and
// deterministic deflation restarts until `target` converged eigenpairs are
// found. Start vector: all-ones plus a fixed pseudo-random perturbation so
// that symmetric masks cannot hide antisymmetric partners.
inline ComponentSpectrum lowest_pairs_component(
    const Eigen::SparseMatrix<double>& A, long target, double residual_tol) {
  const long n = A.rows();
  ComponentSpectrum out;
  if (target <= 0) return out;
  target = std::min(target, n);

  if (n <= 2000) {
    Eigen::MatrixXd dense(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success) throw Error("solver", "dense eigensolver failed");
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    out.vectors.reserve(n);
    for (long k = 0; k < n; ++k) out.vectors.push_back(es.eigenvectors().col(k));
    out.complete = true;
    return out;
  }

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  if (llt.info() != Eigen::Success)
    throw Error("solver", "Cholesky factorization failed");

  std::vector<Eigen::VectorXd> locked;
  std::vector<double> locked_vals;
  DeterministicRng rng;

  for (int round = 0; round < 8 && static_cast<long>(locked.size()) < target; ++round) {
    const long need = target - static_cast<long>(locked.size());
    const long m_max = std::min(n - static_cast<long>(locked.size()),
                                std::max<long>(2 * need + 80, 140));
    // start vector
    Eigen::VectorXd v(n);
    if (round == 0) {
      for (long i = 0; i < n; ++i) v[i] = 1.0 + 0.05 * rng.next_sym();
    } else {
      for (long i = 0; i < n; ++i) v[i] = rng.next_sym();
    }
    orthogonalize_against(v, locked);
    if (v.norm() < 1e-12) continue;
    v.normalize();

    std::vector<Eigen::VectorXd> V{v};
    std::vector<double> alpha, beta;
    Eigen::VectorXd prev;

    auto harvest = [&](long m) -> bool {
      // tridiagonal Ritz analysis; returns true when `need` pairs converged
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (long i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      // largest Ritz values of A^{-1} <-> smallest eigenvalues of A
      std::vector<long> order(m);
      for (long i = 0; i < m; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](long a, long b) {
        return es.eigenvalues()[a] > es.eigenvalues()[b];
      });
      long converged = 0;
      std::vector<Eigen::VectorXd> cand_vecs;
      std::vector<double> cand_vals;
      for (long c = 0; c < std::min<long>(m, need); ++c) {
        const long idx = order[c];
        const double theta = es.eigenvalues()[idx];
        if (theta <= 0) break;
        const double last_beta =
            static_cast<long>(beta.size()) >= m ? beta[m - 1] : 0.0;
        const double est = last_beta * std::abs(es.eigenvectors()(m - 1, idx));
        const double lambda = 1.0 / theta;
        if (est > 1e-9 * theta) break;  // cheap gate before explicit residual
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (long i = 0; i < m; ++i) x += es.eigenvectors()(i, idx) * V[i];
        orthogonalize_against(x, locked);
        const double xn = x.norm();
        if (xn < 0.5) break;  // collapsed onto locked space; restart
        x /= xn;
        const double resid = (A * x - lambda * x).norm();
        if (resid > residual_tol * std::max(1.0, lambda)) break;
        cand_vals.push_back(lambda);
        cand_vecs.push_back(std::move(x));
        ++converged;
      }
      if (converged == need) {
        for (long c = 0; c < converged; ++c) {
          // re-orthogonalize candidates among themselves for clean clusters
          Eigen::VectorXd& x = cand_vecs[c];
          for (long p = 0; p < c; ++p) x -= cand_vecs[p].dot(x) * cand_vecs[p];
          x.normalize();
          locked.push_back(x);
          locked_vals.push_back(cand_vals[c]);
        }
        return true;
      }
      return false;
    };

    bool done = false;
    for (long j = 0; j < m_max && !done; ++j) {
      Eigen::VectorXd w = llt.solve(V[j]);
      orthogonalize_against(w, locked);
      const double a = V[j].dot(w);
      alpha.push_back(a);
      w -= a * V[j];
      if (j > 0) w -= beta[j - 1] * prev;
      // two-pass full reorthogonalization
      orthogonalize_against(w, V);
      orthogonalize_against(w, V);
      orthogonalize_against(w, locked);
      const double b = w.norm();
      if (b < 1e-12) {
        done = harvest(j + 1);
        break;  // invariant subspace exhausted; possibly restart
      }
      beta.push_back(b);
      prev = V[j];
      V.push_back(w / b);
      if ((j + 1) % 8 == 0 || j + 1 == m_max) done = harvest(j + 1);
    }
    if (!done && !alpha.empty()) harvest(static_cast<long>(alpha.size()));
  }

  if (static_cast<long>(locked.size()) < target)
    throw Error("solver", "eigensolver failed to converge to requested count");

  std::vector<long> order(locked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<long>(i);
  std::sort(order.begin(), order.end(),
            [&](long a, long b) { return locked_vals[a] < locked_vals[b]; });
  for (long i : order) {
    out.values.push_back(locked_vals[i]);
    out.vectors.push_back(std::move(locked[i]));
  }
  out.values.resize(target);
  out.vectors.resize(target);
  return out;
}

// submask of one connected component, preserving node scan order
struct ComponentProblem {
  std::vector<std::int64_t> global_nodes;        // component node -> mask node
  std::vector<std::array<long, 2>> rel_nodes;    // translation-normalized
  Eigen::SparseMatrix<double> A;
};

inline std::vector<ComponentProblem> split_components(const GridMask& m) {
  const std::vector<int> label = component_labels(m);
  const int nc = component_count(label);
  std::vector<ComponentProblem> comps(nc);
  std::vector<std::int64_t> local(m.n_nodes(), -1);
  for (std::int64_t n = 0; n < m.n_nodes(); ++n) {
    auto& c = comps[label[n]];
    local[n] = static_cast<std::int64_t>(c.global_nodes.size());
    c.global_nodes.push_back(n);
  }
  const double invh2 = 1.0 / (m.h * m.h);
  for (auto& c : comps) {
    long imin = std::numeric_limits<long>::max(), jmin = imin;
    for (std::int64_t g : c.global_nodes) {
      imin = std::min(imin, m.nodes[g][0]);
      jmin = std::min(jmin, m.nodes[g][1]);
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < c.global_nodes.size(); ++k) {
      const std::int64_t g = c.global_nodes[k];
      const long i = m.nodes[g][0], j = m.nodes[g][1];
      c.rel_nodes.push_back({i - imin, j - jmin});
      trip.emplace_back(k, k, 2.0 * m.dim * invh2);
      const std::array<std::int64_t, 4> nb{
          m.node_at(i - 1, j), m.node_at(i + 1, j),
          m.dim == 2 ? m.node_at(i, j - 1) : -1,
          m.dim == 2 ? m.node_at(i, j + 1) : -1};
      for (std::int64_t q : nb)
        if (q >= 0) trip.emplace_back(k, local[q], -invh2);
    }
    c.A.resize(c.global_nodes.size(), c.global_nodes.size());
    c.A.setFromTriplets(trip.begin(), trip.end());
    c.A.makeCompressed();
  }
  return comps;
}

}  // namespace detail

// ------------------------------------------------------------ grid norms

inline NormTriple grid_norms(const Eigen::VectorXd& v, double h, int dim) {
  const double w = std::pow(h, dim);
  double l1 = 0, l2 = 0, linf = 0;
  for (long i = 0; i < v.size(); ++i) {
    l1 += std::abs(v[i]);
    l2 += v[i] * v[i];
    linf = std::max(linf, std::abs(v[i]));
  }
  return {w * l1, std::sqrt(w * l2), linf};
}

inline double grid_integral(const Eigen::VectorXd& v, double h, int dim) {
  const double w = std::pow(h, dim);
  double s = 0;
  for (long i = 0; i < v.size(); ++i) s += v[i];
  return w * s;
}

// sign convention: the entry of largest magnitude (first index on ties)
// is made positive
inline void fix_sign(Eigen::VectorXd& v) {
  long arg = 0;
  double best = -1;
  for (long i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (v[arg] < 0) v = -v;
}

// ------------------------------------------------------------ grid solve

// Lowest eigenpairs of the Dirichlet Laplacian on a mask. Disconnected
// masks are solved per component (lattice-congruent components share one
// solve), merged in ascending order, and completeness is certified by
// matrix inertia. `opts.count` requests the K lowest pairs; `opts.threshold`
// requests every eigenvalue <= t, solving up to 1.05 t.
inline EigenData lowest_eigenpairs(const GridMask& mask, const DomainSpec& spec,
                                   const SolveOptions& opts) {
  if (mask.n_nodes() == 0) throw Error("solver", "mask has no interior nodes");
  if (mask.n_nodes() > opts.dof_cap)
    throw Error("solver", "mask exceeds the 400000-node cap: " +
                              std::to_string(mask.n_nodes()));
  if ((opts.count > 0) == (opts.threshold > 0))
    throw Error("usage", "specify exactly one of count / threshold");

  auto comps = detail::split_components(mask);
  const long ncomp = static_cast<long>(comps.size());

  // congruence cache: translated copies share the spectrum solve
  std::map<std::vector<std::array<long, 2>>, long> congruent;
  std::vector<long> proto(ncomp);
  for (long c = 0; c < ncomp; ++c) {
    auto [it, inserted] = congruent.try_emplace(comps[c].rel_nodes, c);
    proto[c] = it->second;
  }

  std::vector<detail::ComponentSpectrum> spec_of(ncomp);
  auto solve_proto = [&](long c, long target) {
    spec_of[c] = detail::lowest_pairs_component(comps[c].A, target,
                                                opts.residual_tol);
  };

  double complete_below = 0;
  if (opts.threshold > 0) {
    const double t_solve = 1.05 * opts.threshold;
    for (long c = 0; c < ncomp; ++c) {
      if (proto[c] != c) continue;
      const long cnt = inertia_below(comps[c].A, t_solve);
      solve_proto(c, cnt);
      if (static_cast<long>(spec_of[c].values.size()) != cnt &&
          !spec_of[c].complete)
        throw Error("solver", "threshold solve incomplete");
    }
    complete_below = t_solve;
  } else {
    // Count mode returns at least K pairs; when the K-th eigenvalue is
    // degenerate the list is extended through the whole cluster so that
    // complete_below stays honest.
    const long K = opts.count;
    std::vector<long> target(ncomp, 0);
    for (long c = 0; c < ncomp; ++c)
      target[c] = std::min<long>(K + 2, comps[c].A.rows());
    for (int iter = 0;; ++iter) {
      for (long c = 0; c < ncomp; ++c)
        if (proto[c] == c &&
            static_cast<long>(spec_of[c].values.size()) < target[c] &&
            !spec_of[c].complete)
          solve_proto(c, target[c]);
      // merge all solved values to locate the K-th smallest overall
      std::vector<double> all;
      for (long c = 0; c < ncomp; ++c)
        if (proto[c] == c)
          for (double v : spec_of[c].values) all.push_back(v);
      for (long c = 0; c < ncomp; ++c)
        if (proto[c] != c)
          for (double v : spec_of[proto[c]].values) all.push_back(v);
      std::sort(all.begin(), all.end());
      if (static_cast<long>(all.size()) < K)
        throw Error("usage", "requested more eigenpairs than degrees of freedom");
      double mu;
      if (static_cast<long>(all.size()) == K) {
        bool allc = true;
        for (long c = 0; c < ncomp; ++c) allc = allc && spec_of[proto[c]].complete;
        if (!allc) throw Error("solver", "count certification impossible");
        mu = std::numeric_limits<double>::infinity();
      } else {
        const double prev = all[K - 1], cut = all[K];
        if (cut - prev > 8e-9 * std::max(1.0, std::abs(cut)))
          mu = 0.5 * (prev + cut);
        else  // degenerate cut: certify just above the cluster instead
          mu = prev * (1.0 + 1e-8) + 1e-12;
      }
      // certify: inertia below mu must match what we hold below mu
      bool ok = true;
      for (long c = 0; c < ncomp; ++c) {
        if (proto[c] != c || spec_of[c].complete) continue;
        const long want = inertia_below(comps[c].A, mu);
        long have = 0;
        for (double v : spec_of[c].values)
          if (v < mu) ++have;
        if (want < have)
          throw Error("solver", "spurious eigenvalue below certification point");
        if (want > have) {
          target[c] = std::min<long>(comps[c].A.rows(),
                                     std::max(want + 2, target[c] + want - have));
          spec_of[c].values.clear();
          spec_of[c].vectors.clear();
          ok = false;
        }
      }
      if (ok) {
        complete_below = mu;
        break;
      }
      if (iter >= 6) throw Error("solver", "count certification failed");
    }
  }

  // merge components, ascending by (value, component)
  struct Entry {
    double v;
    long comp, idx;
  };
  std::vector<Entry> entries;
  for (long c = 0; c < ncomp; ++c) {
    const auto& s = spec_of[proto[c]];
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      if (opts.threshold > 0 || !s.complete ||
          s.values[k] < complete_below)  // dense path may hold extra values
        entries.push_back({s.values[k], c, static_cast<long>(k)});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.v != b.v ? a.v < b.v : (a.comp != b.comp ? a.comp < b.comp
                                                      : a.idx < b.idx);
  });
  if (opts.count > 0 && std::isfinite(complete_below)) {
    while (!entries.empty() && entries.back().v >= complete_below)
      entries.pop_back();
  }
  if (opts.threshold > 0) {
    while (!entries.empty() && entries.back().v > complete_below) entries.pop_back();
  }

  EigenData out;
  out.dim = mask.dim;
  out.h = mask.h;
  out.source = "grid";
  out.domain = spec.canonical();
  out.source_hash = fnv1a(out.domain + "|h=" + format_double(mask.h));
  out.complete_below = complete_below;
  out.n_nodes = mask.n_nodes();
  out.box[0] = mask.hi[0] - mask.lo[0] + 1;
  if (mask.dim == 2) out.box[1] = mask.hi[1] - mask.lo[1] + 1;
  const double wq = std::pow(mask.h, mask.dim);
  for (const auto& e : entries) {
    const auto& s = spec_of[proto[e.comp]];
    Eigen::VectorXd full = Eigen::VectorXd::Zero(mask.n_nodes());
    const auto& gn = comps[e.comp].global_nodes;
    const Eigen::VectorXd& cv = s.vectors[e.idx];
    for (std::size_t k = 0; k < gn.size(); ++k) full[gn[k]] = cv[k];
    full /= std::sqrt(wq);  // h^d-weighted unit norm
    fix_sign(full);
    out.eigenvalues.push_back(e.v);
    out.norms.push_back(grid_norms(full, mask.h, mask.dim));
    out.integrals.push_back(grid_integral(full, mask.h, mask.dim));
    if (opts.keep_vectors) out.vectors.push_back(std::move(full));
  }
  return out;
}

// ------------------------------------------------------------- exact 1D

// Exact spectra of disjoint unions of intervals: a merged component of
// length L contributes pi^2 j^2 / L^2 with closed-form norms. Request either
// all eigenvalues <= tmax or the K lowest.
inline EigenData exact_interval_spectrum(const DomainSpec& spec, double tmax,
                                         long count = 0) {
  if (spec.dim != 1) throw Error("usage", "exact mode requires a 1D domain");
  // merge overlapping intervals into components
  std::vector<std::pair<double, double>> iv;
  for (const auto& p : spec.primitives) {
    const auto& I = std::get<Interval>(p);
    iv.emplace_back(I.a, I.b);
  }
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> comp;
  for (auto [a, b] : iv) {
    if (!comp.empty() && a < comp.back().second)
      comp.back().second = std::max(comp.back().second, b);
    else
      comp.emplace_back(a, b);
  }

  const double pi = 3.14159265358979323846;
  struct Row {
    double v;
    int c;
    long j;
    double a, len;
  };
  auto enumerate = [&](double bound) {
    std::vector<Row> rows;
    for (int c = 0; c < static_cast<int>(comp.size()); ++c) {
      const double L = comp[c].second - comp[c].first;
      for (long j = 1;; ++j) {
        const double v = pi * pi * j * j / (L * L);
        if (v > bound) break;
        rows.push_back({v, c, j, comp[c].first, L});
      }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.v != b.v ? a.v < b.v : (a.c != b.c ? a.c < b.c : a.j < b.j);
    });
    return rows;
  };

  std::vector<Row> rows;
  double complete_below;
  if (count > 0) {
    double Lmax = 0;
    for (auto [a, b] : comp) Lmax = std::max(Lmax, b - a);
    double bound = pi * pi * sq(double(count + 1)) / (Lmax * Lmax);
    for (;;) {
      rows = enumerate(bound);
      if (static_cast<long>(rows.size()) > count) break;
      bound *= 2;
    }
    complete_below = rows[count].v;  // first omitted eigenvalue
    rows.resize(count);
  } else {
    if (!(tmax > 0)) throw Error("usage", "exact mode needs tmax or count");
    rows = enumerate(tmax);
    complete_below = std::nextafter(tmax, std::numeric_limits<double>::infinity());
  }

  EigenData out;
  out.dim = 1;
  out.source = "exact1d";
  out.domain = spec.canonical();
  out.source_hash = fnv1a(out.domain + "|exact");
  out.complete_below = complete_below;
  for (const auto& r : rows) {
    out.eigenvalues.push_back(r.v);
    const double l1 = 2.0 * std::sqrt(2.0) / pi * std::sqrt(r.len);
    const double linf = std::sqrt(2.0 / r.len);
    out.norms.push_back({l1, 1.0, linf});
    out.integrals.push_back(r.j % 2 == 1 ? std::sqrt(2.0 * r.len) * 2.0 / (pi * r.j)
                                         : 0.0);
    out.modes.push_back({r.c, r.j, r.a, r.len});
  }
  return out;
}

// Synthetic spectra for formula-level checks. Norms default to 1 so ratio
// evaluators stay runnable; integrals default to 0.
inline EigenData synthetic_spectrum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  EigenData out;
  out.source = "synthetic";
  out.complete_below = std::numeric_limits<double>::infinity();
  out.eigenvalues = std::move(values);
  out.norms.assign(out.eigenvalues.size(), NormTriple{1.0, 1.0, 1.0});
  out.integrals.assign(out.eigenvalues.size(), 0.0);
  return out;
}

}  // namespace dirlap
