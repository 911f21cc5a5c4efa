// Command-line driver: solve spectra, verify bounds, tabulate heat
// quantities, run family sweeps, and render saved reports.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dirlap/bounds.hpp"
#include "dirlap/common.hpp"
#include "dirlap/geometry.hpp"
#include "dirlap/heat.hpp"
#include "dirlap/io.hpp"
#include "dirlap/localization.hpp"
#include "dirlap/spectral.hpp"

using dirlap::BoundReport;
using dirlap::DomainSpec;
using dirlap::EigenData;
using dirlap::Error;
using dirlap::GridMask;
using dirlap::json;

namespace {

struct Options {
  std::string spec_path;
  std::string preset;
  std::string eig_path;
  std::string in_path;
  std::string out;
  std::string format = "json";
  std::string checks;
  std::string family;
  std::string m_list;
  std::string eps_list;
  std::string times;
  std::string golden;
  double h = 1.0 / 64;
  bool exact = false;
  bool vectors = false;
  bool oracle = false;
  bool update_golden = false;
  long count = 0;
  double tmax = 0;
  double theta = 1.0;
  long k = 1;
  double sigma = 0;
  double r_cut = 0;
  long n_scale = 0;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = tok.find_last_not_of(" \t");
    out.push_back(dirlap::detail::parse_number(tok.substr(b, e - b + 1)));
  }
  if (out.empty())
    throw Error("usage", std::string("empty ") + what + " list");
  return out;
}

std::string resolve_out(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* env = std::getenv("OUTPUT_DIR");
  if (env && *env) return std::string(env) + "/" + path;
  return path;
}

json meta_block(const std::string& command) {
  json m;
  m["command"] = command;
  m["generated_at"] = static_cast<long>(std::time(nullptr));
  m["tool"] = "dirlap 0.1.0";
  return m;
}

void emit_text(const Options& o, const std::string& text) {
  if (o.out.empty())
    std::cout << text;
  else
    dirlap::write_text_file(resolve_out(o.out), text);
}

void emit_json(const Options& o, const json& j) {
  if (o.out.empty())
    std::cout << j.dump(2) << "\n";
  else
    dirlap::write_json_file(resolve_out(o.out), j);
}

DomainSpec resolve_domain(const Options& o) {
  const int given = (!o.spec_path.empty() ? 1 : 0) + (!o.preset.empty() ? 1 : 0);
  if (given != 1)
    throw Error("usage", "provide exactly one of --spec or --preset");
  if (!o.preset.empty()) return dirlap::parse_preset(o.preset);
  return dirlap::parse_domain(dirlap::read_text_file(o.spec_path));
}

// solve with the command-line depth request, or the default protocol:
// ground state first, then everything below max(42, 2.2 lambda1). Callers
// comparing trace sums raise the floor so truncation bounds stay small.
EigenData grid_solve(const GridMask& mask, const DomainSpec& spec,
                     const Options& o, bool want_vectors,
                     double min_threshold = 0) {
  dirlap::SolveOptions opts;
  opts.keep_vectors = want_vectors;
  if (o.count > 0 && o.tmax > 0)
    throw Error("usage", "provide only one of --count and --tmax");
  if (o.count > 0) {
    opts.count = o.count;
    return dirlap::lowest_eigenpairs(mask, spec, opts);
  }
  double threshold = o.tmax;
  if (!(threshold > 0)) {
    dirlap::SolveOptions probe;
    probe.count = 1;
    probe.keep_vectors = false;
    const EigenData e1 = dirlap::lowest_eigenpairs(mask, spec, probe);
    threshold = std::max({42.0, 2.2 * e1.eigenvalues.front(), min_threshold});
  }
  opts.threshold = threshold;
  return dirlap::lowest_eigenpairs(mask, spec, opts);
}

EigenData exact_solve(const DomainSpec& spec, const Options& o) {
  if (o.count > 0 && o.tmax > 0)
    throw Error("usage", "provide only one of --count and --tmax");
  if (o.count > 0) return dirlap::exact_interval_spectrum(spec, 0, o.count);
  const double tmax = o.tmax > 0 ? o.tmax : 1000.0;
  return dirlap::exact_interval_spectrum(spec, tmax);
}

std::vector<double> default_times(const Options& o) {
  if (!o.times.empty()) return parse_list(o.times, "time");
  return {0.05, 0.1, 0.2, 0.5};
}

// Depth that keeps the trace truncation bound under about one percent of
// the partial sum at the smallest requested time. Capped so a very small
// user-chosen time cannot request thousands of modes; below the cap the
// truncation column reports the honest remainder.
double trace_depth(const Options& o) {
  const std::vector<double> times = default_times(o);
  const double tmin = *std::min_element(times.begin(), times.end());
  return std::min(12.0 / tmin, 600.0);
}

// ------------------------------------------------------------------ solve

int cmd_solve(const Options& o) {
  const DomainSpec spec = resolve_domain(o);
  EigenData eig;
  if (o.exact) {
    if (o.count == 0 && o.tmax == 0)
      throw Error("usage", "solve needs --count or --tmax");
    eig = exact_solve(spec, o);
  } else {
    const GridMask mask = dirlap::rasterize(spec, o.h);
    if (o.count == 0 && o.tmax == 0)
      throw Error("usage", "solve needs --count or --tmax");
    eig = grid_solve(mask, spec, o, o.vectors);
  }
  if (o.vectors) {
    if (o.out.empty())
      throw Error("usage", "--vectors needs --out to place the binary file");
    if (eig.vectors.empty())
      throw Error("usage", "--vectors requires a grid solve");
    dirlap::write_vectors_binary(resolve_out(o.out) + ".vec", eig);
  }
  if (o.format == "json") {
    json j = dirlap::eigendata_to_json(eig);
    j["meta"] = meta_block("solve");
    emit_json(o, j);
  } else if (o.format == "csv") {
    std::ostringstream os;
    os << "index,eigenvalue,l1,l2,linf,integral\n";
    for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i)
      os << i + 1 << "," << dirlap::format_double(eig.eigenvalues[i]) << ","
         << dirlap::format_double(eig.norms[i].l1) << ","
         << dirlap::format_double(eig.norms[i].l2) << ","
         << dirlap::format_double(eig.norms[i].linf) << ","
         << dirlap::format_double(eig.integrals[i]) << "\n";
    emit_text(o, os.str());
  } else if (o.format == "table") {
    std::ostringstream os;
    os << "source " << eig.source << ", " << eig.eigenvalues.size()
       << " eigenvalues, complete below "
       << dirlap::format_double(eig.complete_below) << "\n";
    for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%4zu  %-22.15g l1=%-12.6g linf=%-12.6g\n",
                    i + 1, eig.eigenvalues[i], eig.norms[i].l1,
                    eig.norms[i].linf);
      os << buf;
    }
    emit_text(o, os.str());
  } else {
    throw Error("usage", "unknown format: " + o.format);
  }
  return 0;
}

// ----------------------------------------------------------------- verify

const std::set<std::string>& known_checks() {
  static const std::set<std::string> ids = {
      "supnorm",       "counting-lower", "sharp1d",
      "cells",         "remainder",      "decay",
      "trace-content", "counting-trace", "l1-ratio",
      "content-ratio", "essential-ratio", "cluster-rhs"};
  return ids;
}

std::vector<std::string> select_checks(const Options& o,
                                       const std::string& source) {
  std::vector<std::string> out;
  if (!o.checks.empty()) {
    std::istringstream is(o.checks);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      const auto e = tok.find_last_not_of(" \t");
      tok = tok.substr(b, e - b + 1);
      if (!known_checks().count(tok))
        throw Error("usage", "unknown check id: " + tok);
      out.push_back(tok);
    }
    if (out.empty()) throw Error("usage", "empty check list");
    return out;
  }
  if (source == "exact1d")
    return {"supnorm",       "counting-lower", "sharp1d",  "trace-content",
            "counting-trace", "l1-ratio",      "content-ratio"};
  if (source == "grid")
    return {"supnorm",  "counting-lower", "cells",
            "remainder", "decay",          "trace-content",
            "counting-trace", "l1-ratio", "content-ratio"};
  return {"supnorm", "counting-trace", "l1-ratio"};
}

// lattice-identical copy with all lengths multiplied by the factor
GridMask scaled_clone(const GridMask& m, double factor) {
  GridMask out = m;
  out.h = m.h * factor;
  return out;
}

struct VerifyContext {
  DomainSpec spec;
  bool have_spec = false;
  EigenData eig;
  GridMask mask;
  bool have_mask = false;

  // lazy canonical-scale localization state (ground state mapped to 1)
  bool have_scaled = false;
  GridMask mask_s;
  EigenData eig_s;
  dirlap::DecayParams params;
  dirlap::CubeCover cover;
  dirlap::Mollifier moll;
};

void ensure_scaled(VerifyContext& ctx, const Options& o) {
  if (ctx.have_scaled) return;
  if (ctx.eig.source != "grid" || !ctx.have_mask)
    throw Error("usage", "localization checks need a grid solve");
  const double lam1 = ctx.eig.eigenvalues.at(0);
  const double factor = std::sqrt(lam1);
  ctx.mask_s = scaled_clone(ctx.mask, factor);
  const DomainSpec spec_s = ctx.spec.scaled(factor);
  dirlap::SolveOptions opts;
  opts.threshold = 2.0;
  opts.keep_vectors = false;
  ctx.eig_s = dirlap::lowest_eigenpairs(ctx.mask_s, spec_s, opts);
  ctx.moll = dirlap::build_mollifier(ctx.mask.dim);
  const double c0 = dirlap::ims_reference_c0(ctx.mask.dim);
  ctx.params =
      dirlap::make_decay_params(ctx.mask.dim, ctx.moll.m, c0, 1.0, 2.0);
  const long n = o.n_scale > 0
                     ? o.n_scale
                     : static_cast<long>(std::ceil(
                           std::max(1.0, ctx.params.n0)));
  ctx.cover = dirlap::build_cube_cover(ctx.mask_s, n, 2.0);
  ctx.have_scaled = true;
}

std::vector<BoundReport> run_check(const std::string& id, VerifyContext& ctx,
                                   const Options& o) {
  const EigenData& eig = ctx.eig;
  if (id == "supnorm") return dirlap::check_supnorm(eig);
  if (id == "counting-lower") {
    double gamma;
    if (eig.source == "exact1d")
      gamma = dirlap::exact1d_inscribed_volume(eig);
    else if (ctx.have_mask)
      gamma = dirlap::largest_inscribed_cube(ctx.mask);
    else
      throw Error("usage", "counting lower bound needs a domain");
    const double lam1 = eig.eigenvalues.at(0);
    double t = 50.0 * lam1;
    if (std::isfinite(eig.complete_below))
      t = std::max(lam1, std::min(0.9 * eig.complete_below, t));
    return {dirlap::check_counting_lower(eig, gamma, t)};
  }
  if (id == "sharp1d") return dirlap::check_sharp1d(eig);
  if (id == "cells") {
    ensure_scaled(ctx, o);
    return dirlap::check_cells(ctx.cover, ctx.eig_s.counting(2.0));
  }
  if (id == "remainder") {
    ensure_scaled(ctx, o);
    const auto gap = dirlap::remainder_gap(ctx.mask_s, ctx.cover);
    return {dirlap::check_remainder(gap, ctx.params, ctx.mask.h)};
  }
  if (id == "decay") {
    ensure_scaled(ctx, o);
    if (eig.vectors.empty())
      throw Error("usage", "decay check needs kept eigenvectors");
    const double scale = std::pow(eig.eigenvalues.at(0),
                                  -double(ctx.mask.dim) / 4.0);
    Eigen::VectorXd phi = scale * eig.vectors.at(0);
    const auto profile =
        dirlap::decay_profile(phi, ctx.mask_s, ctx.cover, ctx.moll);
    return {dirlap::check_decay_mass(profile, ctx.params)};
  }
  if (id == "trace-content")
    return dirlap::check_trace_content(eig, default_times(o));
  if (id == "counting-trace") {
    std::vector<double> Ts;
    for (double t : default_times(o)) Ts.push_back(t / 6.0);
    Ts.push_back(0.1);
    return dirlap::check_counting_trace(eig, Ts, 10);
  }
  if (id == "l1-ratio") return {dirlap::ratio_l1(eig, o.k, o.theta)};
  if (id == "content-ratio") {
    std::vector<BoundReport> out;
    for (double t : default_times(o)) out.push_back(dirlap::ratio_content(eig, t));
    return out;
  }
  if (id == "essential-ratio") {
    if (!(o.sigma > 0) || !(o.r_cut > 0))
      throw Error("usage", "essential ratio needs --sigma and --r");
    const double lam1 = eig.eigenvalues.at(0);
    long k = o.k;
    return {dirlap::ratio_essential(eig, k, lam1, o.sigma, o.r_cut)};
  }
  if (id == "cluster-rhs") {
    ensure_scaled(ctx, o);
    dirlap::SolveOptions opts;
    opts.threshold = 2.0;
    opts.keep_vectors = true;
    const DomainSpec spec_s =
        ctx.spec.scaled(std::sqrt(eig.eigenvalues.at(0)));
    EigenData full_s = dirlap::lowest_eigenpairs(ctx.mask_s, spec_s, opts);
    const double n = std::max(1.0, std::ceil(std::max(1.0, ctx.params.n0)));
    return {dirlap::ratio_cluster_rhs(full_s, ctx.params, 1, n, 2.0)};
  }
  throw Error("usage", "unknown check id: " + id);
}

std::string verdict_table(const std::vector<json>& reports) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-18s %5s  %-10s %13s %13s %10s\n",
                "id", "kind", "index", "verdict", "lhs", "rhs", "ratio");
  os << buf;
  for (const auto& r : reports) {
    if (r.contains("error")) {
      std::snprintf(buf, sizeof buf, "%-16s %-18s %5s  error: %s\n",
                    r.value("id", "?").c_str(), "-", "-",
                    r["error"]["message"].get<std::string>().c_str());
      os << buf;
      continue;
    }
    std::snprintf(buf, sizeof buf, "%-16s %-18s %5ld  %-10s %13.6g %13.6g %10.4g\n",
                  r["id"].get<std::string>().c_str(),
                  r["kind"].get<std::string>().c_str(), r["index"].get<long>(),
                  r["verdict"].get<std::string>().c_str(),
                  r["lhs"].get<double>(), r["rhs"].get<double>(),
                  r["ratio"].get<double>());
    os << buf;
  }
  return os.str();
}

int cmd_verify(const Options& o) {
  VerifyContext ctx;
  if (!o.eig_path.empty()) {
    ctx.eig = dirlap::eigendata_from_json(dirlap::read_json_file(o.eig_path));
    if (!ctx.eig.domain.empty()) {
      ctx.spec = dirlap::parse_domain(ctx.eig.domain);
      ctx.have_spec = true;
      if (ctx.eig.source == "grid") {
        ctx.mask = dirlap::rasterize(ctx.spec, ctx.eig.h);
        ctx.have_mask = true;
      }
    }
  } else {
    ctx.spec = resolve_domain(o);
    ctx.have_spec = true;
    if (o.exact) {
      ctx.eig = exact_solve(ctx.spec, o);
    } else {
      ctx.mask = dirlap::rasterize(ctx.spec, o.h);
      ctx.have_mask = true;
      double depth = 0;
      for (const auto& id : select_checks(o, "grid"))
        if (id == "trace-content" || id == "counting-trace" ||
            id == "content-ratio")
          depth = trace_depth(o);
      ctx.eig = grid_solve(ctx.mask, ctx.spec, o, true, depth);
    }
  }

  const auto ids = select_checks(o, ctx.eig.source);
  std::vector<json> reports;
  long n_pass = 0, n_fail = 0, n_ratio = 0, n_skip = 0, n_err = 0;
  for (const auto& id : ids) {
    try {
      for (const auto& r : run_check(id, ctx, o)) {
        reports.push_back(dirlap::bound_report_to_json(r));
        if (r.verdict == "pass") ++n_pass;
        else if (r.verdict == "fail") ++n_fail;
        else if (r.verdict == "ratio-only") ++n_ratio;
        else ++n_skip;
      }
    } catch (const Error& e) {
      json err;
      err["id"] = id;
      err["error"] = {{"kind", e.kind}, {"message", e.what()}};
      reports.push_back(err);
      ++n_err;
    }
  }

  json out;
  out["meta"] = meta_block("verify");
  if (ctx.have_spec) out["domain"] = ctx.spec.canonical();
  out["source"] = ctx.eig.source;
  out["h"] = ctx.eig.h;
  out["reports"] = reports;
  out["summary"] = {{"pass", n_pass},     {"fail", n_fail},
                    {"ratio_only", n_ratio}, {"skipped", n_skip},
                    {"errors", n_err},
                    {"all_explicit_pass", n_fail == 0 && n_err == 0}};
  if (o.format == "table") {
    emit_text(o, verdict_table(reports));
  } else if (o.format == "csv") {
    std::ostringstream os;
    os << "id,kind,index,verdict,lhs,rhs,ratio\n";
    for (const auto& r : reports) {
      if (r.contains("error")) {
        os << r.value("id", "?") << ",error,0," << r["error"]["kind"].get<std::string>()
           << ",,,\n";
        continue;
      }
      os << r["id"].get<std::string>() << "," << r["kind"].get<std::string>()
         << "," << r["index"].get<long>() << ","
         << r["verdict"].get<std::string>() << ","
         << dirlap::format_double(r["lhs"].get<double>()) << ","
         << dirlap::format_double(r["rhs"].get<double>()) << ","
         << dirlap::format_double(r["ratio"].get<double>()) << "\n";
    }
    emit_text(o, os.str());
  } else {
    emit_json(o, out);
  }
  return (n_fail == 0 && n_err == 0) ? 0 : 1;
}

// ------------------------------------------------------------------- heat

int cmd_heat(const Options& o) {
  const DomainSpec spec = resolve_domain(o);
  const std::vector<double> times = default_times(o);
  EigenData eig;
  GridMask mask;
  Eigen::SparseMatrix<double> A;
  bool grid = false;
  if (o.exact) {
    if (o.oracle)
      throw Error("usage", "time stepping needs a grid solve, not --exact");
    eig = exact_solve(spec, o);
  } else {
    mask = dirlap::rasterize(spec, o.h);
    eig = grid_solve(mask, spec, o, false, trace_depth(o));
    A = dirlap::assemble_laplacian(mask);
    grid = true;
  }
  const double lam1 = eig.eigenvalues.at(0);
  const auto rows = dirlap::heat_rows(eig, times, grid ? &mask : nullptr,
                                      grid ? &A : nullptr, lam1, o.oracle);

  std::vector<json> checks;
  long n_fail = 0;
  for (const auto& r : dirlap::check_trace_content(eig, times)) {
    checks.push_back(dirlap::bound_report_to_json(r));
    if (r.verdict == "fail") ++n_fail;
  }
  for (double t : times)
    checks.push_back(dirlap::bound_report_to_json(dirlap::ratio_content(eig, t)));
  {
    std::vector<double> Ts;
    for (double t : times) Ts.push_back(t / 6.0);
    Ts.push_back(0.1);
    for (const auto& r : dirlap::check_counting_trace(eig, Ts, 10)) {
      checks.push_back(dirlap::bound_report_to_json(r));
      if (r.verdict == "fail") ++n_fail;
    }
  }

  if (o.format == "csv") {
    std::ostringstream os;
    os << "t,Z,Q_spectral,Q_timestep,trunc_bound\n";
    for (const auto& r : rows) {
      os << dirlap::format_double(r.t) << "," << dirlap::format_double(r.Z)
         << "," << dirlap::format_double(r.Q_spectral) << ",";
      if (o.oracle) os << dirlap::format_double(r.Q_timestep);
      os << "," << dirlap::format_double(r.trunc_bound) << "\n";
    }
    emit_text(o, os.str());
  } else if (o.format == "table") {
    std::ostringstream os;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%10s %14s %14s %14s %12s\n", "t", "Z",
                  "Q_spectral", "Q_timestep", "trunc");
    os << buf;
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%10.4g %14.8g %14.8g %14.8g %12.4g\n",
                    r.t, r.Z, r.Q_spectral, r.Q_timestep, r.trunc_bound);
      os << buf;
    }
    emit_text(o, os.str());
  } else {
    json out;
    out["meta"] = meta_block("heat");
    out["domain"] = spec.canonical();
    out["source"] = eig.source;
    out["source_hash"] = dirlap::hash_hex(eig.source_hash);
    json jrows = json::array();
    for (const auto& r : rows) {
      json jr;
      jr["t"] = r.t;
      jr["Z"] = r.Z;
      jr["Q_spectral"] = r.Q_spectral;
      if (o.oracle) jr["Q_timestep"] = r.Q_timestep;
      jr["trunc_bound"] = r.trunc_bound;
      jr["tail_method"] = r.tail_method;
      jr["warn"] = r.warn;
      jrows.push_back(jr);
    }
    out["rows"] = jrows;
    out["reports"] = checks;
    emit_json(o, out);
  }
  return n_fail == 0 ? 0 : 1;
}

// ------------------------------------------------------------------ sweep

struct SweepMember {
  std::string label;
  DomainSpec spec;
};

std::vector<SweepMember> family_members(const Options& o) {
  std::vector<SweepMember> out;
  if (o.family == "disjoint_balls") {
    std::vector<double> ms =
        o.m_list.empty() ? std::vector<double>{1, 2, 4, 8}
                         : parse_list(o.m_list, "m");
    for (double mv : ms) {
      const int m = static_cast<int>(std::lround(mv));
      out.push_back({"disjoint_balls(" + std::to_string(m) + ")",
                     dirlap::preset_disjoint_balls(m)});
    }
    return out;
  }
  if (o.family == "dumbbell") {
    const int m = o.m_list.empty()
                      ? 2
                      : static_cast<int>(std::lround(
                            parse_list(o.m_list, "m").at(0)));
    std::vector<double> eps = o.eps_list.empty()
                                  ? std::vector<double>{0.4, 0.2, 0.1}
                                  : parse_list(o.eps_list, "eps");
    for (double e : eps) {
      std::ostringstream lab;
      lab << "dumbbell(" << m << "," << e << ")";
      out.push_back({lab.str(), dirlap::preset_dumbbell(m, e)});
    }
    return out;
  }
  throw Error("usage", "unknown family: " + o.family);
}

int cmd_sweep(const Options& o) {
  if (o.family.empty()) throw Error("usage", "sweep needs --family");
  const auto members = family_members(o);
  json jmembers = json::array();
  std::vector<std::string> labels;
  std::vector<double> l1_ratios, content_ratios;
  for (const auto& member : members) {
    const GridMask mask = dirlap::rasterize(member.spec, o.h);
    Options so = o;
    so.count = 0;
    so.tmax = 0;  // default depth protocol
    const EigenData eig = grid_solve(mask, member.spec, so, true);
    const double lam1 = eig.eigenvalues.at(0);
    const long N2 = eig.counting(2.0 * lam1);
    const auto ex = dirlap::cluster_extremal_l1(eig, 0);
    const BoundReport l1r = dirlap::ratio_l1(eig, 1, 1.0);
    const BoundReport cr = dirlap::ratio_content(eig, 3.0);
    json jm;
    jm["label"] = member.label;
    jm["lambda1"] = lam1;
    jm["N_2lambda1"] = N2;
    jm["l1_sq"] = dirlap::sq(ex.l1);
    jm["cluster_size"] = static_cast<long>(ex.cluster.size());
    jm["l1_ratio"] = l1r.ratio;
    jm["content_ratio"] = cr.ratio;
    jmembers.push_back(jm);
    labels.push_back(member.label);
    l1_ratios.push_back(l1r.ratio);
    content_ratios.push_back(cr.ratio);
  }

  json family;
  family["family"] = o.family;
  family["h"] = o.h;
  family["members"] = jmembers;

  int rc = 0;
  json envelope_result;
  if (o.update_golden) {
    if (o.golden.empty())
      throw Error("usage", "--update-golden needs --golden PATH");
    json env;
    json fam;
    fam["family"] = o.family;
    fam["h"] = o.h;
    json ms = json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      json m;
      m["label"] = labels[i];
      m["l1_ratio"] = l1_ratios[i];
      m["content_ratio"] = content_ratios[i];
      ms.push_back(m);
    }
    fam["members"] = ms;
    // merge into an existing envelope file when present
    json existing;
    existing["families"] = json::array();
    {
      std::ifstream probe(o.golden);
      if (probe) existing = dirlap::read_json_file(o.golden);
    }
    json merged = json::array();
    bool replaced = false;
    for (const auto& f : existing["families"]) {
      if (f.value("family", "") == o.family) {
        merged.push_back(fam);
        replaced = true;
      } else {
        merged.push_back(f);
      }
    }
    if (!replaced) merged.push_back(fam);
    json envj;
    envj["families"] = merged;
    dirlap::write_json_file(o.golden, envj);
    envelope_result["updated"] = o.golden;
  } else if (!o.golden.empty()) {
    const json env = dirlap::read_json_file(o.golden);
    bool found = false;
    json violations = json::array();
    for (const auto& f : env.value("families", json::array())) {
      if (f.value("family", "") != o.family) continue;
      found = true;
      for (const auto& gm : f.value("members", json::array())) {
        const std::string label = gm.value("label", "");
        const auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) continue;
        const std::size_t i = it - labels.begin();
        const double cap_l1 = 1.05 * gm.value("l1_ratio", 0.0);
        const double cap_ct = 1.05 * gm.value("content_ratio", 0.0);
        const bool bad_l1 = !(l1_ratios[i] > 0) || !std::isfinite(l1_ratios[i]) ||
                            l1_ratios[i] > cap_l1;
        const bool bad_ct = !(content_ratios[i] > 0) ||
                            !std::isfinite(content_ratios[i]) ||
                            content_ratios[i] > cap_ct;
        if (bad_l1 || bad_ct) {
          json v;
          v["label"] = label;
          v["l1_ratio"] = l1_ratios[i];
          v["l1_cap"] = cap_l1;
          v["content_ratio"] = content_ratios[i];
          v["content_cap"] = cap_ct;
          violations.push_back(v);
        }
      }
    }
    if (!found)
      throw Error("usage", "family not present in golden envelope: " + o.family);
    envelope_result["golden"] = o.golden;
    envelope_result["violations"] = violations;
    envelope_result["within_envelope"] = violations.empty();
    if (!violations.empty()) rc = 1;
  }

  if (o.format == "csv") {
    std::ostringstream os;
    os << "label,lambda1,N_2lambda1,l1_sq,l1_ratio,content_ratio\n";
    for (const auto& m : jmembers)
      os << m["label"].get<std::string>() << ","
         << dirlap::format_double(m["lambda1"].get<double>()) << ","
         << m["N_2lambda1"].get<long>() << ","
         << dirlap::format_double(m["l1_sq"].get<double>()) << ","
         << dirlap::format_double(m["l1_ratio"].get<double>()) << ","
         << dirlap::format_double(m["content_ratio"].get<double>()) << "\n";
    emit_text(o, os.str());
  } else if (o.format == "table") {
    std::ostringstream os;
    char buf[240];
    std::snprintf(buf, sizeof buf, "%-22s %12s %6s %12s %12s %14s\n", "label",
                  "lambda1", "N", "l1_sq", "l1_ratio", "content_ratio");
    os << buf;
    for (const auto& m : jmembers) {
      std::snprintf(buf, sizeof buf, "%-22s %12.6g %6ld %12.6g %12.6g %14.6g\n",
                    m["label"].get<std::string>().c_str(),
                    m["lambda1"].get<double>(), m["N_2lambda1"].get<long>(),
                    m["l1_sq"].get<double>(), m["l1_ratio"].get<double>(),
                    m["content_ratio"].get<double>());
      os << buf;
    }
    emit_text(o, os.str());
  } else {
    json out;
    out["meta"] = meta_block("sweep");
    out["families"] = json::array({family});
    if (!envelope_result.empty()) out["envelope"] = envelope_result;
    emit_json(o, out);
  }
  return rc;
}

// ----------------------------------------------------------------- report

int cmd_report(const Options& o) {
  if (o.in_path.empty()) throw Error("usage", "report needs --in FILE");
  const json j = dirlap::read_json_file(o.in_path);
  std::ostringstream os;
  if (j.contains("reports")) {
    std::vector<json> rs;
    for (const auto& r : j["reports"]) rs.push_back(r);
    os << verdict_table(rs);
  }
  if (j.contains("rows")) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%10s %14s %14s %12s\n", "t", "Z",
                  "Q_spectral", "trunc");
    os << buf;
    for (const auto& r : j["rows"]) {
      std::snprintf(buf, sizeof buf, "%10.4g %14.8g %14.8g %12.4g\n",
                    r["t"].get<double>(), r["Z"].get<double>(),
                    r["Q_spectral"].get<double>(),
                    r["trunc_bound"].get<double>());
      os << buf;
    }
  }
  if (j.contains("families")) {
    for (const auto& f : j["families"]) {
      os << f.value("family", "?") << " (h=" << f.value("h", 0.0) << ")\n";
      for (const auto& m : f.value("members", json::array()))
        os << "  " << m.value("label", "?")
           << "  l1_ratio=" << m.value("l1_ratio", 0.0)
           << "  content_ratio=" << m.value("content_ratio", 0.0) << "\n";
    }
  }
  if (j.contains("eigenvalues")) {
    os << j["eigenvalues"].size() << " eigenvalues, source "
       << j.value("source", "?") << "\n";
  }
  if (os.str().empty()) os << "no renderable sections\n";
  emit_text(o, os.str());
  return 0;
}

void add_domain_flags(CLI::App* cmd, Options& o) {
  cmd->set_help_flag("--help", "print help");
  cmd->add_option("--spec", o.spec_path, "domain spec file");
  cmd->add_option("--preset", o.preset, "preset domain, e.g. dumbbell(2,0.2)");
  cmd->add_option("--h", o.h, "grid spacing");
  cmd->add_flag("--exact", o.exact, "closed-form interval spectra");
  cmd->add_option("--count", o.count, "number of lowest eigenpairs");
  cmd->add_option("--tmax", o.tmax, "eigenvalue threshold");
}

void add_output_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "output file (relative paths use OUTPUT_DIR)");
  cmd->add_option("--format", o.format, "json | csv | table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral bounds toolkit for Dirichlet Laplacians"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Options o;

  CLI::App* solve = app.add_subcommand("solve", "compute eigenpairs");
  add_domain_flags(solve, o);
  add_output_flags(solve, o);
  solve->add_flag("--vectors", o.vectors, "write eigenvectors next to --out");

  CLI::App* verify = app.add_subcommand("verify", "evaluate inequality checks");
  add_domain_flags(verify, o);
  add_output_flags(verify, o);
  verify->add_option("--eig", o.eig_path, "verify a saved eigen artifact");
  verify->add_option("--checks", o.checks, "comma-separated check ids");
  verify->add_option("--theta", o.theta, "theta for the L1 ratio");
  verify->add_option("--k", o.k, "eigenvalue index for ratio checks");
  verify->add_option("--sigma", o.sigma, "essential-spectrum proxy");
  verify->add_option("--r", o.r_cut, "cut parameter for the essential ratio");
  verify->add_option("--n", o.n_scale, "cube scale override");
  verify->add_option("--t", o.times, "comma-separated times");

  CLI::App* heat = app.add_subcommand("heat", "heat trace and content");
  add_domain_flags(heat, o);
  add_output_flags(heat, o);
  heat->add_option("--t", o.times, "comma-separated times");
  heat->add_flag("--oracle", o.oracle, "add the time-stepped content column");

  CLI::App* sweep = app.add_subcommand("sweep", "family ratio sweeps");
  sweep->set_help_flag("--help", "print help");
  add_output_flags(sweep, o);
  sweep->add_option("--family", o.family, "disjoint_balls | dumbbell");
  sweep->add_option("--m", o.m_list, "family size list");
  sweep->add_option("--eps", o.eps_list, "dumbbell passage widths");
  sweep->add_option("--h", o.h, "grid spacing");
  sweep->add_option("--golden", o.golden, "ratio envelope file to compare");
  sweep->add_flag("--update-golden", o.update_golden,
                  "rewrite the envelope from this run");

  CLI::App* report = app.add_subcommand("report", "render a saved artifact");
  report->set_help_flag("--help", "print help");
  report->add_option("--in", o.in_path, "artifact JSON to render");
  add_output_flags(report, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    json err;
    err["error"] = {{"kind", "usage"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (verify->parsed()) return cmd_verify(o);
    if (heat->parsed()) return cmd_heat(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (report->parsed()) return cmd_report(o);
    throw Error("usage", "no command given");
  } catch (const Error& e) {
    json err;
    err["error"] = {{"kind", e.kind}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return (e.kind == "usage" || e.kind == "io" || e.kind == "parse") ? 2 : 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"kind", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
