#pragma once

// Monte Carlo paths X(t) = sum_cells G_t(x_i, u_i) dM_i with independent
// dM_i ~ SaS(scale = w_i^{1/alpha}), and empirical characteristic functions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "random.hpp"
#include "report.hpp"

namespace ssmma {

/// Symmetric alpha-stable draw with characteristic function exp(-scale^alpha |theta|^alpha)
/// (Chambers-Mallows-Stuck). At alpha = 1 the draw is scale * tan(V).
inline double sas_sample(double alpha, double scale, CounterRng& rng) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("sas_sample: alpha must lie in (0, 2)");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("sas_sample: scale must be positive");
  const double V = std::numbers::pi * (rng.uniform() - 0.5);
  const double W = rng.exponential();
  if (std::fabs(alpha - 1.0) < 1e-12) return scale * std::tan(V);
  const double x = std::sin(alpha * V) / std::pow(std::cos(V), 1.0 / alpha) *
                   std::pow(std::cos((1.0 - alpha) * V) / W, (1.0 - alpha) / alpha);
  return scale * x;
}

struct SimConfig {
  std::vector<QuadNode> cells;  // x = atoms[cell.atom], u = cell.u(), mass w = cell.weight; none means X = 0
  std::vector<double> ts;
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  std::uint64_t stream_offset = 0;  // path n draws from stream stream_offset + n
  double alpha = 1.5;
  double window = 0.0;  // bulk half-width covered by the cells
  QuadConfig quad;
  std::size_t threads = 1;
  bool deterministic = true;
  double alpha_min = 0.3;
  double alpha_max = 1.95;

  void validate() const {
    if (paths == 0) throw ConfigError("simulate: paths must be >= 1");
    if (ts.empty()) throw ConfigError("simulate: no time points");
    if (!(alpha >= alpha_min && alpha <= alpha_max)) {
      std::ostringstream msg;
      msg << "simulate: alpha = " << alpha << " outside the guarded range [" << alpha_min << ", " << alpha_max << "]";
      throw ConfigError(msg.str());
    }
    for (const auto& c : cells)
      if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw ConfigError("simulate: cell weights must be positive");
    for (double t : ts)
      if (!std::isfinite(t)) throw ConfigError("simulate: non-finite time point");
  }
};

/// Cells from the quadrature rule for the increments at `ts`, plus one cell per
/// atom and side at u = +-R carrying the fitted power-law mass beyond R. Cells on
/// which every G_t vanishes are dropped.
inline SimConfig make_sim_config(const Kernel& k, std::vector<double> ts, std::size_t paths, std::uint64_t seed,
                                 const QuadConfig& q = {}) {
  if (ts.empty()) throw ConfigError("simulate: no time points");
  std::vector<double> ones(ts.size(), 1.0);
  const Combination comb = Combination::increments(ones, ts);
  const QuadRule rule = quadrature_rule(k, comb.offsets(), q, q.cells, q.tail_cells);

  SimConfig cfg;
  cfg.ts = std::move(ts);
  cfg.paths = paths;
  cfg.seed = seed;
  cfg.alpha = k.alpha();
  cfg.window = rule.window;
  cfg.quad = q;

  auto any_nonzero = [&](const QuadNode& n) {
    const Point& x = k.atoms()[n.atom].x;
    for (double t : cfg.ts)
      if (k(x, n.arg(t)) - k(x, n.arg(0.0)) != 0.0) return true;
    return false;
  };
  for (const auto& n : rule.nodes)
    if (any_nonzero(n)) cfg.cells.push_back(n);

  const double R = rule.far;
  for (std::size_t ai = 0; ai < k.atoms().size(); ++ai) {
    const Atom& a = k.atoms()[ai];
    for (double side : {1.0, -1.0}) {
      const double f1 = std::pow(std::fabs(comb.at(k, a.x, side * R)), k.alpha());
      const double f0 = std::pow(std::fabs(comb.at(k, a.x, side * 0.5 * R)), k.alpha());
      if (f1 == 0.0 || f0 == 0.0) continue;
      const double p = std::log2(f0 / f1);
      if (!(p > 1.0 + 1e-6)) throw IntegrabilityError("simulate: kernel '" + k.name() + "' not integrable at infinity");
      cfg.cells.push_back({ai, 0.0, 0.0, side * R, a.weight * R / (p - 1.0)});
    }
  }
  return cfg;
}

/// Row-major N x |ts| matrix of simulated values.
struct PathMatrix {
  std::vector<double> ts;
  std::size_t paths = 0;
  std::vector<double> values;

  double at(std::size_t path, std::size_t col) const { return values[path * ts.size() + col]; }
  double& at(std::size_t path, std::size_t col) { return values[path * ts.size() + col]; }
  std::size_t columns() const { return ts.size(); }

  void write_csv(std::ostream& os) const {
    os.precision(17);
    for (std::size_t c = 0; c < ts.size(); ++c) os << (c ? "," : "") << "t=" << ts[c];
    os << '\n';
    for (std::size_t n = 0; n < paths; ++n) {
      for (std::size_t c = 0; c < ts.size(); ++c) os << (c ? "," : "") << at(n, c);
      os << '\n';
    }
  }

  friend bool operator==(const PathMatrix&, const PathMatrix&) = default;
};

inline PathMatrix simulate_paths(const Kernel& k, const SimConfig& cfg) {
  cfg.validate();
  if (cfg.alpha != k.alpha()) throw ConfigError("simulate: config alpha differs from the kernel's alpha");
  if (cfg.window < k.window()) {
    std::ostringstream msg;
    msg << "simulate: cells cover [-" << cfg.window << ", " << cfg.window << "] but kernel '" << k.name()
        << "' needs [-" << k.window() << ", " << k.window() << "]";
    throw ConfigError(msg.str());
  }
  for (const auto& c : cfg.cells)
    if (c.atom >= k.atoms().size()) throw ConfigError("simulate: cell refers to a missing atom");

  const std::size_t T = cfg.ts.size();
  const std::size_t M = cfg.cells.size();
  std::vector<double> Gt(M * T);
  std::vector<double> scale(M);
  for (std::size_t i = 0; i < M; ++i) {
    const QuadNode& n = cfg.cells[i];
    const Point& x = k.atoms()[n.atom].x;
    const double g0 = k(x, n.arg(0.0));
    for (std::size_t c = 0; c < T; ++c) Gt[i * T + c] = k(x, n.arg(cfg.ts[c])) - g0;
    scale[i] = std::pow(n.weight, 1.0 / cfg.alpha);
  }

  PathMatrix out{cfg.ts, cfg.paths, std::vector<double>(cfg.paths * T, 0.0)};
  auto run = [&](std::size_t begin, std::size_t end) {
    std::vector<double> row(T);
    for (std::size_t n = begin; n < end; ++n) {
      CounterRng rng(cfg.seed, cfg.stream_offset + n);
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t i = 0; i < M; ++i) {
        const double z = sas_sample(cfg.alpha, scale[i], rng);
        const double* g = &Gt[i * T];
        for (std::size_t c = 0; c < T; ++c) row[c] += g[c] * z;
      }
      std::copy(row.begin(), row.end(), out.values.begin() + static_cast<std::ptrdiff_t>(n * T));
    }
  };

  const std::size_t threads = cfg.deterministic ? 1 : std::max<std::size_t>(1, std::min(cfg.threads, cfg.paths));
  if (threads == 1) {
    run(0, cfg.paths);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (cfg.paths + threads - 1) / threads;
    for (std::size_t b = 0; b < cfg.paths; b += chunk) pool.emplace_back(run, b, std::min(cfg.paths, b + chunk));
    for (auto& th : pool) th.join();
  }
  return out;
}

/// (1/N) sum_n exp(i theta X_n(t_col)).
inline std::complex<double> empirical_charfun(const PathMatrix& paths, double theta, std::size_t col) {
  if (paths.paths == 0) throw InvalidArgument("empirical_charfun: no paths");
  if (col >= paths.columns()) throw InvalidArgument("empirical_charfun: column out of range");
  std::vector<double> re(paths.paths), im(paths.paths);
  for (std::size_t n = 0; n < paths.paths; ++n) {
    const double a = theta * paths.at(n, col);
    re[n] = std::cos(a);
    im[n] = std::sin(a);
  }
  const double N = static_cast<double>(paths.paths);
  return {detail::pairwise_sum(re) / N, detail::pairwise_sum(im) / N};
}

/// |phi_hat(theta) - exp(-I(theta, t))| at every theta and column, against the band 3/sqrt(N).
inline VerificationReport charfun_mc_check(const Kernel& k, const PathMatrix& paths, const std::vector<double>& thetas,
                                           const QuadConfig& q = {}) {
  ResidualAccumulator acc;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double band = 3.0 / std::sqrt(static_cast<double>(paths.paths));
  double im_max = 0.0;
  for (std::size_t col = 0; col < paths.columns(); ++col) {
    for (double theta : thetas) {
      const double I = charfun_exponent(k, {theta}, {paths.ts[col]}, q);
      const auto phi = empirical_charfun(paths, theta, col);
      im_max = std::max(im_max, std::fabs(phi.imag()));
      acc.add(std::abs(phi - std::complex<double>(std::exp(-I), 0.0)),
              {0, nan, paths.ts[col], theta, nan, 0.0, "theta in c1, t in u"});
    }
  }
  std::ostringstream desc;
  desc << paths.paths << " paths, " << thetas.size() << " thetas, " << paths.columns() << " time points";
  auto r = acc.finish("empirical characteristic function: " + k.name(), desc.str(), band);
  r.diagnostics.emplace_back("imag_max", im_max);
  return r;
}

struct SelfSimMcOptions {
  bool common_random_numbers = false;  // reuse the path streams for X(ct)
};

/// Compares phi_hat of X(c t) at theta with phi_hat of X(t) at c^H theta. The two
/// samples use disjoint streams unless common random numbers are requested.
/// Pass iff every |difference| <= 3 sqrt(2/N).
inline VerificationReport selfsim_mc_check(const Kernel& k, const SimConfig& cfg, double c,
                                           const std::vector<double>& thetas, SelfSimMcOptions opts = {}) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("selfsim_mc_check: c must be positive");
  if (thetas.empty()) throw InvalidArgument("selfsim_mc_check: no thetas");
  const PathMatrix base = simulate_paths(k, cfg);

  std::vector<double> scaled_ts(cfg.ts);
  for (double& t : scaled_ts) t *= c;
  SimConfig scaled = make_sim_config(k, scaled_ts, cfg.paths, cfg.seed, cfg.quad);
  scaled.stream_offset = opts.common_random_numbers ? cfg.stream_offset : cfg.stream_offset + cfg.paths;
  scaled.threads = cfg.threads;
  scaled.deterministic = cfg.deterministic;
  scaled.alpha_min = cfg.alpha_min;
  scaled.alpha_max = cfg.alpha_max;
  scaled.window = std::max(scaled.window, cfg.window);
  const PathMatrix direct = c == 1.0 && opts.common_random_numbers ? base : simulate_paths(k, scaled);

  const double band = 3.0 * std::sqrt(2.0 / static_cast<double>(cfg.paths));
  const double cH = std::pow(c, k.H());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ResidualAccumulator acc;
  for (std::size_t col = 0; col < cfg.ts.size(); ++col) {
    for (double theta : thetas) {
      const auto lhs = empirical_charfun(direct, theta, col);
      const auto rhs = empirical_charfun(base, cH * theta, col);
      acc.add(std::abs(lhs - rhs), {0, nan, cfg.ts[col], theta, c, 0.0, "theta in c1, c in c2, t in u"});
    }
  }
  std::ostringstream desc;
  desc << cfg.paths << " paths per sample, c = " << c << ", "
       << (opts.common_random_numbers ? "common random numbers" : "independent samples");
  return acc.finish("Monte Carlo self-similarity: " + k.name(), desc.str(), band);
}

}  // namespace ssmma
