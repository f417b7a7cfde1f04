#pragma once

// Mixed-moving-average kernels G(x, u), the generation relation
//
//   c^{-(H-1/alpha)} G(x, cu) = b_c(x) rn_c(x)^{1/alpha} G(psi_c(x), u + g_c(x)) + j_c(x),
//
// and the characteristic exponent I = sum_x mu(x) int |sum_k theta_k G_{t_k}(x, u)|^alpha du.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cocycle.hpp"
#include "error.hpp"
#include "flowspace.hpp"
#include "functional.hpp"
#include "report.hpp"

namespace ssmma {

/// A point of X carrying the mass mu({x}).
struct Atom {
  Point x;
  double weight = 1.0;
};

/// The flow data entering the generation relation.
struct KernelFlow {
  FlowSpace space;
  Cocycle b;
  Cocycle rn;
  SemiAdditiveFunctional g;
  SemiAdditiveFunctional j;

  /// b = 1, rn = 1, g = 0, j = 0.
  static KernelFlow trivial(const FlowSpace& space, SelfSimilarity ss) {
    Cocycle b = unit_cocycle(space);
    Cocycle rn = radon_nikodym_cocycle(space);
    auto zero = [](Scale, const Point&) { return 0.0; };
    return {space, b, rn, SemiAdditiveFunctional::one_semi(space, zero, "g = 0"),
            SemiAdditiveFunctional::two_semi(ss, b, rn, zero, "j = 0")};
  }
};

class Kernel {
 public:
  using Profile = std::function<double(const Point& x, double u)>;

  /// `breakpoints` are the u at which G(x, .) is singular or not smooth; the
  /// quadrature places segment ends there. `window` is the half-width of the bulk.
  Kernel(std::string name, Profile G, SelfSimilarity ss, KernelFlow flow, std::vector<Atom> atoms,
         std::vector<double> breakpoints = {}, double window = 20.0)
      : name_(std::move(name)),
        G_(std::move(G)),
        ss_(ss),
        flow_(std::move(flow)),
        atoms_(std::move(atoms)),
        breakpoints_(std::move(breakpoints)),
        window_(window) {
    ss_.validate();
    if (!G_) throw InvalidArgument("kernel '" + name_ + "': G is empty");
    if (atoms_.empty()) throw InvalidArgument("kernel '" + name_ + "': no atoms");
    for (const auto& a : atoms_) {
      if (!(a.weight > 0.0) || !std::isfinite(a.weight))
        throw InvalidArgument("kernel '" + name_ + "': atom weights must be positive");
      flow_.space.require(a.x);
    }
    for (double s : breakpoints_)
      if (!std::isfinite(s)) throw InvalidArgument("kernel '" + name_ + "': non-finite breakpoint");
    if (!(window_ > 0.0) || !std::isfinite(window_)) throw InvalidArgument("kernel '" + name_ + "': window must be > 0");
    if (flow_.b.codomain() != Codomain::Sign) throw InvalidArgument("kernel: b must be sign valued");
    if (flow_.rn.codomain() != Codomain::Positive) throw InvalidArgument("kernel: rn must be positive");
    if (flow_.g.kind() != FunctionalKind::OneSemi) throw InvalidArgument("kernel: g must be 1-semi-additive");
    if (flow_.j.kind() != FunctionalKind::TwoSemi) throw InvalidArgument("kernel: j must be 2-semi-additive");
    const auto& p = flow_.j.params();
    if (p.H != ss_.H || p.alpha != ss_.alpha || p.critical != ss_.critical)
      throw InvalidArgument("kernel: j was built for different (H, alpha)");
    for (const FlowSpace* s : {&flow_.b.space(), &flow_.rn.space(), &flow_.g.space(), &flow_.j.space()})
      if (!s->same_as(flow_.space)) throw InvalidArgument("kernel: flow components live on different flows");
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
  }

  /// Kernel on the identity flow with one atom per fiber, weighted by the fiber weights.
  static Kernel on_identity(std::string name, Profile G, SelfSimilarity ss, std::vector<double> breakpoints = {},
                            std::size_t fibers = 1, std::vector<double> weights = {}, double window = 20.0) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < fibers; ++i) labels.push_back("x" + std::to_string(i));
    FlowSpace space = FlowSpace::identity(std::move(labels), std::move(weights));
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < space.size(); ++i) atoms.push_back({Point{i, 0.0}, space.weight(i)});
    return Kernel(std::move(name), std::move(G), ss, KernelFlow::trivial(space, ss), std::move(atoms),
                  std::move(breakpoints), window);
  }

  double operator()(const Point& x, double u) const { return G_(x, u); }

  const std::string& name() const { return name_; }
  const Profile& profile() const { return G_; }
  const SelfSimilarity& params() const { return ss_; }
  double H() const { return ss_.H; }
  double alpha() const { return ss_.alpha; }
  const KernelFlow& flow() const { return flow_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double window() const { return window_; }

  Kernel with_profile(std::string name, Profile G) const {
    Kernel k = *this;
    k.name_ = std::move(name);
    k.G_ = std::move(G);
    return k;
  }
  Kernel with_window(double window) const {
    return Kernel(name_, G_, ss_, flow_, atoms_, breakpoints_, window);
  }

 private:
  std::string name_;
  Profile G_;
  SelfSimilarity ss_;
  KernelFlow flow_;
  std::vector<Atom> atoms_;
  std::vector<double> breakpoints_;
  double window_;
};

/// G_t(x, u) = G(x, t + u) - G(x, u).
inline double increment(const Kernel& k, double t, const Point& x, double u) { return k(x, t + u) - k(x, u); }

/// G(u) = a+ (u_+)^{H-1/alpha} + a- ((-u)_+)^{H-1/alpha}, G(0) = 0, on one fiber of
/// the identity flow. At H = 1/alpha the powers become indicators.
inline Kernel lfsm_kernel(double H, double alpha, double aplus = 1.0, double aminus = 0.0) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("lfsm_kernel: alpha must lie in (0, 2)");
  if (!(H > 0.0)) throw InvalidArgument("lfsm_kernel: H must be > 0 for |G_t|^alpha to be integrable at the singularity");
  if (!(H < 1.0)) throw InvalidArgument("lfsm_kernel: H must be < 1 for |G_t|^alpha to be integrable at infinity");
  if (!std::isfinite(aplus) || !std::isfinite(aminus)) throw InvalidArgument("lfsm_kernel: non-finite coefficients");
  const bool critical = std::fabs(H - 1.0 / alpha) <= 1e-12;
  const SelfSimilarity ss{H, alpha, critical};
  const double kappa = ss.kappa();
  Kernel::Profile G;
  if (critical) {
    G = [aplus, aminus](const Point&, double u) { return u > 0.0 ? aplus : (u < 0.0 ? aminus : 0.0); };
  } else {
    G = [aplus, aminus, kappa](const Point&, double u) {
      if (u > 0.0) return aplus == 0.0 ? 0.0 : aplus * std::pow(u, kappa);
      if (u < 0.0) return aminus == 0.0 ? 0.0 : aminus * std::pow(-u, kappa);
      return 0.0;
    };
  }
  std::ostringstream name;
  name << "lfsm(H=" << H << ", alpha=" << alpha << ", a+=" << aplus << ", a-=" << aminus << ")";
  return Kernel::on_identity(name.str(), std::move(G), ss, {0.0});
}

struct GridPoint {
  Point x;
  double u = 0.0;
};

/// n midpoints of [-half_width, half_width] at every atom.
inline std::vector<GridPoint> uniform_grid(const Kernel& k, std::size_t n, double half_width = 10.0) {
  if (n == 0 || !(half_width > 0.0)) throw InvalidArgument("uniform_grid: need n >= 1 and half_width > 0");
  std::vector<GridPoint> grid;
  grid.reserve(n * k.atoms().size());
  const double h = 2.0 * half_width / static_cast<double>(n);
  for (const auto& a : k.atoms())
    for (std::size_t i = 0; i < n; ++i) grid.push_back({a.x, -half_width + (static_cast<double>(i) + 0.5) * h});
  return grid;
}

/// Absolute residual of the generation relation at every grid point for one c.
inline VerificationReport generated_residual(const Kernel& k, double c, const std::vector<GridPoint>& grid,
                                             double tol = 1e-9) {
  if (grid.empty()) throw InvalidArgument("generated_residual: empty grid");
  const Scale s = Scale::of(c);
  const KernelFlow& f = k.flow();
  const double kappa = k.params().kappa();
  const double scale = kappa == 0.0 ? 1.0 : std::pow(c, -kappa);
  const double inv_alpha = 1.0 / k.alpha();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ResidualAccumulator acc;
  for (const auto& gp : grid) {
    const double lhs = scale * k(gp.x, c * gp.u);
    const double rn = f.rn.at(s, gp.x);
    const double rhs = f.b.at(s, gp.x) * (rn == 1.0 ? 1.0 : std::pow(rn, inv_alpha)) *
                           k(f.space.apply(s, gp.x), gp.u + f.g.at(s, gp.x)) +
                       f.j.at(s, gp.x);
    acc.add(std::fabs(lhs - rhs), {gp.x.fiber, gp.x.coord, gp.u, c, nan, 0.0, ""});
  }
  std::ostringstream desc;
  desc << grid.size() << " grid points, c = " << c;
  return acc.finish("generation relation: " + k.name(), desc.str(), tol);
}

// ---------------------------------------------------------------------------
// Quadrature

struct QuadConfig {
  double window = 20.0;          // bulk half-width; widened to cover every singularity
  std::size_t cells = 400;       // nodes per bulk segment
  std::size_t tail_cells = 400;  // nodes per tail [U, R]
  double far = 1e6;              // R; beyond it a fitted power law is integrated
  double grading = 8.0;          // clustering exponent p next to singular points
  double graded_span = 1.0;      // length of the graded piece beside each singular point
  double refine_tol = 1e-3;      // refinement ratio above which a warning is issued
};

/// One node of a positive-weight rule. The node sits at u = base - shift + delta,
/// anchored at the singularity `base` of G(x, . + shift); evaluating G at
/// u + shift as base + delta keeps full precision next to the singular point.
struct QuadNode {
  std::size_t atom = 0;
  double base = 0.0;
  double shift = 0.0;
  double delta = 0.0;
  double weight = 0.0;  // mu(atom) du

  double u() const { return (base - shift) + delta; }
  double arg(double offset) const { return offset == shift ? base + delta : ((base - shift) + offset) + delta; }
};

struct QuadRule {
  std::vector<QuadNode> nodes;
  std::size_t bulk = 0;  // nodes[0, bulk) lie in [-window, window]
  double window = 0.0;
  double far = 0.0;
};

namespace detail {

inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct Anchor {
  double base;
  double shift;
  bool singular;
  double at() const { return base - shift; }
};

/// Sorted singular points of u -> G(x, u + o) for every o, plus the window ends.
inline std::vector<Anchor> anchors(const Kernel& k, const std::vector<double>& offsets, double window) {
  std::vector<Anchor> out{{-window, 0.0, false}, {window, 0.0, false}};
  for (double s : k.breakpoints())
    for (double o : offsets)
      if (std::fabs(s - o) < window) out.push_back({s, o, true});
  std::sort(out.begin(), out.end(), [](const Anchor& a, const Anchor& b) {
    return a.at() < b.at() || (a.at() == b.at() && a.singular && !b.singular);
  });
  out.erase(std::unique(out.begin(), out.end(), [](const Anchor& a, const Anchor& b) { return a.at() == b.at(); }),
            out.end());
  return out;
}

inline double covering_window(const Kernel& k, const std::vector<double>& offsets, double window) {
  double w = window;
  for (double s : k.breakpoints())
    for (double o : offsets) w = std::max(w, 2.0 * std::fabs(s - o) + 1.0);
  return w;
}

}  // namespace detail

/// Positive-weight rule for integrands |sum_i a_i G(x, u + o_i)|^alpha. Beside
/// every singular point a piece of length d <= graded_span gets midpoint nodes under
/// u = a + d s^p, which absorbs integrable power singularities; further out the
/// nodes are midpoints in ln|u - a|. Segments without singular ends get uniform
/// midpoints, and the tails [U, R] midpoints in ln|u|. Every piece has `cells` nodes,
/// each weighted by the exact length of its cell.
inline QuadRule quadrature_rule(const Kernel& k, const std::vector<double>& offsets, const QuadConfig& q,
                                std::size_t cells, std::size_t tail_cells) {
  if (cells == 0 || tail_cells == 0) throw InvalidArgument("quadrature: node counts must be >= 1");
  if (!(q.far > 0.0) || !(q.grading >= 1.0) || !(q.graded_span > 0.0))
    throw InvalidArgument("quadrature: need far > 0, grading >= 1 and graded_span > 0");
  QuadRule rule;
  rule.window = detail::covering_window(k, offsets, q.window);
  rule.far = std::max(q.far, 4.0 * rule.window);
  const auto anchors = detail::anchors(k, offsets, rule.window);
  const double p = q.grading;
  const double n = static_cast<double>(cells);

  // Nodes at signed distance dir * r from anchor a, r in (0, d] graded, then r in [d, reach] in ln r.
  auto singular_side = [&](std::size_t ai, double mu, const detail::Anchor& a, double dir, double d, double reach) {
    for (std::size_t i = 0; i < cells; ++i) {
      const double s0 = static_cast<double>(i) / n, s1 = static_cast<double>(i + 1) / n;
      const double r = d * std::pow(0.5 * (s0 + s1), p);
      rule.nodes.push_back({ai, a.base, a.shift, dir * r, mu * d * (std::pow(s1, p) - std::pow(s0, p))});
    }
    if (reach <= d) return;
    const double h = std::log(reach / d) / n;
    for (std::size_t i = 0; i < cells; ++i) {
      const double r = d * std::exp((static_cast<double>(i) + 0.5) * h);
      const double r0 = d * std::exp(static_cast<double>(i) * h);
      const double r1 = i + 1 == cells ? reach : d * std::exp(static_cast<double>(i + 1) * h);
      rule.nodes.push_back({ai, a.base, a.shift, dir * r, mu * (r1 - r0)});
    }
  };

  for (std::size_t ai = 0; ai < k.atoms().size(); ++ai) {
    const double mu = k.atoms()[ai].weight;
    for (std::size_t seg = 0; seg + 1 < anchors.size(); ++seg) {
      const auto& lo = anchors[seg];
      const auto& hi = anchors[seg + 1];
      const double len = hi.at() - lo.at();
      if (lo.singular && hi.singular) {
        const double d = std::min(q.graded_span, 0.25 * len);
        singular_side(ai, mu, lo, 1.0, d, 0.5 * len);
        singular_side(ai, mu, hi, -1.0, d, 0.5 * len);
      } else if (lo.singular) {
        singular_side(ai, mu, lo, 1.0, std::min(q.graded_span, 0.5 * len), len);
      } else if (hi.singular) {
        singular_side(ai, mu, hi, -1.0, std::min(q.graded_span, 0.5 * len), len);
      } else {
        for (std::size_t i = 0; i < cells; ++i)
          rule.nodes.push_back({ai, lo.base, lo.shift, (static_cast<double>(i) + 0.5) * len / n, mu * len / n});
      }
    }
  }
  rule.bulk = rule.nodes.size();

  const double span = std::log(rule.far / rule.window);
  const double h = span / static_cast<double>(tail_cells);
  for (std::size_t ai = 0; ai < k.atoms().size(); ++ai) {
    const double mu = k.atoms()[ai].weight;
    for (std::size_t i = 0; i < tail_cells; ++i) {
      const double u = rule.window * std::exp((static_cast<double>(i) + 0.5) * h);
      const double w = mu * rule.window * (std::exp(static_cast<double>(i + 1) * h) - std::exp(static_cast<double>(i) * h));
      rule.nodes.push_back({ai, 0.0, 0.0, u, w});
      rule.nodes.push_back({ai, 0.0, 0.0, -u, w});
    }
  }
  return rule;
}

/// sum_i a_i G(x, u + o_i): the time increments combined with their coefficients.
struct Combination {
  std::vector<std::pair<double, double>> terms;  // (offset, coefficient)

  /// sum_k theta_k (G(x, u + t_k + shift) - G(x, u + shift)).
  static Combination increments(const std::vector<double>& thetas, const std::vector<double>& ts, double shift = 0.0) {
    if (thetas.size() != ts.size() || thetas.empty())
      throw InvalidArgument("characteristic exponent: need matching, non-empty thetas and ts");
    Combination c;
    double total = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!std::isfinite(thetas[i]) || !std::isfinite(ts[i]))
        throw InvalidArgument("characteristic exponent: non-finite theta or t");
      c.add(ts[i] + shift, thetas[i]);
      total += thetas[i];
    }
    c.add(shift, -total);
    return c;
  }

  void add(double offset, double coef) {
    for (auto& t : terms)
      if (t.first == offset) {
        t.second += coef;
        return;
      }
    terms.emplace_back(offset, coef);
  }

  std::vector<double> offsets() const {
    std::vector<double> o;
    for (const auto& t : terms) o.push_back(t.first);
    return o;
  }

  double at(const Kernel& k, const Point& x, const QuadNode& node) const {
    double s = 0.0;
    for (const auto& [o, a] : terms)
      if (a != 0.0) s += a * k(x, node.arg(o));
    return s;
  }
  double at(const Kernel& k, const Point& x, double u) const {
    double s = 0.0;
    for (const auto& [o, a] : terms)
      if (a != 0.0) s += a * k(x, u + o);
    return s;
  }
};

/// Beyond R the integrand is taken as f(R) (R/u)^p with p fitted from f(R/2), f(R):
/// int_R^inf = f(R) R / (p - 1). Returns NaN when the fitted tail is not integrable.
inline double far_tail(const Kernel& k, const Combination& comb, double R) {
  double total = 0.0;
  for (const auto& a : k.atoms()) {
    for (double sign : {1.0, -1.0}) {
      const double f1 = std::pow(std::fabs(comb.at(k, a.x, sign * R)), k.alpha());
      const double f0 = std::pow(std::fabs(comb.at(k, a.x, sign * 0.5 * R)), k.alpha());
      if (!std::isfinite(f0) || !std::isfinite(f1)) return std::numeric_limits<double>::quiet_NaN();
      if (f1 == 0.0) continue;
      if (f0 == 0.0) continue;
      const double p = std::log2(f0 / f1);
      if (!(p > 1.0 + 1e-6)) return std::numeric_limits<double>::quiet_NaN();
      total += a.weight * f1 * R / (p - 1.0);
    }
  }
  return total;
}

struct ExponentResult {
  double value = 0.0;         // I
  double coarse = 0.0;        // I with half the nodes
  double refinement = 0.0;    // |I - coarse| / I
  double far_tail = 0.0;      // contribution beyond R
  double window = 0.0;        // bulk half-width actually used
  double zero_fraction = 0.0; // bulk nodes where every G_t vanishes
  std::size_t nodes = 0;
};

namespace detail {

inline double rule_sum(const Kernel& k, const Combination& comb, const QuadRule& rule) {
  std::vector<double> terms(rule.nodes.size());
  const double alpha = k.alpha();
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto& n = rule.nodes[i];
    const double v = comb.at(k, k.atoms()[n.atom].x, n);
    terms[i] = v == 0.0 ? 0.0 : n.weight * std::pow(std::fabs(v), alpha);
  }
  return pairwise_sum(terms);
}

inline void require_integrable(const Kernel& k, const Combination& comb, const std::vector<double>& ts, double shift,
                               double R) {
  if (std::isfinite(far_tail(k, comb, R))) return;
  for (double t : ts) {
    if (!std::isfinite(far_tail(k, Combination::increments({1.0}, {t}, shift), R))) {
      std::ostringstream msg;
      msg << "kernel '" << k.name() << "': |G_t|^alpha is not integrable at infinity for t = " << t;
      throw IntegrabilityError(msg.str());
    }
  }
  throw IntegrabilityError("kernel '" + k.name() + "': integrand not integrable at infinity");
}

}  // namespace detail

/// I(theta, ts) with its refinement ratio and diagnostics. `shift` moves every
/// time by s: the integrand becomes sum_k theta_k G_{t_k}(x, u + s).
inline ExponentResult charfun_exponent_detail(const Kernel& k, const std::vector<double>& thetas,
                                              const std::vector<double>& ts, const QuadConfig& q = {},
                                              double shift = 0.0) {
  const Combination comb = Combination::increments(thetas, ts, shift);
  const auto offsets = comb.offsets();
  const QuadRule fine = quadrature_rule(k, offsets, q, q.cells, q.tail_cells);
  const QuadRule coarse =
      quadrature_rule(k, offsets, q, std::max<std::size_t>(1, q.cells / 2), std::max<std::size_t>(1, q.tail_cells / 2));
  detail::require_integrable(k, comb, ts, shift, fine.far);

  ExponentResult r;
  r.window = fine.window;
  r.nodes = fine.nodes.size();
  r.far_tail = far_tail(k, comb, fine.far);
  r.value = detail::rule_sum(k, comb, fine) + r.far_tail;
  r.coarse = detail::rule_sum(k, comb, coarse) + r.far_tail;
  r.refinement = r.value == 0.0 ? (r.coarse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                : std::fabs(r.value - r.coarse) / r.value;

  std::size_t zeros = 0;
  for (std::size_t i = 0; i < fine.bulk; ++i) {
    const auto& n = fine.nodes[i];
    bool all_zero = true;
    for (double t : ts) {
      const Point& x = k.atoms()[n.atom].x;
      if (k(x, n.arg(t + shift)) - k(x, n.arg(shift)) != 0.0) {
        all_zero = false;
        break;
      }
    }
    zeros += all_zero ? 1 : 0;
  }
  r.zero_fraction = fine.bulk == 0 ? 0.0 : static_cast<double>(zeros) / static_cast<double>(fine.bulk);
  return r;
}

inline double charfun_exponent(const Kernel& k, const std::vector<double>& thetas, const std::vector<double>& ts,
                               const QuadConfig& q = {}) {
  return charfun_exponent_detail(k, thetas, ts, q).value;
}

struct ExponentRow {
  double c = 1.0;
  double I_scaled = 0.0;  // c^{alpha H} I(theta, ts)
  double I_direct = 0.0;  // I(theta, c ts)
  double rel_discrepancy = 0.0;
};

struct SelfSimilarityReport {
  VerificationReport report;
  std::vector<ExponentRow> table;
};

namespace detail {

inline double relative_gap(double direct, double scaled) {
  if (direct == 0.0 && scaled == 0.0) return 0.0;
  if (scaled == 0.0) return std::numeric_limits<double>::infinity();
  return std::fabs(direct / scaled - 1.0);
}

}  // namespace detail

/// |I(theta, c ts) / (c^{alpha H} I(theta, ts)) - 1| for every c.
inline SelfSimilarityReport check_self_similarity(const Kernel& k, const std::vector<double>& cs,
                                                  const std::vector<double>& thetas, const std::vector<double>& ts,
                                                  const QuadConfig& q = {}, double tol = 1e-3) {
  if (cs.empty()) throw InvalidArgument("check_self_similarity: no c values");
  const ExponentResult base = charfun_exponent_detail(k, thetas, ts, q);
  const double aH = k.alpha() * k.H();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SelfSimilarityReport out;
  ResidualAccumulator acc;
  double worst_ref = base.refinement;
  double worst_zero = base.zero_fraction;
  bool degenerate = false;
  for (double c : cs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("check_self_similarity: c must be positive");
    std::vector<double> scaled_ts(ts);
    for (double& t : scaled_ts) t *= c;
    const ExponentResult direct = charfun_exponent_detail(k, thetas, scaled_ts, q);
    worst_ref = std::max(worst_ref, direct.refinement);
    worst_zero = std::max(worst_zero, direct.zero_fraction);
    ExponentRow row{c, std::pow(c, aH) * base.value, direct.value, 0.0};
    row.rel_discrepancy = detail::relative_gap(row.I_direct, row.I_scaled);
    degenerate = degenerate || (row.I_direct == 0.0 && row.I_scaled == 0.0);
    acc.add(row.rel_discrepancy, {0, nan, nan, c, nan, 0.0, ""});
    out.table.push_back(row);
  }
  std::ostringstream desc;
  desc << cs.size() << " values of c, " << ts.size() << " time points, " << q.cells << " nodes per segment";
  out.report = acc.finish("self-similarity: " + k.name(), desc.str(), tol);
  out.report.diagnostics.emplace_back("I_base", base.value);
  out.report.diagnostics.emplace_back("refinement_max", worst_ref);
  out.report.diagnostics.emplace_back("support_zero_fraction_max", worst_zero);
  if (degenerate) out.report.warnings.push_back("degenerate support: I vanishes on both sides");
  if (worst_ref > q.refine_tol) out.report.warnings.push_back("quadrature refinement ratio above refine_tol");
  return out;
}

/// Relative gap between I over (ts) and I over the same increments started at `shift`.
inline VerificationReport check_stationary_increments(const Kernel& k, double shift, const std::vector<double>& thetas,
                                                      const std::vector<double>& ts, const QuadConfig& q = {},
                                                      double tol = 1e-3) {
  if (!std::isfinite(shift)) throw InvalidArgument("check_stationary_increments: non-finite shift");
  const ExponentResult a = charfun_exponent_detail(k, thetas, ts, q);
  const ExponentResult b = charfun_exponent_detail(k, thetas, ts, q, shift);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ResidualAccumulator acc;
  acc.add(detail::relative_gap(b.value, a.value), {0, nan, shift, nan, nan, 0.0, "shifted vs unshifted"});
  std::ostringstream desc;
  desc << "shift " << shift << ", " << ts.size() << " time points";
  auto r = acc.finish("stationary increments: " + k.name(), desc.str(), tol);
  r.diagnostics.emplace_back("I_unshifted", a.value);
  r.diagnostics.emplace_back("I_shifted", b.value);
  r.diagnostics.emplace_back("refinement_max", std::max(a.refinement, b.refinement));
  r.diagnostics.emplace_back("support_zero_fraction", a.zero_fraction);
  if (a.value == 0.0 && b.value == 0.0) r.warnings.push_back("degenerate support: I vanishes on both sides");
  return r;
}

}  // namespace ssmma
