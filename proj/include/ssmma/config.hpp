#pragma once

// INI configs for the command-line tool. Numbers and list entries accept
// constant expressions ("exp(2)", "1/1.5"); user functions are expressions over
// the point (see expression.hpp).

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cocycle.hpp"
#include "controls.hpp"
#include "error.hpp"
#include "expression.hpp"
#include "flowspace.hpp"
#include "functional.hpp"
#include "kernel.hpp"
#include "simulate.hpp"

namespace ssmma::config {

using Tree = boost::property_tree::ptree;

/// Defaults shared by every subcommand.
struct Defaults {
  static constexpr double law_tol = 1e-11;
  static constexpr double quad_tol = 1e-3;
  static constexpr double generated_tol = 1e-9;
  static constexpr std::size_t samples = 10000;
  static constexpr double log_c_range = 5.0;
  static constexpr std::uint64_t seed = 1;
  static constexpr std::size_t grid_n = 1000;
  static constexpr std::size_t paths = 10000;
  static constexpr std::size_t sim_cells = 64;
};

inline Tree load(const std::string& path) {
  Tree t;
  try {
    boost::property_tree::read_ini(path, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return t;
}

inline Tree parse(const std::string& text) {
  Tree t;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return t;
}

/// Read-only view of one section with typed accessors.
class Section {
 public:
  Section(const Tree& root, std::string name, std::map<std::string, double> constants)
      : name_(std::move(name)), constants_(std::move(constants)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  const std::string& name() const { return name_; }
  bool present() const { return !tree_.empty(); }
  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }
  const std::map<std::string, double>& constants() const { return constants_; }

  std::string text(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ConfigError("[" + name_ + "] missing key '" + key + "'");
    return *v;
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(key, fallback);
  }

  double number(const std::string& key) const { return eval(key, text(key)); }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw ConfigError("[" + name_ + "] " + key + " must be a count");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback = false) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("[" + name_ + "] " + key + " must be true or false");
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(text(key))) out.push_back(eval(key, item));
    return out;
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? list(key) : fallback;
  }
  std::vector<std::string> words(const std::string& key) const { return split(text(key)); }

  Expression expr(const std::string& key, Binding binding) const {
    try {
      return Expression::parse(text(key), binding, constants_);
    } catch (const InvalidArgument& e) {
      throw ConfigError("[" + name_ + "] " + key + ": " + e.what());
    }
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == ',' && depth == 0) {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  }

  double eval(const std::string& key, const std::string& item) const {
    try {
      return Expression::constant(item, constants_);
    } catch (const InvalidArgument& e) {
      throw ConfigError("[" + name_ + "] " + key + ": " + e.what());
    }
  }

  Tree tree_;
  std::string name_;
  std::map<std::string, double> constants_;
};

/// [constants] entries, usable by name in every other expression.
inline std::map<std::string, double> constants(const Tree& root) {
  std::map<std::string, double> out;
  if (auto sec = root.get_child_optional("constants")) {
    for (const auto& [key, value] : *sec) {
      try {
        out[key] = Expression::constant(value.data(), out);
      } catch (const InvalidArgument& e) {
        throw ConfigError("[constants] " + key + ": " + e.what());
      }
    }
  }
  return out;
}

inline Section section(const Tree& root, const std::string& name) { return Section(root, name, constants(root)); }

// ---------------------------------------------------------------------------
// User functions

namespace detail {

inline ExprEnv env_of(const FlowSpace& space, const Point& p) {
  return {static_cast<double>(p.fiber), p.coord, 0.0, space.has_special_rep() ? space.period(p.fiber) : 0.0};
}

inline int as_sign(double v, const std::string& what) {
  if (v == 1.0) return 1;
  if (v == -1.0) return -1;
  throw InvalidArgument(what + " must take values in {-1, 1}, got " + std::to_string(v));
}

}  // namespace detail

inline PointFunction point_function(const Expression& e, const FlowSpace& space) {
  return [e, space](const Point& p) { return e(detail::env_of(space, p)); };
}

inline SignFunction sign_function(const Expression& e, const FlowSpace& space) {
  return [e, space](const Point& p) { return detail::as_sign(e(detail::env_of(space, p)), "'" + e.text() + "'"); };
}

inline FiberFunction fiber_function(const Expression& e, const FlowSpace& space) {
  return [e, space](std::size_t z) { return e(detail::env_of(space, Point{z, 0.0})); };
}

inline FiberSign fiber_sign(const Expression& e, const FlowSpace& space) {
  return [e, space](std::size_t z) {
    return detail::as_sign(e(detail::env_of(space, Point{z, 0.0})), "'" + e.text() + "'");
  };
}

// ---------------------------------------------------------------------------
// Builders

inline FlowSpace build_flow(const Tree& root) {
  const Section s = section(root, "flow");
  const std::string kind = s.text("kind", "identity");
  std::vector<double> weights = s.list("weights", {});
  std::size_t n = s.count("fibers", 0);
  std::vector<double> periods = s.list("periods", {});
  std::vector<double> roof = s.list("roof", {});
  if (n == 0) n = std::max({std::size_t{1}, weights.size(), periods.size(), roof.size()});
  std::vector<std::string> labels;
  if (s.has("labels")) {
    labels = s.words("labels");
  } else {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  try {
    if (kind == "identity") return FlowSpace::identity(labels, weights);
    if (kind == "dissipative") return FlowSpace::dissipative(labels, weights, s.number("sample_range", 10.0));
    if (kind == "cyclic") return FlowSpace::cyclic(labels, periods, weights);
    if (kind == "special") {
      std::vector<std::size_t> next;
      for (double v : s.list("successor")) {
        if (v < 0.0 || v != std::floor(v)) throw ConfigError("[flow] successor entries must be base indices");
        next.push_back(static_cast<std::size_t>(v));
      }
      return FlowSpace::special(SpecialRep(roof, next), labels, weights);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[flow] ") + e.what());
  }
  throw ConfigError("[flow] unknown kind '" + kind + "'");
}

inline SelfSimilarity build_params(const Section& s) {
  const double alpha = s.number("alpha");
  const bool critical = s.flag("critical", false);
  const double H = critical && !s.has("H") ? 1.0 / alpha : s.number("H");
  SelfSimilarity ss{H, alpha, critical};
  try {
    ss.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("[" + s.name() + "] " + e.what());
  }
  return ss;
}

/// The sign cocycle described by b / b1 in a section: cyclic_cocycle on cyclic
/// flows, a coboundary when b is given, the unit cocycle otherwise.
inline Cocycle build_sign_cocycle(const Section& s, const FlowSpace& space) {
  if (space.kind() == FlowSpace::Kind::Cyclic) {
    SignFunction b = s.has("b") ? sign_function(s.expr("b", Binding::Point), space) : SignFunction([](const Point&) { return 1; });
    FiberSign b1 = s.has("b1") ? fiber_sign(s.expr("b1", Binding::Fiber), space) : FiberSign([](std::size_t) { return 1; });
    return cyclic_cocycle(b1, b, space);
  }
  if (s.has("b1")) throw ConfigError("[" + s.name() + "] b1 applies to cyclic flows only");
  if (s.has("b")) return coboundary_cocycle(sign_function(s.expr("b", Binding::Point), space), space);
  return unit_cocycle(space);
}

inline Cocycle build_rn(const Section& s, const FlowSpace& space) {
  if (!s.has("rn_b")) return radon_nikodym_cocycle(space);
  const Expression e = s.expr("rn_b", Binding::Scalar);
  return nontrivial_rn_version([e](double u) { return e({0.0, 0.0, u, 0.0}); }, s.count("special_fiber", 0), space);
}

inline Cocycle build_cocycle(const Tree& root, const FlowSpace& space) {
  const Section s = section(root, "cocycle");
  const std::string kind = s.text("kind", "unit");
  try {
    if (kind == "unit") return unit_cocycle(space);
    if (kind == "coboundary") return coboundary_cocycle(sign_function(s.expr("b", Binding::Point), space), space);
    if (kind == "cyclic") {
      return cyclic_cocycle(fiber_sign(s.expr("b1", Binding::Fiber), space),
                            sign_function(s.expr("b", Binding::Point), space), space);
    }
    if (kind == "cyclic_misindexed") {
      return controls::misindexed_cyclic_cocycle(fiber_sign(s.expr("b1", Binding::Fiber), space),
                                                 sign_function(s.expr("b", Binding::Point), space), space);
    }
    if (kind == "radon_nikodym") return build_rn(s, space);
    if (kind == "dilation") return dilation_cocycle(space);
    if (kind == "transform") return transform_cocycle_B(build_params(s), build_sign_cocycle(s, space), build_rn(s, space));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[cocycle] ") + e.what());
  } catch (const UnsupportedOperation& e) {
    throw ConfigError(std::string("[cocycle] ") + e.what());
  }
  throw ConfigError("[cocycle] unknown kind '" + kind + "'");
}

inline TwoSemiData build_two_semi_data(const Section& s, const FlowSpace& space) {
  TwoSemiData d;
  if (s.has("b")) d.b = sign_function(s.expr("b", Binding::Point), space);
  if (s.has("b1")) d.b1 = fiber_sign(s.expr("b1", Binding::Fiber), space);
  if (s.has("j1")) d.j1 = fiber_function(s.expr("j1", Binding::Fiber), space);
  return d;
}

/// The functional described by [functional]; `second` receives the special-flow
/// part when kind = decomposition.
inline SemiAdditiveFunctional build_functional(const Tree& root, const FlowSpace& space,
                                               std::optional<SemiAdditiveFunctional>* second = nullptr) {
  const Section s = section(root, "functional");
  const std::string kind = s.text("kind");
  try {
    std::optional<SemiAdditiveFunctional> f;
    if (kind == "one_semi") {
      f = solve_one_semi(space, point_function(s.expr("g", Binding::Point), space));
    } else if (kind == "two_semi") {
      f = solve_two_semi(space, build_params(s), point_function(s.expr("j", Binding::Point), space),
                         build_two_semi_data(s, space));
    } else if (kind == "two_semi_no_indicator") {
      f = controls::cyclic_two_semi_without_indicator(space, s.number("alpha"),
                                                      point_function(s.expr("j", Binding::Point), space),
                                                      build_two_semi_data(s, space));
    } else if (kind == "coboundary") {
      f = coboundary_functional(build_cocycle(root, space), point_function(s.expr("F", Binding::Point), space));
    } else if (kind == "special") {
      f = special_second_component(build_cocycle(root, space), fiber_function(s.expr("F1", Binding::Fiber), space));
    } else if (kind == "decomposition") {
      const Cocycle A = build_cocycle(root, space);
      f = coboundary_functional(A, point_function(s.expr("F", Binding::Point), space));
      if (second == nullptr) throw ConfigError("[functional] decomposition needs a second part");
      *second = special_second_component(A, fiber_function(s.expr("F1", Binding::Fiber), space));
    } else {
      throw ConfigError("[functional] unknown kind '" + kind + "'");
    }
    if (s.flag("transform", false)) {
      if (second != nullptr && second->has_value()) *second = to_related(**second);
      return to_related(*f);
    }
    return *f;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[functional] ") + e.what());
  } catch (const UnsupportedOperation& e) {
    throw ConfigError(std::string("[functional] ") + e.what());
  } catch (const IdempotenceError& e) {
    throw ConfigError(std::string("[functional] ") + e.what());
  }
}

inline QuadConfig build_quad(const Tree& root, QuadConfig q = {}) {
  const Section s = section(root, "quadrature");
  q.window = s.number("window", q.window);
  q.cells = s.count("cells", q.cells);
  q.tail_cells = s.count("tail_cells", q.tail_cells);
  q.far = s.number("far", q.far);
  q.grading = s.number("grading", q.grading);
  q.refine_tol = s.number("refine_tol", q.refine_tol);
  if (q.cells == 0 || q.tail_cells == 0) throw ConfigError("[quadrature] node counts must be >= 1");
  return q;
}

inline Kernel build_kernel(const Tree& root) {
  const Section s = section(root, "kernel");
  const std::string kind = s.text("kind", "lfsm");
  try {
    std::optional<Kernel> k;
    if (kind == "lfsm") {
      k = lfsm_kernel(s.number("H"), s.number("alpha"), s.number("aplus", 1.0), s.number("aminus", 0.0));
    } else if (kind == "expression") {
      std::map<std::string, double> c = s.constants();
      const SelfSimilarity ss = build_params(s);
      c.emplace("H", ss.H);
      c.emplace("alpha", ss.alpha);
      c.emplace("kappa", ss.kappa());
      const Expression G = Expression::parse(s.text("G"), Binding::Kernel, c);
      const std::size_t fibers = s.count("fibers", 1);
      k = Kernel::on_identity("G = " + G.text(),
                              [G](const Point& x, double u) {
                                return G({static_cast<double>(x.fiber), x.coord, u, 0.0});
                              },
                              ss, s.list("breakpoints", {}), fibers, s.list("weights", {}));
    } else {
      throw ConfigError("[kernel] unknown kind '" + kind + "'");
    }
    if (s.has("perturb")) {
      const Expression P = Expression::parse(s.text("perturb"), Binding::Kernel, s.constants());
      auto G = k->profile();
      k = k->with_profile(k->name() + " + " + P.text(), [G, P](const Point& x, double u) {
        return G(x, u) + P({static_cast<double>(x.fiber), x.coord, u, 0.0});
      });
    }
    if (s.has("window")) k = k->with_window(s.number("window"));
    return *k;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[kernel] ") + e.what());
  }
}

}  // namespace ssmma::config
