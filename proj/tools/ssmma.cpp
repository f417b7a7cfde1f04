// ssmma: verification and simulation front end.
//
// Exit codes: 0 every check passed, 1 some check failed, 2 configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ssmma/ssmma.hpp"

namespace {

using namespace ssmma;
namespace fs = std::filesystem;

struct RunConfig {
  std::string subcommand;
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
  std::optional<std::size_t> quad_n;
  bool deterministic = false;
};

struct Outcome {
  std::vector<VerificationReport> reports;
  nlohmann::json extra = nlohmann::json::object();
  bool pass() const {
    for (const auto& r : reports)
      if (!r.pass) return false;
    return true;
  }
};

std::ofstream open_out(const RunConfig& rc, const std::string& name) {
  std::ofstream os(fs::path(rc.out) / name);
  if (!os) throw ConfigError("cannot write " + (fs::path(rc.out) / name).string());
  return os;
}

void write_outputs(const RunConfig& rc, const Outcome& o) {
  nlohmann::json j;
  j["subcommand"] = rc.subcommand;
  j["config"] = fs::path(rc.config).filename().string();
  j["pass"] = o.pass();
  j["reports"] = nlohmann::json::array();
  for (const auto& r : o.reports) j["reports"].push_back(to_json(r));
  for (const auto& [key, value] : o.extra.items()) j[key] = value;
  open_out(rc, "report.json") << j.dump(2) << '\n';

  auto csv = open_out(rc, "report.csv");
  bool header = true;
  for (const auto& r : o.reports) {
    std::ostringstream part;
    write_csv(part, r);
    std::string text = part.str();
    if (!header) text = text.substr(text.find('\n') + 1);
    csv << text;
    header = false;
  }

  auto summary = open_out(rc, "summary.txt");
  for (const auto& r : o.reports) {
    summary << summary_line(r) << '\n';
    std::cout << summary_line(r) << '\n';
    for (const auto& w : r.warnings) {
      summary << "  warning: " << w << '\n';
      std::cout << "  warning: " << w << '\n';
    }
  }
  const std::string verdict = std::string(o.pass() ? "PASS" : "FAIL") + " " + rc.subcommand;
  summary << verdict << '\n';
  std::cout << verdict << '\n';
}

struct LawSettings {
  std::size_t samples;
  std::uint64_t seed;
  double tol;
  LawSampling sampling;
};

LawSettings law_settings(const RunConfig& rc, const config::Tree& tree) {
  const auto s = config::section(tree, "verify");
  LawSettings l{rc.samples.value_or(s.count("samples", config::Defaults::samples)),
                rc.seed.value_or(static_cast<std::uint64_t>(s.count("seed", config::Defaults::seed))),
                rc.tol.value_or(s.number("tol", config::Defaults::law_tol)),
                {}};
  l.sampling.log_c_range = s.number("log_c_range", config::Defaults::log_c_range);
  if (l.samples == 0) throw ConfigError("samples must be >= 1");
  if (!(l.tol > 0.0)) throw ConfigError("tolerances must be > 0");
  return l;
}

Outcome verify_cocycle_cmd(const RunConfig& rc, const config::Tree& tree) {
  const auto law = law_settings(rc, tree);
  const FlowSpace space = config::build_flow(tree);
  const Cocycle coc = config::build_cocycle(tree, space);
  Outcome o;
  LawSampling flow_opts = law.sampling;
  flow_opts.tolerance = 1e-12;
  o.reports.push_back(group_law_check(space, law.samples, law.seed, flow_opts));
  o.reports.push_back(verify_cocycle(coc, law.samples, law.seed, law.tol, law.sampling));
  return o;
}

Outcome verify_functional_cmd(const RunConfig& rc, const config::Tree& tree) {
  const auto law = law_settings(rc, tree);
  const FlowSpace space = config::build_flow(tree);
  std::optional<SemiAdditiveFunctional> second;
  const SemiAdditiveFunctional f = config::build_functional(tree, space, &second);
  Outcome o;
  o.reports.push_back(verify_functional(f, law.samples, law.seed, law.tol, law.sampling));
  if (second) {
    o.reports.push_back(verify_functional(*second, law.samples, law.seed, law.tol, law.sampling));
    o.reports.push_back(decompose_check(f, *second, law.samples, law.seed, law.tol, law.sampling));
  }
  return o;
}

std::vector<Point> solve_points(const config::Section& s, const FlowSpace& space, std::uint64_t seed) {
  std::vector<Point> pts;
  if (s.has("points")) {
    for (const auto& item : s.words("points")) {
      const auto colon = item.find(':');
      try {
        const double fiber = Expression::constant(item.substr(0, colon), s.constants());
        const double coord = colon == std::string::npos ? 0.0 : Expression::constant(item.substr(colon + 1), s.constants());
        if (fiber < 0.0 || fiber != std::floor(fiber)) throw ConfigError("[solve] fiber must be an index");
        pts.push_back({static_cast<std::size_t>(fiber), coord});
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("[solve] points: ") + e.what());
      }
      if (!space.contains(pts.back())) throw ConfigError("[solve] point '" + item + "' is outside the flow space");
    }
    return pts;
  }
  CounterRng rng(seed, 0x736F6C76);
  for (std::size_t i = 0; i < 8; ++i) pts.push_back(space.sample(rng));
  return pts;
}

Outcome solve_functional_cmd(const RunConfig& rc, const config::Tree& tree) {
  const auto law = law_settings(rc, tree);
  const FlowSpace space = config::build_flow(tree);
  const SemiAdditiveFunctional f = config::build_functional(tree, space);
  const auto s = config::section(tree, "solve");
  const std::vector<double> cs = s.list("cs", {0.5, 2.0, std::exp(2.0)});
  const std::vector<Point> pts = solve_points(s, space, law.seed);
  const std::vector<double> c2s = {0.5, 2.0, std::numbers::e};

  auto table = open_out(rc, "table.csv");
  table.precision(17);
  table << "c,fiber,coord,value,residual\n";
  for (double c : cs) {
    const Scale s1 = Scale::of(c);
    for (const auto& p : pts) {
      const double value = f.at(s1, p);
      double residual = 0.0;
      for (double c2 : c2s) {
        const Scale s2 = Scale::of(c2);
        const double lhs = f.at(Scale::from_log(s1.log_c + s2.log_c), p);
        residual = std::max(residual, std::fabs(lhs - law_rhs(f, s1, s2, p)) / (1.0 + std::fabs(lhs)));
      }
      table << c << ',' << p.fiber << ',' << p.coord << ',' << value << ',' << residual << '\n';
    }
  }
  Outcome o;
  o.reports.push_back(verify_functional(f, law.samples, law.seed, law.tol, law.sampling));
  return o;
}

QuadConfig quad_settings(const RunConfig& rc, const config::Tree& tree, QuadConfig base = {}) {
  QuadConfig q = config::build_quad(tree, base);
  if (rc.quad_n) {
    if (*rc.quad_n == 0) throw ConfigError("--quad-n must be >= 1");
    q.cells = *rc.quad_n;
    q.tail_cells = *rc.quad_n;
  }
  return q;
}

Outcome check_kernel_cmd(const RunConfig& rc, const config::Tree& tree) {
  const Kernel k = config::build_kernel(tree);
  const auto s = config::section(tree, "kernel");
  const QuadConfig q = quad_settings(rc, tree);
  const std::vector<double> cs = s.list("cs", {0.5, 2.0, 4.0});
  const std::vector<double> thetas = s.list("thetas", {1.0});
  const std::vector<double> ts = s.list("ts", {1.0});
  const double ss_tol = rc.tol.value_or(s.number("ss_tol", config::Defaults::quad_tol));
  const double gen_tol = s.number("generated_tol", config::Defaults::generated_tol);
  if (!(ss_tol > 0.0) || !(gen_tol > 0.0)) throw ConfigError("tolerances must be > 0");

  Outcome o;
  const auto grid = uniform_grid(k, s.count("grid_n", config::Defaults::grid_n), s.number("grid_half_width", 10.0));
  for (double c : cs) o.reports.push_back(generated_residual(k, c, grid, gen_tol));
  const auto ss = check_self_similarity(k, cs, thetas, ts, q, ss_tol);
  o.reports.push_back(ss.report);
  o.reports.push_back(check_stationary_increments(k, s.number("shift", 0.7), thetas, ts, q, ss_tol));

  auto table = open_out(rc, "table.csv");
  table.precision(17);
  table << "c,I_scaled,I_direct,rel_discrepancy\n";
  for (const auto& row : ss.table)
    table << row.c << ',' << row.I_scaled << ',' << row.I_direct << ',' << row.rel_discrepancy << '\n';
  return o;
}

std::uint64_t fnv1a(const PathMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : m.values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

Outcome simulate_cmd(const RunConfig& rc, const config::Tree& tree) {
  const Kernel k = config::build_kernel(tree);
  const auto s = config::section(tree, "simulate");
  const QuadConfig oracle = config::build_quad(tree);
  QuadConfig grid = oracle;
  grid.cells = s.count("cells", config::Defaults::sim_cells);
  grid.tail_cells = s.count("tail_cells", grid.cells);
  grid.window = s.number("window", oracle.window);
  if (rc.quad_n) grid.cells = grid.tail_cells = *rc.quad_n;
  if (grid.cells == 0) throw ConfigError("[simulate] cells must be >= 1");

  const std::size_t paths = rc.samples.value_or(s.count("paths", config::Defaults::paths));
  const std::uint64_t seed = rc.seed.value_or(static_cast<std::uint64_t>(s.count("seed", config::Defaults::seed)));
  SimConfig cfg = make_sim_config(k, s.list("ts", {1.0}), paths, seed, grid);
  cfg.threads = s.count("threads", 1);
  cfg.deterministic = rc.deterministic || s.flag("deterministic", false);
  const std::vector<double> thetas = s.list("thetas", {0.5, 1.0, 2.0});

  const PathMatrix m = simulate_paths(k, cfg);
  if (s.flag("write_paths", true)) {
    auto os = open_out(rc, "paths.csv");
    m.write_csv(os);
  }

  Outcome o;
  o.reports.push_back(charfun_mc_check(k, m, thetas, oracle));
  if (s.has("selfsim_c")) o.reports.push_back(selfsim_mc_check(k, cfg, s.number("selfsim_c"), thetas));
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(m)));
  o.extra["paths_fnv1a"] = hash;
  o.extra["paths"] = paths;
  o.extra["cells"] = cfg.cells.size();
  std::cout << "paths " << paths << ", cells " << cfg.cells.size() << ", fnv1a " << hash << '\n';
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification and simulation for self-similar stable mixed moving averages"};
  app.require_subcommand(1, 1);
  RunConfig rc;

  struct Sub {
    const char* name;
    const char* help;
    Outcome (*run)(const RunConfig&, const config::Tree&);
  };
  const Sub subs[] = {
      {"verify-cocycle", "check the cocycle law of a configured cocycle", verify_cocycle_cmd},
      {"verify-functional", "check the law of a configured semi-additive functional", verify_functional_cmd},
      {"solve-functional", "tabulate a closed-form semi-additive functional with its law residual",
       solve_functional_cmd},
      {"check-kernel", "generation relation, self-similarity and stationary increments of a kernel",
       check_kernel_cmd},
      {"simulate", "simulate paths and validate their characteristic function", simulate_cmd},
  };
  std::vector<CLI::App*> apps;
  for (const auto& sub : subs) {
    CLI::App* a = app.add_subcommand(sub.name, sub.help);
    a->add_option("--config", rc.config, "config file")->required()->check(CLI::ExistingFile);
    a->add_option("--out", rc.out, "output directory")->capture_default_str();
    a->add_option("--seed", rc.seed, "random seed");
    a->add_option("--samples", rc.samples, "law samples, or paths for simulate");
    a->add_option("--tol", rc.tol, "tolerance override");
    a->add_option("--quad-n", rc.quad_n, "quadrature nodes per segment");
    a->add_flag("--deterministic", rc.deterministic, "force serial evaluation");
    apps.push_back(a);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < apps.size(); ++i) {
    if (!apps[i]->parsed()) continue;
    rc.subcommand = subs[i].name;
    try {
      if (rc.tol && !(*rc.tol > 0.0)) throw ConfigError("--tol must be > 0");
      const config::Tree tree = config::load(rc.config);
      fs::create_directories(rc.out);
      const Outcome o = subs[i].run(rc, tree);
      write_outputs(rc, o);
      return o.pass() ? 0 : 1;
    } catch (const std::exception& e) {
      std::cerr << "ssmma " << rc.subcommand << ": " << e.what() << '\n';
      return 2;
    }
  }
  return 2;
}
