// Command-line front end: generate, fluxscan, decompose, regularize, connect, analyze.
// Exit codes: 0 pass, 1 quantitative failure, 2 input error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "intflux/error.hpp"
#include "intflux/io.hpp"

using namespace intflux;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  int quadrature_n = 32;
  std::optional<double> tol;
  Json cfg = Json::object();
};

// command-line value if given, else the config entry, else the default
template <class T>
T pick(const CLI::App& app, const char* flag, const T& cli_value, const Json& cfg, const char* key) {
  if (app.count(flag) > 0 || !cfg.contains(key)) return cli_value;
  try {
    return cfg[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config entry '") + key + "': " + e.what());
  }
}

struct Ctx {
  Globals g;
  const CLI::App* root = nullptr;

  std::uint64_t seed() const { return pick<std::uint64_t>(*root, "--seed", g.seed, g.cfg, "seed"); }
  QuadratureSpec quad() const {
    const int n = pick<int>(*root, "--quadrature-n", g.quadrature_n, g.cfg, "quadrature_n");
    if (n < 1) throw InvalidInput("--quadrature-n must be positive");
    return {n};
  }
  double tol(double fallback) const {
    double t = fallback;
    if (g.cfg.contains("tol")) t = g.cfg["tol"].get<double>();
    if (g.tol) t = *g.tol;
    if (!(t > 0)) throw InvalidInput("tolerances must be positive");
    return t;
  }
  fs::path out() const {
    const fs::path p = pick<std::string>(*root, "--out", g.out, g.cfg, "out");
    fs::create_directories(p);
    return p;
  }
};

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

int cmd_generate(const Ctx& c, const std::string& spec_path, int grid) {
  const Json spec = [&] {
    try {
      return Json::parse(read_text(spec_path));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(spec_path + ": " + e.what());
    }
  }();
  const auto field = field_from_json(spec, fs::path(spec_path).parent_path());
  const fs::path out = c.out();
  save_field(*field, out / "field.json");
  if (grid > 0) {
    if (grid < 2) throw InvalidInput("--grid needs at least 2 nodes");
    const double h = 2.0 / (grid - 1);
    save_field(sample_field(*field, {-1, -1, -1}, h, {grid, grid, grid}), out / "field_sampled.json");
  }
  std::cout << "wrote " << (out / "field.json").string() << "\n";
  return 0;
}

int cmd_fluxscan(const Ctx& c, const std::string& field_path, int centers, int radii) {
  const auto field = load_field(field_path);
  const double tol = c.tol(1e-6);
  const auto scan = integer_flux_scan(*field, centers, radii, tol, c.seed(), c.quad());
  const fs::path out = c.out();
  write_text(out / "scan.csv", scan_csv(scan));
  write_json(out / "scan_summary.json", scan_summary(scan));
  std::cout << "violations " << scan.violations << " of " << scan.entries.size() << " (skipped " << scan.skipped
            << ", max deviation " << fmt(scan.max_deviation) << ")\n";
  return scan.violations == 0 ? 0 : 1;
}

int cmd_decompose(const Ctx& c, const std::string& field_path, double eps, const std::vector<double>& sweep) {
  const auto field = load_field(field_path);
  TranslationOptions opt;
  opt.int_tol = c.tol(1e-6);
  const fs::path out = c.out();
  int code = 0;
  try {
    const auto choice = select_translation(*field, eps, c.seed(), c.quad(), opt);
    Json j = decomposition_to_json(choice.decomposition);
    j["seed"] = c.seed();
    j["score"] = choice.score.score;
    write_json(out / "decomposition.json", j);
    std::cout << "eps " << fmt(eps) << ": " << choice.decomposition.n_bad() << " bad of " << choice.decomposition.lattice.size()
              << " cubes\n";
  } catch (const NoValidTranslation& e) {
    std::cerr << "no valid translation: " << e.what() << "\n";
    code = 1;
  }
  if (!sweep.empty()) {
    const auto table = bad_volume_sweep(*field, sweep, c.seed(), c.quad(), opt);
    write_text(out / "sweep.csv", sweep_csv(table));
    if (table.slope) std::cout << "bad-volume slope " << fmt(*table.slope) << "\n";
  }
  return code;
}

int cmd_regularize(const Ctx& c, const std::string& field_path, double eps, const RegularizeOptions& ropt) {
  const auto field = load_field(field_path);
  TranslationOptions topt;
  topt.int_tol = c.tol(1e-6);
  const auto quad = c.quad();
  const fs::path out = c.out();
  try {
    const auto choice = select_translation(*field, eps, c.seed(), quad, topt);
    RegularizeOptions opt = ropt;
    opt.int_tol = topt.int_tol;
    const auto reg = assemble(*field, choice.decomposition, opt);
    export_regularized(reg, out, "regularized");
    Json summary{{"seed", c.seed()},
                 {"eps", eps},
                 {"a", Json::array({choice.a.x, choice.a.y, choice.a.z})},
                 {"delta", reg.delta},
                 {"singularities", singularities_to_json(reg.singularities)},
                 {"exterior_residual", reg.exterior_residual},
                 {"mollified", reg.mollified}};
    try {
      summary["l1_error"] = approximation_error(*field, reg, 1.0);
    } catch (const InvalidInput& e) {
      summary["l1_error"] = nullptr;
      std::cerr << "approximation error not computed: " << e.what() << "\n";
    }
    write_json(out / "regularize_summary.json", summary);
    std::cout << "singularities " << reg.singularities.size() << ", L1 error "
              << (summary["l1_error"].is_null() ? std::string("n/a") : fmt(summary["l1_error"].get<double>())) << "\n";
    return 0;
  } catch (const NoValidTranslation& e) {
    std::cerr << "no valid translation: " << e.what() << "\n";
  } catch (const NotExact& e) {
    std::cerr << e.what() << "\n";
  } catch (const SolverError& e) {
    std::cerr << e.what() << " (residual " << fmt(e.residual()) << ")\n";
  } catch (const IllConditionedQuadrature& e) {
    std::cerr << e.what() << "\n";
  }
  return 1;
}

int cmd_connect(const Ctx& c, const std::string& sing_path) {
  Json j;
  try {
    j = Json::parse(read_text(sing_path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(sing_path + ": " + e.what());
  }
  if (j.is_object() && j.contains("singularities")) j = j["singularities"];
  const auto sings = singularities_from_json(j);
  const double tol = c.tol(1e-9);
  const auto greedy = greedy_connection(sings);
  const auto opt = optimal_connection(sings);
  const auto dual = dual_value(sings);
  const auto cert = certify(opt, dual, tol);
  const auto gcert = certify(greedy, dual, tol);
  const fs::path out = c.out();
  write_json(out / "current_optimal.json", current_to_json(opt));
  write_json(out / "current_greedy.json", current_to_json(greedy));
  write_text(out / "current_optimal.csv", current_csv(opt));
  Json cj = certificate_to_json(dual, cert);
  cj["greedy_mass"] = gcert.primal_mass;
  cj["greedy_gap"] = gcert.gap;
  cj["tol"] = tol;
  write_json(out / "certificate.json", cj);
  std::cout << "optimal mass " << fmt(cert.primal_mass) << ", dual " << fmt(cert.dual_value) << ", gap " << fmt(cert.gap)
            << (cert.certified ? " (certified)" : " (not certified)") << "; greedy mass " << fmt(gcert.primal_mass) << "\n";
  return cert.certified ? 0 : 1;
}

int cmd_analyze(const Ctx& c, const std::string& field_path, const std::vector<int>& ks, std::optional<double> p) {
  const auto field = load_field(field_path);
  const QuadratureSpec quad{std::max(c.quad().n_q, 8)};
  std::vector<AsymptoticRow> rows;
  int code = 0;
  if (p) {
    try {
      rows = hoelder_bound_check(*field, *p, ks, quad);
      for (const auto& r : rows)
        if (std::abs(r.pairing) > *r.bound) code = 1;
    } catch (const LpEstimateDivergence& e) {
      std::cerr << e.what() << "\n";
      rows = pairing_growth(*field, ks, quad);
      code = 1;
    }
  } else {
    rows = pairing_growth(*field, ks, quad);
  }
  write_text(c.out() / "asymptotics.csv", asymptotics_csv(rows));
  for (const auto& r : rows) std::cout << "k " << r.k << " pairing " << fmt(r.pairing) << " ratio " << fmt(r.ratio) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integer-flux field toolkit"};
  app.require_subcommand(1);
  Ctx ctx;
  ctx.root = &app;
  app.add_option("--config", ctx.g.config, "JSON config; command-line flags take precedence");
  app.add_option("--seed", ctx.g.seed, "seed for every random choice");
  app.add_option("--out", ctx.g.out, "output directory");
  app.add_option("--quadrature-n", ctx.g.quadrature_n, "Gauss points per face direction");
  double tol_value = 0.0;
  auto* tol_opt = app.add_option("--tol", tol_value, "tolerance of the subcommand's pass/fail check");

  std::string path;
  int grid = 0;
  auto* gen = app.add_subcommand("generate", "validate a field spec and write field files");
  gen->add_option("spec", path, "field spec JSON")->required();
  gen->add_option("--grid", grid, "also write a sampled copy on [-1, 1]^3 with this many nodes per axis");

  int centers = 100, radii = 10;
  auto* scan = app.add_subcommand("fluxscan", "integer flux scan");
  scan->add_option("field", path, "field JSON")->required();
  scan->add_option("--centers", centers);
  scan->add_option("--radii", radii);

  double eps = 0.25;
  std::vector<double> sweep;
  auto* dec = app.add_subcommand("decompose", "cube decomposition and bad-volume sweep");
  dec->add_option("field", path, "field JSON")->required();
  dec->add_option("--eps", eps);
  dec->add_option("--sweep", sweep, "eps values for the bad-volume sweep")->delimiter(',');

  RegularizeOptions ropt;
  auto* reg = app.add_subcommand("regularize", "regularized field with point singularities");
  reg->add_option("field", path, "field JSON")->required();
  reg->add_option("--eps", eps);
  reg->add_option("--n-f", ropt.n_f, "boundary cells per cube face");
  reg->add_option("--m", ropt.m, "extension nodes per cube axis");
  reg->add_option("--grid-per-cube", ropt.grid_per_cube, "output cells per cube side");
  reg->add_option("--delta", ropt.delta, "smoothing width (0 for eps / 8)");

  auto* con = app.add_subcommand("connect", "greedy and optimal connections with a dual certificate");
  con->add_option("singularities", path, "singularity list JSON")->required();

  std::vector<int> ks{1, 2, 4, 8, 16};
  double p_value = 0.0;
  auto* ana = app.add_subcommand("analyze", "log test function pairings");
  ana->add_option("field", path, "field JSON")->required();
  ana->add_option("--k", ks, "k values")->delimiter(',');
  auto* p_opt = ana->add_option("--p", p_value, "also check the Hoelder bound at this exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!ctx.g.config.empty()) {
      try {
        ctx.g.cfg = Json::parse(read_text(ctx.g.config));
      } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(ctx.g.config + ": " + e.what());
      }
      if (!ctx.g.cfg.is_object()) throw InvalidInput("config must be a JSON object");
    }
    if (tol_opt->count() > 0) ctx.g.tol = tol_value;
    const Json& cfg = ctx.g.cfg;
    if (*gen) return cmd_generate(ctx, path, pick<int>(*gen, "--grid", grid, cfg, "grid"));
    if (*scan)
      return cmd_fluxscan(ctx, path, pick<int>(*scan, "--centers", centers, cfg, "centers"),
                          pick<int>(*scan, "--radii", radii, cfg, "radii"));
    if (*dec)
      return cmd_decompose(ctx, path, pick<double>(*dec, "--eps", eps, cfg, "eps"),
                           pick<std::vector<double>>(*dec, "--sweep", sweep, cfg, "sweep"));
    if (*reg) {
      ropt.n_f = pick<int>(*reg, "--n-f", ropt.n_f, cfg, "n_f");
      ropt.m = pick<int>(*reg, "--m", ropt.m, cfg, "m");
      ropt.grid_per_cube = pick<int>(*reg, "--grid-per-cube", ropt.grid_per_cube, cfg, "grid_per_cube");
      ropt.delta = pick<double>(*reg, "--delta", ropt.delta, cfg, "delta");
      return cmd_regularize(ctx, path, pick<double>(*reg, "--eps", eps, cfg, "eps"), ropt);
    }
    if (*con) return cmd_connect(ctx, path);
    if (*ana) {
      std::optional<double> p;
      if (p_opt->count() > 0)
        p = p_value;
      else if (cfg.contains("p"))
        p = cfg["p"].get<double>();
      return cmd_analyze(ctx, path, pick<std::vector<int>>(*ana, "--k", ks, cfg, "k"), p);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const CertificateInvalid& e) {
    std::cerr << "certificate invalid: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 2;
}
