// SPDX-License-Identifier: Apache-2.0
// Command-line front end: map inspection, Green-function batches, grid
// measures, periodic-orbit enumeration, correlation runs, slice rendering,
// and the acceptance battery.
//
// Exit codes: 0 success, 2 usage or input error, 3 numeric failure,
// 4 acceptance failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "henonlab/homogeneous.hpp"
#include "henonlab/verify.hpp"

using namespace henonlab;
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  unsigned threads = 0;  // 0: hardware
  std::uint64_t seed = 20260808;
  std::string out_dir = ".";
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json doc;
  in >> doc;
  if (!doc.is_object()) throw std::runtime_error("config must be a JSON object");
  return doc;
}

/// Hash of the numerical run configuration. Execution parameters (threads,
/// output paths) are excluded so reruns with different parallelism produce
/// byte-identical files.
std::string config_hash(const nlohmann::json& effective, std::uint64_t seed) {
  nlohmann::json h = effective;
  h["seed"] = seed;
  return hash_hex(fnv1a64(h.dump()));
}

HenonMap load_map(const std::string& map_path, const nlohmann::json& cfg) {
  if (!map_path.empty()) return map_from_file(map_path);
  if (cfg.contains("map")) {
    if (cfg["map"].is_string()) return map_from_file(cfg["map"].get<std::string>());
    return map_from_json(cfg["map"]);
  }
  throw std::runtime_error("no map given: pass --map FILE or a \"map\" config entry");
}

std::vector<C2> read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open points file " + path);
  std::vector<C2> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // allow a header row
    if (line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) continue;
    std::istringstream ss(line);
    double v[4] = {0, 0, 0, 0};
    char comma;
    ss >> v[0];
    for (int k = 1; k < 4; ++k) ss >> comma >> v[k];
    if (!ss.fail()) pts.push_back({C(v[0], v[1]), C(v[2], v[3])});
  }
  if (pts.empty()) throw std::runtime_error(path + ": no points parsed");
  return pts;
}

fs::path out_file(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

int cmd_info(const GlobalOptions& g, const std::string& map_path) {
  nlohmann::json cfg = load_config(g.config_path);
  HenonMap map = load_map(map_path, cfg);
  ProductMap F = build_product(map);
  RegularityReport rep = check_regularity(F);
  std::printf("factors:           %zu\n", map.factors().size());
  std::printf("degree d+ = d-:    %d\n", map.degree());
  std::printf("jacobian det:      %.17g + %.17gi\n", map.jacobian_det().real(),
              map.jacobian_det().imag());
  std::printf("escape radius R+:  %.17g\n", escape_radius(map));
  std::printf("escape radius R-:  %.17g\n", escape_radius_backward(map));
  std::printf("I+ (base):         %s\n", indeterminacy(map, Sign::Plus).render().c_str());
  std::printf("I- (base):         %s\n", indeterminacy(map, Sign::Minus).render().c_str());
  std::printf("I+^F:              %s\n", rep.i_plus.c_str());
  std::printf("I-^F:              %s\n", rep.i_minus.c_str());
  std::printf("I+^F cap I-^F:     %s\n", rep.indeterminacy_disjoint ? "empty" : "NONEMPTY");
  std::printf("I+^F cap diagonal: %s\n", rep.plus_misses_diagonal ? "empty" : "NONEMPTY");
  std::printf("I-^F cap diagonal: %s\n", rep.minus_misses_diagonal ? "empty" : "NONEMPTY");
  std::printf("F regular:         %s\n", rep.regular() ? "yes" : "no");
  return 0;
}

int cmd_green(const GlobalOptions& g, const std::string& map_path, const std::string& points_path,
              int slice_res, double box_half, double im_x, double im_y, int n_max, int tail,
              double radius) {
  nlohmann::json cfg = load_config(g.config_path);
  HenonMap map = load_map(map_path, cfg);
  GreenConfig gc;
  gc.n_max = n_max;
  gc.tail_refinements = tail;
  gc.escape_radius = radius;
  std::vector<C2> pts = points_path.empty()
                            ? slice_points(-box_half, box_half, slice_res, im_x, im_y)
                            : read_points_csv(points_path);
  nlohmann::json eff{{"cmd", "green"},   {"map", map_to_json(map)}, {"n_max", n_max},
                     {"tail", tail},     {"radius", radius},        {"points", points_path},
                     {"res", slice_res}, {"box", box_half},         {"im", {im_x, im_y}}};
  ThreadPool pool(g.threads);
  write_green_csv(map, pts, gc, out_file(g, "green.csv").string(), config_hash(eff, g.seed),
                  pool);
  std::printf("wrote %s (%zu points)\n", out_file(g, "green.csv").string().c_str(), pts.size());
  return 0;
}

int cmd_measure(const GlobalOptions& g, const std::string& map_path, int res, double box_half,
                int n) {
  nlohmann::json cfg = load_config(g.config_path);
  HenonMap map = load_map(map_path, cfg);
  GridSpec grid;
  for (int k = 0; k < 4; ++k) {
    grid.lo[k] = -box_half;
    grid.hi[k] = box_half;
    grid.res[k] = res;
  }
  nlohmann::json eff{
      {"cmd", "measure"}, {"map", map_to_json(map)}, {"res", res}, {"box", box_half}, {"n", n}};
  ThreadPool pool(g.threads);
  MeasureArtifacts art = build_measure(map, grid, n, pool);
  write_measure_outputs(art, out_file(g, "measure.bin").string(),
                        out_file(g, "measure.csv").string(), config_hash(eff, g.seed));
  std::printf("raw signed mass %.6f, clamped fraction %.6f\n", art.raw_signed_mass,
              art.raw.clamped_mass_fraction);
  std::printf("wrote %s and %s\n", out_file(g, "measure.bin").string().c_str(),
              out_file(g, "measure.csv").string().c_str());
  return 0;
}

int cmd_periodic(const GlobalOptions& g, const std::string& map_path, int period, double tol,
                 bool allow_uncertified) {
  nlohmann::json cfg = load_config(g.config_path);
  HenonMap map = load_map(map_path, cfg);
  NewtonConfig nc;
  nc.tolerance = tol;
  nlohmann::json eff{{"cmd", "periodic"},
                     {"map", map_to_json(map)},
                     {"period", period},
                     {"tol", tol}};
  ThreadPool pool(g.threads);
  PeriodicEnsemble ens = [&] {
    if (!allow_uncertified)
      return write_periodic_csv(map, period, nc, out_file(g, "periodic.csv").string(),
                                config_hash(eff, g.seed), pool);
    PeriodicEnsemble e = enumerate_periodic(map, period, nc, pool, true);
    CsvWriter w(out_file(g, "periodic.csv").string(), config_hash(eff, g.seed),
                {"code", "point_index", "x", "y", "multiplier_max", "multiplier_min", "residual"});
    for (const auto& orbit : e.orbits)
      for (std::size_t j = 0; j < orbit.points.size(); ++j)
        w.row({orbit.code.str(), std::to_string(j), format_double(orbit.points[j][0]),
               format_double(orbit.points[j][1]), format_double(orbit.multiplier_max),
               format_double(orbit.multiplier_min), format_double(orbit.residual)});
    return e;
  }();
  std::printf("period %d: %zu orbits, %zu points, complete=%s, failures=%zu\n", period,
              ens.orbits.size(), ens.total_points(), ens.complete ? "yes" : "no",
              ens.failures.size());
  std::printf("wrote %s\n", out_file(g, "periodic.csv").string().c_str());
  return ens.complete ? 0 : 3;
}

int cmd_mix(const GlobalOptions& g, const std::string& map_path, const std::string& source,
            const std::string& phi_src, const std::string& psi_src, int n_max, double box_half) {
  nlohmann::json cfg = load_config(g.config_path);
  HenonMap map = load_map(map_path, cfg);
  ThreadPool pool(g.threads);
  DiscreteMeasure mu;
  if (source.rfind("periodic:", 0) == 0) {
    int period = std::stoi(source.substr(9));
    mu = ensemble_measure(enumerate_periodic(map, period, {}, pool));
  } else {
    mu = atoms_from_cells(normalize(read_cell_measure(source)));
    mu.descriptor = source;
  }
  Observable phi = Observable::parse(phi_src);
  Observable psi = Observable::parse(psi_src);
  nlohmann::json eff{{"cmd", "mix"},   {"map", map_to_json(map)}, {"measure", source},
                     {"phi", phi_src}, {"psi", psi_src},          {"n_max", n_max},
                     {"box", box_half}};
  MixArtifacts art = run_mix(mu, map, phi, psi, n_max, {-box_half, -box_half},
                             {box_half, box_half});
  write_mix_outputs(art, map.degree(), out_file(g, "mix.csv").string(),
                    out_file(g, "mix_summary.json").string(), config_hash(eff, g.seed));
  std::printf("usable window %zu, sup r_n %.6g, bound shape %s", art.bound.window,
              art.bound.sup_r, art.bound.pass ? "pass" : "FAIL");
  if (art.fit_ok)
    std::printf(", rho=%.6g\n", art.fit.rate);
  else
    std::printf(", rho: insufficient signal\n");
  std::printf("wrote %s and %s\n", out_file(g, "mix.csv").string().c_str(),
              out_file(g, "mix_summary.json").string().c_str());
  return 0;
}

int cmd_render(const GlobalOptions& g, const std::string& map_path, const std::string& side,
               int res, double box_half, double im_x, double im_y, int n_max) {
  nlohmann::json cfg = load_config(g.config_path);
  HenonMap map = load_map(map_path, cfg);
  GreenConfig gc;
  gc.n_max = n_max;
  gc.tail_refinements = 10;
  nlohmann::json eff{{"cmd", "render"}, {"map", map_to_json(map)}, {"side", side},
                     {"res", res},      {"box", box_half},         {"im", {im_x, im_y}},
                     {"n_max", n_max}};
  ThreadPool pool(g.threads);
  write_render_pgm(map, side == "-" ? Sign::Minus : Sign::Plus, gc, -box_half, box_half, res,
                   im_x, im_y, out_file(g, "render.pgm").string(), config_hash(eff, g.seed),
                   pool);
  std::printf("wrote %s (%dx%d, 16-bit)\n", out_file(g, "render.pgm").string().c_str(), res, res);
  return 0;
}

int cmd_verify(const GlobalOptions& g, bool quick, int horizon) {
  VerifyOptions opt;
  opt.threads = g.threads;
  opt.seed = g.seed;
  opt.work_dir = g.out_dir;
  opt.green_horizon = horizon;
  if (quick) {
    opt.grid_res = 16;
    opt.grid_res_coarse = 8;
    opt.period_main = 8;
    opt.period_mix = 10;
  }
  auto rows = run_verification(opt);
  std::fputs(format_table(rows).c_str(), stdout);
  if (all_pass(rows)) {
    std::printf("verify: all %zu checks passed\n", rows.size());
    return 0;
  }
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.pass ? 0 : 1;
  std::printf("verify: %zu of %zu checks FAILED\n", failed, rows.size());
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"henonlab: Green functions, equilibrium measures, and mixing rates of "
               "generalized Henon maps"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
  app.add_option("--seed", g.seed, "seed for randomized point batteries");
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();

  std::string map_path, points_path, side = "+", source = "periodic:12";
  std::string phi_src = "x", psi_src = "y";
  int slice_res = 64, res = 24, n = 8, n_max = 60, period = 12, mix_nmax = 20;
  double box_half = 6.0, im_x = 0.0, im_y = 0.0, tol = 1e-12, radius = 0.0;
  int tail = 3;
  bool allow_uncertified = false, quick = false;
  int verify_horizon = 60;

  auto* info = app.add_subcommand("info", "degrees, indeterminacy sets, regularity");
  info->add_option("--map", map_path, "map JSON file");

  auto* green = app.add_subcommand("green", "G+/G- values with error bounds -> CSV");
  green->add_option("--map", map_path, "map JSON file");
  green->add_option("--points", points_path, "CSV of x_re,x_im,y_re,y_im rows");
  green->add_option("--slice-res", slice_res, "slice resolution when no points file");
  green->add_option("--box", box_half, "slice half-width");
  green->add_option("--im-x", im_x, "fixed Im x of the slice");
  green->add_option("--im-y", im_y, "fixed Im y of the slice");
  green->add_option("--n-max", n_max, "escape horizon");
  green->add_option("--tail", tail, "post-escape refinement steps");
  green->add_option("--radius", radius, "escape radius override (0 = computed)");

  auto* measure = app.add_subcommand("measure", "wedge measure mu_n -> binary masses + summary");
  measure->add_option("--map", map_path, "map JSON file");
  measure->add_option("--res", res, "cells per axis of the output grid");
  measure->add_option("--box", box_half, "half-width of the 4-d box");
  measure->add_option("--n", n, "truncation level of both potentials");

  auto* periodic = app.add_subcommand("periodic", "saddle orbits by symbolic code -> CSV");
  periodic->add_option("--map", map_path, "map JSON file");
  periodic->add_option("--period", period, "orbit period n (all points of f^n = id)");
  periodic->add_option("--tol", tol, "Newton residual tolerance");
  periodic->add_flag("--allow-uncertified", allow_uncertified,
                     "run even if the horseshoe certificate fails");

  auto* mix = app.add_subcommand("mix", "correlation series and decay checks -> CSV + JSON");
  mix->add_option("--map", map_path, "map JSON file");
  mix->add_option("--measure", source, "periodic:N or a measure .bin file")
      ->capture_default_str();
  mix->add_option("--phi", phi_src, "observable (prefix notation)")->capture_default_str();
  mix->add_option("--psi", psi_src, "observable (prefix notation)")->capture_default_str();
  mix->add_option("--n-max", mix_nmax, "largest correlation lag");
  mix->add_option("--box", box_half, "box for C2 norms");

  auto* render = app.add_subcommand("render", "grayscale G slice -> 16-bit PGM");
  render->add_option("--map", map_path, "map JSON file");
  render->add_option("--side", side, "+ (forward) or - (backward)")->capture_default_str();
  render->add_option("--res", slice_res, "image resolution");
  render->add_option("--box", box_half, "slice half-width");
  render->add_option("--im-x", im_x, "fixed Im x");
  render->add_option("--im-y", im_y, "fixed Im y");
  render->add_option("--n-max", n_max, "escape horizon");

  auto* verify = app.add_subcommand("verify", "run the acceptance battery");
  verify->add_flag("--quick", quick, "reduced-scale smoke profile");
  verify->add_option("--horizon", verify_horizon, "escape horizon for the pointwise checks")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*info) return cmd_info(g, map_path);
    if (*green)
      return cmd_green(g, map_path, points_path, slice_res, box_half, im_x, im_y, n_max, tail,
                       radius);
    if (*measure) return cmd_measure(g, map_path, res, box_half, n);
    if (*periodic) return cmd_periodic(g, map_path, period, tol, allow_uncertified);
    if (*mix) return cmd_mix(g, map_path, source, phi_src, psi_src, mix_nmax, box_half);
    if (*render) return cmd_render(g, map_path, side, slice_res, box_half, im_x, im_y, n_max);
    if (*verify) return cmd_verify(g, quick, verify_horizon);
  } catch (const MapParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ObservableParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
