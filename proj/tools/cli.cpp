#include "cli.hpp"

#include "jonesq/carleson.hpp"
#include "jonesq/decomposition.hpp"
#include "jonesq/generators.hpp"
#include "jonesq/io.hpp"
#include "jonesq/multiscale.hpp"
#include "jonesq/parallel.hpp"
#include "jonesq/plane_fit.hpp"
#include "jonesq/transport.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#ifndef JONESQ_CORPUS_DIR
#define JONESQ_CORPUS_DIR "corpus"
#endif

namespace fs = std::filesystem;

namespace jonesq::cli {

namespace {

const std::set<std::string> kCommands = {"generate", "beta",     "alpha",    "jones", "whitney",
                                          "exceptional", "classify", "carleson", "verify"};

struct Input {
  DiscreteMeasure measure;
  std::optional<LipschitzGraph> graph;
  nlohmann::json source;
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

GeneratorSpec load_spec(const std::string& path, const std::optional<std::uint64_t>& seed) {
  GeneratorSpec spec;
  try {
    spec = spec_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (seed) spec.seed = *seed;
  return spec;
}

Input load_input(const RunConfig& cfg) {
  if (cfg.input.empty() == cfg.spec.empty())
    throw std::invalid_argument("exactly one of --input and --spec is required");
  Input in;
  if (!cfg.spec.empty()) {
    const auto spec = load_spec(cfg.spec, cfg.seed);
    auto g = generate(spec);
    in.measure = std::move(g.measure);
    in.graph = std::move(g.graph);
    in.source = {{"spec", spec_to_json(spec)}, {"metadata", g.metadata}};
  } else {
    in.measure = load_measure(cfg.input);
    in.source = {{"input", cfg.input}};
  }
  if (in.measure.empty()) throw std::invalid_argument("input measure has no atoms");
  if (cfg.n >= in.measure.dim())
    throw std::invalid_argument("--n must be smaller than the ambient dimension");
  return in;
}

ScaleGrid scale_grid(const RunConfig& cfg, const DiscreteMeasure& measure) {
  double r_max = cfg.r_max > 0.0 ? cfg.r_max : diameter_bound(measure);
  if (!(r_max > 0.0)) r_max = 1.0;
  const double r_min = cfg.r_min > 0.0 ? cfg.r_min : r_max / 256.0;
  return ScaleGrid(r_max, r_min, cfg.ratio);
}

AlphaConfig alpha_config(const RunConfig& cfg) {
  AlphaConfig a;
  a.resolution = cfg.resolution;
  a.plane_budget = cfg.budget;
  return a;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string coord_header(Eigen::Index d) {
  std::string h;
  for (Eigen::Index k = 0; k < d; ++k) h += "x" + std::to_string(k + 1) + ",";
  return h;
}

std::string coords(const Eigen::Ref<const Vector>& x) {
  std::string s;
  for (Eigen::Index k = 0; k < x.size(); ++k) s += format_double(x[k]) + ",";
  return s;
}

// Parameter-space cube of the graph domain and the ambient region above it.
DyadicLattice graph_lattice(const LipschitzGraph& g) {
  const Box& dom = g.domain();
  const double side = (dom.upper - dom.lower).maxCoeff();
  Vector origin = Vector::Constant(g.d(), -side / 2.0);
  origin.head(g.n()) = dom.lower;
  return DyadicLattice{origin, side};
}

const LipschitzGraph& require_graph(const Input& in, const std::string& command) {
  if (!in.graph) throw std::invalid_argument(command + " needs a generator spec with an underlying graph");
  return *in.graph;
}

Matrix exceptional_samples(const Input& in, const ScaleGrid& grid) {
  if (in.graph) return in.graph->sample(grid.radii().back() / 2.0);
  return in.measure.points();
}

RadiusGrid exceptional_radii(const ScaleGrid& grid) {
  return RadiusGrid::geometric(grid.radii().back(), grid.radii().front());
}

nlohmann::json cmd_generate(const RunConfig& cfg, const Input& in, const fs::path& out) {
  if (cfg.spec.empty()) throw std::invalid_argument("generate needs --spec");
  std::ostringstream csv;
  write_measure_csv(csv, in.measure);
  write_text(out / "measure.csv", csv.str());
  return {{"atoms", in.measure.size()}, {"total_mass", in.measure.total_mass()}};
}

nlohmann::json cmd_coefficients(const RunConfig& cfg, const Input& in, const fs::path& out, bool use_alpha) {
  const SpatialIndex index(in.measure);
  const auto grid = scale_grid(cfg, in.measure);
  const auto picks = sample_points(in.measure.size(), cfg.points, cfg.seed.value_or(1));
  struct Row {
    double value = 0.0;
    bool empty = false;
    std::string error;
  };
  std::vector<std::vector<Row>> rows(picks.size(), std::vector<Row>(grid.size()));
  const auto acfg = alpha_config(cfg);
  parallel_for(picks.size(), resolve_workers(cfg.workers), [&](std::size_t k) {
    const Vector x = in.measure.point(picks[k]);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const Ball ball(x, grid.radii()[j]);
      try {
        if (use_alpha) {
          const auto rec = alpha(in.measure, index, ball, cfg.n, acfg);
          rows[k][j] = {rec.value, rec.empty, {}};
        } else {
          const auto rec = beta(in.measure, index, ball, cfg.n, cfg.p);
          rows[k][j] = {rec.value, rec.empty_region, {}};
        }
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception& e) {
        rows[k][j] = {0.0, false, e.what()};
      }
    }
  });
  std::ostringstream csv;
  csv << "point," << coord_header(in.measure.dim()) << "r,value,flags\n";
  double max_value = 0.0;
  int failed = 0;
  for (std::size_t k = 0; k < picks.size(); ++k)
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto& r = rows[k][j];
      csv << picks[k] << ',' << coords(in.measure.point(picks[k])) << format_double(grid.radii()[j]) << ','
          << format_double(r.value) << ',' << (r.empty ? "empty" : r.error.empty() ? "" : "failed") << '\n';
      max_value = std::max(max_value, r.value);
      failed += r.error.empty() ? 0 : 1;
    }
  write_text(out / (use_alpha ? "alpha.csv" : "beta.csv"), csv.str());
  return {{"points", picks.size()}, {"scales", grid.size()}, {"max_value", max_value}, {"failed", failed}};
}

nlohmann::json cmd_jones(const RunConfig& cfg, const Input& in, const fs::path& out) {
  const SpatialIndex index(in.measure);
  const auto grid = scale_grid(cfg, in.measure);
  const auto kind = coefficient_kind_from_string(cfg.kind);
  const auto picks = sample_points(in.measure.size(), cfg.points, cfg.seed.value_or(1));
  JonesConfig jc;
  jc.alpha = alpha_config(cfg);
  std::vector<JonesProfile> profiles(picks.size());
  parallel_for(picks.size(), resolve_workers(cfg.workers), [&](std::size_t k) {
    profiles[k] = jones_function(in.measure, index, in.measure.point(picks[k]), cfg.n, cfg.p, grid, kind, jc);
  });
  std::ostringstream csv;
  csv << "point," << coord_header(in.measure.dim()) << "r,value,partial_sum,flags\n";
  nlohmann::json per_point = nlohmann::json::array();
  double worst_tail = 0.0;
  bool all_plateau = true;
  bool below_spacing = false;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    std::ostringstream one;
    write_profile_csv(one, profiles[k], false);
    std::istringstream lines(one.str());
    for (std::string line; std::getline(lines, line);) csv << picks[k] << ',' << line << '\n';
    const auto st = profile_stats(profiles[k]);
    auto j = stats_to_json(st);
    j["point"] = picks[k];
    per_point.push_back(j);
    worst_tail = std::max(worst_tail, st.tail_fraction);
    all_plateau = all_plateau && st.plateau;
    below_spacing = below_spacing || profiles[k].below_spacing;
  }
  write_text(out / "profiles.csv", csv.str());
  return {{"kind", to_string(kind)},
          {"scales", grid.size()},
          {"radii", grid.radii()},
          {"max_tail_fraction", worst_tail},
          {"plateau", all_plateau},
          {"below_spacing", below_spacing},
          {"per_point", per_point}};
}

nlohmann::json cmd_whitney(const RunConfig& cfg, const Input& in, const fs::path& out) {
  const auto& g = require_graph(in, "whitney");
  const auto lattice = graph_lattice(g);
  WhitneyConfig wc;
  wc.max_depth = cfg.depth;
  const auto dec = whitney_decompose(g, lattice, lattice.root(), wc);
  write_json(out / "whitney.json", to_json(dec));
  return {{"cubes", dec.cubes.size()},
          {"unresolved", dec.unresolved.size()},
          {"all_valid", dec.all_valid()},
          {"max_neighbours", dec.max_neighbours},
          {"max_side_ratio", dec.max_side_ratio}};
}

nlohmann::json cmd_exceptional(const RunConfig& cfg, const Input& in, const fs::path& out) {
  const SpatialIndex index(in.measure);
  const auto grid = scale_grid(cfg, in.measure);
  const Matrix samples = exceptional_samples(in, grid);
  const auto radii = exceptional_radii(grid);
  const auto set = exceptional_set(in.measure, index, samples, cfg.n, cfg.M, radii);
  const auto chk = verify_exceptional(set, in.measure, index, samples, radii);
  write_json(out / "exceptional.json", to_json(set));
  return {{"balls", set.balls().size()},
          {"h0_count", set.h0_count()},
          {"samples", samples.cols()},
          {"fifth_balls_disjoint", chk.fifth_balls_disjoint},
          {"density_sandwich", chk.density_sandwich},
          {"covers_h0", chk.covers_h0}};
}

StoppingConfig stopping_config(const RunConfig& cfg) {
  StoppingConfig sc;
  sc.M = cfg.M;
  sc.N = cfg.N;
  sc.r0 = cfg.r0;
  sc.max_depth = cfg.depth;
  sc.alpha = alpha_config(cfg);
  sc.workers = resolve_workers(cfg.workers);
  return sc;
}

nlohmann::json cmd_classify(const RunConfig& cfg, const Input& in, const fs::path& out) {
  const SpatialIndex index(in.measure);
  const auto lattice = DyadicLattice::bounding(in.measure);
  const auto tree = stopping_classify(in.measure, index, lattice, lattice.root(), cfg.n, stopping_config(cfg));
  const auto chk = verify_stopping(tree);
  const auto j = to_json(tree);
  write_json(out / "tree.json", j);
  return {{"cubes", tree.cubes.size()},
          {"label_counts", j.at("label_counts")},
          {"stops_disjoint", chk.stops_disjoint},
          {"stops_maximal", chk.stops_maximal},
          {"labels_consistent", chk.labels_consistent},
          {"stopped_fraction", chk.stopped_fraction},
          {"alpha_profiles", tree.alpha_profiles}};
}

nlohmann::json cmd_carleson(const RunConfig& cfg, const Input& in, const fs::path& out) {
  const SpatialIndex index(in.measure);
  const unsigned workers = resolve_workers(cfg.workers);
  CarlesonSum sum;
  if (cfg.kind == "alpha") {
    const auto& g = require_graph(in, "carleson --kind alpha");
    const auto grid = scale_grid(cfg, in.measure);
    const Matrix samples = g.sample(grid.radii().back() / 2.0);
    const auto set = exceptional_set(in.measure, index, samples, cfg.n, cfg.M, exceptional_radii(grid));
    const double side = (g.domain().upper - g.domain().lower).maxCoeff();
    const auto tree = gamma_cubes(g, g.domain().lower, side, cfg.depth, &set);
    sum = carleson_sum_alpha(in.measure, index, tree, 0, cfg.depth, cfg.n, alpha_config(cfg), workers);
  } else if (cfg.kind == "beta") {
    const auto lattice = DyadicLattice::bounding(in.measure);
    const auto tree = stopping_classify(in.measure, index, lattice, lattice.root(), cfg.n, stopping_config(cfg));
    sum = carleson_sum_beta(in.measure, index, tree, cfg.n, workers);
  } else {
    throw std::invalid_argument("carleson --kind must be alpha or beta");
  }
  write_json(out / "carleson.json", to_json(sum));
  return {{"kind", cfg.kind}, {"sum", sum.sum}, {"normalizer", sum.normalizer}, {"ratio", sum.ratio},
          {"terms", sum.terms.size()}};
}

// Invariant suites over every spec in the corpus. The stopping suite checks structure only, so
// it runs with thresholds that keep 2-d alpha profiles (thousands of grid atoms) rare; the
// exceptional suite uses a moderate density threshold so concentrated measures produce balls.
constexpr double kVerifyM = 1e6;
constexpr double kVerifyN = 1e5;
constexpr double kVerifyThreshold = 4.0;

nlohmann::json cmd_verify(const RunConfig& cfg, const fs::path& out, bool& all_pass) {
  const fs::path dir = cfg.corpus.empty() ? fs::path(JONESQ_CORPUS_DIR) : fs::path(cfg.corpus);
  if (!fs::is_directory(dir)) throw std::runtime_error("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("corpus directory has no .json specs: " + dir.string());

  all_pass = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& file : files) {
    const auto spec = load_spec(file.string(), cfg.seed);
    const auto g = generate(spec);
    const SpatialIndex index(g.measure);
    nlohmann::json suites;
    auto record = [&](const std::string& name, bool ok, nlohmann::json detail) {
      detail["pass"] = ok;
      suites[name] = std::move(detail);
      all_pass = all_pass && ok;
    };

    std::ostringstream a, b;
    write_measure_csv(a, g.measure);
    write_measure_csv(b, generate(spec).measure);
    const double mass_err = std::abs(g.measure.total_mass() - spec.mass);
    record("generator", mass_err <= 1e-12 * spec.mass && a.str() == b.str(), {{"mass_error", mass_err}});

    const auto lattice = DyadicLattice::bounding(g.measure);
    auto sc = stopping_config(cfg);
    sc.M = kVerifyM;
    sc.N = kVerifyN;
    const auto tree = stopping_classify(g.measure, index, lattice, lattice.root(), spec.n, sc);
    const auto st = verify_stopping(tree);
    record("stopping", st.stops_disjoint && st.stops_maximal && st.labels_consistent,
           {{"stopped_fraction", st.stopped_fraction}, {"cubes", tree.cubes.size()}});

    RunConfig ecfg = cfg;
    ecfg.r_max = ecfg.r_min = 0.0;
    const auto grid = scale_grid(ecfg, g.measure);
    const Input in{g.measure, g.graph, {}};
    const Matrix samples = exceptional_samples(in, grid);
    const auto radii = exceptional_radii(grid);
    const auto set = exceptional_set(g.measure, index, samples, spec.n, kVerifyThreshold, radii);
    const auto ec = verify_exceptional(set, g.measure, index, samples, radii);
    record("exceptional", ec.fifth_balls_disjoint && ec.density_sandwich && ec.covers_h0,
           {{"balls", set.balls().size()}, {"h0_count", set.h0_count()}});

    if (g.graph) {
      const auto wl = graph_lattice(*g.graph);
      WhitneyConfig wc;
      wc.max_depth = std::min(cfg.depth, g.graph->d() > 2 ? 4 : 6);
      const auto dec = whitney_decompose(*g.graph, wl, wl.root(), wc);
      record("whitney", dec.all_valid(), {{"cubes", dec.cubes.size()}, {"unresolved", dec.unresolved.size()}});
    }
    report.push_back({{"spec", file.filename().string()}, {"suites", suites}});
  }
  write_json(out / "verify.json", report);
  return {{"specs", files.size()},
          {"all_pass", all_pass},
          {"suite_parameters", {{"M", kVerifyM}, {"N", kVerifyN}, {"exceptional_threshold", kVerifyThreshold}}}};
}

}  // namespace

// Floyd sampling driven by mt19937_64 (whose output sequence is fixed by the standard), so the
// chosen atoms depend only on the seed.
std::vector<std::size_t> sample_points(std::size_t size, std::size_t count, std::uint64_t seed) {
  if (count >= size) {
    std::vector<std::size_t> all(size);
    for (std::size_t i = 0; i < size; ++i) all[i] = i;
    return all;
  }
  std::mt19937_64 rng(seed);
  std::set<std::size_t> chosen;
  for (std::size_t j = size - count; j < size; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng() % (j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

void validate(const RunConfig& c) {
  if (!kCommands.count(c.command)) throw std::invalid_argument("unknown command: " + c.command);
  if (!(c.p >= 1.0 && c.p <= 2.0)) throw std::invalid_argument("--p must lie in [1, 2]");
  if (!(c.N > 1.0 && c.M > c.N)) throw std::invalid_argument("need M > N > 1");
  if (!(c.ratio > 0.0 && c.ratio < 1.0)) throw std::invalid_argument("--ratio must lie in (0, 1)");
  if (c.n < 1) throw std::invalid_argument("--n must be positive");
  if (c.r_max < 0.0 || c.r_min < 0.0 || c.r0 < 0.0) throw std::invalid_argument("radii must be nonnegative");
  if (c.r_max > 0.0 && c.r_min > c.r_max) throw std::invalid_argument("--rmin exceeds --rmax");
  if (!(c.resolution > 0.0 && c.resolution <= 1.0)) throw std::invalid_argument("--resolution must lie in (0, 1]");
  if (c.budget < 0) throw std::invalid_argument("--budget must be nonnegative");
  if (c.depth < 0 || c.depth > 20) throw std::invalid_argument("--depth must lie in [0, 20]");
  if (c.points == 0) throw std::invalid_argument("--points must be positive");
}

nlohmann::json config_echo(const RunConfig& c) {
  nlohmann::json j = {{"command", c.command}, {"input", c.input},   {"spec", c.spec},
                      {"kind", c.kind},       {"n", c.n},           {"p", c.p},
                      {"rmax", c.r_max},      {"rmin", c.r_min},    {"ratio", c.ratio},
                      {"M", c.M},             {"N", c.N},           {"r0", c.r0},
                      {"resolution", c.resolution}, {"budget", c.budget}, {"depth", c.depth},
                      {"points", c.points}};
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
  if (c.command == "verify") j["corpus"] = c.corpus;
  return j;
}

int run(const RunConfig& cfg, std::ostream& err) {
  try {
    validate(cfg);
    const fs::path out(cfg.out);
    fs::create_directories(out);
    nlohmann::json summary = {{"command", cfg.command}, {"config", config_echo(cfg)}};
    int status = 0;
    if (cfg.command == "verify") {
      bool pass = true;
      summary["results"] = cmd_verify(cfg, out, pass);
      status = pass ? 0 : 1;
    } else {
      const Input in = load_input(cfg);
      summary["source"] = in.source;
      if (cfg.command == "generate") summary["results"] = cmd_generate(cfg, in, out);
      else if (cfg.command == "beta") summary["results"] = cmd_coefficients(cfg, in, out, false);
      else if (cfg.command == "alpha") summary["results"] = cmd_coefficients(cfg, in, out, true);
      else if (cfg.command == "jones") summary["results"] = cmd_jones(cfg, in, out);
      else if (cfg.command == "whitney") summary["results"] = cmd_whitney(cfg, in, out);
      else if (cfg.command == "exceptional") summary["results"] = cmd_exceptional(cfg, in, out);
      else if (cfg.command == "classify") summary["results"] = cmd_classify(cfg, in, out);
      else summary["results"] = cmd_carleson(cfg, in, out);
    }
    write_json(out / "summary.json", summary);
    if (status != 0) err << "jonesq " << cfg.command << ": invariant suites failed, see verify.json\n";
    return status;
  } catch (const std::exception& e) {
    err << "jonesq " << cfg.command << ": " << e.what() << '\n';
    return 2;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Multiscale beta/alpha coefficients and decompositions for discrete measures"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::uint64_t seed = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "measure file (.csv or .json)");
    sub->add_option("--spec", cfg.spec, "generator spec (.json)");
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--n", cfg.n, "intrinsic dimension");
    sub->add_option("--p", cfg.p, "beta exponent in [1, 2]");
    sub->add_option("--rmax", cfg.r_max, "largest radius (default: data diameter)");
    sub->add_option("--rmin", cfg.r_min, "smallest radius (default: rmax / 256)");
    sub->add_option("--ratio", cfg.ratio, "scale ratio in (0, 1)");
    sub->add_option("--M", cfg.M, "density threshold");
    sub->add_option("--N", cfg.N, "alpha-sum threshold");
    sub->add_option("--r0", cfg.r0, "stopping-time scale (default: 10 diam R)");
    sub->add_option("--resolution", cfg.resolution, "plane grid spacing as a fraction of r");
    sub->add_option("--budget", cfg.budget, "plane evaluations per alpha");
    sub->add_option("--depth", cfg.depth, "tree depth below the root");
    sub->add_option("--points", cfg.points, "sampled atoms for beta / alpha / jones");
    sub->add_option("--kind", cfg.kind, "beta or alpha (jones, carleson)");
    sub->add_option("--seed", seed, "seed for point sampling and generator specs");
    sub->add_option("--workers", cfg.workers, "worker threads (0: all)");
  };
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (name == "verify") sub->add_option("--corpus", cfg.corpus, "directory of generator specs");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--seed") > 0) cfg.seed = seed;
  return run(cfg, std::cerr);
}

}  // namespace jonesq::cli
