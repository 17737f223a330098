// qdark command-line driver. Every command reads an optional JSON config
// (--config), lets flags override it, and writes its outputs plus a
// manifest.json into --out.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <qdark/qdark.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qdark;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUser = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One flag that, when given on the command line, overrides a config key.
struct FlagBinding {
  CLI::Option* option = nullptr;
  std::function<void(json&)> apply;
};

struct Command {
  std::string name;
  std::set<std::string> keys;  // accepted config keys
  std::vector<FlagBinding> flags;
  std::string config_path;
  std::function<int(json&, std::uint64_t)> run;
  CLI::App* app = nullptr;
};

template <class T>
void flag(Command& c, const std::string& name, const std::string& key, const std::string& help) {
  auto store = std::make_shared<T>();
  auto* opt = c.app->add_option(name, *store, help);
  if constexpr (!std::is_same_v<T, std::string> && requires { store->begin(); }) opt->delimiter(',');
  c.keys.insert(key);
  c.flags.push_back({opt, [store, key](json& j) { j[key] = *store; }});
}

void common_flags(Command& c) {
  c.app->add_option("--config", c.config_path, "JSON config file; flags override its values");
  flag<std::uint64_t>(c, "--seed", "seed", "master seed (random and printed when absent)");
  flag<std::string>(c, "--out", "out", "output directory");
  flag<int>(c, "--threads", "threads", "worker threads");
}

void graph_flags(Command& c) {
  flag<std::string>(c, "--kind", "kind", "path | cycle | complete | cylinder | er | trimer");
  flag<int>(c, "--n", "n", "node count");
  flag<int>(c, "--c", "c", "cylinder ring size");
  flag<int>(c, "--l", "l", "cylinder ring count");
  flag<double>(c, "--p", "p", "Erdos-Renyi edge probability");
  flag<std::string>(c, "--graph", "graph", "graph file (text or JSON)");
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return it->get<T>();
}

template <class T>
T require(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing required setting '" + key + "'");
  return it->get<T>();
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct ResolvedGraph {
  WeightedGraph graph;
  std::string label;
  std::optional<kind::Cylinder> cylinder;
};

ResolvedGraph resolve_graph(json& cfg, std::uint64_t seed, const std::string& default_kind = "") {
  ResolvedGraph out;
  if (cfg.contains("graph")) {
    if (cfg.contains("kind")) throw ConfigError("give either 'graph' or 'kind', not both");
    const fs::path path = cfg["graph"].get<std::string>();
    try {
      out.graph = parse_graph(read_file(path));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    out.label = path.stem().string();
    for (auto& ch : out.label)
      if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '-';
    return out;
  }
  if (!cfg.contains("kind")) {
    if (default_kind.empty()) throw ConfigError("no graph given; use --kind or --graph");
    cfg["kind"] = default_kind;
  }
  const auto k = cfg["kind"].get<std::string>();
  GraphKind spec;
  if (k == "path") spec = kind::Path{require<int>(cfg, "n")};
  else if (k == "cycle") spec = kind::Cycle{require<int>(cfg, "n")};
  else if (k == "complete") spec = kind::Complete{require<int>(cfg, "n")};
  else if (k == "cylinder") {
    if (!cfg.contains("c")) cfg["c"] = 4;
    if (!cfg.contains("l")) cfg["l"] = 8;
    const kind::Cylinder cyl{cfg["c"].get<int>(), cfg["l"].get<int>()};
    spec = cyl;
    out.cylinder = cyl;
  } else if (k == "er") spec = kind::ErdosRenyi{require<int>(cfg, "n"), require<double>(cfg, "p"), seed};
  else if (k == "trimer") spec = kind::Trimer{};
  else throw ConfigError("unknown graph kind '" + k + "'");
  out.graph = generate_graph(spec);
  out.label = graph_label(spec);
  return out;
}

fs::path out_dir(const json& cfg) { return get_or<std::string>(cfg, "out", "."); }

void finish(const json& cfg, std::uint64_t seed, double seconds) {
  write_json(out_dir(cfg) / "manifest.json", run_manifest(cfg, seed, {{"total_seconds", seconds}}));
}

std::vector<double> default_eps() { return {1e-6, 1e-4, 1e-2, 1e-1}; }

std::vector<int> default_removal_counts() {
  std::vector<int> k;
  for (int i = 0; i <= 12; ++i) k.push_back(i);
  return k;
}

DephasingSearch search_from(const json& cfg) {
  DephasingSearch s;
  s.gamma_lo = get_or(cfg, "gamma_lo", s.gamma_lo);
  s.gamma_hi = get_or(cfg, "gamma_hi", s.gamma_hi);
  s.grid_points = get_or(cfg, "grid_points", s.grid_points);
  s.log_tolerance = get_or(cfg, "log_tolerance", s.log_tolerance);
  return s;
}

void search_flags(Command& c) {
  flag<double>(c, "--gamma-lo", "gamma_lo", "lower dephasing bound");
  flag<double>(c, "--gamma-hi", "gamma_hi", "upper dephasing bound");
  flag<int>(c, "--grid-points", "grid_points", "log-spaced guard grid size");
  flag<double>(c, "--log-tolerance", "log_tolerance", "golden-section tolerance in ln(gamma)");
}

Propagator propagator_from(const std::string& name) {
  for (auto p : {Propagator::kAuto, Propagator::kUnitary, Propagator::kTaylor, Propagator::kDenseExpm,
                 Propagator::kRungeKutta})
    if (name == propagator_name(p)) return p;
  throw ConfigError("unknown propagator '" + name + "'");
}

// ---------------------------------------------------------------------------
// Commands

int cmd_generate(json& cfg, std::uint64_t seed) {
  const auto g = resolve_graph(cfg, seed);
  const auto format = get_or<std::string>(cfg, "format", "text");
  const auto dir = out_dir(cfg);
  if (format == "text") write_text_file(dir / "graph.txt", encode_graph(g.graph));
  else if (format == "json") write_json(dir / "graph.json", graph_to_json(g.graph));
  else throw ConfigError("format must be 'text' or 'json'");
  std::cout << g.label << ": " << g.graph.size() << " nodes, " << g.graph.edge_count() << " edges\n";
  return kExitOk;
}

int cmd_analyze(json& cfg, std::uint64_t seed) {
  const auto g = resolve_graph(cfg, seed);
  const NodeId target = get_or(cfg, "target", g.graph.size());
  const auto eps = get_or(cfg, "eps", default_eps());
  const double zero = get_or(cfg, "zero_tolerance", SpectralTolerances{}.zero);
  const auto rep = dark_report(decompose(g.graph), target, zero, eps);
  write_json(out_dir(cfg) / "report.json", to_json(rep));
  std::cout << g.label << " target " << target << ": dark_dimension " << rep.dark_dimension << "\n";
  return kExitOk;
}

int cmd_evolve(json& cfg, std::uint64_t seed) {
  const auto g = resolve_graph(cfg, seed);
  const int n = g.graph.size();
  const NodeId target = get_or(cfg, "target", n);
  const auto model = build_model(g.graph, get_or(cfg, "site_energies", std::vector<double>{}), target,
                                 get_or(cfg, "sink_rate", 1.0),
                                 uniform_rates(n, get_or(cfg, "dissipation", 0.0)),
                                 uniform_rates(n, get_or(cfg, "dephasing", 0.0)));

  QuantumState rho0 = QuantumState::localized(n, 1);
  if (cfg.contains("amplitudes")) {
    if (cfg.contains("input")) throw ConfigError("give either 'input' or 'amplitudes', not both");
    const auto& a = cfg["amplitudes"];
    if (!a.is_array() || static_cast<int>(a.size()) != n)
      throw ConfigError("'amplitudes' needs one entry per site");
    Eigen::VectorXcd psi(n);
    for (int i = 0; i < n; ++i)
      psi[i] = a[i].is_array() ? Complex(a[i].at(0).get<double>(), a[i].at(1).get<double>())
                               : Complex(a[i].get<double>(), 0.0);
    if (!(psi.norm() > 0.0)) throw ConfigError("'amplitudes' must not all vanish");
    rho0 = QuantumState::pure(psi / psi.norm());
  } else {
    rho0 = QuantumState::localized(n, get_or(cfg, "input", 1));
  }

  EvolveOptions opt;
  opt.method = propagator_from(get_or<std::string>(cfg, "method", "auto"));
  const double t_max = get_or(cfg, "t_max", 100.0);
  const double dt = get_or(cfg, "dt", 1.0);
  const auto res = evolve(model, rho0, t_max, dt, opt);

  const auto dir = out_dir(cfg);
  write_csv(dir / "evolution.csv", propagation_table(res));
  json meta;
  meta["graph"] = g.label;
  meta["n_nodes"] = n;
  meta["target"] = target;
  meta["sink_rate"] = model.sink_rate;
  meta["dephasing"] = model.dephasing;
  meta["dissipation"] = model.dissipation;
  meta["site_energies"] = model.site_energies;
  meta["propagator"] = propagator_name(res.method);
  meta["t_max"] = t_max;
  meta["dt"] = dt;
  write_json(dir / "evolution.json", meta);
  std::cout << "p_sink(" << format_double(t_max) << ") = " << format_double(res.sink_population().back()) << "\n";
  return kExitOk;
}

int cmd_sweep_removal(json& cfg, std::uint64_t seed) {
  const auto g = resolve_graph(cfg, seed);
  RemovalSweepConfig sc;
  sc.base = g.graph;
  sc.removal_counts = get_or(cfg, "removal_counts", default_removal_counts());
  sc.realizations = get_or(cfg, "realizations", sc.realizations);
  sc.eps_grid = get_or(cfg, "eps", default_eps());
  sc.master_seed = seed;
  sc.zero_tolerance = get_or(cfg, "zero_tolerance", sc.zero_tolerance);
  sc.cross_check_stride = get_or(cfg, "cross_check_stride", sc.cross_check_stride);
  sc.cross_check_t_max = get_or(cfg, "t_max", sc.cross_check_t_max);
  sc.sink_rate = get_or(cfg, "sink_rate", sc.sink_rate);
  sc.threads = get_or(cfg, "threads", 1);
  const auto res = removal_sweep(sc);

  const auto dir = out_dir(cfg);
  const std::vector<std::pair<std::string, std::string>> params{{"M", std::to_string(sc.realizations)},
                                                                {"seed", std::to_string(seed)}};
  write_csv(dir / figure_filename("2", g.label, params), removal_sweep_table(res));
  write_csv(dir / figure_filename("3", g.label, params), quasi_dark_table(res, sc.eps_grid));
  write_csv(dir / ("removal_realizations_" + g.label + ".csv"), removal_realizations_table(res));
  for (const auto& r : res.rows)
    std::cout << "k=" << r.k << " trapped " << format_double(r.trapped_mean) << " dark "
              << format_double(r.dark_mean) << "\n";
  return kExitOk;
}

int cmd_sweep_dephasing(json& cfg, std::uint64_t seed) {
  const auto g = resolve_graph(cfg, seed);
  const auto search = search_from(cfg);
  const double sink = get_or(cfg, "sink_rate", 1.0);
  const double t_max = get_or(cfg, "t_max", 300.0);
  const double dt = get_or(cfg, "dt", 1.0);
  const double t_obj = get_or(cfg, "t_obj", default_observation_time(g.graph, sink));
  const int threads = get_or(cfg, "threads", 1);
  const auto policy = get_or<std::string>(cfg, "policy", "all-pairs");
  const auto dir = out_dir(cfg);
  const std::vector<std::pair<std::string, std::string>> params{{"tobj", format_double(t_obj)},
                                                                {"policy", policy}};

  DephasingOptimum opt;
  std::vector<double> times, coh, deph, cla;
  if (policy == "all-pairs") {
    auto rc = regime_curves(g.graph, t_max, dt, t_obj, search, sink, threads);
    opt = rc.optimum;
    times = rc.times;
    coh = rc.coherent;
    deph = rc.dephased;
    cla = rc.classical;
  } else if (policy == "endpoints") {
    const auto ends = opposite_ends(g.graph, g.cylinder);
    const NodeId in = get_or(cfg, "input", ends.first);
    const NodeId out = get_or(cfg, "target", ends.second);
    TransportSetup s{g.graph, Regime::kCoherent, 0.0, {}, sink};
    opt = optimize_dephasing_pair(s, in, out, t_obj, search);
    times = uniform_grid(t_max, dt);
    coh = pair_efficiency(s, in, out, times);
    s.regime = Regime::kDephasing;
    s.dephasing = opt.gamma;
    deph = pair_efficiency(s, in, out, times);
    s.regime = Regime::kClassical;
    cla = pair_efficiency(s, in, out, times);
  } else {
    throw ConfigError("policy must be 'all-pairs' or 'endpoints'");
  }
  write_csv(dir / ("dephasing_scan_" + g.label + ".csv"), dephasing_scan_table(opt));
  write_csv(dir / figure_filename("1", g.label, params),
            curves_table("p_sink(t) per regime, gamma*=" + format_double(opt.gamma) +
                             (opt.non_unimodal ? " (grid guard fired)" : ""),
                         times, {{"coherent", coh}, {"dephasing", deph}, {"classical", cla}}));
  std::cout << "gamma* = " << format_double(opt.gamma) << ", p_sink(t_obj) = " << format_double(opt.value)
            << (opt.non_unimodal ? " [non-unimodal]" : "") << "\n";

  const int compare = get_or(cfg, "compare_removal", 0);
  if (compare > 0) {
    if (policy != "all-pairs") throw ConfigError("compare_removal needs policy 'all-pairs'");
    NoiseVsRemovalConfig nc;
    nc.base = g.graph;
    nc.removal_count = compare;
    nc.realizations = get_or(cfg, "realizations", nc.realizations);
    nc.master_seed = seed;
    nc.t_max = t_max;
    nc.dt = dt;
    nc.t_obj = t_obj;
    nc.search = search;
    nc.sink_rate = sink;
    nc.threads = threads;
    const auto r = noise_vs_removal(nc);
    write_csv(dir / figure_filename("4", g.label, {{"k", std::to_string(compare)}, {"seed", std::to_string(seed)}}),
              curves_table("intact network with optimal dephasing and coherent, best removal realization " +
                               std::to_string(r.best_index) + " coherent",
                           r.times, {{"dephased", r.dephased}, {"coherent", r.coherent}, {"removed", r.removed}}));
  }
  return kExitOk;
}

int cmd_robustness(json& cfg, std::uint64_t seed) {
  const auto g = resolve_graph(cfg, seed, "cylinder");
  RobustnessConfig rc;
  rc.base = g.graph;
  rc.removal_counts = get_or(cfg, "removal_counts", default_removal_counts());
  rc.realizations = get_or(cfg, "realizations", rc.realizations);
  const auto ends = opposite_ends(g.graph, g.cylinder);
  rc.input = get_or(cfg, "input", ends.first);
  rc.target = get_or(cfg, "target", ends.second);
  rc.sink_rate = get_or(cfg, "sink_rate", rc.sink_rate);
  rc.t_obs = get_or(cfg, "t_obs", 0.0);
  rc.search = search_from(cfg);
  rc.noise_subsample = get_or(cfg, "noise_subsample", rc.noise_subsample);
  rc.master_seed = seed;
  rc.threads = get_or(cfg, "threads", 1);
  const auto res = robustness_rsd(rc);
  cfg["t_obs"] = res.t_obs;

  const auto dir = out_dir(cfg);
  const std::vector<std::pair<std::string, std::string>> params{{"M", std::to_string(rc.realizations)},
                                                                {"seed", std::to_string(seed)}};
  write_csv(dir / figure_filename("5", g.label, params), robustness_table(res));
  write_csv(dir / ("robustness_detail_" + g.label + ".csv"), robustness_detail_table(res));
  return kExitOk;
}

int cmd_controllability(json& cfg, std::uint64_t seed) {
  const auto sizes = get_or(cfg, "sizes", std::vector<int>{10, 20, 30});
  const double p = get_or(cfg, "p", 0.5);
  const int samples = get_or(cfg, "samples", 200);
  const auto rows = er_controllability_stats(sizes, p, samples, seed, get_or(cfg, "threads", 1));
  write_csv(out_dir(cfg) / ("controllability_p" + format_double(p) + "_S" + std::to_string(samples) + "_seed" +
                            std::to_string(seed) + ".csv"),
            er_stats_table(rows));
  for (const auto& r : rows)
    std::cout << "N=" << r.n << " controllable " << (r.controllable_fraction ? format_double(*r.controllable_fraction) : "n/a")
              << "\n";
  return kExitOk;
}

int cmd_perturb(json& cfg, std::uint64_t seed) {
  const auto g = resolve_graph(cfg, seed);
  const double delta = get_or(cfg, "delta", 0.1);
  const int trials = get_or(cfg, "max_trials", 1000);
  const auto mode = get_or(cfg, "site_energies", false) ? PerturbMode::kEdgeWeightsAndSiteEnergies
                                                         : PerturbMode::kEdgeWeights;
  const auto res = perturb_to_dark_free(g.graph, delta, trials, seed, {}, mode);
  const auto dir = out_dir(cfg);
  write_text_file(dir / "graph.txt", encode_graph(res.graph));
  json cert;
  cert["trial"] = res.trial;
  cert["site_energies"] = res.site_energies;
  cert["min_gap"] = res.min_gap;
  cert["min_abs_entry"] = res.min_abs_entry;
  std::vector<int> dark;
  const auto dec = res.spectrum;
  for (NodeId t = 1; t <= res.graph.size(); ++t) dark.push_back(dark_report(dec, t).dark_dimension);
  cert["dark_dimension_per_target"] = dark;
  write_json(dir / "certificate.json", cert);
  std::cout << "accepted trial " << res.trial << ", min gap " << format_double(res.min_gap) << "\n";
  return kExitOk;
}

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

int run(Command& c) {
  json cfg = json::object();
  if (!c.config_path.empty()) {
    try {
      cfg = json::parse(read_file(c.config_path));
    } catch (const json::parse_error& e) {
      throw ConfigError(c.config_path + ": " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError(c.config_path + ": config must be a JSON object");
    for (const auto& [key, value] : cfg.items())
      if (!c.keys.count(key)) throw ConfigError(c.config_path + ": unknown config key '" + key + "'");
  }
  for (const auto& f : c.flags)
    if (f.option->count() > 0) f.apply(cfg);

  std::uint64_t seed;
  if (cfg.contains("seed")) {
    seed = cfg["seed"].get<std::uint64_t>();
  } else {
    seed = random_seed();
    std::cout << "seed: " << seed << "\n";
  }
  cfg["seed"] = seed;
  cfg["command"] = c.name;

  const auto start = std::chrono::steady_clock::now();
  const int code = c.run(cfg, seed);
  finish(cfg, seed, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdark: dark subspaces and noise-assisted transport on quantum networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QDARK_VERSION);

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help, auto run) {
    auto c = std::make_unique<Command>();
    c->name = name;
    c->app = app.add_subcommand(name, help);
    c->run = run;
    common_flags(*c);
    commands.push_back(std::move(c));
    return commands.back().get();
  };

  auto* gen = add("generate", "write a network to graph.txt or graph.json", cmd_generate);
  graph_flags(*gen);
  flag<std::string>(*gen, "--format", "format", "text | json");

  auto* an = add("analyze", "dark subspace report for one target (report.json)", cmd_analyze);
  graph_flags(*an);
  flag<int>(*an, "--target", "target", "target node (default: last node)");
  flag<std::vector<double>>(*an, "--eps", "eps", "quasi-dark thresholds, comma separated");
  flag<double>(*an, "--zero-tolerance", "zero_tolerance", "overlap counted as zero below this");

  auto* ev = add("evolve", "open-system evolution to evolution.csv", cmd_evolve);
  graph_flags(*ev);
  flag<int>(*ev, "--target", "target", "target node coupled to the sink (default: last node)");
  flag<int>(*ev, "--input", "input", "localized initial site (default 1)");
  flag<double>(*ev, "--sink-rate", "sink_rate", "sink rate");
  flag<double>(*ev, "--dephasing", "dephasing", "uniform dephasing rate");
  flag<double>(*ev, "--dissipation", "dissipation", "uniform dissipation rate");
  flag<double>(*ev, "--t-max", "t_max", "final time");
  flag<double>(*ev, "--dt", "dt", "output grid spacing");
  flag<std::string>(*ev, "--method", "method", "auto | unitary | taylor | dense-expm | runge-kutta");
  ev->keys.insert({"amplitudes", "site_energies"});

  auto* sr = add("sweep-removal", "random link-removal sweep with spectral trapping statistics", cmd_sweep_removal);
  graph_flags(*sr);
  flag<std::vector<int>>(*sr, "--k", "removal_counts", "removal counts, comma separated (default 0..12)");
  flag<int>(*sr, "--realizations", "realizations", "geometries per removal count");
  flag<std::vector<double>>(*sr, "--eps", "eps", "quasi-dark thresholds, comma separated");
  flag<int>(*sr, "--cross-check-stride", "cross_check_stride", "simulate every n-th realization (0: never)");
  flag<double>(*sr, "--t-max", "t_max", "simulation horizon of the cross-check");
  flag<double>(*sr, "--sink-rate", "sink_rate", "sink rate");
  sr->keys.insert("zero_tolerance");

  auto* sd = add("sweep-dephasing", "optimal uniform dephasing and regime curves", cmd_sweep_dephasing);
  graph_flags(*sd);
  search_flags(*sd);
  flag<double>(*sd, "--t-obj", "t_obj", "objective time (default 4 * diameter / sink rate)");
  flag<double>(*sd, "--t-max", "t_max", "curve horizon");
  flag<double>(*sd, "--dt", "dt", "curve grid spacing");
  flag<double>(*sd, "--sink-rate", "sink_rate", "sink rate");
  flag<std::string>(*sd, "--policy", "policy", "all-pairs | endpoints");
  flag<int>(*sd, "--input", "input", "input node for policy endpoints");
  flag<int>(*sd, "--target", "target", "target node for policy endpoints");
  flag<int>(*sd, "--compare-removal", "compare_removal", "also compare against the best k-link removal");
  flag<int>(*sd, "--realizations", "realizations", "removal geometries searched for the comparison");

  auto* rb = add("robustness", "p_sink(t_obs) dispersion over removal geometries", cmd_robustness);
  graph_flags(*rb);
  search_flags(*rb);
  flag<std::vector<int>>(*rb, "--k", "removal_counts", "removal counts, comma separated (default 0..12)");
  flag<int>(*rb, "--realizations", "realizations", "geometries per removal count");
  flag<int>(*rb, "--input", "input", "input node (default: opposite end of the target)");
  flag<int>(*rb, "--target", "target", "target node");
  flag<double>(*rb, "--t-obs", "t_obs", "observation time (default 4 * diameter / sink rate)");
  flag<double>(*rb, "--sink-rate", "sink_rate", "sink rate");
  flag<int>(*rb, "--noise-subsample", "noise_subsample", "geometries used to optimize gamma per k");

  auto* cs = add("controllability-stats", "walk-matrix controllability of G(N, p)", cmd_controllability);
  flag<std::vector<int>>(*cs, "--sizes", "sizes", "node counts, comma separated");
  flag<double>(*cs, "--p", "p", "edge probability");
  flag<int>(*cs, "--samples", "samples", "samples per node count");

  auto* pw = add("perturb-weights", "search for an edge weighting without dark subspaces", cmd_perturb);
  graph_flags(*pw);
  flag<double>(*pw, "--delta", "delta", "relative perturbation amplitude");
  flag<int>(*pw, "--max-trials", "max_trials", "trial budget");
  flag<bool>(*pw, "--site-energies", "site_energies", "also perturb site energies (true | false)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  for (auto& c : commands) {
    if (!c->app->parsed()) continue;
    try {
      return run(*c);
    } catch (const ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUser;
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUser;
    } catch (const InvalidArgument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUser;
    } catch (const IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUser;
    } catch (const json::exception& e) {
      std::cerr << "error: bad config value: " << e.what() << "\n";
      return kExitUser;
    } catch (const NumericalError& e) {
      std::cerr << "numerical failure: " << e.what() << "\n";
      return kExitNumerical;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << "\n";
      return kExitNumerical;
    }
  }
  return kExitUser;
}
