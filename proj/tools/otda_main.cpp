// Command-line front end: single transports, adapt-classify-score runs,
// the rotating two-moons benchmark, and manifest-driven re-execution.
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 solver non-convergence.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otda/data.hpp"
#include "otda/mapping.hpp"
#include "otda/parallel.hpp"
#include "otda/pipeline.hpp"
#include "otda/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace otda;

namespace {

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

Metric metric_from_name(const std::string& s) {
  if (s == "sqeuclidean") return Metric::SquaredEuclidean;
  if (s == "euclidean") return Metric::Euclidean;
  if (s == "manhattan") return Metric::Manhattan;
  throw Error("unknown metric: " + s);
}

std::string strip_ws(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(strip_ws(item));
  return out;
}

// Applies a flat "key = value" file to option targets after the
// command line is parsed; any option the user passed explicitly keeps
// its command-line value.
class ConfigBinder {
 public:
  void bind(CLI::Option* opt, double& v) {
    add(opt, [&v](const std::string& s) { v = to_double(s); });
  }
  void bind(CLI::Option* opt, long& v) {
    add(opt, [&v](const std::string& s) { v = static_cast<long>(to_double(s)); });
  }
  void bind(CLI::Option* opt, int& v) {
    add(opt, [&v](const std::string& s) { v = static_cast<int>(to_double(s)); });
  }
  void bind(CLI::Option* opt, std::uint64_t& v) {
    add(opt, [&v](const std::string& s) {
      v = static_cast<std::uint64_t>(to_double(s));
    });
  }
  void bind(CLI::Option* opt, bool& v) {
    add(opt, [&v](const std::string& s) {
      if (s == "true" || s == "1" || s == "yes") v = true;
      else if (s == "false" || s == "0" || s == "no") v = false;
      else throw Error("invalid config value: " + s);
    });
  }
  void bind(CLI::Option* opt, std::string& v) {
    add(opt, [&v](const std::string& s) { v = s; });
  }
  void bind(CLI::Option* opt, std::vector<double>& v) {
    add(opt, [&v](const std::string& s) {
      v.clear();
      for (const std::string& item : split_list(s)) v.push_back(to_double(item));
    });
  }
  void bind(CLI::Option* opt, std::vector<std::string>& v) {
    add(opt, [&v](const std::string& s) { v = split_list(s); });
  }

  void apply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = strip_ws(line);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw Error("config line " + std::to_string(lineno) +
                    ": expected key = value");
      const std::string key = strip_ws(line.substr(0, eq));
      const std::string value = strip_ws(line.substr(eq + 1));
      const auto it = setters_.find(key);
      if (it == setters_.end())
        throw Error("unknown config key at line " + std::to_string(lineno) +
                    ": " + key);
      if (it->second.opt->count() == 0) {
        it->second.fn(value);
        applied_.insert(key);
      }
    }
  }

  bool supplied(const std::string& key) const {
    return applied_.count(key) > 0;
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const std::string&)> fn;
  };

  static double to_double(const std::string& s) {
    try {
      size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw Error("invalid config value: " + s);
      return v;
    } catch (const std::logic_error&) {
      throw Error("invalid config value: " + s);
    }
  }

  void add(CLI::Option* opt, std::function<void(const std::string&)> fn) {
    std::string name = opt->get_name();  // "--lambda"
    name.erase(0, name.find_first_not_of('-'));
    setters_[name] = {opt, std::move(fn)};
  }

  std::map<std::string, Entry> setters_;
  std::set<std::string> applied_;
};

// Flags shared by the run commands; mirrors FitConfig plus run plumbing.
struct SolverFlags {
  std::string method = "sinkhorn";
  double lambda = 1.0;
  double eta = 1.0;
  double alpha = 0.5;
  long graph_k = 8;
  long knn_k = 1;
  std::string metric = "sqeuclidean";
  bool normalize_cost = false;
  bool log_domain = false;
  double sinkhorn_tol = 1e-9;
  long sinkhorn_max_iters = 10000;
  double rel_tol = 1e-5;
  long max_outer_iters = 50;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "out";
  bool header = false;
  std::string config_path;
};

FitConfig to_fit_config(const SolverFlags& f) {
  FitConfig cfg;
  cfg.lambda = f.lambda;
  cfg.eta = f.eta;
  cfg.alpha = f.alpha;
  cfg.graph_k = f.graph_k;
  cfg.metric = metric_from_name(f.metric);
  cfg.normalize_cost = f.normalize_cost;
  cfg.log_domain = f.log_domain;
  cfg.sinkhorn_tol = f.sinkhorn_tol;
  cfg.sinkhorn_max_iters = f.sinkhorn_max_iters;
  cfg.rel_tol = f.rel_tol;
  cfg.max_outer_iters = f.max_outer_iters;
  return cfg;
}

json solver_to_json(const SolverFlags& f) {
  return json{{"method", f.method},
              {"lambda", f.lambda},
              {"eta", f.eta},
              {"alpha", f.alpha},
              {"graph_k", f.graph_k},
              {"knn_k", f.knn_k},
              {"metric", f.metric},
              {"normalize_cost", f.normalize_cost},
              {"log_domain", f.log_domain},
              {"sinkhorn_tol", f.sinkhorn_tol},
              {"sinkhorn_max_iters", f.sinkhorn_max_iters},
              {"rel_tol", f.rel_tol},
              {"max_outer_iters", f.max_outer_iters},
              {"seed", f.seed},
              {"jobs", f.jobs},
              {"out", f.out},
              {"header", f.header}};
}

SolverFlags solver_from_json(const json& j) {
  SolverFlags f;
  f.method = j.value("method", f.method);
  f.lambda = j.value("lambda", f.lambda);
  f.eta = j.value("eta", f.eta);
  f.alpha = j.value("alpha", f.alpha);
  f.graph_k = j.value("graph_k", f.graph_k);
  f.knn_k = j.value("knn_k", f.knn_k);
  f.metric = j.value("metric", f.metric);
  f.normalize_cost = j.value("normalize_cost", f.normalize_cost);
  f.log_domain = j.value("log_domain", f.log_domain);
  f.sinkhorn_tol = j.value("sinkhorn_tol", f.sinkhorn_tol);
  f.sinkhorn_max_iters = j.value("sinkhorn_max_iters", f.sinkhorn_max_iters);
  f.rel_tol = j.value("rel_tol", f.rel_tol);
  f.max_outer_iters = j.value("max_outer_iters", f.max_outer_iters);
  f.seed = j.value("seed", f.seed);
  f.jobs = j.value("jobs", f.jobs);
  f.out = j.value("out", f.out);
  f.header = j.value("header", f.header);
  return f;
}

struct TransportArgs {
  SolverFlags s;
  std::string source;
  std::string target;
};

struct AdaptArgs {
  SolverFlags s;
  std::string source;
  std::string target;
  std::string test;
  std::string semi;
  std::vector<double> grid_lambda;
  std::vector<double> grid_eta;
};

struct BenchArgs {
  SolverFlags s;
  std::vector<double> angles = {10, 20, 30, 40, 50, 70, 90};
  std::vector<std::string> methods = {"exact", "sinkhorn", "gl", "laplace"};
  long trials = 10;
  long n_per_class = 150;
  double noise = 0.1;
  // per-method (lambda, eta) resolved at dispatch time
  std::map<std::string, std::pair<double, double>> params;
};

struct RerunArgs {
  std::string manifest;
  std::string out;
  int jobs = 0;
};

// Rebuilds d.y against ref's label table so integer ids agree across
// files; labels unseen in ref get fresh ids (they can never be
// predicted, only scored as misses).
void align_class_ids(const LabeledDataset& ref, LabeledDataset& d) {
  std::map<std::string, int> lut;
  for (size_t i = 0; i < ref.class_names.size(); ++i)
    lut[ref.class_names[i]] = static_cast<int>(i);
  std::vector<std::string> names = ref.class_names;
  for (int& id : d.y) {
    const std::string& nm = d.class_names[static_cast<size_t>(id)];
    auto it = lut.find(nm);
    if (it == lut.end()) {
      it = lut.emplace(nm, static_cast<int>(names.size())).first;
      names.push_back(nm);
    }
    id = it->second;
  }
  d.class_names = std::move(names);
}

// One label token per target row; '?', '-1' or an empty line mean
// unknown. Known tokens must name a source class.
std::vector<int> load_partial_labels(const std::string& path,
                                     const LabeledDataset& source,
                                     Index n_target) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::map<std::string, int> lut;
  for (size_t i = 0; i < source.class_names.size(); ++i)
    lut[source.class_names[i]] = static_cast<int>(i);
  std::vector<int> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line == "?" || line == "-1") {
      out.push_back(-1);
      continue;
    }
    const auto it = lut.find(line);
    if (it == lut.end())
      throw Error("unknown partial label at line " + std::to_string(lineno) +
                  ": " + line);
    out.push_back(it->second);
  }
  if (static_cast<Index>(out.size()) != n_target)
    throw Error("partial label count mismatch");
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct ResultRow {
  std::string method;
  std::string key;  // angle or file pair
  std::uint64_t seed;
  double error;
  double time_ms;
};

void write_results_csv(const fs::path& path, const std::string& key_name,
                       const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file: " + path.string());
  out << "method," << key_name << ",seed,error,time_ms\n";
  for (const ResultRow& r : rows)
    out << r.method << ',' << r.key << ',' << r.seed << ',' << num(r.error)
        << ',' << std::fixed << std::setprecision(3) << r.time_ms
        << std::defaultfloat << '\n';
}

void write_manifest(const fs::path& dir, const std::string& command,
                    std::uint64_t seed, const json& config,
                    const json& metrics, const json& timings) {
  json man{{"command", command}, {"version", kVersion},    {"seed", seed},
           {"config", config},   {"metrics", metrics},     {"timings", timings}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot open file: " + (dir / "manifest.json").string());
  out << man.dump(2) << '\n';
}

// ---------------------------------------------------------------- transport

json run_transport(const TransportArgs& a, json& timings) {
  Timer t;
  const Method m = method_from_string(a.s.method);
  const bool needs_labels =
      m == Method::GroupLassoOT || m == Method::LaplaceOT;
  LabeledDataset source;
  if (needs_labels) {
    source = load_labeled(a.source, a.s.header);
  } else {
    source.X = load_matrix(a.source, a.s.header);
    source.y.assign(static_cast<size_t>(source.X.rows()), 0);
    source.class_names = {"0"};
  }
  const Matrix target = load_matrix(a.target, a.s.header);
  const FitConfig cfg = to_fit_config(a.s);

  const AdaptationModel model = fit(m, source, target, cfg);
  // report the plan's cost under the raw ground metric, before any
  // normalization used for solving
  const CostMatrix raw = pairwise_cost(source.X, target, cfg.metric);
  const double cost = model.coupling.transport_cost(raw.values);

  fs::create_directories(a.s.out);
  save_matrix((fs::path(a.s.out) / "coupling.csv").string(),
              model.coupling.plan);
  save_matrix((fs::path(a.s.out) / "mapped.csv").string(),
              model.mapped_source);

  std::cout << "transport cost: " << num(cost) << "\n"
            << "marginal residual: " << num(model.coupling.marginal_residual())
            << "\n";

  timings["total_ms"] = t.ms();
  return json{{"transport_cost", cost},
              {"marginal_residual", model.coupling.marginal_residual()},
              {"outer_iterations", model.trace.records.size()}};
}

// -------------------------------------------------------------------- adapt

json run_adapt(const AdaptArgs& a, json& timings) {
  Timer t;
  const Method m = method_from_string(a.s.method);
  LabeledDataset source = load_labeled(a.source, a.s.header);
  LabeledDataset target = load_labeled(a.target, a.s.header);
  align_class_ids(source, target);
  LabeledDataset score = target;
  if (!a.test.empty()) {
    score = load_labeled(a.test, a.s.header);
    align_class_ids(source, score);
  }

  FitConfig cfg = to_fit_config(a.s);
  json grid_scores = json::array();
  if (!a.grid_lambda.empty() || !a.grid_eta.empty()) {
    const std::vector<double> ls =
        a.grid_lambda.empty() ? std::vector<double>{cfg.lambda} : a.grid_lambda;
    const std::vector<double> es =
        a.grid_eta.empty() ? std::vector<double>{cfg.eta} : a.grid_eta;
    std::vector<GridPoint> grid;
    for (double l : ls)
      for (double e : es) grid.push_back({l, e});
    const GridResult r =
        grid_validate(m, source, score, grid, cfg, a.s.knn_k, a.s.jobs);
    for (const GridScore& g : r.scores)
      grid_scores.push_back(json{{"lambda", g.point.lambda},
                                 {"eta", g.point.eta},
                                 {"accuracy", g.accuracy}});
    cfg.lambda = r.best.lambda;
    cfg.eta = r.best.eta;
  }

  std::vector<int> partials;
  if (!a.semi.empty())
    partials = load_partial_labels(a.semi, source, target.size());

  const AdaptationModel model = fit(m, source, target.X, cfg, partials);
  const std::vector<int> pred =
      knn_predict(model.mapped_source, source.y, score.X, a.s.knn_k);
  const Evaluation ev = evaluate(pred, score.y);
  const CostMatrix raw = pairwise_cost(source.X, target.X, cfg.metric);

  fs::create_directories(a.s.out);
  save_matrix((fs::path(a.s.out) / "coupling.csv").string(),
              model.coupling.plan);
  save_matrix((fs::path(a.s.out) / "mapped.csv").string(),
              model.mapped_source);
  const std::string pair =
      fs::path(a.source).filename().string() + "->" +
      fs::path(a.test.empty() ? a.target : a.test).filename().string();
  write_results_csv(fs::path(a.s.out) / "results.csv", "pair",
                    {{method_name(m), pair, a.s.seed, ev.error_rate, t.ms()}});

  std::cout << "accuracy: " << num(ev.accuracy) << "\n"
            << "error rate: " << num(ev.error_rate) << "\n";
  json per_class;
  for (const auto& [cls, acc] : ev.per_class_accuracy) {
    const std::string name = score.class_names[static_cast<size_t>(cls)];
    std::cout << "class " << name << ": " << num(acc) << "\n";
    per_class[name] = acc;
  }

  json metrics{{"accuracy", ev.accuracy},
               {"error_rate", ev.error_rate},
               {"per_class_accuracy", per_class},
               {"transport_cost", model.coupling.transport_cost(raw.values)},
               {"marginal_residual", model.coupling.marginal_residual()},
               {"lambda", cfg.lambda},
               {"eta", cfg.eta},
               {"semi_supervised", model.semi_supervised}};
  if (!grid_scores.empty()) metrics["grid"] = grid_scores;
  timings["total_ms"] = t.ms();
  return metrics;
}

// ------------------------------------------------------------------- bench

// Tuned on the default generator settings (150 per class, noise 0.1)
// against costs normalized to [0, 1].
std::pair<double, double> bench_default_params(Method m) {
  switch (m) {
    case Method::ExactOT: return {0.0, 0.0};
    case Method::EntropicOT: return {0.01, 0.0};
    case Method::GroupLassoOT: return {0.03, 0.5};
    case Method::LaplaceOT: return {0.01, 2.0};
  }
  throw Error("unknown method");
}

json run_bench(const BenchArgs& a, json& timings) {
  Timer t;
  if (a.trials < 1) throw Error("invalid benchmark options");
  if (a.n_per_class < 1) throw Error("invalid benchmark options");
  if (a.angles.empty() || a.methods.empty())
    throw Error("invalid benchmark options");
  std::vector<Method> methods;
  for (const std::string& name : a.methods)
    methods.push_back(method_from_string(name));

  const Index n_methods = static_cast<Index>(methods.size());
  const Index n_angles = static_cast<Index>(a.angles.size());
  const Index n_runs = n_methods * n_angles * a.trials;
  std::vector<ResultRow> rows(static_cast<size_t>(n_runs));

  parallel_for(n_runs, a.s.jobs, [&](Index i) {
    const Index trial = i % a.trials;
    const Index ai = (i / a.trials) % n_angles;
    const Index mi = i / (a.trials * n_angles);
    const Method m = methods[static_cast<size_t>(mi)];

    TwoMoonsSpec spec;
    spec.n_per_class = a.n_per_class;
    spec.rotation_degrees = a.angles[static_cast<size_t>(ai)];
    spec.noise_std = a.noise;
    spec.seed = a.s.seed + static_cast<std::uint64_t>(trial);
    const TwoMoonsData data = two_moons(spec);

    FitConfig cfg = to_fit_config(a.s);
    cfg.normalize_cost = true;  // keeps lambda on a shared [0, 1] cost scale
    const auto& p = a.params.at(method_name(m));
    cfg.lambda = p.first;
    cfg.eta = p.second;

    Timer rt;
    const AdaptationModel model = fit(m, data.source, data.target.X, cfg);
    const std::vector<int> pred = knn_predict(
        model.mapped_source, data.source.y, data.test.X, a.s.knn_k);
    const Evaluation ev = evaluate(pred, data.test.y);
    std::ostringstream angle;
    angle << a.angles[static_cast<size_t>(ai)];
    rows[static_cast<size_t>(i)] = {method_name(m), angle.str(), spec.seed,
                                    ev.error_rate, rt.ms()};
  });

  // deterministic reduction in (method, angle, trial) order
  json mean_error;
  std::cout << std::left << std::setw(12) << "method";
  for (double ang : a.angles) {
    std::ostringstream os;
    os << ang;
    std::cout << std::right << std::setw(8) << os.str();
  }
  std::cout << "\n";
  for (Index mi = 0; mi < n_methods; ++mi) {
    const std::string name = method_name(methods[static_cast<size_t>(mi)]);
    std::cout << std::left << std::setw(12) << name;
    for (Index ai = 0; ai < n_angles; ++ai) {
      double sum = 0.0;
      for (Index tr = 0; tr < a.trials; ++tr)
        sum += rows[static_cast<size_t>((mi * n_angles + ai) * a.trials + tr)]
                   .error;
      const double mean = sum / static_cast<double>(a.trials);
      std::ostringstream key;
      key << a.angles[static_cast<size_t>(ai)];
      mean_error[name][key.str()] = mean;
      std::cout << std::right << std::setw(8) << std::fixed
                << std::setprecision(3) << mean << std::defaultfloat;
    }
    std::cout << "\n";
  }

  fs::create_directories(a.s.out);
  write_results_csv(fs::path(a.s.out) / "results.csv", "angle", rows);

  json runs = json::array();
  for (const ResultRow& r : rows)
    runs.push_back(json{{"method", r.method},
                        {"angle", r.key},
                        {"seed", r.seed},
                        {"error", r.error}});
  timings["total_ms"] = t.ms();
  return json{{"mean_error", mean_error}, {"runs", runs}};
}

json transport_to_json(const TransportArgs& a) {
  json j = solver_to_json(a.s);
  j["source"] = a.source;
  j["target"] = a.target;
  return j;
}

json adapt_to_json(const AdaptArgs& a) {
  json j = solver_to_json(a.s);
  j["source"] = a.source;
  j["target"] = a.target;
  j["test"] = a.test;
  j["semi_supervised_labels"] = a.semi;
  j["grid_lambda"] = a.grid_lambda;
  j["grid_eta"] = a.grid_eta;
  return j;
}

json bench_to_json(const BenchArgs& a) {
  json j = solver_to_json(a.s);
  j["angles"] = a.angles;
  j["methods"] = a.methods;
  j["trials"] = a.trials;
  j["n_per_class"] = a.n_per_class;
  j["noise"] = a.noise;
  json params;
  for (const auto& [name, p] : a.params)
    params[name] = json{{"lambda", p.first}, {"eta", p.second}};
  j["method_params"] = params;
  return j;
}

// --------------------------------------------------------------------rerun

void print_metric_diff(const json& want, const json& got) {
  const json fw = want.flatten();
  const json fg = got.flatten();
  for (const auto& [key, val] : fw.items()) {
    if (!fg.contains(key))
      std::cout << "  " << key << ": " << val << " -> (missing)\n";
    else if (fg.at(key) != val)
      std::cout << "  " << key << ": " << val << " -> " << fg.at(key) << "\n";
  }
  for (const auto& [key, val] : fg.items())
    if (!fw.contains(key))
      std::cout << "  " << key << ": (missing) -> " << val << "\n";
}

int do_rerun(const RerunArgs& r) {
  std::ifstream in(r.manifest);
  if (!in) throw Error("cannot open file: " + r.manifest);
  json man;
  try {
    in >> man;
  } catch (const json::exception& e) {
    throw Error("manifest parse: " + std::string(e.what()));
  }
  if (!man.contains("command") || !man.contains("config") ||
      !man.contains("metrics"))
    throw Error("manifest missing required fields");
  const std::string command = man["command"];
  const std::string version = man.value("version", "");
  if (version != kVersion)
    std::cerr << "warning: manifest version '" << version
              << "' differs from '" << kVersion << "'\n";
  const json& cfg = man["config"];
  const std::string out_dir =
      r.out.empty() ? (fs::path(r.manifest).parent_path() / "rerun").string()
                    : r.out;

  json metrics, timings;
  std::uint64_t seed = 0;
  if (command == "transport") {
    TransportArgs a;
    a.s = solver_from_json(cfg);
    a.source = cfg.at("source");
    a.target = cfg.at("target");
    a.s.out = out_dir;
    if (r.jobs > 0) a.s.jobs = r.jobs;
    seed = a.s.seed;
    metrics = run_transport(a, timings);
  } else if (command == "adapt") {
    AdaptArgs a;
    a.s = solver_from_json(cfg);
    a.source = cfg.at("source");
    a.target = cfg.at("target");
    a.test = cfg.value("test", "");
    a.semi = cfg.value("semi_supervised_labels", "");
    a.grid_lambda = cfg.value("grid_lambda", std::vector<double>{});
    a.grid_eta = cfg.value("grid_eta", std::vector<double>{});
    a.s.out = out_dir;
    if (r.jobs > 0) a.s.jobs = r.jobs;
    seed = a.s.seed;
    metrics = run_adapt(a, timings);
  } else if (command == "bench-twomoons") {
    BenchArgs a;
    a.s = solver_from_json(cfg);
    a.angles = cfg.value("angles", a.angles);
    a.methods = cfg.value("methods", a.methods);
    a.trials = cfg.value("trials", a.trials);
    a.n_per_class = cfg.value("n_per_class", a.n_per_class);
    a.noise = cfg.value("noise", a.noise);
    for (const auto& [name, p] : cfg.at("method_params").items())
      a.params[name] = {p.at("lambda").get<double>(),
                        p.at("eta").get<double>()};
    a.s.out = out_dir;
    if (r.jobs > 0) a.s.jobs = r.jobs;
    seed = a.s.seed;
    metrics = run_bench(a, timings);
  } else {
    throw Error("unknown manifest command: " + command);
  }

  write_manifest(out_dir, command, seed, cfg, metrics, timings);
  if (metrics == man["metrics"]) {
    std::cout << "metrics match\n";
    return 0;
  }
  std::cout << "metrics differ\n";
  print_metric_diff(man["metrics"], metrics);
  return 1;
}

struct OptionRefs {
  CLI::Option* lambda = nullptr;
  CLI::Option* eta = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* graph_k = nullptr;
};

OptionRefs add_solver_flags(CLI::App* cmd, SolverFlags& f, bool with_method,
                            ConfigBinder& cfg) {
  OptionRefs refs;
  if (with_method)
    cfg.bind(cmd->add_option("--method", f.method,
                             "exact | sinkhorn | gl | laplace (aliases "
                             "OT-exact | OT-IT | OT-GL | OT-Laplace)"),
             f.method);
  refs.lambda =
      cmd->add_option("--lambda", f.lambda, "entropic regularization weight");
  cfg.bind(refs.lambda, f.lambda);
  refs.eta = cmd->add_option("--eta", f.eta,
                             "class-regularizer weight (gl and laplace)");
  cfg.bind(refs.eta, f.eta);
  refs.alpha = cmd->add_option(
      "--alpha", f.alpha, "laplace source/target trade-off in [0, 1]");
  cfg.bind(refs.alpha, f.alpha);
  refs.graph_k = cmd->add_option("--graph-k", f.graph_k,
                                 "neighborhood size for similarity graphs");
  cfg.bind(refs.graph_k, f.graph_k);
  cfg.bind(cmd->add_option("--knn-k", f.knn_k, "classifier neighborhood size"),
           f.knn_k);
  cfg.bind(cmd->add_option("--metric", f.metric,
                           "ground cost: sqeuclidean | euclidean | manhattan"),
           f.metric);
  cfg.bind(cmd->add_flag("--normalize-cost", f.normalize_cost,
                         "rescale costs to max 1 before solving"),
           f.normalize_cost);
  cfg.bind(cmd->add_flag("--log-domain", f.log_domain,
                         "force the stabilized scaling updates"),
           f.log_domain);
  cfg.bind(cmd->add_option("--sinkhorn-tol", f.sinkhorn_tol,
                           "marginal residual tolerance"),
           f.sinkhorn_tol);
  cfg.bind(cmd->add_option("--sinkhorn-max-iters", f.sinkhorn_max_iters,
                           "scaling iteration cap"),
           f.sinkhorn_max_iters);
  cfg.bind(cmd->add_option("--rel-tol", f.rel_tol,
                           "relative objective-decrease stop (gl and laplace)"),
           f.rel_tol);
  cfg.bind(cmd->add_option("--max-outer-iters", f.max_outer_iters,
                           "outer iteration cap (gl and laplace)"),
           f.max_outer_iters);
  cfg.bind(cmd->add_option("--seed", f.seed, "RNG seed"), f.seed);
  cfg.bind(cmd->add_option("--jobs", f.jobs, "worker threads")
               ->envname("OTDA_JOBS"),
           f.jobs);
  cfg.bind(cmd->add_option("--out", f.out, "output directory"), f.out);
  cfg.bind(cmd->add_flag("--header", f.header,
                         "input files start with a header row"),
           f.header);
  cmd->add_option("--config", f.config_path,
                  "key = value configuration file; flags take precedence");
  return refs;
}

void warn_ignored_flags(const std::string& method, const OptionRefs& refs) {
  const Method m = method_from_string(method);
  const bool gcg = m == Method::GroupLassoOT || m == Method::LaplaceOT;
  if (!gcg && refs.eta->count() > 0)
    std::cerr << "warning: --eta is ignored by method " << method << "\n";
  if (m != Method::LaplaceOT) {
    if (refs.alpha->count() > 0)
      std::cerr << "warning: --alpha is ignored by method " << method << "\n";
    if (refs.graph_k->count() > 0)
      std::cerr << "warning: --graph-k is ignored by method " << method
                << "\n";
  }
  if (m == Method::ExactOT && refs.lambda->count() > 0)
    std::cerr << "warning: --lambda is ignored by method " << method << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regularized discrete optimal transport for domain adaptation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  TransportArgs T;
  AdaptArgs A;
  BenchArgs B;
  RerunArgs R;
  ConfigBinder t_cfg, a_cfg, b_cfg;

  CLI::App* t = app.add_subcommand(
      "transport", "solve one coupling and map the source samples");
  const OptionRefs t_refs = add_solver_flags(t, T.s, true, t_cfg);
  t->add_option("--source", T.source,
                "source samples (csv/tsv; gl and laplace expect a trailing "
                "label column)")
      ->required();
  t->add_option("--target", T.target, "target samples (csv/tsv, no labels)")
      ->required();

  CLI::App* ad = app.add_subcommand(
      "adapt", "fit a transport, map the source, classify and score");
  const OptionRefs a_refs = add_solver_flags(ad, A.s, true, a_cfg);
  ad->add_option("--source", A.source, "labeled source samples")->required();
  ad->add_option("--target", A.target,
                 "labeled target samples (labels used only for scoring)")
      ->required();
  a_cfg.bind(ad->add_option("--test", A.test,
                            "labeled held-out samples scored instead of the "
                            "target file"),
             A.test);
  a_cfg.bind(ad->add_option("--semi-supervised", A.semi,
                            "partial target labels, one per line ('?', '-1' "
                            "or an empty line = unknown)"),
             A.semi);
  a_cfg.bind(ad->add_option("--grid-lambda", A.grid_lambda,
                            "lambda candidates for validation")
                 ->delimiter(','),
             A.grid_lambda);
  a_cfg.bind(ad->add_option("--grid-eta", A.grid_eta,
                            "eta candidates for validation")
                 ->delimiter(','),
             A.grid_eta);

  CLI::App* be = app.add_subcommand(
      "bench-twomoons", "rotating two-moons benchmark (mean error table)");
  const OptionRefs b_refs = add_solver_flags(be, B.s, false, b_cfg);
  b_cfg.bind(be->add_option("--angles", B.angles, "rotation angles in degrees")
                 ->delimiter(','),
             B.angles);
  b_cfg.bind(be->add_option("--methods", B.methods, "methods to benchmark")
                 ->delimiter(','),
             B.methods);
  b_cfg.bind(be->add_option("--trials", B.trials, "realizations per cell"),
             B.trials);
  b_cfg.bind(be->add_option("--n-per-class", B.n_per_class,
                            "source/target samples per class"),
             B.n_per_class);
  b_cfg.bind(be->add_option("--noise", B.noise, "generator noise level"),
             B.noise);

  CLI::App* re = app.add_subcommand(
      "rerun", "re-execute a manifest and compare the stored metrics");
  re->add_option("--manifest", R.manifest, "path to manifest.json")
      ->required();
  re->add_option("--out", R.out, "output directory (default: <manifest "
                                 "directory>/rerun)");
  re->add_option("--jobs", R.jobs, "worker threads")->envname("OTDA_JOBS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    json timings;
    if (*t) {
      if (!T.s.config_path.empty()) t_cfg.apply(T.s.config_path);
      warn_ignored_flags(T.s.method, t_refs);
      const json metrics = run_transport(T, timings);
      write_manifest(T.s.out, "transport", T.s.seed, transport_to_json(T),
                     metrics, timings);
      return 0;
    }
    if (*ad) {
      if (!A.s.config_path.empty()) a_cfg.apply(A.s.config_path);
      warn_ignored_flags(A.s.method, a_refs);
      const json metrics = run_adapt(A, timings);
      write_manifest(A.s.out, "adapt", A.s.seed, adapt_to_json(A), metrics,
                     timings);
      return 0;
    }
    if (*be) {
      if (!B.s.config_path.empty()) b_cfg.apply(B.s.config_path);
      const bool lambda_set =
          b_refs.lambda->count() > 0 || b_cfg.supplied("lambda");
      const bool eta_set = b_refs.eta->count() > 0 || b_cfg.supplied("eta");
      for (const std::string& name : B.methods) {
        const Method m = method_from_string(name);
        auto p = bench_default_params(m);
        if (lambda_set) p.first = B.s.lambda;
        if (eta_set) p.second = B.s.eta;
        B.params[method_name(m)] = p;
      }
      const json metrics = run_bench(B, timings);
      write_manifest(B.s.out, "bench-twomoons", B.s.seed, bench_to_json(B),
                     metrics, timings);
      return 0;
    }
    if (*re) return do_rerun(R);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
