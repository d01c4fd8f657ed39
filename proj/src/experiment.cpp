#include "pnnchm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "pnnchm/fetch.hpp"
#include "pnnchm/fitness.hpp"

namespace pnnchm {

using nlohmann::json;

std::string Contender::name() const {
  return hybrid ? std::string("cHM") : std::string(to_string(single));
}

Contender contender_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "chm") return Contender{};
  return Contender{false, method_from_string(name)};
}

std::vector<Contender> default_contenders() {
  return {Contender{}, {false, Method::BAT}, {false, Method::BFO},
          {false, Method::PSO}, {false, Method::FPA}, {false, Method::SA}};
}

void ExperimentConfig::validate() const {
  if (datasets.empty()) throw std::invalid_argument("no datasets selected");
  if (methods.empty()) throw std::invalid_argument("no methods selected");
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  chm.validate();
}

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view section) {
  if (!obj.is_object()) {
    throw std::invalid_argument(std::string(section) + " must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in " + std::string(section));
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
  }
}

Bounds read_bounds(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 2) {
    throw std::invalid_argument(std::string(key) + " must be [lower, upper]");
  }
  return Bounds{v[0].get<double>(), v[1].get<double>()};
}

void parse_params(const json& root, MethodParamSet& p) {
  if (root.contains("pso")) {
    const auto& s = root["pso"];
    check_keys(s, {"omega", "c1", "c2", "adjust_omega", "omega_min"}, "pso");
    read(s, "omega", p.pso.omega);
    read(s, "c1", p.pso.c1);
    read(s, "c2", p.pso.c2);
    read(s, "adjust_omega", p.pso.adjust_omega);
    read(s, "omega_min", p.pso.omega_min);
  }
  if (root.contains("bat")) {
    const auto& s = root["bat"];
    check_keys(s, {"loudness", "alpha", "gamma", "min_f", "max_f", "pulse_rate"}, "bat");
    read(s, "loudness", p.bat.loudness);
    read(s, "alpha", p.bat.alpha);
    read(s, "gamma", p.bat.gamma);
    read(s, "min_f", p.bat.min_f);
    read(s, "max_f", p.bat.max_f);
    read(s, "pulse_rate", p.bat.pulse_rate);
  }
  if (root.contains("bfo")) {
    const auto& s = root["bfo"];
    check_keys(s, {"ed_s", "c_i", "p_ed", "n_c", "n_s", "d_a", "w_a", "h_r", "w_r", "n_re"},
               "bfo");
    read(s, "ed_s", p.bfo.ed_s);
    read(s, "c_i", p.bfo.c_i);
    read(s, "p_ed", p.bfo.p_ed);
    read(s, "n_c", p.bfo.n_c);
    read(s, "n_s", p.bfo.n_s);
    read(s, "d_a", p.bfo.d_a);
    read(s, "w_a", p.bfo.w_a);
    read(s, "h_r", p.bfo.h_r);
    read(s, "w_r", p.bfo.w_r);
    read(s, "n_re", p.bfo.n_re);
  }
  if (root.contains("sa")) {
    const auto& s = root["sa"];
    check_keys(s, {"temperature", "alpha", "s_t", "d"}, "sa");
    read(s, "temperature", p.sa.temperature);
    read(s, "alpha", p.sa.alpha);
    read(s, "s_t", p.sa.s_t);
    read(s, "d", p.sa.d);
  }
  if (root.contains("fpa")) {
    const auto& s = root["fpa"];
    check_keys(s, {"switch_probability", "levy_beta", "levy_scale"}, "fpa");
    read(s, "switch_probability", p.fpa.switch_probability);
    read(s, "levy_beta", p.fpa.levy_beta);
    read(s, "levy_scale", p.fpa.levy_scale);
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root,
             {"datasets", "methods", "runs", "seed", "test_fraction", "zscore", "svg",
              "threads", "data_dir", "registry", "chm", "pso", "bat", "bfo", "sa", "fpa"},
             "config");
  ExperimentConfig cfg;
  read(root, "datasets", cfg.datasets);
  if (root.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : root["methods"]) {
      cfg.methods.push_back(contender_from_string(m.get<std::string>()));
    }
  }
  read(root, "runs", cfg.runs);
  read(root, "seed", cfg.seed);
  read(root, "test_fraction", cfg.test_fraction);
  read(root, "zscore", cfg.zscore);
  read(root, "svg", cfg.svg);
  read(root, "threads", cfg.threads);
  if (root.contains("data_dir")) cfg.data_dir = root["data_dir"].get<std::string>();
  if (root.contains("registry")) cfg.registry = root["registry"].get<std::string>();

  if (root.contains("chm")) {
    const auto& c = root["chm"];
    check_keys(c,
               {"n", "n_p", "methods", "fitness_threshold", "probing_multiplier",
                "fit_multiplier", "init_range", "bounds", "smoothing"},
               "chm");
    read(c, "n", cfg.chm.n);
    read(c, "n_p", cfg.chm.n_p);
    if (c.contains("methods")) {
      cfg.chm.methods.clear();
      for (const auto& m : c["methods"]) {
        cfg.chm.methods.push_back(method_from_string(m.get<std::string>()));
      }
    }
    read(c, "fitness_threshold", cfg.chm.fitness_threshold);
    read(c, "probing_multiplier", cfg.chm.probing_multiplier);
    read(c, "fit_multiplier", cfg.chm.fit_multiplier);
    if (c.contains("init_range")) cfg.chm.init_range = read_bounds(c["init_range"], "init_range");
    if (c.contains("bounds")) cfg.chm.bounds = read_bounds(c["bounds"], "bounds");
    if (c.contains("smoothing")) {
      cfg.chm.kind = smoothing_kind_from_string(c["smoothing"].get<std::string>());
    }
  }
  parse_params(root, cfg.chm.params);
  if (cfg.runs < 1) throw std::invalid_argument("runs must be at least 1");
  cfg.chm.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  return parse_experiment_config(text);
}

bool BenchmarkReport::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok(); });
}

RunRecord run_once(const Dataset& ds, const Contender& method,
                   const ExperimentConfig& cfg, int run) {
  RunRecord rec;
  rec.run = run;
  rec.seed = cfg.seed + static_cast<std::uint64_t>(run);

  Split split = stratified_split(ds, SplitSpec{cfg.test_fraction, rec.seed});
  if (cfg.zscore) {
    const ZScore z = fit_zscore(split.train);
    split.train = apply_zscore(split.train, z);
    split.test = apply_zscore(split.test, z);
  }

  ChmConfig chm = cfg.chm;
  chm.seed = rec.seed;
  TrainResult tr = method.hybrid ? chm_train(split.train, split.test, chm)
                                 : single_train(method.single, split.train, split.test, chm);

  auto train = std::make_shared<const Dataset>(std::move(split.train));
  auto test = std::make_shared<const Dataset>(std::move(split.test));
  const ErrorRateObjective held(train, test, chm.kind);
  const auto predictions = held.predict(tr.best.position);
  rec.metrics = compute_metrics(predictions, test->labels, train->num_classes());
  rec.metrics.seed = rec.seed;
  rec.train_fitness = tr.best.fitness.value_or(std::numeric_limits<double>::quiet_NaN());
  rec.smoothing = tr.smoothing.to_vector();
  rec.fe_used = tr.fe_used;
  if (method.hybrid) rec.trace = std::move(tr.trace);
  return rec;
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const auto registry =
      load_registry(cfg.registry.empty() ? default_registry_path() : cfg.registry);
  const auto dir = cfg.data_dir.empty() ? data_directory() : cfg.data_dir;

  BenchmarkReport report;
  report.methods = cfg.methods;
  report.portfolio = cfg.chm.methods;
  report.iterations = cfg.chm.n;

  std::vector<const DatasetDescriptor*> descriptors;
  if (cfg.datasets.size() == 1 && cfg.datasets.front() == "all") {
    for (const auto& d : registry) descriptors.push_back(&d);
  } else {
    for (const auto& name : cfg.datasets) descriptors.push_back(&find_descriptor(registry, name));
  }

  const std::size_t n_methods = cfg.methods.size();
  const auto runs = static_cast<std::size_t>(cfg.runs);
  std::vector<std::optional<Dataset>> data(descriptors.size());
  std::vector<std::string> load_errors(descriptors.size());
  for (std::size_t d = 0; d < descriptors.size(); ++d) {
    const auto& desc = *descriptors[d];
    report.datasets.push_back(desc.name);
    report.display_names.push_back(desc.display_name);
    try {
      const auto path = dir / desc.file;
      if (!std::filesystem::exists(path)) {
        throw std::runtime_error("dataset file missing: " + path.string() +
                                 " (run `pnn_chm fetch`)");
      }
      data[d] = load_csv(path, desc);
      if (log) {
        for (const auto& w : validation_warnings(*data[d], desc)) {
          *log << desc.name << ": warning: " << w << '\n';
        }
      }
    } catch (const std::exception& e) {
      load_errors[d] = e.what();
      if (log) *log << desc.name << ": " << e.what() << '\n';
    }
  }

  struct Task {
    std::size_t dataset, method, run;
  };
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < descriptors.size(); ++d) {
    if (!data[d]) continue;
    for (std::size_t m = 0; m < n_methods; ++m) {
      for (std::size_t r = 0; r < runs; ++r) tasks.push_back({d, m, r});
    }
  }

  const std::size_t cell_count = descriptors.size() * n_methods;
  std::vector<std::optional<RunRecord>> results(cell_count * runs);
  std::vector<std::string> errors(cell_count * runs);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task t = tasks[i];
      const std::size_t slot = (t.dataset * n_methods + t.method) * runs + t.run;
      try {
        results[slot] = run_once(*data[t.dataset], cfg.methods[t.method], cfg,
                                 static_cast<int>(t.run));
      } catch (const std::exception& e) {
        errors[slot] = e.what();
      }
      if (log) {
        const std::lock_guard lock(log_mutex);
        *log << report.datasets[t.dataset] << ' ' << cfg.methods[t.method].name() << " run "
             << t.run + 1 << '/' << runs;
        if (results[slot]) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.3f", results[slot]->metrics.accuracy);
          *log << " accuracy " << buf << '\n';
        } else {
          *log << " failed: " << errors[slot] << '\n';
        }
      }
    }
  };

  std::size_t threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(tasks.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t d = 0; d < descriptors.size(); ++d) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      CellResult cell;
      cell.dataset = report.datasets[d];
      cell.display_name = report.display_names[d];
      cell.method = cfg.methods[m];
      if (!load_errors[d].empty()) {
        cell.error = load_errors[d];
      } else {
        const std::size_t base = (d * n_methods + m) * runs;
        for (std::size_t r = 0; r < runs; ++r) {
          if (results[base + r]) {
            cell.runs.push_back(std::move(*results[base + r]));
          } else if (cell.error.empty()) {
            cell.error = "run " + std::to_string(r) + ": " + errors[base + r];
          }
        }
        if (cell.ok()) {
          std::vector<RunMetrics> metrics;
          for (const auto& r : cell.runs) metrics.push_back(r.metrics);
          cell.summary = aggregate_runs(metrics);
        }
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::vector<std::vector<std::vector<std::size_t>>> selection_frequency(
    const BenchmarkReport& report) {
  const std::size_t iterations = static_cast<std::size_t>(std::max(report.iterations, 0));
  std::vector<std::vector<std::vector<std::size_t>>> out(
      report.datasets.size(),
      std::vector<std::vector<std::size_t>>(report.portfolio.size(),
                                            std::vector<std::size_t>(iterations, 0)));
  for (std::size_t d = 0; d < report.datasets.size(); ++d) {
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
      const auto& cell = report.cell(d, m);
      if (!cell.method.hybrid) continue;
      for (const auto& run : cell.runs) {
        if (!run.trace) continue;
        for (const auto& it : run.trace->iterations) {
          const auto pos = std::find(report.portfolio.begin(), report.portfolio.end(), it.selected);
          const auto i = static_cast<std::size_t>(it.iteration);
          if (pos == report.portfolio.end() || i >= iterations) continue;
          ++out[d][static_cast<std::size_t>(pos - report.portfolio.begin())][i];
        }
      }
    }
  }
  return out;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", round3(v));
  return buf;
}

json run_json(const RunRecord& r) {
  return json{{"run", r.run},
              {"seed", r.seed},
              {"accuracy", r.metrics.accuracy},
              {"precision", r.metrics.precision},
              {"recall", r.metrics.recall},
              {"confusion", r.metrics.confusion},
              {"train_fitness", r.train_fitness},
              {"smoothing", r.smoothing},
              {"fe_used", r.fe_used}};
}

json stats_json(const MetricStats& s) {
  return json{{"avg", s.avg}, {"max", s.max}, {"min", s.min}};
}

json summary_json(const MethodSummary& s) {
  return json{{"runs", s.runs},
              {"accuracy", stats_json(s.accuracy)},
              {"precision", stats_json(s.precision)},
              {"recall", stats_json(s.recall)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string selection_svg(const std::string& title, const std::vector<Method>& portfolio,
                          const std::vector<std::vector<std::size_t>>& counts) {
  static constexpr const char* colors[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                           "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};
  const std::size_t iterations = counts.empty() ? 0 : counts.front().size();
  std::size_t peak = 1;
  for (const auto& row : counts) {
    for (auto c : row) peak = std::max(peak, c);
  }
  const double group = 24.0 * static_cast<double>(std::max<std::size_t>(portfolio.size(), 1)) + 20.0;
  const double width = 80.0 + group * static_cast<double>(iterations) + 120.0;
  const double height = 300.0;
  const double plot = 220.0;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
    << height << "\">\n";
  s << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title
    << " selection frequency</text>\n";
  s << "<line x1=\"60\" y1=\"250\" x2=\"" << width - 120 << "\" y2=\"250\" stroke=\"black\"/>\n";
  s << "<text x=\"10\" y=\"40\" font-family=\"sans-serif\" font-size=\"11\">max " << peak
    << "</text>\n";
  for (std::size_t i = 0; i < iterations; ++i) {
    const double x0 = 70.0 + group * static_cast<double>(i);
    for (std::size_t m = 0; m < portfolio.size(); ++m) {
      const double h = plot * static_cast<double>(counts[m][i]) / static_cast<double>(peak);
      s << "<rect x=\"" << x0 + 24.0 * static_cast<double>(m) << "\" y=\"" << 250.0 - h
        << "\" width=\"20\" height=\"" << h << "\" fill=\"" << colors[m % 8] << "\"/>\n";
    }
    s << "<text x=\"" << x0 << "\" y=\"268\" font-family=\"sans-serif\" font-size=\"11\">it "
      << i + 1 << "</text>\n";
  }
  for (std::size_t m = 0; m < portfolio.size(); ++m) {
    const double y = 60.0 + 18.0 * static_cast<double>(m);
    s << "<rect x=\"" << width - 110 << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
      << colors[m % 8] << "\"/>\n";
    s << "<text x=\"" << width - 92 << "\" y=\"" << y
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << to_string(portfolio[m])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

std::string trace_to_jsonl(const ChmTrace& trace, std::string_view dataset, int run) {
  std::string out;
  for (const auto& it : trace.iterations) {
    json probes = json::array();
    for (const auto& p : it.probes) {
      probes.push_back({{"method", to_string(p.method)},
                        {"best_fitness", p.best_fitness},
                        {"fe_used", p.fe_used},
                        {"converged", p.converged},
                        {"end_fingerprint", hex64(p.end_fingerprint)}});
    }
    const json line{{"dataset", dataset},
                    {"run", run},
                    {"iteration", it.iteration},
                    {"n_t", trace.n_t},
                    {"max_fe_probing", trace.max_fe_probing},
                    {"max_fe_fit", trace.max_fe_fit},
                    {"start_fingerprint", hex64(it.start_fingerprint)},
                    {"probes", probes},
                    {"selected", to_string(it.selected)},
                    {"tie", it.tie},
                    {"fit_start_fingerprint", hex64(it.fit_start_fingerprint)},
                    {"fit_ran", it.fit_ran},
                    {"fit_best_fitness", it.fit_best_fitness},
                    {"fit_fe_used", it.fit_fe_used},
                    {"converged", it.converged}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

void write_benchmark(const BenchmarkReport& report, const std::filesystem::path& out,
                     bool svg) {
  std::filesystem::create_directories(out);
  const std::size_t nd = report.datasets.size();
  const std::size_t nm = report.methods.size();

  struct Table {
    const char* file;
    const char* key;
    double (*get)(const MethodSummary&);
  };
  const Table tables[] = {
      {"avg_accuracy.csv", "avg_accuracy", [](const MethodSummary& s) { return s.accuracy.avg; }},
      {"max_accuracy.csv", "max_accuracy", [](const MethodSummary& s) { return s.accuracy.max; }},
      {"avg_precision.csv", "avg_precision", [](const MethodSummary& s) { return s.precision.avg; }},
      {"avg_recall.csv", "avg_recall", [](const MethodSummary& s) { return s.recall.avg; }},
  };

  json summary;
  summary["datasets"] = report.datasets;
  json method_names = json::array();
  for (const auto& m : report.methods) method_names.push_back(m.name());
  summary["methods"] = method_names;

  for (const auto& t : tables) {
    std::vector<std::vector<double>> scores(nm, std::vector<double>(nd));
    std::string csv = "dataset";
    for (const auto& m : report.methods) csv += "," + m.name();
    csv += '\n';
    json table = json::object();
    for (std::size_t d = 0; d < nd; ++d) {
      csv += report.display_names[d];
      json row = json::object();
      for (std::size_t m = 0; m < nm; ++m) {
        const auto& cell = report.cell(d, m);
        if (cell.summary) {
          const double v = t.get(*cell.summary);
          scores[m][d] = v;
          csv += "," + fixed3(v);
          row[report.methods[m].name()] = round3(v);
        } else {
          scores[m][d] = std::numeric_limits<double>::quiet_NaN();
          csv += ",NA";
          row[report.methods[m].name()] = nullptr;
        }
      }
      csv += '\n';
      table[report.datasets[d]] = row;
    }
    const auto points = rank(scores);
    csv += "Rank";
    json rank_row = json::object();
    for (std::size_t m = 0; m < nm; ++m) {
      csv += "," + std::to_string(points[m]);
      rank_row[report.methods[m].name()] = points[m];
    }
    csv += '\n';
    write_text(out / t.file, csv);
    summary[t.key] = {{"values", table}, {"rank", rank_row}};
  }

  const auto freq = selection_frequency(report);
  std::string sel = "dataset,method,iteration,count\n";
  for (std::size_t d = 0; d < nd; ++d) {
    bool has_hybrid = false;
    for (std::size_t m = 0; m < nm; ++m) {
      has_hybrid = has_hybrid || (report.methods[m].hybrid && report.cell(d, m).ok());
    }
    if (!has_hybrid) continue;
    for (std::size_t p = 0; p < report.portfolio.size(); ++p) {
      for (std::size_t i = 0; i < freq[d][p].size(); ++i) {
        sel += report.display_names[d] + "," + std::string(to_string(report.portfolio[p])) +
               "," + std::to_string(i + 1) + "," + std::to_string(freq[d][p][i]) + "\n";
      }
    }
    if (svg) {
      write_text(out / ("selection_" + report.datasets[d] + ".svg"),
                 selection_svg(report.display_names[d], report.portfolio, freq[d]));
    }
  }
  write_text(out / "selection_frequency.csv", sel);

  std::string traces;
  std::string runs;
  std::string failures = "dataset,method,error\n";
  json cells = json::array();
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t m = 0; m < nm; ++m) {
      const auto& cell = report.cell(d, m);
      for (const auto& r : cell.runs) {
        if (r.trace) traces += trace_to_jsonl(*r.trace, cell.dataset, r.run);
        json line = run_json(r);
        line["dataset"] = cell.dataset;
        line["method"] = cell.method.name();
        runs += line.dump() + "\n";
      }
      json c{{"dataset", cell.dataset}, {"method", cell.method.name()}};
      if (cell.summary) c["summary"] = summary_json(*cell.summary);
      if (!cell.ok()) {
        c["error"] = cell.error;
        std::string msg = cell.error;
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::replace(msg.begin(), msg.end(), '"', '\'');
        failures += cell.dataset + "," + cell.method.name() + ",\"" + msg + "\"\n";
      }
      cells.push_back(c);
    }
  }
  summary["cells"] = cells;
  write_text(out / "trace.jsonl", traces);
  write_text(out / "runs.jsonl", runs);
  write_text(out / "failures.csv", failures);
  write_text(out / "summary.json", summary.dump(2) + "\n");
}

int cmd_fetch(const std::filesystem::path& registry, const std::filesystem::path& dir,
              bool force, const std::vector<std::string>& only, std::ostream& log) {
  try {
    auto descriptors = load_registry(registry.empty() ? default_registry_path() : registry);
    if (!only.empty()) {
      std::vector<DatasetDescriptor> selected;
      for (const auto& name : only) selected.push_back(find_descriptor(descriptors, name));
      descriptors = std::move(selected);
    }
    const auto outcomes = fetch_all(descriptors, dir.empty() ? data_directory() : dir, force, &log);
    std::size_t failed = 0;
    for (const auto& o : outcomes) {
      if (o.status == FetchOutcome::Status::Failed) ++failed;
    }
    log << outcomes.size() - failed << " of " << outcomes.size() << " datasets available\n";
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_train(const std::string& dataset, const std::string& method, std::uint64_t seed,
              int runs, const std::filesystem::path& out, ExperimentConfig cfg,
              std::ostream& log) {
  try {
    cfg.seed = seed;
    cfg.runs = runs;
    cfg.datasets = {dataset};
    const Contender contender = contender_from_string(method);
    cfg.methods = {contender};
    cfg.validate();

    const auto registry =
        load_registry(cfg.registry.empty() ? default_registry_path() : cfg.registry);
    const auto& desc = find_descriptor(registry, dataset);
    const auto dir = cfg.data_dir.empty() ? data_directory() : cfg.data_dir;
    const auto path = dir / desc.file;
    if (!std::filesystem::exists(path)) {
      throw std::runtime_error("dataset file missing: " + path.string() +
                               " (run `pnn_chm fetch`)");
    }
    const Dataset ds = load_csv(path, desc);
    for (const auto& w : validation_warnings(ds, desc)) log << "warning: " << w << '\n';

    std::vector<RunRecord> records;
    for (int r = 0; r < runs; ++r) {
      records.push_back(run_once(ds, contender, cfg, r));
      log << desc.name << ' ' << contender.name() << " run " << r + 1 << '/' << runs
          << " accuracy " << fixed3(records.back().metrics.accuracy) << '\n';
    }

    std::filesystem::create_directories(out);
    json runs_json = json::array();
    std::vector<RunMetrics> metrics;
    std::string traces;
    for (const auto& r : records) {
      runs_json.push_back(run_json(r));
      metrics.push_back(r.metrics);
      if (r.trace) traces += trace_to_jsonl(*r.trace, desc.name, r.run);
    }
    const MethodSummary s = aggregate_runs(metrics);
    const auto best = std::max_element(records.begin(), records.end(), [](const auto& a, const auto& b) {
      return a.metrics.accuracy < b.metrics.accuracy;
    });
    json summary = summary_json(s);
    summary["dataset"] = desc.name;
    summary["method"] = contender.name();
    summary["seed"] = seed;
    summary["best_run"] = best->run;
    summary["best_smoothing"] = best->smoothing;

    write_text(out / "runs.json", runs_json.dump(2) + "\n");
    write_text(out / "summary.json", summary.dump(2) + "\n");
    if (contender.hybrid) write_text(out / "trace.jsonl", traces);

    std::ostringstream txt;
    txt << "dataset   " << desc.display_name << "\nmethod    " << contender.name()
        << "\nruns      " << runs << "\nseed      " << seed << "\n\n"
        << "metric      avg    max    min\n";
    auto row = [&](const char* name, const MetricStats& m) {
      txt << name << "  " << fixed3(m.avg) << "  " << fixed3(m.max) << "  " << fixed3(m.min)
          << '\n';
    };
    row("accuracy ", s.accuracy);
    row("precision", s.precision);
    row("recall   ", s.recall);
    write_text(out / "summary.txt", txt.str());
    log << txt.str();
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_benchmark(const ExperimentConfig& cfg, const std::filesystem::path& out,
                  std::ostream& log) {
  try {
    const BenchmarkReport report = run_benchmark(cfg, &log);
    write_benchmark(report, out, cfg.svg);
    std::size_t failed = 0;
    for (const auto& c : report.cells) {
      if (!c.ok()) ++failed;
    }
    log << report.cells.size() - failed << " of " << report.cells.size()
        << " cells completed; results in " << out.string() << '\n';
    return failed == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pnnchm
