#include "mfas/study.hpp"

#include "mfas/benchmarks.hpp"
#include "mfas/metrics.hpp"
#include "mfas/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

namespace mfas {

namespace {

constexpr std::uint64_t kTestStream = 0x74657374ULL;
constexpr std::uint64_t kDesignStream = 0x64657369676eULL;
constexpr std::uint64_t kPipelineStream = 0x70697065ULL;
constexpr std::uint64_t kHfStream = 0x6866ULL;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class F>
auto timed(double& seconds, F&& body) -> decltype(body()) {
  const auto start = std::chrono::steady_clock::now();
  auto out = body();
  seconds = seconds_since(start);
  return out;
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("study config: key '") + key + "': " + e.what());
  }
}

template <class T>
void read_optional(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + ": expected a JSON object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InvalidArgument(std::string(what) + ": unknown key '" + key + "'");
  }
}

// NaN becomes null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json model_map(const Vector& values) {
  Json j = Json::object();
  for (Index m = 0; m < values.size(); ++m) j[kModelNames[m]] = number(values[m]);
  return j;
}

Json cv_to_json(const CvReport& report) {
  Json models = Json::array();
  for (const auto& s : report.models) {
    models.push_back({{"model", s.model},
                      {"mean", s.mean},
                      {"min", s.min},
                      {"max", s.max},
                      {"std", s.std},
                      {"ci_lower", s.ci_lower},
                      {"ci_upper", s.ci_upper},
                      {"lowest_batch", s.lowest_batch},
                      {"highest_batch", s.highest_batch},
                      {"scores_at_lowest", s.scores_at_lowest},
                      {"scores_at_highest", s.scores_at_highest}});
  }
  return {{"k_out", report.k_out}, {"test_size", report.test_size}, {"batches", report.batches}, {"models", models}};
}

void validate(const StudyConfig& c) {
  if (c.benchmark.empty() == c.hf_csv.empty()) {
    throw InvalidArgument("study config: give exactly one of benchmark or hf_csv");
  }
  if (!c.hf_csv.empty() && c.test_csv.empty()) throw InvalidArgument("study config: hf_csv requires test_csv");
  if (c.grid.empty()) throw InvalidArgument("study config: grid is empty");
  for (Index v : c.grid) {
    if (v < (c.sweep == SweepVariable::kNHf ? 1 : 0)) throw InvalidArgument("study config: grid values out of range");
  }
  if (c.outer_restarts < 1) throw InvalidArgument("study config: outer_restarts must be positive");
  if (c.test_csv.empty() && c.test_size < 2) throw InvalidArgument("study config: test size must be at least 2");
  if (!c.fidelity_csvs.empty() && c.order == FidelityOrder::kReversed) {
    throw InvalidArgument("study config: reversed order needs a single HF dataset");
  }
}

// Random n-row subset in original row order; all rows when n >= size.
Dataset subset(const Dataset& data, Index n, std::uint64_t seed) {
  if (n >= data.size()) return data;
  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(n));
  std::sort(order.begin(), order.end());
  Matrix x = data.inputs()(order, Eigen::all);
  Vector y = data.outputs()(order);
  if (data.has_gradients()) return Dataset(x, y, Matrix(data.gradients()(order, Eigen::all)));
  return Dataset(x, y);
}

struct Sources {
  std::optional<Benchmark> bench;
  std::optional<Dataset> hf_pool;
  std::vector<Dataset> fidelities;
  Dataset test;
};

Sources load_sources(const StudyConfig& c) {
  if (!c.benchmark.empty()) {
    Benchmark bench = benchmark_by_name(c.benchmark);
    const Box box = Box::centered(bench.dim());
    Dataset test = c.test_csv.empty()
                       ? evaluate_centered(bench, sample({c.test_sampler, c.test_size, box,
                                                          derive_seed(c.seed_base, {kTestStream})}))
                       : read_dataset_csv(c.test_csv);
    if (test.dim() != bench.dim()) throw InvalidArgument("study: test set has the wrong dimension");
    return {bench, std::nullopt, {}, std::move(test)};
  }
  Sources s{std::nullopt, read_dataset_csv(c.hf_csv), {}, read_dataset_csv(c.test_csv)};
  for (const auto& path : c.fidelity_csvs) s.fidelities.push_back(read_dataset_csv(path));
  for (const auto& d : s.fidelities) {
    if (d.dim() != s.hf_pool->dim()) throw InvalidArgument("study: fidelity datasets differ in dimension");
  }
  if (s.test.dim() != s.hf_pool->dim()) throw InvalidArgument("study: test set has the wrong dimension");
  return s;
}

struct CellOutput {
  Matrix predictions;  // 3 x T
  CellTiming timing;
};

CellOutput run_cell(const StudyConfig& c, const Sources& src, Index n_hf, Index n_extra, std::uint64_t cell_seed) {
  CellOutput out;
  const Dataset hf = src.bench ? evaluate_centered(*src.bench, sample({c.design_sampler, n_hf,
                                                                       Box::centered(src.bench->dim()),
                                                                       derive_seed(cell_seed, {kDesignStream})}))
                               : subset(*src.hf_pool, n_hf, derive_seed(cell_seed, {kDesignStream}));
  PipelineConfig pc = c.pipeline;
  pc.seed = derive_seed(cell_seed, {kPipelineStream});
  pc.n_lf_extra = n_extra;
  if (!pc.domain && src.bench) pc.domain = Box::centered(src.bench->dim());

  const Matrix& x_test = src.test.inputs();
  out.predictions.resize(3, x_test.rows());

  ResponseSurface surrogate = timed(out.timing.train_lf, [&] { return fit_surrogate(hf, pc); });
  MfModel mf = timed(out.timing.train_mf, [&] {
    if (!src.fidelities.empty()) {
      std::vector<Dataset> chain;
      // The surrogate level covers the lowest supplied design plus the extras.
      chain.push_back(build_lowfidelity(src.fidelities.front(), surrogate, sample_extra_inputs(hf, pc), pc.domain));
      for (const auto& d : src.fidelities) chain.push_back(d);
      chain.push_back(hf);
      NargpOptions options = mf_options(pc);
      options.noise.assign(chain.size(), pc.mf_high_noise);
      options.noise.front() = pc.mf_low_noise;
      options.restarts.assign(chain.size(), pc.restarts_mf);
      return train_nargp(chain, options);
    }
    return (c.order == FidelityOrder::kForward ? run_nargp_as(hf, pc, surrogate) : run_reversed(hf, pc, surrogate))
        .model;
  });
  out.timing.train_mf += out.timing.train_lf;
  out.predictions.row(0) = timed(out.timing.predict_mf, [&] { return predict_mc(mf, x_test).mean; }).transpose();

  FitOptions fo;
  fo.noise = pc.hf_noise;
  fo.restarts = pc.restarts_hf_lf;
  fo.seed = derive_seed(cell_seed, {kHfStream});
  GpModel hf_gp = timed(out.timing.train_hf,
                        [&] { return fit(hf.inputs(), hf.outputs(), KernelFamily::kRbfArd, fo); });
  out.predictions.row(1) = hf_gp.predict_mean(x_test).transpose();
  out.predictions.row(2) = surrogate.predict_mean(x_test).transpose();
  return out;
}

double safe_pearson(const Vector& a, const Vector& b) {
  try {
    return pearson(a, b);
  } catch (const InvalidArgument&) {
    return kNaN;
  }
}

}  // namespace

const StudyAggregate& StudyResult::aggregate(Index grid_value, const std::string& model) const {
  for (const auto& a : aggregates) {
    if (a.grid_value == grid_value && a.model == model) return a;
  }
  throw InvalidArgument("study result: no aggregate for " + model + " at " + std::to_string(grid_value));
}

std::string to_string(SweepVariable v) { return v == SweepVariable::kNHf ? "n_hf" : "n_lf_extra"; }

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "n_hf") return SweepVariable::kNHf;
  if (name == "n_lf_extra") return SweepVariable::kNLfExtra;
  throw InvalidArgument("unknown sweep variable '" + name + "' (expected n_hf or n_lf_extra)");
}

std::string to_string(FidelityOrder order) { return order == FidelityOrder::kForward ? "forward" : "reversed"; }

FidelityOrder parse_fidelity_order(const std::string& name) {
  if (name == "forward") return FidelityOrder::kForward;
  if (name == "reversed") return FidelityOrder::kReversed;
  throw InvalidArgument("unknown fidelity order '" + name + "' (expected forward or reversed)");
}

Json to_json(const StudyConfig& c) {
  Json j = {{"design_sampler", to_string(c.design_sampler)},
            {"sweep", {{"variable", to_string(c.sweep)}, {"grid", c.grid}}},
            {"n_hf", c.n_hf},
            {"n_lf_extra", c.n_lf_extra},
            {"outer_restarts", c.outer_restarts},
            {"seed_base", c.seed_base},
            {"test", {{"sampler", to_string(c.test_sampler)}, {"size", c.test_size}}},
            {"cv", to_string(c.cv)},
            {"order", to_string(c.order)},
            {"pipeline", to_json(c.pipeline)},
            {"output_dir", c.output_dir}};
  if (!c.benchmark.empty()) j["benchmark"] = c.benchmark;
  if (!c.hf_csv.empty()) j["hf_csv"] = c.hf_csv;
  if (!c.fidelity_csvs.empty()) j["fidelity_csvs"] = c.fidelity_csvs;
  if (!c.test_csv.empty()) j["test_csv"] = c.test_csv;
  if (c.n_lf_total) j["n_lf_total"] = *c.n_lf_total;
  return j;
}

StudyConfig study_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"benchmark", "hf_csv", "fidelity_csvs", "test_csv", "design_sampler", "sweep", "n_hf", "n_lf_extra",
                  "n_lf_total", "outer_restarts", "seed_base", "test", "cv", "order", "pipeline", "output_dir"},
                 "study config");
  StudyConfig c;
  read_optional(j, "benchmark", c.benchmark);
  read_optional(j, "hf_csv", c.hf_csv);
  read_optional(j, "fidelity_csvs", c.fidelity_csvs);
  read_optional(j, "test_csv", c.test_csv);
  if (j.contains("design_sampler")) c.design_sampler = parse_sampler_kind(get<std::string>(j, "design_sampler"));
  if (!j.contains("sweep")) throw InvalidArgument("study config: missing sweep");
  const Json& sweep = j.at("sweep");
  reject_unknown(sweep, {"variable", "grid"}, "study sweep");
  if (sweep.contains("variable")) c.sweep = parse_sweep_variable(get<std::string>(sweep, "variable"));
  c.grid = get<std::vector<Index>>(sweep, "grid");
  read_optional(j, "n_hf", c.n_hf);
  read_optional(j, "n_lf_extra", c.n_lf_extra);
  if (j.contains("n_lf_total")) c.n_lf_total = get<Index>(j, "n_lf_total");
  read_optional(j, "outer_restarts", c.outer_restarts);
  read_optional(j, "seed_base", c.seed_base);
  if (j.contains("test")) {
    const Json& t = j.at("test");
    reject_unknown(t, {"sampler", "size"}, "study test");
    if (t.contains("sampler")) c.test_sampler = parse_sampler_kind(get<std::string>(t, "sampler"));
    read_optional(t, "size", c.test_size);
  }
  if (j.contains("cv")) c.cv = parse_cv_strategy(get<std::string>(j, "cv"));
  if (j.contains("order")) c.order = parse_fidelity_order(get<std::string>(j, "order"));
  if (j.contains("pipeline")) c.pipeline = pipeline_config_from_json(j.at("pipeline"));
  read_optional(j, "output_dir", c.output_dir);
  validate(c);
  return c;
}

Json to_json(const StudyResult& r) {
  Json cells = Json::array();
  for (const auto& cell : r.cells) {
    Json j = {{"grid_value", cell.grid_value}, {"restart", cell.restart}, {"seed", cell.seed}};
    j["r2"] = cell.r2 ? model_map(*cell.r2) : Json(nullptr);
    j["pearson"] = cell.pearson ? model_map(*cell.pearson) : Json(nullptr);
    if (!cell.error.empty()) j["error"] = cell.error;
    if (cell.cv) j["cv"] = cv_to_json(*cell.cv);
    cells.push_back(std::move(j));
  }
  Json aggregates = Json::array();
  for (const auto& a : r.aggregates) {
    aggregates.push_back({{"grid_value", a.grid_value},
                          {"model", a.model},
                          {"mean", number(a.mean)},
                          {"min", number(a.min)},
                          {"max", number(a.max)},
                          {"count", a.count}});
  }
  return {{"config", to_json(r.config)}, {"cells", cells}, {"aggregates", aggregates}};
}

Json timings_to_json(const StudyResult& r) {
  Json rows = Json::array();
  for (const auto& t : r.timings) {
    rows.push_back({{"grid_value", t.grid_value},
                    {"restart", t.restart},
                    {"train_mf_seconds", t.train_mf},
                    {"predict_mf_seconds", t.predict_mf},
                    {"train_hf_seconds", t.train_hf},
                    {"train_lf_seconds", t.train_lf}});
  }
  return rows;
}

StudyResult run_study(const StudyConfig& config) {
  validate(config);
  const Sources src = load_sources(config);
  const Vector& y_test = src.test.outputs();

  StudyResult result;
  result.config = config;
  result.test_outputs = y_test;
  for (Index value : config.grid) {
    const Index n_hf = config.sweep == SweepVariable::kNHf ? value : config.n_hf;
    Index n_extra = config.sweep == SweepVariable::kNLfExtra ? value : config.n_lf_extra;
    if (config.n_lf_total) n_extra = *config.n_lf_total - n_hf;

    for (int i = 0; i < config.outer_restarts; ++i) {
      StudyCell cell;
      cell.grid_value = value;
      cell.restart = i;
      cell.seed = config.seed_base + static_cast<std::uint64_t>(i);
      CellTiming timing;
      try {
        if (n_extra < 0) throw InvalidArgument("n_lf_total is below n_hf");
        CellOutput out = run_cell(config, src, n_hf, n_extra, derive_seed(cell.seed, {static_cast<std::uint64_t>(value)}));
        timing = out.timing;
        Vector r2(3), rho(3);
        std::vector<std::pair<std::string, Vector>> named;
        for (Index m = 0; m < 3; ++m) {
          const Vector pred = out.predictions.row(m).transpose();
          r2[m] = r2_score(y_test, pred);
          rho[m] = safe_pearson(y_test, pred);
          named.emplace_back(kModelNames[m], pred);
        }
        cell.r2 = r2;
        cell.pearson = rho;
        if (config.cv != CvStrategy::kNone) cell.cv = cross_validate(y_test, named, points_left_out(config.cv));
        if (i == 0) result.correlation_predictions.emplace_back(value, out.predictions);
      } catch (const Error& e) {
        cell.error = e.what();
      }
      timing.grid_value = value;
      timing.restart = i;
      result.timings.push_back(timing);
      result.cells.push_back(std::move(cell));
    }

    for (Index m = 0; m < 3; ++m) {
      StudyAggregate a{value, kModelNames[m], kNaN, kNaN, kNaN, 0};
      double sum = 0.0;
      for (const auto& cell : result.cells) {
        if (cell.grid_value != value || !cell.r2) continue;
        const double v = (*cell.r2)[m];
        a.min = a.count == 0 ? v : std::min(a.min, v);
        a.max = a.count == 0 ? v : std::max(a.max, v);
        sum += v;
        ++a.count;
      }
      if (a.count > 0) a.mean = std::clamp(sum / a.count, a.min, a.max);
      result.aggregates.push_back(a);
    }
  }
  return result;
}

void write_study_outputs(const StudyResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  write_json_file((dir / "study_result.json").string(), to_json(result));
  write_json_file((dir / "timings.json").string(), timings_to_json(result));

  std::ofstream sweep(dir / "r2_sweep.csv");
  sweep << to_string(result.config.sweep) << ",model,mean,min,max,count\n";
  for (const auto& a : result.aggregates) {
    sweep << a.grid_value << ',' << a.model << ',' << format_double(a.mean) << ',' << format_double(a.min) << ','
          << format_double(a.max) << ',' << a.count << '\n';
  }

  std::ofstream corr(dir / "correlations.csv");
  corr << to_string(result.config.sweep) << ",model,pearson,reference,prediction\n";
  for (const auto& [value, preds] : result.correlation_predictions) {
    for (Index m = 0; m < 3; ++m) {
      const Vector p = preds.row(m).transpose();
      const std::string rho = format_double(safe_pearson(result.test_outputs, p));
      for (Index t = 0; t < p.size(); ++t) {
        corr << value << ',' << kModelNames[m] << ',' << rho << ',' << format_double(result.test_outputs[t]) << ','
             << format_double(p[t]) << '\n';
      }
    }
  }

  if (result.config.cv != CvStrategy::kNone) {
    std::ofstream cv(dir / "cv_bounds.csv");
    const std::string variable = to_string(result.config.sweep);
    write_cv_bounds_header(cv, variable + ",restart,");
    for (const auto& cell : result.cells) {
      if (cell.cv) write_cv_bounds_rows(cv, *cell.cv, std::to_string(cell.grid_value) + "," + std::to_string(cell.restart) + ",");
    }
  }
}

}  // namespace mfas
