// Command-line front end: designs, benchmark data, reductions, pipeline
// training, prediction, studies and cross-validation reports.

#include "mfas/benchmarks.hpp"
#include "mfas/cv.hpp"
#include "mfas/pipeline.hpp"
#include "mfas/serialization.hpp"
#include "mfas/study.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace mfas;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

// Writes to `path`, or stdout for "-".
template <class F>
void with_output(const std::string& path, F&& body) {
  if (path == "-") {
    body(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  body(out);
}

Box resolve_box(const std::string& benchmark, Index dim, bool centered) {
  if (!benchmark.empty()) {
    const Benchmark bench = benchmark_by_name(benchmark);
    return centered ? Box::centered(bench.dim()) : bench.box;
  }
  if (dim < 1) throw InvalidArgument("give --dim or --benchmark");
  return centered ? Box::centered(dim) : Box::unit(dim);
}

// One named numeric column of a CSV file with a header row.
Vector read_column(const std::string& path, const std::vector<std::string>& candidates) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t col = header.size();
  for (const auto& name : candidates) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it != header.end()) {
      col = static_cast<std::size_t>(it - header.begin());
      break;
    }
  }
  if (col == header.size()) throw InvalidArgument(path + ": no column named " + candidates.front());
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t k = 0; k <= col; ++k) {
      if (!std::getline(ss, cell, ',')) throw InvalidArgument(path + ": short row");
    }
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidArgument(path + ": cannot parse '" + cell + "'");
    }
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

void write_predictions(std::ostream& out, const Matrix& x, const Vector& mean, const Vector& variance) {
  for (Index j = 0; j < x.cols(); ++j) out << 'x' << j + 1 << ',';
  out << "mean,variance\n";
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) out << format_double(x(i, j)) << ',';
    out << format_double(mean[i]) << ',' << format_double(variance[i]) << '\n';
  }
}

std::string resolve(const std::filesystem::path& base, const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity response surfaces with reduced-input surrogates"};
  app.require_subcommand(1);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Emit a design of experiments as an inputs CSV");
  std::string sampler_name = "lhs", out_path = "-", benchmark;
  Index n = 100, dim = 0, skip = 1;
  std::uint64_t seed = 0;
  bool centered = false;
  sample_cmd->add_option("--sampler", sampler_name, "lhs, sobol or uniform")->capture_default_str();
  sample_cmd->add_option("-n,--n", n, "Number of points")->capture_default_str();
  sample_cmd->add_option("--dim", dim, "Dimension of the unit box");
  sample_cmd->add_option("--benchmark", benchmark, "Use the box of a benchmark");
  sample_cmd->add_flag("--centered", centered, "Sample [-1, 1]^m instead");
  sample_cmd->add_option("--seed", seed)->capture_default_str();
  sample_cmd->add_option("--skip", skip, "Leading Sobol points to drop")->capture_default_str();
  sample_cmd->add_option("-o,--out", out_path)->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Emit a benchmark dataset CSV with gradients");
  std::string inputs_path;
  bool physical = false;
  bench_cmd->add_option("--name", benchmark, "ebola, piston or paraboloid")->required();
  bench_cmd->add_option("-n,--n", n)->capture_default_str();
  bench_cmd->add_option("--sampler", sampler_name)->capture_default_str();
  bench_cmd->add_option("--seed", seed)->capture_default_str();
  bench_cmd->add_option("--inputs", inputs_path, "Evaluate at these inputs instead of sampling");
  bench_cmd->add_flag("--physical", physical, "Inputs and gradients in physical units instead of [-1, 1]^m");
  bench_cmd->add_option("-o,--out", out_path)->capture_default_str();

  // reduce
  auto* reduce_cmd = app.add_subcommand("reduce", "Fit an AS or NLL reduction and its response surface");
  std::string data_path, method = "as", out_dir = ".";
  Index active_dim = 0;
  int restarts = 10, epochs = 20000;
  reduce_cmd->add_option("--data", data_path, "Dataset CSV")->required();
  reduce_cmd->add_option("--method", method, "as or nll")->capture_default_str();
  reduce_cmd->add_option("--active-dim", active_dim, "Reduced dimension (spectral gap when omitted)");
  reduce_cmd->add_option("--restarts", restarts)->capture_default_str();
  reduce_cmd->add_option("--epochs", epochs, "NLL training epochs")->capture_default_str();
  reduce_cmd->add_option("--seed", seed)->capture_default_str();
  reduce_cmd->add_option("--out-dir", out_dir)->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Run the multi-fidelity pipeline and write the model JSON");
  std::string config_path, reducer_name;
  std::optional<Index> n_extra;
  std::optional<std::uint64_t> train_seed;
  bool reversed = false;
  train_cmd->add_option("--data", data_path, "High-fidelity dataset CSV")->required();
  train_cmd->add_option("--config", config_path, "Pipeline config JSON");
  train_cmd->add_option("--reducer", reducer_name, "as or nll");
  train_cmd->add_option("--n-lf-extra", n_extra);
  train_cmd->add_option("--seed", train_seed);
  train_cmd->add_flag("--reversed", reversed, "Swap the fidelity order");
  train_cmd->add_option("-o,--out", out_path)->capture_default_str();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict with a model JSON at the inputs of a CSV");
  std::string model_path;
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--inputs", inputs_path)->required();
  predict_cmd->add_option("-o,--out", out_path)->capture_default_str();

  // study
  auto* study_cmd = app.add_subcommand("study", "Run a sweep study from a JSON config");
  std::string study_out;
  study_cmd->add_option("--config", config_path)->required();
  study_cmd->add_option("--out-dir", study_out, "Overrides output_dir of the config");

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "Cross-validation report over test batches");
  std::string truth_path;
  std::vector<std::string> pred_specs;
  int k_out = 1;
  cv_cmd->add_option("--truth", truth_path, "Test dataset CSV")->required();
  cv_cmd->add_option("--pred", pred_specs, "NAME=predictions.csv (column mean or y)")->required();
  cv_cmd->add_option("-k,--k-out", k_out, "Points left out per batch")->check(CLI::Range(1, 2))->capture_default_str();
  cv_cmd->add_option("-o,--out", out_path, "cv_bounds CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*sample_cmd) {
      const Box box = resolve_box(benchmark, dim, centered);
      Matrix x = sample({parse_sampler_kind(sampler_name), n, box, seed, skip});
      with_output(out_path, [&](std::ostream& out) { write_inputs_csv(out, x); });
    } else if (*bench_cmd) {
      const Benchmark bench = benchmark_by_name(benchmark);
      const Box space = physical ? bench.box : Box::centered(bench.dim());
      Matrix x = inputs_path.empty() ? sample({parse_sampler_kind(sampler_name), n, space, seed})
                                     : read_inputs_csv(inputs_path);
      if (x.cols() != bench.dim()) throw InvalidArgument("inputs have the wrong dimension for " + benchmark);
      Dataset data = physical ? evaluate_physical(bench, x) : evaluate_centered(bench, x);
      with_output(out_path, [&](std::ostream& out) { write_dataset_csv(out, data); });
    } else if (*reduce_cmd) {
      Dataset data = read_dataset_csv(data_path);
      FitOptions fo;
      fo.restarts = restarts;
      fo.seed = seed;
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      Json summary;
      ResponseSurface surface = [&] {
        if (parse_reducer_kind(method) == ReducerKind::kActiveSubspace) {
          auto as = as_response_surface(data, active_dim > 0 ? std::optional<Index>(active_dim) : std::nullopt, fo);
          summary["eigenvalues"] = vector_to_json(as.decomposition.eigenvalues);
          summary["active_dim"] = as.decomposition.active_dim;
          summary["degenerate"] = as.decomposition.degenerate;
          return as.surface;
        }
        NllOptions nll;
        nll.epochs = epochs;
        nll.seed = seed;
        NllReport report;
        Dataset with_grads = data.has_gradients() ? data : Dataset(data.inputs(), data.outputs(), estimate_gradients(data));
        RevNet net = train_nll(with_grads, nll, &report);
        summary["best_epoch"] = report.best_epoch;
        summary["best_loss"] = report.best_loss;
        return nll_response_surface(net, data, fo);
      }();
      summary["surface"] = to_json(surface);
      write_json_file((dir / "reduction.json").string(), summary);
      if (surface.reducer.output_dim() == 1) {
        std::ofstream plot(dir / "summary_plot.csv");
        const Matrix t = surface.reducer.reduce(data.inputs());
        plot << "active_coordinate,output\n";
        for (Index i = 0; i < data.size(); ++i) plot << format_double(t(i, 0)) << ',' << format_double(data.outputs()[i]) << '\n';
      }
    } else if (*train_cmd) {
      Dataset hf = read_dataset_csv(data_path);
      PipelineConfig config = config_path.empty() ? PipelineConfig{} : pipeline_config_from_json(read_json_file(config_path));
      if (!reducer_name.empty()) config.reducer = parse_reducer_kind(reducer_name);
      if (n_extra) config.n_lf_extra = *n_extra;
      if (train_seed) config.seed = *train_seed;
      PipelineResult result = reversed ? run_reversed(hf, config) : run_nargp_as(hf, config);
      Json doc = to_json(config, result);
      doc["order"] = reversed ? "reversed" : "forward";
      with_output(out_path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
    } else if (*predict_cmd) {
      const Json doc = read_json_file(model_path);
      const Matrix x = read_inputs_csv(inputs_path);
      Marginals pred;
      if (doc.contains("model")) {
        McPrediction mc = predict_mc(mf_model_from_json(doc.at("model")), x);
        pred = {mc.mean, mc.variance};
      } else if (doc.contains("levels")) {
        McPrediction mc = predict_mc(mf_model_from_json(doc), x);
        pred = {mc.mean, mc.variance};
      } else if (doc.contains("reducer")) {
        pred = response_surface_from_json(doc).predict(x);
      } else {
        pred = gp_model_from_json(doc).predict_marginals(x);
      }
      with_output(out_path, [&](std::ostream& out) { write_predictions(out, x, pred.mean, pred.variance); });
    } else if (*study_cmd) {
      StudyConfig config = study_config_from_json(read_json_file(config_path));
      const auto base = std::filesystem::path(config_path).parent_path();
      config.hf_csv = resolve(base, config.hf_csv);
      config.test_csv = resolve(base, config.test_csv);
      for (auto& p : config.fidelity_csvs) p = resolve(base, p);
      if (!study_out.empty()) config.output_dir = study_out;
      if (config.output_dir.empty()) config.output_dir = ".";
      StudyResult result = run_study(config);
      write_study_outputs(result, config.output_dir);
      for (const auto& a : result.aggregates) {
        std::cout << to_string(config.sweep) << '=' << a.grid_value << ' ' << a.model << " mean R2 "
                  << format_double(a.mean) << " [" << format_double(a.min) << ", " << format_double(a.max) << "] over "
                  << a.count << " runs\n";
      }
      for (const auto& cell : result.cells) {
        if (!cell.error.empty()) std::cerr << "cell " << cell.grid_value << '/' << cell.restart << " failed: " << cell.error << '\n';
      }
    } else if (*cv_cmd) {
      const Vector truth = read_dataset_csv(truth_path).outputs();
      std::vector<std::pair<std::string, Vector>> preds;
      for (const auto& spec : pred_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidArgument("--pred expects NAME=path, got " + spec);
        preds.emplace_back(spec.substr(0, eq), read_column(spec.substr(eq + 1), {"mean", "y"}));
      }
      const CvReport report = cross_validate(truth, preds, k_out);
      with_output(out_path, [&](std::ostream& out) {
        write_cv_bounds_header(out);
        write_cv_bounds_rows(out, report);
      });
      if (out_path != "-") {
        for (const auto& s : report.models) {
          std::cout << s.model << ": " << report.batches << " batches, mean " << format_double(s.mean) << ", 95% ["
                    << format_double(s.ci_lower) << ", " << format_double(s.ci_upper) << "]\n";
        }
      }
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
