#include "mfas/pipeline.hpp"

#include "mfas/random.hpp"

#include <iostream>
#include <string>
#include <tuple>

namespace mfas {

namespace {

constexpr std::uint64_t kExtraStream = 0x6578747261ULL;
constexpr std::uint64_t kSurrogateStream = 0x7375727266ULL;
constexpr std::uint64_t kNllStream = 0x6e6c6cULL;
constexpr std::uint64_t kMfStream = 0x6d66ULL;
constexpr std::uint64_t kHfStream = 0x6866ULL;

template <class F>
auto step(int index, const char* name, F&& body) -> decltype(body()) {
  const std::string tag = "step " + std::to_string(index) + " (" + name + "): ";
  try {
    return body();
  } catch (const HierarchyError& e) {
    throw HierarchyError(e.level(), e.row(), tag + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(tag + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + e.what());
  }
}

Box bounding_box(const Matrix& x) {
  Vector lo = x.colwise().minCoeff().transpose(), hi = x.colwise().maxCoeff().transpose();
  for (Index j = 0; j < x.cols(); ++j) {
    if (!(hi[j] > lo[j])) hi[j] = lo[j] + 1.0;
  }
  return Box(lo, hi);
}

FitOptions options_for(NoisePolicy noise, int restarts, const PipelineConfig& config, std::uint64_t stream) {
  FitOptions fo;
  fo.noise = noise;
  fo.restarts = restarts;
  fo.seed = derive_seed(config.seed, {stream});
  return fo;
}


// Steps 4-5: the two MF levels, each tagged with its own step.
MfModel train_two_levels(const Dataset& low, const Dataset& high, const PipelineConfig& config) {
  const NargpOptions options = mf_options(config);
  GpModel bottom = step(4, "low-fidelity level", [&] {
    return fit(low.inputs(), low.outputs(), KernelFamily::kRbfArd, level_fit_options(options, 0));
  });
  GpModel top = step(5, "high-fidelity level", [&] {
    return fit(augmented_inputs(low, high), high.outputs(), KernelFamily::kNargp, level_fit_options(options, 1));
  });
  return MfModel({std::move(bottom), std::move(top)}, options.mc_samples, options.seed);
}

}  // namespace

NargpOptions mf_options(const PipelineConfig& config) {
  NargpOptions o;
  o.noise = {config.mf_low_noise, config.mf_high_noise};
  o.restarts = {config.restarts_mf, config.restarts_mf};
  o.mc_samples = config.mc_samples;
  o.seed = derive_seed(config.seed, {kMfStream});
  return o;
}

Dataset build_lowfidelity(const Dataset& hf, const ResponseSurface& surface, const Matrix& extra_inputs,
                          const std::optional<Box>& domain) {
  if (extra_inputs.rows() > 0 && extra_inputs.cols() != hf.dim()) {
    throw InvalidArgument("build_lowfidelity: extra inputs have the wrong dimension");
  }
  if (domain) {
    Index outside = 0;
    for (Index i = 0; i < extra_inputs.rows(); ++i) outside += !domain->contains(extra_inputs.row(i).transpose());
    if (outside > 0) {
      std::cerr << "warning: " << outside << " low-fidelity inputs lie outside the domain; the surrogate extrapolates\n";
    }
  }
  Matrix x(hf.size() + extra_inputs.rows(), hf.dim());
  x.topRows(hf.size()) = hf.inputs();
  if (extra_inputs.rows() > 0) x.bottomRows(extra_inputs.rows()) = extra_inputs;
  return Dataset(x, surface.predict_mean(x));
}

Matrix sample_extra_inputs(const Dataset& hf, const PipelineConfig& config) {
  if (config.n_lf_extra < 0) throw InvalidArgument("n_lf_extra must be nonnegative");
  if (config.n_lf_extra == 0) return Matrix(0, hf.dim());
  const Box box = config.domain ? *config.domain : bounding_box(hf.inputs());
  if (box.dim() != hf.dim()) throw InvalidArgument("pipeline domain has the wrong dimension");
  return sample({config.lf_sampler, config.n_lf_extra, box, derive_seed(config.seed, {kExtraStream}), 1});
}

ResponseSurface fit_surrogate(const Dataset& hf, const PipelineConfig& config) {
  const FitOptions fo = options_for(config.surrogate_noise, config.restarts_hf_lf, config, kSurrogateStream);
  if (config.reducer == ReducerKind::kActiveSubspace) {
    auto as = step(1, "active subspace", [&] {
      return decompose(gradient_covariance(dataset_gradients(hf)), config.active_dim);
    });
    return step(2, "response surface", [&] {
      return fit_response_surface(Reducer::linear(as.active_directions()), hf, fo);
    });
  }
  RevNet net = step(1, "level-set learning", [&] {
    NllOptions nll = config.nll;
    nll.seed = derive_seed(config.seed, {kNllStream});
    Dataset with_grads = hf.has_gradients() ? hf : Dataset(hf.inputs(), hf.outputs(), estimate_gradients(hf));
    return train_nll(with_grads, nll);
  });
  return step(2, "response surface", [&] {
    return fit_response_surface(Reducer::nonlinear(net, config.active_dim), hf, fo);
  });
}

PipelineResult run_nargp_as(const Dataset& hf, const PipelineConfig& config) {
  return run_nargp_as(hf, config, fit_surrogate(hf, config));
}

PipelineResult run_nargp_as(const Dataset& hf, const PipelineConfig& config, ResponseSurface surrogate) {
  Dataset low = step(3, "low-fidelity synthesis", [&] {
    return build_lowfidelity(hf, surrogate, sample_extra_inputs(hf, config), config.domain);
  });
  std::vector<Dataset> levels = {low, hf};
  MfModel model = train_two_levels(levels[0], levels[1], config);
  return {std::move(surrogate), std::move(low), std::move(levels), std::move(model)};
}

PipelineResult run_reversed(const Dataset& hf, const PipelineConfig& config) {
  return run_reversed(hf, config, fit_surrogate(hf, config));
}

PipelineResult run_reversed(const Dataset& hf, const PipelineConfig& config, ResponseSurface surrogate) {
  auto [low, bottom, top] = step(3, "fictitious samples", [&] {
    const Matrix extra = sample_extra_inputs(hf, config);
    Dataset low = build_lowfidelity(hf, surrogate, extra, config.domain);
    Vector bottom_y(low.size());
    bottom_y.head(hf.size()) = hf.outputs();
    if (extra.rows() > 0) {
      GpModel hf_gp = fit(hf.inputs(), hf.outputs(), KernelFamily::kRbfArd,
                          options_for(config.hf_noise, config.restarts_hf_lf, config, kHfStream));
      bottom_y.tail(extra.rows()) = hf_gp.predict_mean(extra);
    }
    Dataset bottom(low.inputs(), bottom_y);
    Dataset top(low.inputs(), low.outputs());
    return std::tuple{low, bottom, top};
  });
  std::vector<Dataset> levels = {bottom, top};
  MfModel model = train_two_levels(levels[0], levels[1], config);
  return {std::move(surrogate), std::move(low), std::move(levels), std::move(model)};
}

}  // namespace mfas
