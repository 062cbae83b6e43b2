#pragma once

// JSON documents for trained models and configurations. Doubles are written
// with round-trip precision, so reloaded models predict bit-identically.

#include "mfas/nargp.hpp"
#include "mfas/pipeline.hpp"

#include <json.hpp>

#include <string>

namespace mfas {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
/// Accepts an array of equal-length rows; `cols` fixes the width of an empty matrix.
Matrix matrix_from_json(const Json& j, Index cols = 0);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

std::string to_string(NoisePolicy policy);
/// Parses "fixed_zero" or "free".
NoisePolicy parse_noise_policy(const std::string& name);

Json to_json(const KernelParams& params);
KernelParams kernel_params_from_json(const Json& j);

/// Kernel family tag, hyperparameters, training data, noise, jitter and seed.
Json to_json(const GpModel& model);
GpModel gp_model_from_json(const Json& j);

/// Levels array plus mc_samples and seed.
Json to_json(const MfModel& model);
MfModel mf_model_from_json(const Json& j);

Json to_json(const RevNet& net);
RevNet revnet_from_json(const Json& j);

Json to_json(const ResponseSurface& surface);
ResponseSurface response_surface_from_json(const Json& j);

/// Every field is optional on input and defaults as in PipelineConfig;
/// unknown keys are rejected.
Json to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const Json& j);

/// Trained pipeline: config, surrogate and MF model.
Json to_json(const PipelineConfig& config, const PipelineResult& result);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace mfas
