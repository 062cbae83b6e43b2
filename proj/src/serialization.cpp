#include "mfas/serialization.hpp"

#include <fstream>
#include <set>

namespace mfas {

namespace {

// nlohmann errors surface as InvalidArgument with the offending key.
template <class T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("json: missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("json: key '") + key + "': " + e.what());
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

Json rbf_to_json(const RbfArdParams& p) {
  return {{"variance", p.variance}, {"lengthscales", vector_to_json(p.lengthscales)}};
}

RbfArdParams rbf_from_json(const Json& j) {
  RbfArdParams p;
  p.variance = get<double>(j, "variance");
  p.lengthscales = vector_from_json(j.at("lengthscales"));
  return p;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, Index cols) {
  if (!j.is_array()) throw InvalidArgument("json: expected an array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (rows > 0) cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw InvalidArgument("json: ragged matrix");
    for (Index k = 0; k < cols; ++k) {
      if (!row.at(static_cast<std::size_t>(k)).is_number()) throw InvalidArgument("json: non-numeric matrix entry");
      m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("json: expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) {
    if (!j.at(static_cast<std::size_t>(i)).is_number()) throw InvalidArgument("json: non-numeric vector entry");
    v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  }
  return v;
}

std::string to_string(NoisePolicy policy) { return policy == NoisePolicy::kFree ? "free" : "fixed_zero"; }

NoisePolicy parse_noise_policy(const std::string& name) {
  if (name == "fixed_zero") return NoisePolicy::kFixedZero;
  if (name == "free") return NoisePolicy::kFree;
  throw InvalidArgument("unknown noise policy '" + name + "' (expected fixed_zero or free)");
}

Json to_json(const KernelParams& params) {
  if (const auto* p = std::get_if<RbfArdParams>(&params)) return {{"family", "rbf_ard"}, {"rbf", rbf_to_json(*p)}};
  const auto& p = std::get<NargpKernelParams>(params);
  return {{"family", "nargp"}, {"rho", rbf_to_json(p.rho)}, {"f", rbf_to_json(p.f)}, {"delta", rbf_to_json(p.delta)}};
}

KernelParams kernel_params_from_json(const Json& j) {
  const auto family = get<std::string>(j, "family");
  if (family == "rbf_ard") return rbf_from_json(j.at("rbf"));
  if (family == "nargp") return NargpKernelParams{rbf_from_json(j.at("rho")), rbf_from_json(j.at("f")), rbf_from_json(j.at("delta"))};
  throw InvalidArgument("json: unknown kernel family '" + family + "'");
}

Json to_json(const GpModel& model) {
  return {{"kernel", to_json(model.kernel_params())},
          {"noise_variance", model.noise_variance()},
          {"relative_jitter", model.relative_jitter()},
          {"seed", model.seed()},
          {"inputs", matrix_to_json(model.train_inputs())},
          {"outputs", vector_to_json(model.train_outputs())}};
}

GpModel gp_model_from_json(const Json& j) {
  KernelParams params = kernel_params_from_json(j.at("kernel"));
  Vector outputs = vector_from_json(j.at("outputs"));
  Matrix inputs = matrix_from_json(j.at("inputs"));
  return GpModel::condition_with_jitter(std::move(inputs), std::move(outputs), std::move(params),
                                        get<double>(j, "noise_variance"), get<double>(j, "relative_jitter"),
                                        get<std::uint64_t>(j, "seed"));
}

Json to_json(const MfModel& model) {
  Json levels = Json::array();
  for (const auto& gp : model.levels()) levels.push_back(to_json(gp));
  return {{"levels", levels}, {"mc_samples", model.mc_samples()}, {"seed", model.seed()}};
}

MfModel mf_model_from_json(const Json& j) {
  std::vector<GpModel> levels;
  if (!j.contains("levels") || !j.at("levels").is_array()) throw InvalidArgument("json: missing levels array");
  for (const auto& level : j.at("levels")) levels.push_back(gp_model_from_json(level));
  return MfModel(std::move(levels), get<int>(j, "mc_samples"), get<std::uint64_t>(j, "seed"));
}

Json to_json(const RevNet& net) {
  Json layers = Json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"k1", matrix_to_json(l.k1)},
                      {"b1", vector_to_json(l.b1)},
                      {"k2", matrix_to_json(l.k2)},
                      {"b2", vector_to_json(l.b2)}});
  }
  return {{"dim", net.dim()},
          {"h", net.h()},
          {"padded", net.padded()},
          {"partition", {net.half(), net.half()}},
          {"layers", layers}};
}

RevNet revnet_from_json(const Json& j) {
  const Index dim = get<Index>(j, "dim");
  std::vector<RevNet::Layer> layers;
  for (const auto& l : j.at("layers")) {
    RevNet::Layer layer;
    layer.b1 = vector_from_json(l.at("b1"));
    layer.b2 = vector_from_json(l.at("b2"));
    layer.k1 = matrix_from_json(l.at("k1"));
    layer.k2 = matrix_from_json(l.at("k2"));
    layers.push_back(std::move(layer));
  }
  RevNet net(dim, get<double>(j, "h"), std::move(layers));
  if (j.contains("padded") && get<bool>(j, "padded") != net.padded()) {
    throw InvalidArgument("json: RevNet padding flag disagrees with its dimension");
  }
  return net;
}

Json to_json(const ResponseSurface& surface) {
  Json reducer = {{"kind", to_string(surface.reducer.kind())}, {"active_dim", surface.reducer.output_dim()}};
  if (surface.reducer.kind() == ReducerKind::kActiveSubspace) {
    reducer["projection"] = matrix_to_json(surface.reducer.projection());
  } else {
    reducer["net"] = to_json(surface.reducer.net());
  }
  return {{"reducer", reducer}, {"gp", to_json(surface.gp)}};
}

ResponseSurface response_surface_from_json(const Json& j) {
  const Json& r = j.at("reducer");
  const ReducerKind kind = parse_reducer_kind(get<std::string>(r, "kind"));
  Reducer reducer = kind == ReducerKind::kActiveSubspace
                        ? Reducer::linear(matrix_from_json(r.at("projection")))
                        : Reducer::nonlinear(revnet_from_json(r.at("net")), get<Index>(r, "active_dim"));
  return {std::move(reducer), gp_model_from_json(j.at("gp"))};
}

Json to_json(const PipelineConfig& c) {
  Json j = {{"reducer", to_string(c.reducer)},
            {"active_dim", c.active_dim},
            {"n_lf_extra", c.n_lf_extra},
            {"lf_sampler", to_string(c.lf_sampler)},
            {"noise",
             {{"surrogate", to_string(c.surrogate_noise)},
              {"hf", to_string(c.hf_noise)},
              {"mf_low", to_string(c.mf_low_noise)},
              {"mf_high", to_string(c.mf_high_noise)}}},
            {"restarts", {{"hf_lf", c.restarts_hf_lf}, {"mf", c.restarts_mf}}},
            {"mc_samples", c.mc_samples},
            {"nll",
             {{"layers", c.nll.layers},
              {"epochs", c.nll.epochs},
              {"learning_rate", c.nll.learning_rate},
              {"h", c.nll.h},
              {"hidden", c.nll.hidden}}},
            {"seed", c.seed}};
  if (c.domain) j["domain"] = {{"lower", vector_to_json(c.domain->lower())}, {"upper", vector_to_json(c.domain->upper())}};
  return j;
}

PipelineConfig pipeline_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"reducer", "active_dim", "n_lf_extra", "lf_sampler", "domain", "noise", "restarts", "mc_samples",
                  "nll", "seed"},
                 "pipeline config");
  PipelineConfig c;
  if (j.contains("reducer")) c.reducer = parse_reducer_kind(get<std::string>(j, "reducer"));
  read_optional(j, "active_dim", c.active_dim);
  read_optional(j, "n_lf_extra", c.n_lf_extra);
  if (j.contains("lf_sampler")) c.lf_sampler = parse_sampler_kind(get<std::string>(j, "lf_sampler"));
  if (j.contains("domain")) {
    const Json& d = j.at("domain");
    reject_unknown(d, {"lower", "upper"}, "pipeline domain");
    c.domain = Box(vector_from_json(d.at("lower")), vector_from_json(d.at("upper")));
  }
  if (j.contains("noise")) {
    const Json& n = j.at("noise");
    reject_unknown(n, {"surrogate", "hf", "mf_low", "mf_high"}, "pipeline noise");
    if (n.contains("surrogate")) c.surrogate_noise = parse_noise_policy(get<std::string>(n, "surrogate"));
    if (n.contains("hf")) c.hf_noise = parse_noise_policy(get<std::string>(n, "hf"));
    if (n.contains("mf_low")) c.mf_low_noise = parse_noise_policy(get<std::string>(n, "mf_low"));
    if (n.contains("mf_high")) c.mf_high_noise = parse_noise_policy(get<std::string>(n, "mf_high"));
  }
  if (j.contains("restarts")) {
    const Json& r = j.at("restarts");
    reject_unknown(r, {"hf_lf", "mf"}, "pipeline restarts");
    read_optional(r, "hf_lf", c.restarts_hf_lf);
    read_optional(r, "mf", c.restarts_mf);
  }
  read_optional(j, "mc_samples", c.mc_samples);
  if (j.contains("nll")) {
    const Json& n = j.at("nll");
    reject_unknown(n, {"layers", "epochs", "learning_rate", "h", "hidden"}, "pipeline nll");
    read_optional(n, "layers", c.nll.layers);
    read_optional(n, "epochs", c.nll.epochs);
    read_optional(n, "learning_rate", c.nll.learning_rate);
    read_optional(n, "h", c.nll.h);
    read_optional(n, "hidden", c.nll.hidden);
  }
  read_optional(j, "seed", c.seed);
  if (c.active_dim < 1) throw InvalidArgument("pipeline config: active_dim must be positive");
  if (c.n_lf_extra < 0) throw InvalidArgument("pipeline config: n_lf_extra must be nonnegative");
  if (c.restarts_hf_lf < 1 || c.restarts_mf < 1) throw InvalidArgument("pipeline config: restarts must be positive");
  if (c.mc_samples < 1) throw InvalidArgument("pipeline config: mc_samples must be positive");
  return c;
}

Json to_json(const PipelineConfig& config, const PipelineResult& result) {
  return {{"config", to_json(config)}, {"surrogate", to_json(result.surrogate)}, {"model", to_json(result.model)}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace mfas
