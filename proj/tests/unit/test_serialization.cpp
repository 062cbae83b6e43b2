#include <gtest/gtest.h>

#include "mfas/serialization.hpp"
#include "oracles.hpp"

#include <cstring>

using namespace mfas;

namespace {

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Dataset wavy(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x = mfas::testing::random_matrix(n, 2, rng);
  Vector y = (3 * x.col(0)).array().sin() + x.col(1).array().square();
  return Dataset(x, y);
}

}  // namespace

TEST(Serialization, GpModelPredictsBitIdentically) {
  Dataset d = wavy(15, 1);
  FitOptions fo;
  fo.restarts = 2;
  fo.noise = NoisePolicy::kFree;
  GpModel gp = fit(d.inputs(), d.outputs(), KernelFamily::kRbfArd, fo);
  // Through text, as written to disk.
  GpModel back = gp_model_from_json(Json::parse(to_json(gp).dump()));
  Matrix test = wavy(10, 2).inputs();
  Marginals a = gp.predict_marginals(test), b = back.predict_marginals(test);
  EXPECT_TRUE(bitwise_equal(a.mean, b.mean));
  EXPECT_TRUE(bitwise_equal(a.variance, b.variance));
  EXPECT_EQ(back.noise_variance(), gp.noise_variance());
  EXPECT_EQ(back.seed(), gp.seed());
}

TEST(Serialization, MfModelPredictsBitIdentically) {
  Dataset low = wavy(20, 3);
  Dataset high(low.inputs().topRows(8), 2 * low.outputs().head(8));
  NargpOptions o;
  o.restarts = {2, 2};
  o.mc_samples = 30;
  o.seed = 0xfffffffffffffff1ULL;
  MfModel model = train_nargp({low, high}, o);
  MfModel back = mf_model_from_json(Json::parse(to_json(model).dump()));
  EXPECT_EQ(back.seed(), model.seed());
  EXPECT_EQ(back.mc_samples(), 30);
  Matrix test = wavy(5, 4).inputs();
  EXPECT_TRUE(bitwise_equal(predict_mc(model, test).mean, predict_mc(back, test).mean));
}

TEST(Serialization, RevNetRoundTrip) {
  RevNet net = RevNet::random(5, 3, 0.25, 7);
  RevNet back = revnet_from_json(Json::parse(to_json(net).dump()));
  EXPECT_TRUE(back.padded());
  EXPECT_TRUE(bitwise_equal(back.parameters(), net.parameters()));
  std::mt19937_64 rng(1);
  Matrix x = mfas::testing::random_matrix(4, 5, rng);
  EXPECT_TRUE(bitwise_equal(back.forward(x), net.forward(x)));

  Json bad = to_json(net);
  bad["padded"] = false;
  EXPECT_THROW(revnet_from_json(bad), InvalidArgument);
}

TEST(Serialization, ResponseSurfaceRoundTrip) {
  Dataset d = wavy(12, 5);
  Matrix w(2, 1);
  w << 0.6, 0.8;
  FitOptions fo;
  fo.restarts = 1;
  ResponseSurface s = fit_response_surface(Reducer::linear(w), d, fo);
  ResponseSurface back = response_surface_from_json(Json::parse(to_json(s).dump()));
  EXPECT_TRUE(bitwise_equal(back.predict_mean(d.inputs()), s.predict_mean(d.inputs())));

  ResponseSurface n = fit_response_surface(Reducer::nonlinear(RevNet::random(2, 2, 0.25, 3)), d, fo);
  ResponseSurface nback = response_surface_from_json(Json::parse(to_json(n).dump()));
  EXPECT_EQ(nback.reducer.kind(), ReducerKind::kNll);
  EXPECT_TRUE(bitwise_equal(nback.predict_mean(d.inputs()), n.predict_mean(d.inputs())));
}

TEST(Serialization, PipelineConfigDefaultsAndRoundTrip) {
  PipelineConfig defaults = pipeline_config_from_json(Json::object());
  EXPECT_EQ(to_json(defaults).dump(), to_json(PipelineConfig{}).dump());

  PipelineConfig c;
  c.reducer = ReducerKind::kNll;
  c.n_lf_extra = 250;
  c.lf_sampler = SamplerKind::kSobol;
  c.domain = Box::centered(3);
  c.mf_high_noise = NoisePolicy::kFree;
  c.restarts_mf = 100;
  c.nll.epochs = 50;
  c.seed = 99;
  Json j = to_json(c);
  EXPECT_EQ(to_json(pipeline_config_from_json(j)).dump(), j.dump());
}

TEST(Serialization, PipelineConfigRejectsBadInput) {
  EXPECT_THROW(pipeline_config_from_json(Json{{"reducr", "as"}}), InvalidArgument);
  EXPECT_THROW(pipeline_config_from_json(Json{{"reducer", "pca"}}), InvalidArgument);
  EXPECT_THROW(pipeline_config_from_json(Json{{"noise", {{"hf", "loud"}}}}), InvalidArgument);
  EXPECT_THROW(pipeline_config_from_json(Json{{"mc_samples", 0}}), InvalidArgument);
  EXPECT_THROW(pipeline_config_from_json(Json{{"n_lf_extra", "many"}}), InvalidArgument);
  EXPECT_THROW(pipeline_config_from_json(Json::array()), InvalidArgument);
}

TEST(Serialization, MatrixHelpers) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  EXPECT_TRUE(matrix_from_json(matrix_to_json(m)) == m);
  EXPECT_EQ(matrix_from_json(Json::array(), 4).cols(), 4);
  EXPECT_THROW(matrix_from_json(Json::parse("[[1,2],[3]]")), InvalidArgument);
  EXPECT_THROW(vector_from_json(Json::parse("[1,\"a\"]")), InvalidArgument);
}
