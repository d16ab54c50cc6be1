#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hardc/error.hpp"
#include "hardc/io/synthetic.hpp"
#include "hardc/model/bench.hpp"
#include "hardc/model/checkpoint.hpp"
#include "hardc/model/hardc.hpp"
#include "hardc/model/routing.hpp"
#include "hardc/model/train.hpp"
#include "hardc/nn/gradcheck.hpp"
#include "hardc/nn/layers.hpp"

using namespace hardc;
using nn::Tensor;

namespace {

std::vector<double> vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

model::ModelSpec micro_spec() {
  model::ModelSpec s;
  s.segment_len = 16;
  s.rnn_units_block1 = 2;
  s.rnn_units_block2 = 2;
  s.conv_blocks = 2;
  s.kernel_width = 2;
  s.filters = 3;
  s.target_convs = 5;
  s.attention_dim = 4;
  return s;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

Tensor random_tensor(nn::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

// Hand-set inputs shared with tests/oracles/routing_oracle.py.
const Tensor kRv({2, 2}, {0.5, -1.0, 2.0, 0.25});
const Tensor kW({2, 2, 2}, {1.0, 0.5, -0.5, 1.0, 0.2, -1.5, 0.7, 0.3});

}  // namespace

TEST_CASE("routing matches the brute-force oracle") {
  std::vector<model::RoutingState> trace;
  const Tensor cv = model::routing(kRv, kW, 3, &trace);
  REQUIRE(trace.size() == 3);
  const std::vector<std::vector<double>> c{
      {0.5, 0.5, 0.5, 0.5},
      {0.43585920454300642, 0.56414079545699358, 0.28321131756601425, 0.71678868243398564},
      {0.33343205017300176, 0.6665679498269983, 0.069887549240030711, 0.93011245075996929}};
  for (std::size_t it = 0; it < 3; ++it)
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(trace[it].c[k] - c[it][k]) < 1e-9);
  const std::vector<double> want{0.18401768298356996, -0.064465490123138569, 0.036302645500159034,
                                 -0.92065485520604495};
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(cv[k] - want[k]) < 1e-9);
}

TEST_CASE("attention matches direct evaluation") {
  const Tensor cv = model::routing(kRv, kW, 3);
  Tensor alpha;
  const Tensor o = model::attention_aggregate(cv, Tensor({2}, {0.3, -0.8}), &alpha);
  CHECK(std::abs(alpha[0] - 0.34510256320595445) < 1e-10);
  CHECK(std::abs(alpha[1] - 0.65489743679404555) < 1e-10);
  CHECK(std::abs(o[0] - 0.087279483559747795) < 1e-10);
  CHECK(std::abs(o[1] - -0.62518171072625517) < 1e-10);

  const Tensor same({3, 2}, {0.1, 0.2, 0.1, 0.2, 0.1, 0.2});
  const Tensor o2 = model::attention_aggregate(same, Tensor({2}, {5, -3}));
  CHECK(std::abs(o2[0] - 0.1) < 1e-15);
  CHECK(std::abs(o2[1] - 0.2) < 1e-15);
}

TEST_CASE("routing invariants and errors") {
  const Tensor rv = random_tensor({9, 4}, 1), w = random_tensor({6, 4, 5}, 2);
  std::vector<model::RoutingState> trace;
  const Tensor cv = model::routing(rv, w, 4, &trace);
  for (const auto& s : trace)
    for (std::size_t i = 0; i < 9; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < 6; ++j) row += s.c.at(i, j);
      CHECK(std::abs(row - 1) < 1e-9);
    }
  for (std::size_t j = 0; j < 6; ++j) {
    double n = 0;
    for (std::size_t k = 0; k < 5; ++k) n += cv.at(j, k) * cv.at(j, k);
    CHECK(std::sqrt(n) < 1.0);
  }
  std::vector<model::RoutingState> one;
  model::routing(rv, w, 1, &one);
  for (std::size_t i = 0; i < one[0].c.size(); ++i) CHECK(one[0].c[i] == doctest::Approx(1.0 / 6));

  std::vector<double> zero(3, 0.0);
  model::squash_inplace(zero);
  CHECK(zero == std::vector<double>(3, 0.0));

  CHECK_THROWS_AS(model::routing(rv, w, 0), SpecError);
  CHECK_THROWS_AS(model::routing(random_tensor({9, 3}, 1), w, 3), ShapeMismatch);
  CHECK_THROWS_AS(model::attention_aggregate(cv, Tensor({4})), ShapeMismatch);
}

TEST_CASE("routing and attention graph ops pass gradient checks") {
  nn::ParameterSet ps;
  ps.add("rv", random_tensor({2, 5, 3}, 3));
  ps.add("w", random_tensor({4, 3, 2}, 4));
  ps.add("q", random_tensor({2}, 5));
  const Tensor weights = random_tensor({2, 2}, 6);
  const auto r = nn::check_gradients(ps.trainable(), [&](nn::Graph& g) {
    const auto cv = model::routing_op(g, g.param(ps.get("rv")), g.param(ps.get("w")), 3);
    return nn::ops::dot_const(g, model::attention_op(g, cv, g.param(ps.get("q"))), weights);
  });
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("receptive field of the dilated stack") {
  for (auto [w, l, rf] : {std::tuple{2, 1, 2}, std::tuple{5, 2, 9}, std::tuple{8, 3, 29}}) {
    model::ModelSpec s;
    s.kernel_width = static_cast<std::size_t>(w);
    s.conv_blocks = static_cast<std::size_t>(l);
    CHECK(model::measure_receptive_field(s) == static_cast<std::size_t>(rf));
    CHECK(model::receptive_field(s) == static_cast<std::size_t>(rf));
  }
  model::ModelSpec s;
  s.conv_blocks = 4;
  CHECK(model::dilation_schedule(s) == std::vector<std::size_t>{1, 1, 2, 4});
}

TEST_CASE("spec validation and map round trip") {
  model::ModelSpec s;
  CHECK_NOTHROW(s.validate());
  auto bad = s;
  bad.target_convs = 4;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = s;
  bad.kernel_width = 1;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = s;
  bad.routing_iters = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  CHECK(model::ModelSpec::from_map(micro_spec().to_map()) == micro_spec());
  CHECK_THROWS_AS(model::ModelSpec::from_map({{"nonsense", "1"}}), SpecError);
}

TEST_CASE("default layer plan follows the published table") {
  const model::Model m(model::ModelSpec{}, 0);
  std::map<std::string, nn::Shape> plan;
  for (const auto& e : m.layer_plan()) plan[e.name] = e.shape;
  CHECK(plan.at("bigru.fw.u") == nn::Shape{64, 192});
  CHECK(plan.at("bilstm.fw.u") == nn::Shape{128, 512});
  CHECK(plan.at("conv1.w") == nn::Shape{64, 384, 8});
  for (const char* c : {"conv2.w", "conv3.w"}) CHECK(plan.at(c) == nn::Shape{64, 64, 8});
  CHECK_FALSE(plan.count("conv4.w"));
  CHECK(plan.at("conv1.bn.gamma") == nn::Shape{64});
  CHECK(plan.at("route1.w") == nn::Shape{6, 64, 64});
  CHECK(plan.at("attn3.q") == nn::Shape{64});
  CHECK(plan.at("head.w") == nn::Shape{64, 5});
  CHECK(plan.at("head.b") == nn::Shape{5});
}

TEST_CASE("prediction is a distribution and is reproducible") {
  const model::Model m(micro_spec(), 3);
  const auto ds = io::toy_separable_beats(5, 16, 2);
  const Tensor p = m.predict(ds.beat(0));
  REQUIRE(p.size() == 5);
  CHECK(std::accumulate(p.data().begin(), p.data().end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Regression golden recorded from the first verified build.
  const std::vector<double> golden{0.20205362500008914, 0.20178962889280222, 0.19891412128530425,
                                   0.19984171039616971, 0.19740091442563476};
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(p[i] - golden[i]) < 1e-12);

  const model::Model twin(micro_spec(), 3);
  CHECK(vec(twin.predict(ds.beat(0))) == vec(p));
  CHECK_THROWS_AS(m.predict(std::vector<double>(15, 0.0)), ShapeMismatch);
}

TEST_CASE("end-to-end micro model gradient check") {
  model::Model m(micro_spec(), 1);
  const auto ds = io::toy_separable_beats(6, 16, 3);
  const auto rows = iota(6);
  const Tensor x = model::beats_tensor(ds, rows);
  const auto y = model::label_indices(ds, rows);
  const auto r = nn::check_gradients(
      m.trainable(), [&](nn::Graph& g) { return nn::ops::cross_entropy(g, m.forward(g, x), y); });
  INFO("worst " << r.worst);
  CHECK(r.checked > 100);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("training is deterministic and reduces loss") {
  const auto ds = io::toy_separable_beats(40, 16, 4);
  model::TrainHyper h;
  h.epochs = 3;
  h.batch = 8;
  h.seed = 9;
  model::Model a(micro_spec(), 2), b(micro_spec(), 2);
  const auto ha = model::train(a, ds, h);
  const auto hb = model::train(b, ds, h);
  CHECK(ha == hb);
  CHECK(ha.size() == 3);
  CHECK(ha.back().loss < ha.front().loss);

  model::Model c(micro_spec(), 2);
  CHECK_THROWS_AS(model::train(c, io::BeatDataset(16), h), EmptyDataset);
  CHECK_THROWS_AS(model::train(c, io::toy_separable_beats(10, 12, 1), h), ShapeMismatch);
}

TEST_CASE("checkpoint round trip") {
  model::Model m(micro_spec(), 5);
  const std::vector<model::EpochStats> hist{{1, 1.25, 0.5}, {2, 0.75, 0.875}};
  const auto ckpt = model::make_checkpoint(m, hist);
  const std::string bytes = model::encode_checkpoint(ckpt);
  const auto back = model::decode_checkpoint(bytes);
  CHECK(back.spec == micro_spec());
  CHECK(back.seed == 5);
  CHECK(back.history == hist);
  CHECK(model::encode_checkpoint(back) == bytes);

  const model::Model r = model::restore_model(back);
  const auto ds = io::toy_separable_beats(3, 16, 1);
  const Tensor p0 = m.predict(ds.beat(1)), p1 = r.predict(ds.beat(1));
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(p0[i] - p1[i]) < 1e-6);  // f32 storage

  CHECK_THROWS_AS(model::decode_checkpoint(bytes.substr(0, bytes.size() / 2)), FormatError);
  CHECK(model::history_csv(hist) == "epoch,loss,accuracy\n1,1.25,0.5\n2,0.75,0.875\n");
}

TEST_CASE("dilated stack workload") {
  model::DilationBenchConfig cfg;
  cfg.iterations = 5;
  cfg.rounds = 1;
  const model::DilationWorkload w(cfg);
  CHECK(w.dense.dim(2) == 29);
  const Tensor a = w.run_dilated(), b = w.run_dense();
  CHECK(a.shape() == b.shape());
  const auto r = model::run_dilation_bench(cfg);
  CHECK(r.receptive_field == 29);
  CHECK(r.dilated_seconds > 0);
}
