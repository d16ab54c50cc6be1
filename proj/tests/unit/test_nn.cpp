#include <doctest.h>

#include <cmath>
#include <random>

#include "hardc/error.hpp"
#include "hardc/nn/adam.hpp"
#include "hardc/nn/blob.hpp"
#include "hardc/nn/gradcheck.hpp"
#include "hardc/nn/kernels.hpp"
#include "hardc/nn/layers.hpp"
#include "hardc/nn/parameters.hpp"
#include "hardc/nn/recurrent.hpp"

using namespace hardc;
using namespace hardc::nn;

namespace {

std::vector<double> vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

// Loss = <op(inputs), fixed random weights>, so every output entry gets its
// own upstream gradient.
double check(ParameterSet& ps, const std::function<Var(Graph&)>& op, std::uint64_t seed = 99) {
  Tensor weights;
  {
    Graph probe;
    weights = random_tensor(probe.value(op(probe)).shape(), seed);
  }
  const auto r = check_gradients(ps.trainable(), [&](Graph& g) { return ops::dot_const(g, op(g), weights); });
  INFO("worst entry " << r.worst);
  return r.max_rel_error;
}

std::vector<double> fill(std::size_t n, double scale, bool cosine, int stride = 1) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = static_cast<double>(static_cast<int>(k) * stride + 1);
    v[k] = scale * (cosine ? std::cos(a) : std::sin(a));
  }
  return v;
}

RecurrentWeights oracle_weights(CellKind kind) {
  const std::size_t g = gate_count(kind), units = 2;
  RecurrentWeights p;
  p.w = Tensor({1, g * units}, fill(g * units, 0.5, false));
  p.u = Tensor({units, g * units}, fill(units * g * units, 0.3, true));
  p.b = Tensor({g * units}, fill(g * units, 0.1, false, 2));
  return p;
}

}  // namespace

TEST_CASE("dilated causal convolution by direct sum") {
  const Tensor x({4, 1}, {1, 2, 3, 4});
  const Tensor w({1, 1, 2}, {1, 1});
  const Tensor y = conv1d_dilated(x, w, 2, Padding::causal);
  CHECK(y.shape() == Shape{4, 1});
  CHECK(vec(y) == std::vector<double>{1, 2, 4, 6});
}

TEST_CASE("recurrent cells match scalar gate equations") {
  // tests/oracles/scalar_oracles.py
  const Tensor x({1, 2, 1}, {0.7, -0.4});
  const std::vector<double> lstm{-0.095496159077715706, -0.06808828150823952, 0.0079710179174235438,
                                 -0.045998193362327945};
  const std::vector<double> gru{-0.11632191734092802, -0.08155108753523585, 0.064304678931010495,
                                -0.076333372707382635};
  const Tensor hl = recurrent_forward(CellKind::lstm, x, oracle_weights(CellKind::lstm), false);
  const Tensor hg = recurrent_forward(CellKind::gru, x, oracle_weights(CellKind::gru), false);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(hl[i] - lstm[i]) < 1e-10);
    CHECK(std::abs(hg[i] - gru[i]) < 1e-10);
  }
}

TEST_CASE("bidirectional output layout") {
  BiRecurrentWeights p{RecurrentWeights::zeros(CellKind::gru, 3, 4), RecurrentWeights::zeros(CellKind::gru, 3, 4)};
  const Tensor y = bigru_forward(random_tensor({6, 3}, 1), p);
  CHECK(y.shape() == Shape{6, 8});
  CHECK_THROWS_AS(recurrent_forward(CellKind::lstm, random_tensor({1, 6, 2}, 1), RecurrentWeights::zeros(CellKind::lstm, 3, 4), false),
                  ShapeMismatch);
}

TEST_CASE("softmax and cross entropy") {
  const Tensor p = softmax(Tensor({1, 3}, {1, 2, 3}));
  CHECK(p[0] == doctest::Approx(0.090031).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.244728).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(0.665241).epsilon(1e-6));
  const Tensor big = softmax(Tensor({1, 3}, {1001, 1002, 1003}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(big[i] - p[i]) < 1e-12);
  CHECK(std::abs(cross_entropy(std::vector<double>{0.7, 0.2, 0.1}, 0) - 0.35667494393873245) < 1e-12);
  CHECK(std::isfinite(cross_entropy(std::vector<double>{1.0, 0.0}, 1)));
}

TEST_CASE("batch norm normalises each channel in train mode") {
  BatchNormState st(3);
  const Tensor x = random_tensor({4, 10, 3}, 5, -3, 7);
  const Tensor y = batch_norm(x, st, Mode::train);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 40; ++i) m += y[i * 3 + c];
    m /= 40;
    for (std::size_t i = 0; i < 40; ++i) v += (y[i * 3 + c] - m) * (y[i * 3 + c] - m);
    CHECK(std::abs(m) < 1e-6);
    CHECK(std::abs(v / 40 - 1) < 1e-6);
  }
  CHECK(st.running_mean[0] != 0.0);
}

TEST_CASE("dropout is identity in eval mode and scales kept units in train mode") {
  const Tensor x = random_tensor({50, 8}, 3);
  CHECK(vec(dropout(x, 0.5, 1, Mode::eval)) == vec(x));
  const Tensor y = dropout(x, 0.5, 1, Mode::train);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK((y[i] == 0.0 || std::abs(y[i] - 2 * x[i]) < 1e-15));
}

TEST_CASE("per-layer gradient checks") {
  ParameterSet ps;
  ps.add("x", random_tensor({2, 7, 3}, 1));

  SUBCASE("dense") {
    ps.get("x").value = random_tensor({5, 3}, 1);
    ps.get("x").grad = Tensor({5, 3});
    ps.add("w", random_tensor({3, 4}, 2));
    ps.add("b", random_tensor({4}, 3));
    CHECK(check(ps, [&](Graph& g) {
            return ops::dense(g, g.param(ps.get("x")), g.param(ps.get("w")), g.param(ps.get("b")));
          }) < 1e-4);
  }
  SUBCASE("conv1d over dilations and paddings") {
    ps.add("w", random_tensor({4, 3, 3}, 2));
    ps.add("b", random_tensor({4}, 3));
    for (std::size_t d : {1u, 2u, 4u})
      for (auto pad : {Padding::causal, Padding::same})
        CHECK(check(ps, [&](Graph& g) {
                return ops::conv1d(g, g.param(ps.get("x")), g.param(ps.get("w")), g.param(ps.get("b")), d, pad);
              }) < 1e-4);
  }
  SUBCASE("bidirectional lstm and gru") {
    for (auto kind : {CellKind::lstm, CellKind::gru}) {
      ParameterSet rp;
      rp.add("x", random_tensor({2, 5, 3}, 4));
      const std::size_t gu = gate_count(kind) * 2;
      for (const char* dir : {"fw", "bw"}) {
        const std::string d = dir;
        rp.add(d + ".w", random_tensor({3, gu}, 10 + gu));
        rp.add(d + ".u", random_tensor({2, gu}, 20 + gu));
        rp.add(d + ".b", random_tensor({gu}, 30 + gu));
      }
      auto vars = [&](Graph& g, const std::string& d) {
        return ops::RecurrentVars{g.param(rp.get(d + ".w")), g.param(rp.get(d + ".u")), g.param(rp.get(d + ".b"))};
      };
      CHECK(check(rp, [&](Graph& g) {
              return ops::bidirectional(g, kind, g.param(rp.get("x")), vars(g, "fw"), vars(g, "bw"));
            }) < 1e-4);
    }
  }
  SUBCASE("batch norm") {
    ps.add("gamma", random_tensor({3}, 5, 0.5, 1.5));
    ps.add("beta", random_tensor({3}, 6));
    Tensor rm({3}), rv({3}, 1.0);
    CHECK(check(ps, [&](Graph& g) {
            return ops::batch_norm(g, g.param(ps.get("x")), g.param(ps.get("gamma")), g.param(ps.get("beta")), rm, rv);
          }) < 1e-4);
  }
  SUBCASE("softmax with cross entropy") {
    ParameterSet sp;
    sp.add("z", random_tensor({4, 5}, 7, -2, 2));
    const std::vector<std::size_t> y{0, 3, 4, 1};
    const auto r = check_gradients(sp.trainable(), [&](Graph& g) {
      return ops::cross_entropy(g, ops::softmax(g, g.param(sp.get("z"))), y);
    });
    CHECK(r.max_rel_error < 1e-4);
  }
  SUBCASE("pooling and activations") {
    CHECK(check(ps, [&](Graph& g) { return ops::max_pool(g, g.param(ps.get("x")), 2, 1); }) < 1e-4);
    CHECK(check(ps, [&](Graph& g) { return ops::global_avg_pool(g, g.param(ps.get("x"))); }) < 1e-4);
    CHECK(check(ps, [&](Graph& g) { return ops::tanh(g, g.param(ps.get("x"))); }) < 1e-4);
    CHECK(check(ps, [&](Graph& g) { return ops::sigmoid(g, g.param(ps.get("x"))); }) < 1e-4);
    CHECK(check(ps, [&](Graph& g) { return ops::relu(g, g.param(ps.get("x"))); }) < 1e-4);
    CHECK(check(ps, [&](Graph& g) { return ops::dropout(g, g.param(ps.get("x")), 0.5); }) < 1e-4);
  }
}

TEST_CASE("graph backward runs once") {
  ParameterSet ps;
  ps.add("a", Tensor({2}, {1, 2}));
  Graph g;
  const Var loss = ops::sum_squares(g, g.param(ps.get("a")));
  g.backward(loss);
  CHECK(vec(ps.get("a").grad) == std::vector<double>{2, 4});
  CHECK_THROWS_AS(g.backward(loss), GraphStale);
}

TEST_CASE("Adam first step") {
  Parameter p("w", Tensor({1}, {0.0}));
  p.grad[0] = 1.0;
  Adam adam;
  adam.step({&p});
  CHECK(std::abs(p.value[0] - -0.00099999999000000028) < 1e-15);
  CHECK(adam.steps() == 1);

  Parameter q("w", Tensor({1}, {2.0}));
  Adam with_l2(AdamConfig{1e-3, 0.9, 0.999, 1e-8, 0.5});
  with_l2.step({&q});  // grad 0, L2 term 2*0.5*2 = 2 > 0
  CHECK(q.value[0] < 2.0);

  Parameter bad("w", Tensor({1}, {0.0}));
  bad.grad[0] = std::nan("");
  CHECK_THROWS_AS(Adam{}.step({&bad}), NumericError);
}

TEST_CASE("tensor blob round trip and malformed input") {
  const NamedTensors t{{"a.w", Tensor({2, 3}, {1, -2, 3.5, 4, 5, 6})}, {"b", Tensor({1}, {0.25})}};
  const std::string bytes = encode_blob(t);
  CHECK(bytes.substr(0, 4) == "HRDC");
  const auto back = decode_blob(bytes);
  REQUIRE(back.size() == 2);
  CHECK(back[0].first == "a.w");
  CHECK(back[0].second.shape() == Shape{2, 3});
  CHECK(vec(back[0].second) == vec(t[0].second));
  CHECK_THROWS_AS(decode_blob(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(decode_blob("XXXX" + bytes.substr(4)), FormatError);
  CHECK_THROWS_AS(decode_blob(""), FormatError);

  const std::string art = encode_artifact(Artifact{{{"component", "x"}, {"seed", "3"}}, t});
  const Artifact a = decode_artifact(art);
  CHECK(a.field("seed") == "3");
  CHECK_THROWS_AS(a.field("missing"), FormatError);
}

TEST_CASE("parameter set load is strict") {
  ParameterSet ps;
  ps.add("a", Tensor({2}, {1, 2}));
  ps.add("b", Tensor({1}, {3}), false);
  CHECK(ps.trainable().size() == 1);
  CHECK_THROWS_AS(ps.add("a", Tensor({1})), SpecError);

  auto state = ps.state();
  state[0].second[0] = 9;
  ps.load(state);
  CHECK(ps.get("a").value[0] == 9);

  CHECK_THROWS_AS(ps.load({state[0]}), FormatError);
  CHECK_THROWS_AS(ps.load({state[0], state[1], {"c", Tensor({1})}}), FormatError);
  CHECK_THROWS_AS(ps.load({state[0], {"b", Tensor({2})}}), FormatError);
}
