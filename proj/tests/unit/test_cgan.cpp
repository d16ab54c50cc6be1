#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hardc/error.hpp"
#include "hardc/gan/cgan.hpp"
#include "hardc/io/synthetic.hpp"

using namespace hardc;
using io::ClassLabel;

namespace {

gan::GanSpec tiny_spec() {
  gan::GanSpec s;
  s.latent_dim = 4;
  s.segment_len = 16;
  s.channels = 3;
  s.lstm_units = 2;
  s.kernel = 3;
  s.downsample = 4;
  return s;
}

gan::GanBatch fixed_batch(const gan::GanSpec& spec) {
  const auto ds = io::toy_separable_beats(8, spec.segment_len, 6);
  gan::GanBatch b;
  b.real = nn::Tensor({8, spec.segment_len}, ds.values());
  for (auto l : ds.labels()) b.real_labels.push_back(static_cast<std::size_t>(l));
  b.z = gan::sample_latent(8, spec.latent_dim, 3);
  b.fake_labels = {0, 1, 2, 3, 4, 0, 1, 2};
  return b;
}

}  // namespace

TEST_CASE("GAN losses") {
  const std::vector<double> half(3, 0.5);
  const auto h = gan::gan_losses(half, half);
  CHECK(std::abs(h.d - 2 * std::log(2.0)) < 1e-12);

  const std::vector<double> one{1.0, 1.0}, zero{0.0, 0.0};
  CHECK(gan::gan_losses(one, zero).d < 1e-6);

  // tests/oracles/scalar_oracles.py
  const std::vector<double> dr{0.9, 0.6, 0.3}, df{0.2, 0.7, 0.4};
  const auto ns = gan::gan_losses(dr, df);
  const auto mm = gan::gan_losses(dr, df, gan::GeneratorLoss::minimax);
  CHECK(std::abs(ns.d - 1.2527003077186298) < 1e-10);
  CHECK(std::abs(ns.g - 0.96080119608232917) < 1e-10);
  CHECK(std::abs(mm.d - 1.2527003077186298) < 1e-10);
  CHECK(std::abs(mm.g - -0.64598065980204544) < 1e-10);
}

TEST_CASE("generator and discriminator shapes") {
  const auto spec = tiny_spec();
  const gan::Generator g(spec, 1);
  const gan::Discriminator d(spec, 2);
  const std::vector<std::size_t> labels{0, 4, 2};
  const nn::Tensor x = g.generate(gan::sample_latent(3, spec.latent_dim, 5), labels);
  CHECK(x.shape() == nn::Shape{3, 16});
  for (double v : x.data()) CHECK(std::isfinite(v));
  const nn::Tensor s = d.score(x, labels);
  CHECK(s.shape() == nn::Shape{3, 1});
  for (double v : s.data()) CHECK((v > 0.0 && v < 1.0));
}

TEST_CASE("one optimisation step lowers the stepped loss on its batch") {
  const auto spec = tiny_spec();
  gan::Generator g(spec, 1);
  gan::Discriminator d(spec, 2);
  gan::GanHyper h;
  h.lr_d = h.lr_g = 1e-3;
  gan::GanTrainer t(g, d, h);
  const auto batch = fixed_batch(spec);

  const double before_d = t.discriminator_step(batch);
  const double after_d = t.evaluate(batch).d;
  CHECK(after_d < before_d);

  const double before_g = t.generator_step(batch);
  const double after_g = t.evaluate(batch).g;
  CHECK(after_g < before_g);
}

TEST_CASE("CGAN training is deterministic per seed") {
  const auto spec = tiny_spec();
  const auto ds = io::toy_separable_beats(20, 16, 2);
  gan::GanHyper h;
  h.epochs = 2;
  h.batch = 8;
  h.seed = 4;
  const auto a = gan::train_cgan(ds, spec, h);
  const auto b = gan::train_cgan(ds, spec, h);
  CHECK(a.history == b.history);
  CHECK(a.history.size() == 2);
  CHECK(gan::encode_generator(a.generator, 4) == gan::encode_generator(b.generator, 4));
  CHECK_THROWS_AS(gan::train_cgan(io::BeatDataset(16), spec, h), EmptyDataset);

  const auto syn = gan::synthesize(a.generator, ClassLabel::AP, 6, 1);
  CHECK(syn.size() == 6);
  for (auto l : syn.labels()) CHECK(l == ClassLabel::AP);
  for (std::size_t i = 0; i < syn.size(); ++i) {
    const auto beat = syn.beat(i);
    const double m = std::accumulate(beat.begin(), beat.end(), 0.0) / 16;
    double v = 0;
    for (double x : beat) v += (x - m) * (x - m);
    CHECK(v > 0.0);
  }
  CHECK(gan::synthesize(a.generator, ClassLabel::N, 0, 1).empty());
  CHECK(gan::synthesize(a.generator, ClassLabel::FN, 3, 9) == gan::synthesize(a.generator, ClassLabel::FN, 3, 9));
}

TEST_CASE("balance arithmetic") {
  const gan::ClassCounts table1{90589, 8039, 7236, 2779, 803};
  const auto plan = gan::balance_plan(table1, {});
  for (std::size_t c = 0; c < 5; ++c) CHECK(table1[c] + plan[c] == 90589);
  CHECK(plan[0] == 0);

  CHECK_THROWS_AS(gan::balance_plan({10, 0, 3, 3, 3}, {}), MissingClass);

  gan::BalanceTarget per;
  per.mode = gan::BalanceMode::per_class;
  per.counts = {50, 30, 10, 40, 40};
  CHECK(gan::balance_plan({40, 20, 20, 20, 20}, per) == gan::ClassCounts{10, 10, 0, 20, 20});
}

TEST_CASE("augment_to_balance keeps originals and tops up minorities") {
  const auto spec = tiny_spec();
  const gan::Generator g(spec, 3);
  io::BeatDataset ds(16);
  const auto toy = io::toy_separable_beats(500, 16, 1);
  const std::array<std::size_t, 5> want{100, 20, 20, 20, 20};
  std::array<std::size_t, 5> have{};
  for (std::size_t i = 0; i < toy.size(); ++i) {
    const auto c = static_cast<std::size_t>(toy.label(i));
    if (have[c] < want[c]) ds.push_back(toy.beat(i), toy.label(i)), ++have[c];
  }
  const auto out = gan::augment_to_balance(ds, g, {}, 7);
  for (auto c : out.class_counts()) CHECK(c == 100);
  REQUIRE(out.size() == 500);
  CHECK(out.subset([] {
    std::vector<std::size_t> r(180);
    std::iota(r.begin(), r.end(), 0);
    return r;
  }()) == ds);
  std::array<std::size_t, 5> added{};
  for (std::size_t i = ds.size(); i < out.size(); ++i) ++added[static_cast<std::size_t>(out.label(i))];
  CHECK(added == std::array<std::size_t, 5>{0, 80, 80, 80, 80});

  CHECK(gan::augment_to_balance(out, g, {}, 7) == out);
}

TEST_CASE("generator and discriminator artifacts") {
  const auto spec = tiny_spec();
  const gan::Generator g(spec, 3);
  const gan::Discriminator d(spec, 4);
  const auto gb = gan::encode_generator(g, 11);
  const auto db = gan::encode_discriminator(d, 11);
  CHECK(gan::decode_generator(gb).spec() == spec);
  CHECK(gan::decode_discriminator(db).spec() == spec);
  CHECK_THROWS_AS(gan::decode_generator(db), FormatError);
  CHECK_THROWS_AS(gan::decode_discriminator(gb), FormatError);
}

TEST_CASE("GAN spec map round trip") {
  CHECK(gan::GanSpec::from_map(tiny_spec().to_map()) == tiny_spec());
  auto bad = tiny_spec();
  bad.latent_dim = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
}
