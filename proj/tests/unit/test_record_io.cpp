#include <doctest.h>

#include <random>

#include "hardc/error.hpp"
#include "hardc/io/record_io.hpp"
#include "hardc/io/synthetic.hpp"

using namespace hardc;
using io::ClassLabel;

TEST_CASE("class codes and names are a fixed bijection") {
  for (int code = 0; code < 5; ++code) {
    const auto label = io::class_from_code(code);
    REQUIRE(label);
    CHECK(io::class_code(*label) == code);
    CHECK(io::class_from_name(io::class_name(*label)) == label);
  }
  CHECK(io::class_name(ClassLabel::PVC) == "PVC");
  CHECK_FALSE(io::class_from_code(5));
  CHECK_FALSE(io::class_from_name("Q"));
}

TEST_CASE("parse_beat_csv maps fields and labels") {
  const auto ds = io::parse_beat_csv("0.1,0.2,3\n", 2);
  REQUIRE(ds.size() == 1);
  CHECK(ds.beat(0)[0] == doctest::Approx(0.1));
  CHECK(ds.beat(0)[1] == doctest::Approx(0.2));
  CHECK(ds.label(0) == ClassLabel::AP);
  CHECK(io::parse_beat_csv("", 5).empty());
}

TEST_CASE("parse_beat_csv reports the first malformed line") {
  const std::string good = "1,2,3,4,5,0\n";
  const std::vector<std::pair<std::string, std::size_t>> corpus{
      {good + "1,2,3,4,0\n" + good, 2},      // short row
      {good + good + "1,2,3,4,5,6,0\n", 3},  // long row
      {"1,2,x,4,5,0\n", 1},                  // non-numeric
      {good + "1,2,3,4,5,7\n", 2},           // label outside 0..4
      {good + "1,2,3,4,5,1.5\n", 2},         // fractional label
  };
  for (const auto& [text, line] : corpus) {
    try {
      io::parse_beat_csv(text, 5);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  }
}

TEST_CASE("beat CSV round trip") {
  CHECK(io::write_beat_csv(io::BeatDataset(4)).empty());

  io::BeatDataset one(2);
  one.push_back(std::vector<double>{0.5, -1.25}, ClassLabel::FN);
  const std::string line = io::write_beat_csv(one);
  CHECK(line == "0.5,-1.25,1\n");

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  io::BeatDataset ds(187);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> row(187);
    for (auto& v : row) v = u(rng);
    ds.push_back(row, static_cast<ClassLabel>(i % 5));
  }
  const auto back = io::parse_beat_csv(io::write_beat_csv(ds), 187);
  REQUIRE(back.size() == ds.size());
  CHECK(back.labels() == ds.labels());
  for (std::size_t i = 0; i < ds.values().size(); ++i) CHECK(std::abs(back.values()[i] - ds.values()[i]) <= 1e-9);
}

TEST_CASE("push_back rejects a wrong width") {
  io::BeatDataset ds(3);
  CHECK_THROWS_AS(ds.push_back(std::vector<double>{1, 2}, ClassLabel::N), ShapeMismatch);
}

TEST_CASE("parse_raw_record") {
  const auto rec = io::parse_raw_record("fs=360\n0.0\n0.1\n", "1,0\n");
  CHECK(rec.signal.fs == 360.0);
  CHECK(rec.signal.samples == std::vector<double>{0.0, 0.1});
  REQUIRE(rec.annotations.size() == 1);
  CHECK(rec.annotations[0] == io::Annotation{1, ClassLabel::N});

  CHECK_THROWS_AS(io::parse_raw_record("fs=360\n0.0\n0.1\n", "5,0\n"), ParseError);
  CHECK_THROWS_AS(io::parse_raw_record("rate=360\n0.0\n", ""), ParseError);
  CHECK_THROWS_AS(io::parse_raw_record("fs=360\n0\n0\n0\n", "2,0\n1,0\n"), ParseError);
}

TEST_CASE("75 s synthetic record parses with 27000 samples") {
  io::SyntheticEcgParams p;
  p.beats = 88;
  p.lead_in_s = 1.0;
  const auto rec = io::synthetic_ecg(p).record;
  io::Signal trimmed{std::vector<double>(rec.signal.samples.begin(), rec.signal.samples.begin() + 27000), 360.0};
  std::vector<io::Annotation> ann;
  for (const auto& a : rec.annotations)
    if (a.sample < 27000) ann.push_back(a);
  const auto back =
      io::parse_raw_record(io::write_raw_record_samples(trimmed), io::write_raw_record_annotations(ann));
  CHECK(back.signal.size() == 27000);
  CHECK(back.annotations == ann);
}

TEST_CASE("stratified_split") {
  io::BeatDataset ds(3);
  for (int i = 0; i < 50; ++i) ds.push_back(std::vector<double>{1.0 * i, 0, 0}, static_cast<ClassLabel>(i % 5));

  const auto s = io::stratified_split(ds, 0.8, 7);
  for (auto c : s.train.class_counts()) CHECK(c == 8);
  for (auto c : s.test.class_counts()) CHECK(c == 2);

  std::vector<std::size_t> all = s.train_rows;
  all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  const auto again = io::stratified_split(ds, 0.8, 7);
  CHECK(again.train_rows == s.train_rows);
  CHECK(again.test_rows == s.test_rows);

  io::BeatDataset two(1);
  two.push_back(std::vector<double>{1}, ClassLabel::N);
  two.push_back(std::vector<double>{2}, ClassLabel::N);
  const auto half = io::stratified_split(two, 0.5, 1);
  CHECK(half.train.size() == 1);
  CHECK(half.test.size() == 1);

  io::BeatDataset lone(1);
  lone.push_back(std::vector<double>{1}, ClassLabel::N);
  lone.push_back(std::vector<double>{2}, ClassLabel::N);
  lone.push_back(std::vector<double>{3}, ClassLabel::PVC);
  CHECK_THROWS_AS(io::stratified_split(lone, 0.8, 1), InsufficientClass);
}
