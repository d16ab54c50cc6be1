#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/cli.hpp"
#include "cli/config.hpp"
#include "hardc/dsp/pipeline.hpp"
#include "hardc/error.hpp"
#include "hardc/gan/cgan.hpp"
#include "hardc/io/record_io.hpp"
#include "hardc/metrics/report.hpp"
#include "hardc/model/bench.hpp"
#include "hardc/model/checkpoint.hpp"
#include "hardc/model/train.hpp"

namespace hardc::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

io::BeatDataset read_beats(const std::string& path) {
  const std::string text = io::read_file(path);
  const auto end = text.find('\n');
  const std::string first = text.substr(0, end);
  if (first.find_first_not_of(" \t\r") == std::string::npos) throw EmptyDataset(path + " holds no beats");
  const auto commas = static_cast<std::size_t>(std::count(first.begin(), first.end(), ','));
  if (commas == 0) throw ParseError(1, "beat rows need samples followed by a class code");
  return io::parse_beat_csv(text, commas);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  const fs::path dir = cfg.out_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create output directory " + dir.string() + ": " + ec.message());
  return (dir / name).string();
}

std::vector<std::string> class_names() {
  std::vector<std::string> n;
  for (auto c : io::kClassNames) n.emplace_back(c);
  return n;
}

std::string counts_string(const io::BeatDataset& ds) {
  std::string s;
  const auto counts = ds.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    s += (c ? " " : "") + std::string(io::kClassNames[c]) + "=" + std::to_string(counts[c]);
  return s;
}

// Options shared by every subcommand plus named overrides that map to keys.
struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> overrides;  // key -> value, filled by flags
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "Config file (key = value, [section] headers)");
  sub->add_option_function<std::string>(
      "--seed", [&c](const std::string& v) { c.overrides["seed"] = v; }, "Seed for every random stream");
  sub->add_option_function<std::string>(
      "--out", [&c](const std::string& v) { c.overrides["out"] = v; }, "Output directory");
  sub->add_option("--set", c.sets, "Override any config key: section.key=value");
}

void add_override(CLI::App* sub, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&c, key](const std::string& v) { c.overrides[key] = v; }, help);
}

RunConfig build_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  for (const auto& [k, v] : c.overrides) cfg.set(k, v);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(0, "--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

int cmd_preprocess(const RunConfig& cfg, const std::string& record, const std::string& annotations, std::ostream& out) {
  const io::RawRecord rec = io::parse_raw_record(io::read_file(record), io::read_file(annotations));
  const auto result = dsp::preprocess_record(rec, cfg.pipeline());
  io::write_file(out_path(cfg, "beats.csv"), io::write_beat_csv(result.beats));
  std::string del = "r_peak,qrs_onset,qrs_offset,carried\n";
  for (const auto& b : result.delineation)
    del += std::to_string(b.r_peak) + "," + std::to_string(b.qrs_onset) + "," + std::to_string(b.qrs_offset) + "," +
           (b.carried ? "1" : "0") + "\n";
  io::write_file(out_path(cfg, "delineation.csv"), del);
  out << "peaks " << result.peaks.size() << ", beats " << result.beats.size() << " (" << counts_string(result.beats)
      << ")\n";
  return ok;
}

int cmd_synth(const RunConfig& cfg, const std::string& beats, const std::string& generator_path, std::ostream& out) {
  const io::BeatDataset ds = read_beats(beats);
  const auto target = cfg.balance_target();
  std::optional<gan::Generator> gen;
  if (!generator_path.empty()) {
    gen.emplace(gan::decode_generator(io::read_file(generator_path)));
  } else {
    auto result = gan::train_cgan(ds, cfg.gan_spec(ds.segment_len()), cfg.gan_hyper());
    std::string hist = "epoch,loss_d,loss_g\n";
    for (const auto& e : result.history)
      hist += std::to_string(e.epoch) + "," + fmt("%.17g", e.loss_d) + "," + fmt("%.17g", e.loss_g) + "\n";
    io::write_file(out_path(cfg, "gan_history.csv"), hist);
    io::write_file(out_path(cfg, "generator.ckpt"), gan::encode_generator(result.generator, cfg.seed()));
    io::write_file(out_path(cfg, "discriminator.ckpt"), gan::encode_discriminator(result.discriminator, cfg.seed()));
    if (!result.history.empty())
      out << "cgan epochs " << result.history.size() << ", final loss_d " << fmt("%.4f", result.history.back().loss_d)
          << ", loss_g " << fmt("%.4f", result.history.back().loss_g) << "\n";
    gen.emplace(std::move(result.generator));
  }
  const io::BeatDataset balanced = gan::augment_to_balance(ds, *gen, target, cfg.seed());
  io::write_file(out_path(cfg, "balanced.csv"), io::write_beat_csv(balanced));
  out << "balanced " << balanced.size() << " beats (" << counts_string(balanced) << ")\n";
  return ok;
}

int cmd_train(const RunConfig& cfg, const std::string& beats, std::ostream& out) {
  const io::BeatDataset ds = read_beats(beats);
  model::Model m(cfg.model_spec(ds.segment_len()), cfg.seed());
  const auto history = model::train(m, ds, cfg.train_hyper(), [&](const model::EpochStats& e) {
    out << "epoch " << e.epoch << " loss " << fmt("%.6f", e.loss) << " accuracy " << fmt("%.4f", e.accuracy) << "\n";
  });
  model::save_checkpoint(out_path(cfg, "model.ckpt"), model::make_checkpoint(m, history));
  io::write_file(out_path(cfg, "history.csv"), model::history_csv(history));
  return ok;
}

int cmd_eval(const RunConfig& cfg, const std::string& model_path, const std::string& beats, std::ostream& out) {
  const model::Model m = model::restore_model(model::load_checkpoint(model_path));
  const io::BeatDataset ds = read_beats(beats);
  if (ds.empty()) throw EmptyDataset("no beats to evaluate");
  const auto t0 = std::chrono::steady_clock::now();
  const nn::Tensor probs = model::predict_dataset(m, ds);
  std::vector<std::size_t> labels;
  for (auto l : ds.labels()) labels.push_back(static_cast<std::size_t>(l));
  metrics::EvalReport report = metrics::evaluate(probs, labels, class_names());
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_file(out_path(cfg, "report.csv"), metrics::emit_report(report, metrics::ReportFormat::csv));
  io::write_file(out_path(cfg, "report.jsonl"), metrics::emit_report(report, metrics::ReportFormat::json_lines));
  io::write_file(out_path(cfg, "confusion.csv"), metrics::emit_confusion_csv(report.confusion));
  if (ds.size() >= 2) {
    nn::Tensor x({ds.size(), ds.segment_len()}, ds.values());
    const nn::Tensor corr = metrics::correlation_matrix(x);
    std::string text;
    for (std::size_t i = 0; i < corr.dim(0); ++i) {
      for (std::size_t j = 0; j < corr.dim(1); ++j) text += (j ? "," : "") + fmt("%.6g", corr.at(i, j));
      text += "\n";
    }
    io::write_file(out_path(cfg, "correlation.csv"), text);
  }
  out << metrics::emit_report(report, metrics::ReportFormat::text);
  return ok;
}

int cmd_predict(const std::string& model_path, const std::string& beats, std::ostream& out) {
  const model::Model m = model::restore_model(model::load_checkpoint(model_path));
  const io::BeatDataset ds = read_beats(beats);
  out << "index";
  for (auto n : io::kClassNames) out << "," << n;
  out << ",predicted\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const nn::Tensor p = m.predict(ds.beat(i));
    std::size_t best = 0;
    out << i;
    for (std::size_t c = 0; c < p.size(); ++c) {
      out << "," << fmt("%.9g", p[c]);
      if (p[c] > p[best]) best = c;
    }
    out << "," << io::kClassNames[best] << "\n";
  }
  return ok;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  const auto b = cfg.bench();
  const auto r = model::run_dilation_bench(b);
  const std::string row = std::to_string(b.width) + "," + std::to_string(b.levels) + "," +
                          std::to_string(r.receptive_field) + "," + std::to_string(b.iterations) + "," +
                          fmt("%.6f", r.dilated_seconds) + "," + fmt("%.6f", r.dense_seconds) + "," +
                          fmt("%.4f", r.ratio) + "\n";
  io::write_file(out_path(cfg, "bench.csv"),
                 "width,levels,receptive_field,iterations,dilated_s,dense_s,ratio\n" + row);
  out << "receptive field " << r.receptive_field << ": dilated " << fmt("%.4f", r.dilated_seconds) << " s, dense "
      << fmt("%.4f", r.dense_seconds) << " s over " << b.iterations << " forward passes, ratio "
      << fmt("%.3f", r.ratio) << "\n";
  return ok;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return usage;
    case ErrorKind::data: return data_error;
    case ErrorKind::numeric: return numeric_error;
  }
  return data_error;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ECG beat classification pipeline", "hardc"};
  app.require_subcommand(1);

  Common c;
  std::string record, annotations, beats, model_path, generator_path;

  auto* pre = app.add_subcommand("preprocess", "Raw record to z-scored beat CSV");
  add_common(pre, c);
  pre->add_option("--record", record, "Samples file (fs= header, one value per line)")->required();
  pre->add_option("--annotations", annotations, "Annotation file (index,code per line)")->required();
  add_override(pre, c, "--segment-width", "pipeline.segment_width", "Samples per beat");

  auto* synth = app.add_subcommand("synth", "Train a CGAN and write a class-balanced beat CSV");
  add_common(synth, c);
  synth->add_option("--beats", beats, "Beat CSV")->required();
  synth->add_option("--generator", generator_path, "Use a saved generator instead of training one");
  add_override(synth, c, "--epochs", "gan.epochs", "CGAN epochs");
  add_override(synth, c, "--mode", "synth.mode", "match_majority or per_class");
  add_override(synth, c, "--counts", "synth.counts", "Per-class targets, e.g. 100,100,100,100,100");

  auto* train = app.add_subcommand("train", "Fit the classifier; writes model.ckpt and history.csv");
  add_common(train, c);
  train->add_option("--beats", beats, "Beat CSV")->required();
  add_override(train, c, "--epochs", "train.epochs", "Maximum epochs (<= 100)");
  add_override(train, c, "--batch", "train.batch", "Batch size");
  add_override(train, c, "--lr", "train.lr", "Adam learning rate");
  add_override(train, c, "--l2", "train.l2", "L2 coefficient");
  add_override(train, c, "--stop-accuracy", "train.stop_accuracy", "Stop once train accuracy reaches this");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint; writes report.csv, report.jsonl, confusion.csv");
  add_common(eval, c);
  eval->add_option("--model", model_path, "Checkpoint")->required();
  eval->add_option("--beats", beats, "Beat CSV")->required();

  auto* predict = app.add_subcommand("predict", "Print per-beat class probabilities");
  add_common(predict, c);
  predict->add_option("--model", model_path, "Checkpoint")->required();
  predict->add_option("--beats", beats, "Beat CSV")->required();

  auto* bench = app.add_subcommand("bench", "Time the dilated stack against a dense conv of equal receptive field");
  add_common(bench, c);
  add_override(bench, c, "--width", "bench.width", "Kernel width w");
  add_override(bench, c, "--levels", "bench.levels", "Conv blocks L");
  add_override(bench, c, "--iterations", "bench.iterations", "Forward passes per round");
  add_override(bench, c, "--rounds", "bench.rounds", "Rounds; the best is kept");
  add_override(bench, c, "--steps", "bench.steps", "Input length");
  add_override(bench, c, "--channels", "bench.channels", "Channels per conv");

  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");
  add_common(selftest, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "hardc: " << e.what() << "\n";
    return usage;
  }

  try {
    const RunConfig cfg = build_config(c);
    if (pre->parsed()) return cmd_preprocess(cfg, record, annotations, out);
    if (synth->parsed()) return cmd_synth(cfg, beats, generator_path, out);
    if (train->parsed()) return cmd_train(cfg, beats, out);
    if (eval->parsed()) return cmd_eval(cfg, model_path, beats, out);
    if (predict->parsed()) return cmd_predict(model_path, beats, out);
    if (bench->parsed()) return cmd_bench(cfg, out);
    if (selftest->parsed()) return run_selftest(out) == 0 ? ok : numeric_error;
  } catch (const Error& e) {
    err << "hardc: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "hardc: " << e.what() << "\n";
    return data_error;
  }
  return usage;
}

}  // namespace hardc::cli
