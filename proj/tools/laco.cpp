// Command-line front end: train, eval, analyze, gen-synth, stats.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "laco/checkpoint.hpp"
#include "laco/config.hpp"
#include "laco/data.hpp"
#include "laco/errors.hpp"
#include "laco/log.hpp"
#include "laco/metrics.hpp"
#include "laco/trainer.hpp"

namespace fs = std::filesystem;
using namespace laco;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> threshold;
  std::optional<std::string> out_dir;
  std::vector<std::string> settings;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c;
  if (!g.config_path.empty()) c = load_config(g.config_path);
  for (const auto& kv : g.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) c.seed = *g.seed;
  if (g.mode) c.mode = parse_task_mode(*g.mode);
  if (g.alpha) c.alpha = *g.alpha;
  if (g.gamma) c.gamma = *g.gamma;
  if (g.threshold) c.threshold = *g.threshold;
  if (g.out_dir) c.out_dir = *g.out_dir;
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

void emit_report(const EvalReport& report, const fs::path& dir, const std::string& stem) {
  std::cout << format_report_text(report);
  if (dir.empty()) return;
  write_text(dir / (stem + "_report.txt"), format_report_text(report));
  write_text(dir / (stem + "_report.csv"), format_report_csv(report));
}

std::vector<std::size_t> gold_frequency(const PredFile& pf) {
  std::vector<std::size_t> f(pf.label_space.size(), 0);
  for (const auto& s : pf.gold)
    for (int l : s) ++f[static_cast<std::size_t>(l)];
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laco: multi-label text classification with joint label embedding and co-occurrence tasks"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--mode", g.mode, "training objective: mlc, +plcp, +clcp or +both");
  app.add_option("--alpha", g.alpha, "PLCP weight in mode +both, in (0, 1)");
  app.add_option("--gamma", g.gamma, "IsCo-occur : NotCo-occur ratio for PLCP sampling");
  app.add_option("--threshold", g.threshold, "decision threshold on label probabilities");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--set", g.settings, "override any configuration key, KEY=VALUE (repeatable)");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model; writes checkpoints, vocab and curve to --out-dir");
  std::string train_path, valid_path, test_path, label_space_path;
  train_cmd->add_option("--train", train_path, "training split")->check(CLI::ExistingFile);
  train_cmd->add_option("--valid", valid_path, "validation split")->check(CLI::ExistingFile);
  train_cmd->add_option("--test", test_path, "test split, evaluated with the best checkpoint")->check(CLI::ExistingFile);
  train_cmd->add_option("--label-space", label_space_path, "label space file, one label per line")
      ->check(CLI::ExistingFile);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  std::string ckpt_path, split_path, eval_train_path, preds_out;
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", split_path, "documents to evaluate")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--train", eval_train_path, "training split, for frequency groups")->check(CLI::ExistingFile);
  eval_cmd->add_option("--preds", preds_out, "where to write the prediction file");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "metrics on prediction files, or conditional KL between two");
  std::vector<std::string> pred_files;
  std::vector<std::string> kl_files;
  std::string analyze_train;
  bool ref_gold = false;
  double kl_epsilon = 1e-6;
  analyze_cmd->add_option("files", pred_files, "prediction files (gold<TAB>predicted)")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--kl", kl_files, "REF MODEL: conditional KL of MODEL's predictions against REF")
      ->expected(2)
      ->check(CLI::ExistingFile);
  analyze_cmd->add_flag("--ref-gold", ref_gold, "use the gold column of REF instead of its predictions");
  analyze_cmd->add_option("--epsilon", kl_epsilon, "floor for model-side zero probabilities");
  analyze_cmd->add_option("--train", analyze_train, "training split, for frequency groups")->check(CLI::ExistingFile);

  // gen-synth
  auto* synth_cmd = app.add_subcommand("gen-synth", "write a synthetic corpus and its co-occurrence truth table");
  SynthSpec spec;
  synth_cmd->add_option("--labels", spec.num_labels, "number of labels")->capture_default_str();
  synth_cmd->add_option("--exponent", spec.power_law_exponent, "power-law exponent of anchor weights")
      ->capture_default_str();
  synth_cmd->add_option("--noise-rate", spec.noise_rate, "probability a keyword is replaced by noise")
      ->capture_default_str();
  synth_cmd->add_option("--keywords", spec.keywords_per_label, "keyword vocabulary per label")->capture_default_str();
  synth_cmd->add_option("--keyword-tokens", spec.keyword_tokens_per_label, "keyword draws per relevant label")
      ->capture_default_str();
  synth_cmd->add_option("--noise-tokens", spec.noise_tokens_per_doc, "extra noise tokens per document")
      ->capture_default_str();
  synth_cmd->add_option("--train-docs", spec.train_docs, "training documents")->capture_default_str();
  synth_cmd->add_option("--valid-docs", spec.valid_docs, "validation documents")->capture_default_str();
  synth_cmd->add_option("--test-docs", spec.test_docs, "test documents")->capture_default_str();
  synth_cmd->add_option("--target-cardinality", spec.target_cardinality, "expected labels per document (0 = unset)");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics over the given splits");
  std::vector<std::string> stats_files;
  std::string stats_labels;
  stats_cmd->add_option("files", stats_files, "split files")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--label-space", stats_labels, "label space file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*train_cmd) {
      RunConfig c = resolve_config(g);
      if (!train_path.empty()) c.train_path = train_path;
      if (!valid_path.empty()) c.valid_path = valid_path;
      if (!test_path.empty()) c.test_path = test_path;
      if (!label_space_path.empty()) c.label_space_path = label_space_path;
      if (c.train_path.empty()) throw ConfigError("train needs --train or train_path in the config");
      if (c.out_dir.empty()) c.out_dir = "run";
      validate(c);  // before anything is written
      std::optional<std::vector<std::string>> space;
      if (!c.label_space_path.empty()) space = read_label_space(c.label_space_path);
      const Corpus corpus = load_corpus(c.train_path, opt_path(c.valid_path), opt_path(c.test_path), space);
      fs::create_directories(c.out_dir);
      write_text(fs::path(c.out_dir) / "config.txt", format_config(c));
      write_label_space(fs::path(c.out_dir) / "labels.txt", corpus.label_space);
      const TrainResult r = train(c, corpus);
      std::printf("steps %lld, best valid micro-F1 %.4f at step %lld (%s)\n", static_cast<long long>(r.steps),
                  r.best.best_micro_f1, static_cast<long long>(r.best.step), r.stop_reason.c_str());
      if (!corpus.test.empty() && !r.diverged) {
        const Evaluation ev = evaluate(r.best, corpus, corpus.test);
        write_pred_file(fs::path(c.out_dir) / "test_preds.tsv", ev.preds);
        emit_report(ev.report, c.out_dir, "test");
      }
      return r.diverged ? 3 : 0;
    }
    if (*eval_cmd) {
      const Checkpoint ckpt = load_checkpoint(ckpt_path);
      Corpus corpus;
      corpus.label_space = ckpt.vocab.label_names();
      corpus.test = load_corpus(split_path, {}, {}, corpus.label_space).train;
      if (eval_train_path.empty()) {
        log(LogLevel::warn, "no --train given; frequency groups use the evaluated split");
        corpus.train = corpus.test;
      } else {
        corpus.train = load_corpus(eval_train_path, {}, {}, corpus.label_space).train;
      }
      const Evaluation ev = evaluate(ckpt, corpus, corpus.test, g.threshold);
      if (!preds_out.empty()) write_pred_file(preds_out, ev.preds);
      emit_report(ev.report, g.out_dir.value_or(""), "eval");
      return 0;
    }
    if (*analyze_cmd) {
      if (!kl_files.empty()) {
        const PredFile ref_raw = read_pred_file(kl_files[0]);
        const PredFile model_raw = read_pred_file(kl_files[1]);
        // Put both on the union label space.
        std::vector<std::string> space = ref_raw.label_space;
        space.insert(space.end(), model_raw.label_space.begin(), model_raw.label_space.end());
        std::sort(space.begin(), space.end());
        space.erase(std::unique(space.begin(), space.end()), space.end());
        const PredFile ref = read_pred_file(kl_files[0], space);
        const PredFile model = read_pred_file(kl_files[1], space);
        const KlResult kl = conditional_kl(ref_gold ? ref.gold : ref.pred, model.pred, space.size(), kl_epsilon);
        std::printf("%.6f\n", kl.distance);
        if (kl.degenerate) log(LogLevel::warn, "reference has no co-occurring label pairs; KL reported as 0");
        return 0;
      }
      if (pred_files.empty()) throw ConfigError("analyze needs prediction files or --kl REF MODEL");
      std::optional<Corpus> train_corpus;
      if (!analyze_train.empty()) train_corpus = load_corpus(analyze_train);
      for (std::size_t i = 0; i < pred_files.size(); ++i) {
        const PredFile pf = train_corpus ? read_pred_file(pred_files[i], train_corpus->label_space)
                                         : read_pred_file(pred_files[i]);
        const auto freq = train_corpus ? split_stats(train_corpus->train, pf.label_space).label_frequency
                                       : gold_frequency(pf);
        const EvalReport report = evaluate_predictions(pf, freq, kl_epsilon);
        if (pred_files.size() > 1) std::cout << (i ? "\n" : "") << "# " << pred_files[i] << '\n';
        emit_report(report, g.out_dir.value_or(""), fs::path(pred_files[i]).stem().string());
      }
      return 0;
    }
    if (*synth_cmd) {
      const RunConfig c = resolve_config(g);
      const fs::path dir = c.out_dir.empty() ? fs::path("synth") : fs::path(c.out_dir);
      fs::create_directories(dir);
      const SyntheticCorpus sc = generate_synthetic(spec, c.seed);
      for (const auto& w : sc.warnings) log(LogLevel::warn, w);
      write_instances(dir / "train.tsv", sc.corpus.train);
      write_instances(dir / "valid.tsv", sc.corpus.valid);
      write_instances(dir / "test.tsv", sc.corpus.test);
      write_label_space(dir / "labels.txt", sc.corpus.label_space);
      write_matrix(dir / "cooccurrence.tsv", sc.corpus.label_space, sc.cooccurrence);
      std::printf("wrote %zu/%zu/%zu documents to %s\n", sc.corpus.train.size(), sc.corpus.valid.size(),
                  sc.corpus.test.size(), dir.string().c_str());
      return 0;
    }
    if (*stats_cmd) {
      std::optional<std::vector<std::string>> space;
      if (!stats_labels.empty()) space = read_label_space(stats_labels);
      if (stats_files.size() > 3) throw ConfigError("stats takes at most three split files");
      const Corpus corpus =
          load_corpus(stats_files[0], stats_files.size() > 1 ? opt_path(stats_files[1]) : std::nullopt,
                      stats_files.size() > 2 ? opt_path(stats_files[2]) : std::nullopt, space);
      std::cout << format_stats(corpus_stats(corpus), corpus.label_space);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
