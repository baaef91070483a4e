#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "laco/checkpoint.hpp"
#include "laco/config.hpp"
#include "laco/data.hpp"
#include "laco/metrics.hpp"
#include "laco/model.hpp"

namespace laco {

/// One row per validation evaluation. Loss columns are means over the
/// steps since the previous row.
struct CurveRow {
  std::int64_t step = 0;
  double loss = 0, mlc = 0, plcp = 0, clcp = 0;
  double valid_micro_f1 = 0;
  double seconds = 0;  // wall clock since training started
};

struct CurveLog {
  std::vector<CurveRow> rows;
  // The wall-clock column is the only non-deterministic one; leave it out to
  // compare runs.
  std::string to_csv(bool wall_clock = true) const;
  void write(const std::filesystem::path& path) const;
};

/// Auxiliary samples drawn for one instance in one step.
struct AuxDraw {
  std::vector<PlcpSample> plcp;
  std::optional<ClcpSample> clcp;
};

AuxDraw draw_aux(const RunConfig& config, std::span<const int> relevant, int num_labels, std::mt19937_64& rng);

struct InstanceLosses {
  Var total, mlc, plcp, clcp;  // auxiliary terms invalid when unused or skipped
  ForwardResult forward;
  Var aux_input;  // label representations the auxiliary heads read
};

// One forward pass shared by the classification head and the auxiliary heads.
InstanceLosses instance_losses(const LacoModel& model, Binding& bind, const JointSequence& seq,
                               std::span<const double> targets, const AuxDraw& draw, const RunConfig& config);

struct TrainResult {
  Checkpoint best;  // highest validation micro-F1
  Checkpoint last;  // state after the final successful step
  CurveLog curve;
  std::vector<double> step_losses;
  std::int64_t steps = 0;
  bool diverged = false;
  std::string stop_reason;
};

// Runs until max_steps, patience is exhausted, target_micro_f1 is reached or
// the loss diverges. Validation uses corpus.valid, or the training split when
// there is no validation split. With config.out_dir set, best.ckpt, last.ckpt,
// curve.csv and vocab.txt are written there.
TrainResult train(const RunConfig& config, const Corpus& corpus);

LacoModel restore_model(const Checkpoint& ckpt);
// Per-document label probabilities; runs in parallel over documents.
std::vector<std::vector<double>> predict_probabilities(const LacoModel& model, const Vocab& vocab,
                                                       const std::vector<Instance>& docs);
PredFile predict(const LacoModel& model, const Vocab& vocab, const std::vector<Instance>& docs,
                 const std::vector<std::string>& label_space, double threshold);

struct Evaluation {
  EvalReport report;
  PredFile preds;
};

// Label space of `corpus` must equal the checkpoint's; frequency groups come
// from corpus.train.
Evaluation evaluate(const Checkpoint& ckpt, const Corpus& corpus, const std::vector<Instance>& split,
                    std::optional<double> threshold = std::nullopt);

}  // namespace laco
