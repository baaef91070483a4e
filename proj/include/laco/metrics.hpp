#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace laco {

using LabelSet = std::vector<int>;  // ascending label-space indices

/// Aligned gold and predicted label sets over one label space.
struct PredFile {
  std::vector<std::string> label_space;
  std::vector<LabelSet> gold;
  std::vector<LabelSet> pred;

  std::size_t size() const { return gold.size(); }
  friend bool operator==(const PredFile&, const PredFile&) = default;
};

// "gold labels<TAB>predicted labels" per line; either field may be empty.
// Without a label space it is inferred as the sorted union of all names.
PredFile read_pred_file(const std::filesystem::path& path,
                        const std::optional<std::vector<std::string>>& label_space = {});
void write_pred_file(const std::filesystem::path& path, const PredFile& preds);
void validate(const PredFile& preds);

struct LabelTally {
  std::size_t tp = 0, fp = 0, fn = 0;
};

std::vector<LabelTally> label_tallies(const PredFile& preds);

double hamming_loss(const PredFile& preds);

struct MicroMacro {
  double micro_p = 0, micro_r = 0, micro_f1 = 0;
  double macro_p = 0, macro_r = 0, macro_f1 = 0;
};

// 0/0 is 0 for every per-label ratio.
MicroMacro micro_macro(const PredFile& preds);
// Precision, recall and F1 of a single tally with the same convention.
std::array<double, 3> prf(const LabelTally& t);

struct SubsetStats {
  double accuracy = 0;                // exact-match fraction
  std::size_t distinct_predicted = 0;  // C_test
};

SubsetStats subset_acc_and_diversity(const PredFile& preds);

/// Four frequency groups, most frequent first. Each holds label indices.
using FrequencyGroups = std::array<std::vector<int>, 4>;

// Labels ranked by descending training frequency (ties by index). Without
// explicit cut ranks, a label goes to group floor(4 * mass_before / total),
// so each group covers about a quarter of the occurrence mass. `cuts` holds
// the ranks at which groups 2, 3 and 4 start.
FrequencyGroups frequency_groups(const std::vector<std::size_t>& train_frequency,
                                 const std::optional<std::array<std::size_t, 3>>& cuts = {});
// Macro-F1 restricted to each group; nullopt for an empty group.
std::array<std::optional<double>, 4> group_macro_f1(const FrequencyGroups& groups, const PredFile& preds);

struct KlResult {
  double distance = 0.0;
  bool degenerate = false;  // reference had no co-occurring pairs
};

// Sum over ordered pairs a != b with #(a) > 0 in the reference of
// p_ref(b|a) ln(p_ref(b|a) / p_model(b|a)), p(b|a) = #(a,b)/#(a).
// Model-side zeros become epsilon; reference zeros contribute nothing.
KlResult conditional_kl(const std::vector<LabelSet>& reference, const std::vector<LabelSet>& model,
                        std::size_t num_labels, double epsilon = 1e-6);

struct EvalReport {
  std::size_t documents = 0;
  double hamming_loss = 0;
  MicroMacro scores;
  SubsetStats subset;
  std::array<std::optional<double>, 4> group_f1;
  KlResult kl;
};

// Full report. Frequency groups come from `train_frequency`; the conditional
// KL compares the gold sets (reference) against the predictions (model).
EvalReport evaluate_predictions(const PredFile& preds, const std::vector<std::size_t>& train_frequency,
                                double kl_epsilon = 1e-6,
                                const std::optional<std::array<std::size_t, 3>>& cuts = {});

std::string format_report_text(const EvalReport& report);
// key,value lines.
std::string format_report_csv(const EvalReport& report);

}  // namespace laco
