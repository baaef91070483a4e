#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "laco/autograd.hpp"
#include "laco/params.hpp"

namespace laco {

/// Which objectives contribute to the training loss.
enum class TaskMode { mlc, plcp, clcp, both };

TaskMode parse_task_mode(const std::string& text);
std::string to_string(TaskMode mode);
inline bool uses_plcp(TaskMode m) { return m == TaskMode::plcp || m == TaskMode::both; }
inline bool uses_clcp(TaskMode m) { return m == TaskMode::clcp || m == TaskMode::both; }

/// A label pair with target 1 (IsCo-occur: both relevant) or 0 (NotCo-occur:
/// first relevant, second irrelevant).
struct PlcpSample {
  int first = 0;
  int second = 0;
  int target = 0;
  friend bool operator==(const PlcpSample&, const PlcpSample&) = default;
};

/// A given subset of the relevant labels and the scoring targets for every
/// other label.
struct ClcpSample {
  std::vector<int> given;                // given subset, ascending
  std::vector<unsigned char> position;   // n entries: 0 = given, 1 = to predict
  std::vector<int> scored;               // indices with position 1, ascending
  std::vector<double> targets;           // one per scored index: 1 iff relevant and not given
};

// Draws `pairs` samples. Each is IsCo-occur with probability gamma / (1 + gamma);
// with fewer than two relevant labels only NotCo-occur pairs are drawn and with
// no irrelevant labels only IsCo-occur pairs.
std::vector<PlcpSample> sample_plcp(std::span<const int> relevant, std::span<const int> irrelevant, double gamma,
                                    int pairs, std::mt19937_64& rng);

// s ~ Uniform{1..r-1} for r relevant labels (or forced_size), the given set a
// uniform s-subset. Returns nullopt when r < 2.
std::optional<ClcpSample> sample_clcp(std::span<const int> relevant, int num_labels, std::mt19937_64& rng,
                                      std::optional<int> forced_size = std::nullopt);

struct AuxParams {
  bool has_plcp = false;
  bool has_clcp = false;
  std::size_t plcp_weight = 0;  // 2k x 1
  std::size_t plcp_bias = 0;    // 1 x 1
  std::size_t clcp_weight = 0;  // 2k x 1
  std::size_t clcp_bias = 0;    // 1 x 1
};

AuxParams add_aux_params(ParameterStore& store, int hidden, bool plcp, bool clcp, double init_std, bool zero_init,
                         std::mt19937_64& rng);

// p_ij = sigmoid([h_i ; h_j] w + b). With `symmetric` the logits of both
// orders are averaged.
Var plcp_probability(Var label_reps, const PlcpSample& sample, Var weight, Var bias, bool symmetric = false);
// -[q ln p + (1 - q) ln(1 - p)] for one pair.
Var plcp_loss(Var label_reps, const PlcpSample& sample, Var weight, Var bias, bool symmetric = false);
// Mean of plcp_loss over the samples; nullopt-like invalid Var when empty.
Var plcp_instance_loss(Var label_reps, std::span<const PlcpSample> samples, Var weight, Var bias, bool symmetric);

// Probabilities for the scored positions, (n - s) x 1.
Var clcp_probabilities(Var label_reps, const ClcpSample& sample, Var weight, Var bias);
// Summed cross-entropy over the n - s scored positions.
Var clcp_loss(Var label_reps, const ClcpSample& sample, Var weight, Var bias);

// mlc: l_mlc; plcp: l_mlc + l_plcp; clcp: l_mlc + l_clcp;
// both: l_mlc + alpha l_plcp + (1 - alpha) l_clcp with alpha in (0, 1).
double combined_loss(double mlc, double plcp, double clcp, double alpha, TaskMode mode);
// Var version; auxiliary terms may be invalid Vars (treated as absent).
Var combined_loss(Var mlc, Var plcp, Var clcp, double alpha, TaskMode mode);

}  // namespace laco
