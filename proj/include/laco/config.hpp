#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "laco/aux_tasks.hpp"
#include "laco/model.hpp"

namespace laco {

/// Everything a training run depends on. Keys in the config file use the
/// field names below.
struct RunConfig {
  // encoder
  int layers = 2;
  int heads = 4;
  int hidden = 128;
  int ffn = 512;
  int max_len = 128;
  double init_std = 0.02;
  // head
  int window = 10;
  int filters = 64;
  bool no_je = false;
  bool no_ca = false;
  bool zero_init_heads = false;
  // objective
  TaskMode mode = TaskMode::mlc;
  std::optional<double> alpha;
  double gamma = 0.5;
  int plcp_pairs = 4;
  bool symmetric_plcp = false;
  bool detach_aux = false;
  double threshold = 0.5;
  // optimization
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  int max_steps = 2000;
  int eval_interval = 50;
  int patience = 10;  // evaluations without a validation micro-F1 gain
  double target_micro_f1 = 0.0;  // stop once reached; 0 disables
  int grad_slots = 8;  // fixed per-batch accumulation buffers, see trainer
  int min_freq = 1;
  // paths (empty = unset)
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string label_space_path;
  std::string out_dir;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Sets one field from its textual value. Unknown keys and unparsable values
// throw ConfigError.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
// "key = value" lines; '#' starts a comment.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
// Every field as key = value, doubles at full precision; parse_config inverts it.
std::string format_config(const RunConfig& config);
std::vector<std::string> config_keys();

void validate(const RunConfig& config);
ModelConfig model_config(const RunConfig& config);

}  // namespace laco
