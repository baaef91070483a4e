#include "laco/aux_tasks.hpp"

#include <algorithm>

#include "laco/encoder.hpp"
#include "laco/errors.hpp"
#include "laco/ops.hpp"

namespace laco {

TaskMode parse_task_mode(const std::string& text) {
  if (text == "mlc") return TaskMode::mlc;
  if (text == "+plcp" || text == "plcp") return TaskMode::plcp;
  if (text == "+clcp" || text == "clcp") return TaskMode::clcp;
  if (text == "+both" || text == "both") return TaskMode::both;
  throw ConfigError("unknown mode '" + text + "' (expected mlc, +plcp, +clcp or +both)");
}

std::string to_string(TaskMode mode) {
  switch (mode) {
    case TaskMode::mlc: return "mlc";
    case TaskMode::plcp: return "+plcp";
    case TaskMode::clcp: return "+clcp";
    case TaskMode::both: return "+both";
  }
  return "?";
}

std::vector<PlcpSample> sample_plcp(std::span<const int> relevant, std::span<const int> irrelevant, double gamma,
                                    int pairs, std::mt19937_64& rng) {
  if (relevant.empty()) throw ConfigError("PLCP sampling needs at least one relevant label");
  if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
  std::vector<PlcpSample> out;
  const bool can_pos = relevant.size() >= 2;
  const bool can_neg = !irrelevant.empty();
  if (!can_pos && !can_neg) return out;
  std::bernoulli_distribution is_pos(gamma / (1.0 + gamma));
  std::uniform_int_distribution<std::size_t> pick_rel(0, relevant.size() - 1);
  for (int p = 0; p < pairs; ++p) {
    const bool positive = !can_neg || (can_pos && is_pos(rng));
    PlcpSample s;
    if (positive) {
      const std::size_t a = pick_rel(rng);
      std::uniform_int_distribution<std::size_t> pick_other(0, relevant.size() - 2);
      std::size_t b = pick_other(rng);
      if (b >= a) ++b;
      s = {relevant[a], relevant[b], 1};
    } else {
      std::uniform_int_distribution<std::size_t> pick_irr(0, irrelevant.size() - 1);
      s = {relevant[pick_rel(rng)], irrelevant[pick_irr(rng)], 0};
    }
    out.push_back(s);
  }
  return out;
}

std::optional<ClcpSample> sample_clcp(std::span<const int> relevant, int num_labels, std::mt19937_64& rng,
                                      std::optional<int> forced_size) {
  if (relevant.size() < 2) return std::nullopt;
  const int max_s = static_cast<int>(relevant.size()) - 1;
  int s = 0;
  if (forced_size) {
    s = *forced_size;
    if (s < 1 || s > max_s) throw ConfigError("CLCP given-set size must lie in [1, relevant - 1]");
  } else {
    s = std::uniform_int_distribution<int>(1, max_s)(rng);
  }
  std::vector<int> pool(relevant.begin(), relevant.end());
  // Partial Fisher-Yates: the first s entries become a uniform s-subset.
  for (int i = 0; i < s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
  }
  ClcpSample out;
  out.given.assign(pool.begin(), pool.begin() + s);
  std::sort(out.given.begin(), out.given.end());
  out.position.assign(static_cast<std::size_t>(num_labels), 1);
  for (int g : out.given) out.position.at(static_cast<std::size_t>(g)) = 0;
  for (int i = 0; i < num_labels; ++i) {
    if (!out.position[static_cast<std::size_t>(i)]) continue;
    out.scored.push_back(i);
    const bool rel = std::find(relevant.begin(), relevant.end(), i) != relevant.end();
    out.targets.push_back(rel ? 1.0 : 0.0);
  }
  return out;
}

AuxParams add_aux_params(ParameterStore& store, int hidden, bool plcp, bool clcp, double init_std, bool zero_init,
                         std::mt19937_64& rng) {
  const auto k2 = static_cast<std::size_t>(2 * hidden);
  AuxParams p;
  p.has_plcp = plcp;
  p.has_clcp = clcp;
  if (plcp) {
    p.plcp_weight = store.add("plcp.weight", zero_init ? Tensor({k2, 1}) : random_normal({k2, 1}, init_std, rng));
    p.plcp_bias = store.add("plcp.bias", Tensor({1, 1}));
  }
  if (clcp) {
    p.clcp_weight = store.add("clcp.weight", zero_init ? Tensor({k2, 1}) : random_normal({k2, 1}, init_std, rng));
    p.clcp_bias = store.add("clcp.bias", Tensor({1, 1}));
  }
  return p;
}

namespace {

Var pair_logit(Var label_reps, int a, int b, Var weight, Var bias) {
  const std::size_t rows[] = {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
  const std::size_t k = label_reps.value().dim(1);
  Var both = reshape(gather_rows(label_reps, rows), {1, 2 * k});  // [h_a ; h_b]
  return add(matmul(both, weight), bias);
}

void check_index(const Var& reps, int i) {
  if (i < 0 || static_cast<std::size_t>(i) >= reps.value().dim(0)) {
    throw DimensionError("label index " + std::to_string(i) + " outside label representations " +
                         shape_str(reps.shape()));
  }
}

}  // namespace

Var plcp_probability(Var label_reps, const PlcpSample& s, Var weight, Var bias, bool symmetric) {
  check_index(label_reps, s.first);
  check_index(label_reps, s.second);
  if (s.first == s.second) throw ConfigError("PLCP pair needs two distinct labels");
  Var logit = pair_logit(label_reps, s.first, s.second, weight, bias);
  if (symmetric) logit = scale(add(logit, pair_logit(label_reps, s.second, s.first, weight, bias)), 0.5);
  return sigmoid(logit);
}

Var plcp_loss(Var label_reps, const PlcpSample& s, Var weight, Var bias, bool symmetric) {
  const double q = static_cast<double>(s.target);
  return bce_sum(plcp_probability(label_reps, s, weight, bias, symmetric), std::span<const double>(&q, 1));
}

Var plcp_instance_loss(Var label_reps, std::span<const PlcpSample> samples, Var weight, Var bias, bool symmetric) {
  if (samples.empty()) return Var();
  Var total = plcp_loss(label_reps, samples[0], weight, bias, symmetric);
  for (std::size_t i = 1; i < samples.size(); ++i) total = add(total, plcp_loss(label_reps, samples[i], weight, bias, symmetric));
  return scale(total, 1.0 / static_cast<double>(samples.size()));
}

Var clcp_probabilities(Var label_reps, const ClcpSample& s, Var weight, Var bias) {
  const std::size_t n = label_reps.value().dim(0);
  if (s.position.size() != n) {
    throw DimensionError("CLCP position vector has " + std::to_string(s.position.size()) + " entries for " +
                         std::to_string(n) + " labels");
  }
  if (s.given.empty() || s.scored.empty()) throw ConfigError("CLCP sample needs given and scored labels");
  std::vector<std::size_t> given(s.given.begin(), s.given.end());
  std::vector<std::size_t> scored(s.scored.begin(), s.scored.end());
  Var given_mean = mean_rows(gather_rows(label_reps, given));                   // 1 x k
  Var features[] = {repeat_rows(given_mean, scored.size()), gather_rows(label_reps, scored)};
  Var logits = add(matmul(concat_cols(features), weight), bias);                // (n-s) x 1
  return sigmoid(logits);
}

Var clcp_loss(Var label_reps, const ClcpSample& s, Var weight, Var bias) {
  return bce_sum(clcp_probabilities(label_reps, s, weight, bias), s.targets);
}

namespace {
void check_alpha(double alpha, TaskMode mode) {
  if (mode == TaskMode::both && !(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1) for mode +both");
  }
}
}  // namespace

double combined_loss(double mlc, double plcp, double clcp, double alpha, TaskMode mode) {
  check_alpha(alpha, mode);
  switch (mode) {
    case TaskMode::mlc: return mlc;
    case TaskMode::plcp: return mlc + plcp;
    case TaskMode::clcp: return mlc + clcp;
    case TaskMode::both: return mlc + alpha * plcp + (1.0 - alpha) * clcp;
  }
  return mlc;
}

Var combined_loss(Var mlc, Var plcp, Var clcp, double alpha, TaskMode mode) {
  check_alpha(alpha, mode);
  Var total = mlc;
  const double wp = mode == TaskMode::both ? alpha : 1.0;
  const double wc = mode == TaskMode::both ? 1.0 - alpha : 1.0;
  if (uses_plcp(mode) && plcp.valid()) total = add(total, wp == 1.0 ? plcp : scale(plcp, wp));
  if (uses_clcp(mode) && clcp.valid()) total = add(total, wc == 1.0 ? clcp : scale(clcp, wc));
  return total;
}

}  // namespace laco
