#include "laco/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "laco/adam.hpp"
#include "laco/errors.hpp"
#include "laco/log.hpp"
#include "laco/ops.hpp"

namespace laco {

std::string CurveLog::to_csv(bool wall_clock) const {
  std::ostringstream os;
  os << "step,loss,mlc_loss,plcp_loss,clcp_loss,valid_micro_f1";
  if (wall_clock) os << ",seconds";
  os << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g", static_cast<long long>(r.step), r.loss, r.mlc,
                  r.plcp, r.clcp, r.valid_micro_f1);
    os << buf;
    if (wall_clock) {
      std::snprintf(buf, sizeof buf, ",%.3f", r.seconds);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

void CurveLog::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write curve log " + path.string());
  out << to_csv(true);
}

AuxDraw draw_aux(const RunConfig& config, std::span<const int> relevant, int num_labels, std::mt19937_64& rng) {
  AuxDraw d;
  if (uses_plcp(config.mode)) {
    std::vector<int> irrelevant;
    std::size_t r = 0;
    for (int l = 0; l < num_labels; ++l) {
      if (r < relevant.size() && relevant[r] == l) ++r;
      else irrelevant.push_back(l);
    }
    d.plcp = sample_plcp(relevant, irrelevant, config.gamma, config.plcp_pairs, rng);
  }
  if (uses_clcp(config.mode)) d.clcp = sample_clcp(relevant, num_labels, rng);
  return d;
}

InstanceLosses instance_losses(const LacoModel& model, Binding& bind, const JointSequence& seq,
                               std::span<const double> targets, const AuxDraw& draw, const RunConfig& config) {
  InstanceLosses out;
  out.forward = model.forward(bind, seq);
  out.mlc = mlc_loss(out.forward.probs, targets);
  const AuxParams& aux = model.aux();
  const bool any_aux = uses_plcp(config.mode) || uses_clcp(config.mode);
  if (any_aux) {
    out.aux_input = config.detach_aux ? detach(out.forward.label_reps) : out.forward.label_reps;
    if (!config.detach_aux && !(out.aux_input == out.forward.label_reps)) {
      throw std::logic_error("auxiliary heads must read the shared label representations");
    }
  }
  if (uses_plcp(config.mode) && !draw.plcp.empty()) {
    out.plcp = plcp_instance_loss(out.aux_input, draw.plcp, bind(aux.plcp_weight), bind(aux.plcp_bias),
                                  config.symmetric_plcp);
  }
  if (uses_clcp(config.mode) && draw.clcp) {
    out.clcp = clcp_loss(out.aux_input, *draw.clcp, bind(aux.clcp_weight), bind(aux.clcp_bias));
  }
  out.total = combined_loss(out.mlc, out.plcp, out.clcp, config.alpha.value_or(0.5), config.mode);
  return out;
}

LacoModel restore_model(const Checkpoint& ckpt) {
  LacoModel model(model_config(ckpt.config), ckpt.vocab, ckpt.config.seed);
  auto& params = model.params();
  if (params.size() != ckpt.params.size()) {
    throw DataError("checkpoint holds " + std::to_string(ckpt.params.size()) + " parameters, configuration expects " +
                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != ckpt.params[i].name || params[i].value.shape() != ckpt.params[i].value.shape()) {
      throw DataError("checkpoint parameter " + ckpt.params[i].name + " does not match the configured model");
    }
    params[i].value = ckpt.params[i].value;
  }
  return model;
}

std::vector<std::vector<double>> predict_probabilities(const LacoModel& model, const Vocab& vocab,
                                                       const std::vector<Instance>& docs) {
  std::vector<std::vector<double>> probs(docs.size());
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      probs[idx] = model.infer(model.prepare(docs[idx], vocab));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return probs;
}

PredFile predict(const LacoModel& model, const Vocab& vocab, const std::vector<Instance>& docs,
                 const std::vector<std::string>& label_space, double threshold) {
  PredFile pf;
  pf.label_space = label_space;
  Corpus lookup;
  lookup.label_space = label_space;
  const auto probs = predict_probabilities(model, vocab, docs);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    pf.gold.push_back(lookup.label_indices(docs[d]));
    pf.pred.push_back(threshold_prediction(probs[d], threshold).predicted);
  }
  return pf;
}

Evaluation evaluate(const Checkpoint& ckpt, const Corpus& corpus, const std::vector<Instance>& split,
                    std::optional<double> threshold) {
  if (ckpt.vocab.label_names() != corpus.label_space) {
    throw DataError("label space of the data does not match the checkpoint");
  }
  const LacoModel model = restore_model(ckpt);
  Evaluation ev;
  ev.preds = predict(model, ckpt.vocab, split, corpus.label_space, threshold.value_or(ckpt.config.threshold));
  ev.report = evaluate_predictions(ev.preds, split_stats(corpus.train, corpus.label_space).label_frequency);
  return ev;
}

namespace {

struct Prepared {
  JointSequence seq;
  std::vector<double> targets;
  std::vector<int> relevant;
};

double value_or_zero(const Var& v) { return v.valid() ? v.value().item() : 0.0; }

Checkpoint snapshot(const RunConfig& config, const Vocab& vocab, const LacoModel& model, const AdamState& adam,
                    std::int64_t step, double best) {
  return Checkpoint{config, vocab, model.params(), adam, step, best};
}

}  // namespace

TrainResult train(const RunConfig& config, const Corpus& corpus) {
  validate(config);
  if (corpus.train.empty()) throw DataError("training split is empty");
  validate_corpus(corpus);
  const auto start = std::chrono::steady_clock::now();

  const Vocab vocab = Vocab::build(corpus.train, corpus.label_space, config.min_freq);
  LacoModel model(model_config(config), vocab, config.seed);
  AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  AdamState adam = AdamState::for_params(model.params(), ac);
  const int n = corpus.num_labels();

  std::vector<Prepared> train_set;
  train_set.reserve(corpus.train.size());
  for (const auto& inst : corpus.train) {
    train_set.push_back({model.prepare(inst, vocab), corpus.label_targets(inst), corpus.label_indices(inst)});
  }
  const bool own_valid = !corpus.valid.empty();
  if (!own_valid) log(LogLevel::warn, "no validation split; early stopping monitors the training split");
  const std::vector<Instance>& valid = own_valid ? corpus.valid : corpus.train;

  std::filesystem::path out_dir;
  if (!config.out_dir.empty()) {
    out_dir = config.out_dir;
    std::filesystem::create_directories(out_dir);
    vocab.save(out_dir / "vocab.txt");
  }

  // Auxiliary sampling has its own stream so that switching modes never
  // changes the batch order.
  std::seed_seq aux_seed{config.seed, std::uint64_t{0x61757873}};
  std::mt19937_64 aux_rng(aux_seed);

  // Each batch element j accumulates into slot j % S and the slots are summed
  // in index order, so the reduced gradient does not depend on thread count.
  const auto slots = static_cast<std::size_t>(config.grad_slots);
  std::vector<GradientSet> slot_grads(slots, zero_gradients(model.params()));
  GradientSet grads = zero_gradients(model.params());

  TrainResult result;
  result.best = snapshot(config, vocab, model, adam, 0, -1.0);
  double best_f1 = -1.0;
  int stale = 0;
  CurveRow running;
  std::int64_t running_steps = 0;
  std::int64_t step = 0;

  auto evaluate_now = [&]() -> bool {
    const PredFile pf = predict(model, vocab, valid, corpus.label_space, config.threshold);
    const double f1 = micro_macro(pf).micro_f1;
    CurveRow row = running;
    const double k = static_cast<double>(std::max<std::int64_t>(running_steps, 1));
    row.step = step;
    row.loss /= k;
    row.mlc /= k;
    row.plcp /= k;
    row.clcp /= k;
    row.valid_micro_f1 = f1;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.curve.rows.push_back(row);
    running = CurveRow{};
    running_steps = 0;
    char msg[160];
    std::snprintf(msg, sizeof msg, "step %lld loss %.6f valid micro-F1 %.4f", static_cast<long long>(step), row.loss, f1);
    log(LogLevel::info, msg);
    if (f1 > best_f1) {
      best_f1 = f1;
      stale = 0;
      result.best = snapshot(config, vocab, model, adam, step, f1);
      if (!out_dir.empty()) save_checkpoint(out_dir / "best.ckpt", result.best);
    } else if (++stale >= config.patience) {
      result.stop_reason = "patience exhausted";
      return true;
    }
    if (config.target_micro_f1 > 0.0 && best_f1 >= config.target_micro_f1) {
      result.stop_reason = "target micro-F1 reached";
      return true;
    }
    return false;
  };

  bool stop = false;
  bool evaluated_last = false;
  for (std::uint64_t epoch = 0; !stop; ++epoch) {
    const auto batches = epoch_batches(train_set.size(), static_cast<std::size_t>(config.batch_size), config.seed, epoch);
    for (const auto& batch : batches) {
      const std::size_t b = batch.size();
      std::vector<AuxDraw> draws(b);
      for (std::size_t j = 0; j < b; ++j) draws[j] = draw_aux(config, train_set[batch[j]].relevant, n, aux_rng);

      std::vector<std::array<double, 4>> values(b);
      std::exception_ptr error;
      const double inv_b = 1.0 / static_cast<double>(b);
      const auto used_slots = static_cast<std::ptrdiff_t>(std::min(slots, b));
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t s = 0; s < used_slots; ++s) {
        try {
          const auto slot = static_cast<std::size_t>(s);
          clear(slot_grads[slot]);
          for (std::size_t j = slot; j < b; j += slots) {
            const Prepared& p = train_set[batch[j]];
            Tape tape;
            Binding bind(tape, model.params(), &slot_grads[slot]);
            InstanceLosses l = instance_losses(model, bind, p.seq, p.targets, draws[j], config);
            values[j] = {l.total.value().item(), l.mlc.value().item(), value_or_zero(l.plcp), value_or_zero(l.clcp)};
            tape.backward(scale(l.total, inv_b));
          }
        } catch (...) {
#pragma omp critical
          if (!error) error = std::current_exception();
        }
      }
      if (error) std::rethrow_exception(error);

      clear(grads);
      for (std::size_t s = 0; s < static_cast<std::size_t>(used_slots); ++s) accumulate(grads, slot_grads[s]);
      std::array<double, 4> mean{};
      for (const auto& v : values)
        for (std::size_t c = 0; c < 4; ++c) mean[c] += v[c];
      for (auto& m : mean) m *= inv_b;

      bool finite = std::isfinite(mean[0]);
      if (finite) {
        try {
          adam_step(model.params(), grads, adam);
        } catch (const NumericError& e) {
          log(LogLevel::error, e.what());
          finite = false;
        }
      }
      if (!finite) {
        result.diverged = true;
        result.stop_reason = "loss diverged at step " + std::to_string(step + 1);
        log(LogLevel::error, result.stop_reason + "; keeping the last good parameters");
        stop = true;
        break;
      }
      ++step;
      result.step_losses.push_back(mean[0]);
      running.loss += mean[0];
      running.mlc += mean[1];
      running.plcp += mean[2];
      running.clcp += mean[3];
      ++running_steps;
      evaluated_last = false;
      if (step % config.eval_interval == 0) {
        evaluated_last = true;
        if (evaluate_now()) {
          stop = true;
          break;
        }
      }
      if (step >= config.max_steps) {
        if (result.stop_reason.empty()) result.stop_reason = "max_steps reached";
        stop = true;
        break;
      }
    }
  }
  if (!evaluated_last && !result.diverged && step > 0) evaluate_now();

  result.steps = step;
  result.last = snapshot(config, vocab, model, adam, step, std::max(best_f1, 0.0));
  if (result.best.best_micro_f1 < 0.0) result.best.best_micro_f1 = 0.0;
  if (!out_dir.empty()) {
    save_checkpoint(out_dir / "last.ckpt", result.last);
    if (!std::filesystem::exists(out_dir / "best.ckpt")) save_checkpoint(out_dir / "best.ckpt", result.best);
    result.curve.write(out_dir / "curve.csv");
  }
  return result;
}

}  // namespace laco
