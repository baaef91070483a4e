#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "laco/metrics.hpp"

namespace laco::testing {

// Brute-force recomputation over dense 0/1 matrices. F1 uses the
// 2TP / (2TP + FP + FN) form rather than the harmonic mean of P and R.
struct OracleScores {
  std::uint64_t disagreements = 0, tp = 0, fp = 0, fn = 0, exact = 0, distinct = 0;
  double hamming = 0, micro_p = 0, micro_r = 0, micro_f1 = 0, macro_p = 0, macro_r = 0, macro_f1 = 0, accuracy = 0;
};

inline std::vector<std::vector<int>> dense(const std::vector<LabelSet>& sets, std::size_t n) {
  std::vector<std::vector<int>> out(sets.size(), std::vector<int>(n, 0));
  for (std::size_t d = 0; d < sets.size(); ++d)
    for (int l : sets[d]) out[d][static_cast<std::size_t>(l)] = 1;
  return out;
}

inline double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

inline OracleScores oracle_scores(const PredFile& f) {
  const std::size_t n = f.label_space.size(), docs = f.size();
  const auto g = dense(f.gold, n), p = dense(f.pred, n);
  OracleScores s;
  std::vector<std::string> keys;
  for (std::size_t d = 0; d < docs; ++d) {
    bool same = true;
    std::string key;
    for (std::size_t l = 0; l < n; ++l) {
      if (g[d][l] != p[d][l]) {
        ++s.disagreements;
        same = false;
      }
      key.push_back(p[d][l] ? '1' : '0');
    }
    s.exact += same ? 1 : 0;
    keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  s.distinct = static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
  for (std::size_t l = 0; l < n; ++l) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t d = 0; d < docs; ++d) {
      tp += g[d][l] && p[d][l];
      fp += !g[d][l] && p[d][l];
      fn += g[d][l] && !p[d][l];
    }
    s.tp += tp;
    s.fp += fp;
    s.fn += fn;
    s.macro_p += safe_div(double(tp), double(tp + fp));
    s.macro_r += safe_div(double(tp), double(tp + fn));
    s.macro_f1 += safe_div(2.0 * double(tp), double(2 * tp + fp + fn));
  }
  s.macro_p /= double(n);
  s.macro_r /= double(n);
  s.macro_f1 /= double(n);
  s.micro_p = safe_div(double(s.tp), double(s.tp + s.fp));
  s.micro_r = safe_div(double(s.tp), double(s.tp + s.fn));
  s.micro_f1 = safe_div(2.0 * double(s.tp), double(2 * s.tp + s.fp + s.fn));
  s.hamming = double(s.disagreements) / double(docs * n);
  s.accuracy = double(s.exact) / double(docs);
  return s;
}

// Random file with correlated predictions: each gold bit flips with
// probability `noise`, so exact matches occur.
inline PredFile random_pred_file(std::size_t docs, std::size_t n, std::mt19937_64& rng, double density = 0.25,
                                 double noise = 0.1) {
  PredFile f;
  for (std::size_t l = 0; l < n; ++l) f.label_space.push_back("y" + std::to_string(l));
  std::bernoulli_distribution on(density), flip(noise);
  for (std::size_t d = 0; d < docs; ++d) {
    LabelSet g, p;
    for (std::size_t l = 0; l < n; ++l) {
      const bool gi = on(rng);
      const bool pi = flip(rng) ? !gi : gi;
      if (gi) g.push_back(static_cast<int>(l));
      if (pi) p.push_back(static_cast<int>(l));
    }
    f.gold.push_back(std::move(g));
    f.pred.push_back(std::move(p));
  }
  return f;
}

}  // namespace laco::testing
