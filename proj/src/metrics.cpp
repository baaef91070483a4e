#include "laco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "laco/errors.hpp"

namespace laco {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

PredFile read_pred_file(const std::filesystem::path& path, const std::optional<std::vector<std::string>>& label_space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file " + path.string());
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> rows;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected gold<TAB>predicted");
    }
    rows.emplace_back(split_ws(line.substr(0, tab)), split_ws(line.substr(tab + 1)));
  }
  PredFile pf;
  if (label_space) {
    pf.label_space = *label_space;
    std::sort(pf.label_space.begin(), pf.label_space.end());
  } else {
    std::set<std::string> all;
    for (const auto& [g, p] : rows) {
      all.insert(g.begin(), g.end());
      all.insert(p.begin(), p.end());
    }
    pf.label_space.assign(all.begin(), all.end());
  }
  auto to_set = [&](const std::vector<std::string>& names, std::size_t line) {
    LabelSet s;
    for (const auto& n : names) {
      auto it = std::lower_bound(pf.label_space.begin(), pf.label_space.end(), n);
      if (it == pf.label_space.end() || *it != n) {
        throw DataError(path.string() + ":" + std::to_string(line) + ": label '" + n + "' not in the label space");
      }
      s.push_back(static_cast<int>(it - pf.label_space.begin()));
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    pf.gold.push_back(to_set(rows[i].first, i + 1));
    pf.pred.push_back(to_set(rows[i].second, i + 1));
  }
  return pf;
}

void write_pred_file(const std::filesystem::path& path, const PredFile& preds) {
  validate(preds);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write prediction file " + path.string());
  auto put = [&](const LabelSet& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out << ' ';
      out << preds.label_space[static_cast<std::size_t>(s[i])];
    }
  };
  for (std::size_t i = 0; i < preds.size(); ++i) {
    put(preds.gold[i]);
    out << '\t';
    put(preds.pred[i]);
    out << '\n';
  }
}

void validate(const PredFile& preds) {
  if (preds.gold.size() != preds.pred.size()) throw DataError("prediction file has unequal gold/pred lengths");
  const auto n = static_cast<int>(preds.label_space.size());
  for (const auto* sets : {&preds.gold, &preds.pred})
    for (const auto& s : *sets)
      for (int l : s)
        if (l < 0 || l >= n) throw DataError("prediction file label index outside the label space");
}

std::vector<LabelTally> label_tallies(const PredFile& preds) {
  validate(preds);
  std::vector<LabelTally> t(preds.label_space.size());
  for (std::size_t d = 0; d < preds.size(); ++d) {
    const auto& g = preds.gold[d];
    const auto& p = preds.pred[d];
    for (int l : p) {
      if (std::binary_search(g.begin(), g.end(), l)) ++t[static_cast<std::size_t>(l)].tp;
      else ++t[static_cast<std::size_t>(l)].fp;
    }
    for (int l : g)
      if (!std::binary_search(p.begin(), p.end(), l)) ++t[static_cast<std::size_t>(l)].fn;
  }
  return t;
}

double hamming_loss(const PredFile& preds) {
  if (preds.size() == 0) throw DataError("hamming_loss on an empty prediction file");
  std::size_t wrong = 0;
  for (const auto& t : label_tallies(preds)) wrong += t.fp + t.fn;
  return static_cast<double>(wrong) / (static_cast<double>(preds.size()) * static_cast<double>(preds.label_space.size()));
}

std::array<double, 3> prf(const LabelTally& t) {
  const double p = ratio(t.tp, t.tp + t.fp);
  const double r = ratio(t.tp, t.tp + t.fn);
  return {p, r, f1_of(p, r)};
}

MicroMacro micro_macro(const PredFile& preds) {
  if (preds.size() == 0) throw DataError("micro_macro on an empty prediction file");
  const auto tallies = label_tallies(preds);
  LabelTally pooled;
  MicroMacro m;
  for (const auto& t : tallies) {
    pooled.tp += t.tp;
    pooled.fp += t.fp;
    pooled.fn += t.fn;
    const auto [p, r, f] = prf(t);
    m.macro_p += p;
    m.macro_r += r;
    m.macro_f1 += f;
  }
  const double n = static_cast<double>(tallies.size());
  if (n > 0) {
    m.macro_p /= n;
    m.macro_r /= n;
    m.macro_f1 /= n;
  }
  const auto [p, r, f] = prf(pooled);
  m.micro_p = p;
  m.micro_r = r;
  m.micro_f1 = f;
  return m;
}

SubsetStats subset_acc_and_diversity(const PredFile& preds) {
  validate(preds);
  if (preds.size() == 0) throw DataError("subset accuracy on an empty prediction file");
  std::size_t exact = 0;
  std::set<LabelSet> distinct;
  for (std::size_t d = 0; d < preds.size(); ++d) {
    if (preds.gold[d] == preds.pred[d]) ++exact;
    distinct.insert(preds.pred[d]);
  }
  return {ratio(exact, preds.size()), distinct.size()};
}

FrequencyGroups frequency_groups(const std::vector<std::size_t>& freq,
                                 const std::optional<std::array<std::size_t, 3>>& cuts) {
  std::vector<int> ranked(freq.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    return freq[static_cast<std::size_t>(a)] > freq[static_cast<std::size_t>(b)];
  });
  FrequencyGroups groups;
  if (cuts) {
    const auto& c = *cuts;
    if (!(c[0] <= c[1] && c[1] <= c[2] && c[2] <= freq.size())) {
      throw ConfigError("frequency group cuts must be non-decreasing ranks within the label space");
    }
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      const std::size_t g = r < c[0] ? 0 : r < c[1] ? 1 : r < c[2] ? 2 : 3;
      groups[g].push_back(ranked[r]);
    }
    return groups;
  }
  const double total = static_cast<double>(std::accumulate(freq.begin(), freq.end(), std::size_t{0}));
  double before = 0.0;
  for (int l : ranked) {
    std::size_t g = total > 0 ? static_cast<std::size_t>(std::floor(4.0 * before / total)) : 0;
    groups[std::min<std::size_t>(g, 3)].push_back(l);
    before += static_cast<double>(freq[static_cast<std::size_t>(l)]);
  }
  return groups;
}

std::array<std::optional<double>, 4> group_macro_f1(const FrequencyGroups& groups, const PredFile& preds) {
  const auto tallies = label_tallies(preds);
  std::array<std::optional<double>, 4> out;
  for (std::size_t g = 0; g < 4; ++g) {
    if (groups[g].empty()) continue;
    double s = 0.0;
    for (int l : groups[g]) s += prf(tallies.at(static_cast<std::size_t>(l)))[2];
    out[g] = s / static_cast<double>(groups[g].size());
  }
  return out;
}

KlResult conditional_kl(const std::vector<LabelSet>& reference, const std::vector<LabelSet>& model,
                        std::size_t n, double epsilon) {
  auto count = [n](const std::vector<LabelSet>& sets, std::vector<double>& single, std::vector<double>& pair) {
    single.assign(n, 0.0);
    pair.assign(n * n, 0.0);
    for (const auto& s : sets)
      for (int a : s) {
        if (a < 0 || static_cast<std::size_t>(a) >= n) throw DataError("label index outside the label space");
        single[static_cast<std::size_t>(a)] += 1.0;
        for (int b : s)
          if (b != a) pair[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)] += 1.0;
      }
  };
  std::vector<double> ref_single, ref_pair, mod_single, mod_pair;
  count(reference, ref_single, ref_pair);
  count(model, mod_single, mod_pair);
  KlResult r;
  bool any_pair = false;
  for (std::size_t a = 0; a < n; ++a) {
    if (ref_single[a] == 0.0) continue;
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double pg = ref_pair[a * n + b] / ref_single[a];
      if (pg == 0.0) continue;
      any_pair = true;
      double pp = mod_single[a] > 0.0 ? mod_pair[a * n + b] / mod_single[a] : 0.0;
      if (pp <= 0.0) pp = epsilon;
      r.distance += pg * std::log(pg / pp);
    }
  }
  if (!any_pair) {
    r.distance = 0.0;
    r.degenerate = true;
  }
  return r;
}

EvalReport evaluate_predictions(const PredFile& preds, const std::vector<std::size_t>& train_frequency,
                                double kl_epsilon, const std::optional<std::array<std::size_t, 3>>& cuts) {
  EvalReport r;
  r.documents = preds.size();
  r.hamming_loss = hamming_loss(preds);
  r.scores = micro_macro(preds);
  r.subset = subset_acc_and_diversity(preds);
  if (train_frequency.size() != preds.label_space.size()) {
    throw DataError("training frequency table does not match the prediction label space");
  }
  r.group_f1 = group_macro_f1(frequency_groups(train_frequency, cuts), preds);
  r.kl = conditional_kl(preds.gold, preds.pred, preds.label_space.size(), kl_epsilon);
  return r;
}

namespace {
std::vector<std::pair<std::string, std::string>> report_fields(const EvalReport& r) {
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
  };
  std::vector<std::pair<std::string, std::string>> f = {
      {"documents", std::to_string(r.documents)},
      {"hamming_loss", num(r.hamming_loss)},
      {"micro_precision", num(r.scores.micro_p)},
      {"micro_recall", num(r.scores.micro_r)},
      {"micro_f1", num(r.scores.micro_f1)},
      {"macro_precision", num(r.scores.macro_p)},
      {"macro_recall", num(r.scores.macro_r)},
      {"macro_f1", num(r.scores.macro_f1)},
      {"subset_accuracy", num(r.subset.accuracy)},
      {"distinct_predicted_sets", std::to_string(r.subset.distinct_predicted)},
  };
  for (std::size_t g = 0; g < 4; ++g)
    f.emplace_back("group" + std::to_string(g + 1) + "_macro_f1", r.group_f1[g] ? num(*r.group_f1[g]) : "absent");
  f.emplace_back("kl_distance", num(r.kl.distance));
  f.emplace_back("kl_degenerate", r.kl.degenerate ? "1" : "0");
  return f;
}
}  // namespace

std::string format_report_text(const EvalReport& r) {
  std::ostringstream os;
  for (const auto& [k, v] : report_fields(r)) os << std::left << std::setw(26) << k << v << '\n';
  return os.str();
}

std::string format_report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : report_fields(r)) os << k << ',' << v << '\n';
  return os.str();
}

}  // namespace laco
