#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "shapecap/dataset.hpp"
#include "shapecap/errors.hpp"

namespace shapecap {

// Caption text with everything else stripped; the text-only baseline
// receives these so it cannot touch image bytes even by accident.
struct TextRecord {
  std::int64_t id = 0;
  std::string caption;
  bool label = false;
};

inline std::vector<TextRecord> strip_to_text(
    const std::vector<Instance>& records) {
  std::vector<TextRecord> out;
  out.reserve(records.size());
  for (const Instance& r : records)
    out.push_back(TextRecord{r.id, r.caption, r.label});
  return out;
}

namespace detail {

inline std::vector<std::string> caption_tokens(const std::string& caption) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : caption) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

// unigrams + adjacent bigrams, the feature set of the baseline
inline std::vector<std::string> caption_features(const std::string& caption) {
  std::vector<std::string> f = caption_tokens(caption);
  const std::size_t n = f.size();
  for (std::size_t i = 0; i + 1 < n; ++i) f.push_back(f[i] + " " + f[i + 1]);
  return f;
}

inline double xlogx(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace detail

struct LabelPrior {
  std::int64_t count = 0;
  std::int64_t true_count = 0;

  double prior() const {
    return count == 0 ? 0.0
                      : static_cast<double>(true_count) /
                            static_cast<double>(count);
  }
};

struct BaselineResult {
  double accuracy = 0.0;
  double standard_error = 0.0;
  int folds = 0;
  std::vector<double> fold_accuracies;
};

struct AuditReport {
  LabelPrior overall;
  std::map<Split, LabelPrior> per_split;
  std::map<CaptionKind, LabelPrior> per_kind;
  std::vector<std::pair<std::string, double>> token_mi;  // sorted, highest first
  std::optional<BaselineResult> baseline;
  std::optional<HoldoutReport> holdout;
  std::vector<std::string> warnings;
};

// Mutual information (bits) between token presence and the label,
// computed from exact empirical counts.
inline std::vector<std::pair<std::string, double>> token_label_mi(
    const std::vector<TextRecord>& records) {
  const double n = static_cast<double>(records.size());
  if (records.empty()) return {};
  std::map<std::string, std::array<std::int64_t, 2>> presence;  // [label]
  std::int64_t n_true = 0;
  for (const TextRecord& r : records) {
    if (r.label) ++n_true;
    std::set<std::string> seen;
    for (const auto& tok : detail::caption_tokens(r.caption))
      seen.insert(tok);
    for (const auto& tok : seen) presence[tok][r.label ? 1 : 0] += 1;
  }
  const double p_l1 = static_cast<double>(n_true) / n;
  const double p_l0 = 1.0 - p_l1;

  std::vector<std::pair<std::string, double>> out;
  out.reserve(presence.size());
  for (const auto& [tok, counts] : presence) {
    const double p11 = static_cast<double>(counts[1]) / n;
    const double p10 = static_cast<double>(counts[0]) / n;
    const double p01 = p_l1 - p11;  // token absent, label true
    const double p00 = p_l0 - p10;
    const double p_t = p11 + p10;
    // I(T;L) = H(T) + H(L) - H(T,L)
    const double h_t = -(detail::xlogx(p_t) + detail::xlogx(1.0 - p_t));
    const double h_l = -(detail::xlogx(p_l1) + detail::xlogx(p_l0));
    const double h_tl = -(detail::xlogx(p11) + detail::xlogx(p10) +
                          detail::xlogx(p01) + detail::xlogx(p00));
    const double mi = h_t + h_l - h_tl;
    out.emplace_back(tok, mi < 0.0 ? 0.0 : mi);  // clamp -0.0 noise
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

// K-fold cross-validated accuracy of an additive-smoothed bag-of-tokens
// likelihood-ratio classifier (unigrams + bigrams, smoothing 1). Folds
// are assigned by id modulo folds, so results are order-independent.
inline BaselineResult text_only_baseline(const std::vector<TextRecord>& records,
                                         int folds = 5) {
  if (folds < 2) throw TooFewRecords("baseline needs at least 2 folds");
  if (static_cast<std::int64_t>(records.size()) <
      static_cast<std::int64_t>(10) * folds)
    throw TooFewRecords("baseline needs at least 10 records per fold, got " +
                        std::to_string(records.size()));

  BaselineResult result;
  result.folds = folds;
  for (int fold = 0; fold < folds; ++fold) {
    std::map<std::string, std::array<std::int64_t, 2>> counts;
    std::array<std::int64_t, 2> class_tokens = {0, 0};
    std::array<std::int64_t, 2> class_docs = {0, 0};
    for (const TextRecord& r : records) {
      if (r.id % folds == fold) continue;  // held out
      const int l = r.label ? 1 : 0;
      class_docs[static_cast<std::size_t>(l)] += 1;
      for (const auto& f : detail::caption_features(r.caption)) {
        counts[f][static_cast<std::size_t>(l)] += 1;
        class_tokens[static_cast<std::size_t>(l)] += 1;
      }
    }
    const double vocab = static_cast<double>(counts.size());
    const double prior_num =
        static_cast<double>(class_docs[1]) + 1.0;
    const double prior_den =
        static_cast<double>(class_docs[0]) + 1.0;

    std::int64_t tested = 0, correct = 0;
    for (const TextRecord& r : records) {
      if (r.id % folds != fold) continue;
      double score = std::log(prior_num) - std::log(prior_den);
      for (const auto& f : detail::caption_features(r.caption)) {
        const auto it = counts.find(f);
        const double c1 = it == counts.end()
                              ? 0.0
                              : static_cast<double>(it->second[1]);
        const double c0 = it == counts.end()
                              ? 0.0
                              : static_cast<double>(it->second[0]);
        score += std::log((c1 + 1.0) /
                          (static_cast<double>(class_tokens[1]) + vocab));
        score -= std::log((c0 + 1.0) /
                          (static_cast<double>(class_tokens[0]) + vocab));
      }
      const bool predicted = score > 0.0;
      ++tested;
      if (predicted == r.label) ++correct;
    }
    result.fold_accuracies.push_back(
        tested == 0 ? 0.0
                    : static_cast<double>(correct) /
                          static_cast<double>(tested));
  }

  double mean = 0.0;
  for (double a : result.fold_accuracies) mean += a;
  mean /= static_cast<double>(folds);
  double var = 0.0;
  for (double a : result.fold_accuracies) var += (a - mean) * (a - mean);
  var /= static_cast<double>(folds - 1);
  result.accuracy = mean;
  result.standard_error = std::sqrt(var / static_cast<double>(folds));
  return result;
}

// Full bias audit: exact label priors, token/label mutual information,
// the text-only baseline, and (when a split spec is known) the holdout
// check.
inline AuditReport audit_report(
    const std::vector<Instance>& records, int folds = 5,
    const std::optional<SplitSpec>& split_spec = std::nullopt) {
  AuditReport report;
  for (const Instance& r : records) {
    report.overall.count += 1;
    report.per_split[r.split].count += 1;
    report.per_kind[r.kind].count += 1;
    if (r.label) {
      report.overall.true_count += 1;
      report.per_split[r.split].true_count += 1;
      report.per_kind[r.kind].true_count += 1;
    }
  }
  const auto text = strip_to_text(records);
  report.token_mi = token_label_mi(text);
  if (report.overall.count > 0 &&
      (report.overall.true_count == 0 ||
       report.overall.true_count == report.overall.count))
    report.warnings.push_back(
        "degenerate label prior: every record carries the same label");
  try {
    report.baseline = text_only_baseline(text, folds);
  } catch (const TooFewRecords& e) {
    report.warnings.push_back(std::string("baseline skipped: ") + e.what());
  }
  if (split_spec) report.holdout = check_holdout(records, *split_spec);
  return report;
}

inline AuditReport audit_report(const std::filesystem::path& dir,
                                int folds = 5) {
  const auto records = load_dataset(dir);
  std::optional<SplitSpec> split_spec;
  const auto config_path = dir / "config.json";
  if (std::filesystem::exists(config_path))
    split_spec = load_config_file(config_path).split_spec;
  return audit_report(records, folds, split_spec);
}

// --- prediction scoring -----------------------------------------------------

struct ScoreCell {
  std::int64_t total = 0;
  std::int64_t correct = 0;

  double accuracy() const {
    return total == 0 ? 0.0
                      : static_cast<double>(correct) /
                            static_cast<double>(total);
  }
};

struct ScoreReport {
  ScoreCell overall;
  std::map<CaptionKind, ScoreCell> per_kind;
  std::array<ScoreCell, 2> per_label;                       // [label]
  std::map<CaptionKind, std::array<ScoreCell, 2>> per_cell;  // kind x label
};

// Predictions file: one "{id} {0|1}" per line.
inline std::map<std::int64_t, int> parse_predictions(std::istream& in) {
  std::map<std::int64_t, int> out;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::int64_t id = 0;
    int value = -1;
    if (!(fields >> id >> value) || (value != 0 && value != 1))
      throw MalformedRecord("predictions line " + std::to_string(line_no) +
                            " is not '{id} {0|1}'");
    std::string extra;
    if (fields >> extra)
      throw MalformedRecord("predictions line " + std::to_string(line_no) +
                            " has trailing content");
    if (out.count(id))
      throw DuplicatePrediction("duplicate prediction for id " +
                                std::to_string(id));
    out[id] = value;
  }
  return out;
}

inline std::map<std::int64_t, int> parse_predictions_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord("cannot open " + path.string());
  return parse_predictions(in);
}

// Accuracy overall, per caption kind, per gold label, and per
// (kind x label) cell. Every record needs exactly one prediction.
inline ScoreReport score_predictions(
    const std::vector<Instance>& records,
    const std::map<std::int64_t, int>& predictions) {
  std::set<std::int64_t> known;
  for (const Instance& r : records) known.insert(r.id);
  for (const auto& [id, value] : predictions)
    if (!known.count(id))
      throw UnknownId("prediction for unknown id " + std::to_string(id));

  ScoreReport report;
  for (const Instance& r : records) {
    const auto it = predictions.find(r.id);
    if (it == predictions.end())
      throw MissingPrediction("no prediction for id " + std::to_string(r.id));
    const bool predicted = it->second == 1;
    const bool hit = predicted == r.label;
    const std::size_t l = r.label ? 1 : 0;
    auto bump = [&](ScoreCell& cell) {
      cell.total += 1;
      if (hit) cell.correct += 1;
    };
    bump(report.overall);
    bump(report.per_kind[r.kind]);
    bump(report.per_label[l]);
    bump(report.per_cell[r.kind][l]);
  }
  return report;
}

// --- rendering ---------------------------------------------------------------

namespace detail {

inline std::string fixed3(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace detail

inline ordered_json score_report_to_json(const ScoreReport& r) {
  ordered_json j;
  j["overall"] = {{"total", r.overall.total},
                  {"correct", r.overall.correct},
                  {"accuracy", r.overall.accuracy()}};
  ordered_json kinds;
  for (const auto& [kind, cell] : r.per_kind) {
    ordered_json k;
    k["total"] = cell.total;
    k["correct"] = cell.correct;
    k["accuracy"] = cell.accuracy();
    const auto& cells = r.per_cell.at(kind);
    k["accuracy_false"] = cells[0].accuracy();
    k["accuracy_true"] = cells[1].accuracy();
    kinds[to_string(kind)] = k;
  }
  j["per_kind"] = kinds;
  j["per_label"] = {{"false", r.per_label[0].accuracy()},
                    {"true", r.per_label[1].accuracy()}};
  return j;
}

inline std::string format_score_report(const ScoreReport& r) {
  std::ostringstream os;
  os << "category              n     acc   acc(F)  acc(T)\n";
  auto line = [&](const std::string& name, const ScoreCell& cell,
                  const ScoreCell* f, const ScoreCell* t) {
    os << name;
    for (std::size_t i = name.size(); i < 20; ++i) os << ' ';
    std::string n = std::to_string(cell.total);
    for (std::size_t i = n.size(); i < 5; ++i) os << ' ';
    os << n << "   " << detail::fixed3(cell.accuracy());
    if (f && t)
      os << "   " << detail::fixed3(f->accuracy()) << "   "
         << detail::fixed3(t->accuracy());
    os << "\n";
  };
  line("overall", r.overall, &r.per_label[0], &r.per_label[1]);
  for (const auto& [kind, cell] : r.per_kind) {
    const auto& cells = r.per_cell.at(kind);
    line(to_string(kind), cell, &cells[0], &cells[1]);
  }
  return os.str();
}

inline ordered_json audit_report_to_json(const AuditReport& r,
                                         std::size_t mi_top_k = 20) {
  ordered_json j;
  j["records"] = r.overall.count;
  j["label_prior"] = r.overall.prior();
  ordered_json splits;
  for (const auto& [split, prior] : r.per_split)
    splits[to_string(split)] = {{"records", prior.count},
                                {"label_prior", prior.prior()}};
  j["per_split"] = splits;
  ordered_json kinds;
  for (const auto& [kind, prior] : r.per_kind)
    kinds[to_string(kind)] = {{"records", prior.count},
                              {"label_prior", prior.prior()}};
  j["per_kind"] = kinds;
  ordered_json mi = ordered_json::array();
  for (std::size_t i = 0; i < r.token_mi.size() && i < mi_top_k; ++i)
    mi.push_back({{"token", r.token_mi[i].first},
                  {"mi_bits", r.token_mi[i].second}});
  j["token_mi_top"] = mi;
  if (r.baseline) {
    j["text_only_baseline"] = {
        {"accuracy", r.baseline->accuracy},
        {"standard_error", r.baseline->standard_error},
        {"folds", r.baseline->folds}};
  }
  if (r.holdout) {
    ordered_json h;
    h["violations"] = r.holdout->violations;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.holdout->rows)
      rows.push_back({{"split", to_string(row.split)},
                      {"shape", to_string(row.combination.first)},
                      {"color", to_string(row.combination.second)},
                      {"worlds", row.world_count},
                      {"captions", row.caption_count}});
    h["counts"] = rows;
    j["holdout"] = h;
  }
  j["warnings"] = r.warnings;
  return j;
}

inline std::string format_audit_report(const AuditReport& r,
                                       std::size_t mi_top_k = 12) {
  std::ostringstream os;
  os << "records: " << r.overall.count
     << "   label prior: " << detail::fixed3(r.overall.prior()) << "\n";
  os << "per split:\n";
  for (const auto& [split, prior] : r.per_split)
    os << "  " << to_string(split) << ": n=" << prior.count
       << " prior=" << detail::fixed3(prior.prior()) << "\n";
  os << "per kind:\n";
  for (const auto& [kind, prior] : r.per_kind)
    os << "  " << to_string(kind) << ": n=" << prior.count
       << " prior=" << detail::fixed3(prior.prior()) << "\n";
  if (r.baseline)
    os << "text-only baseline: " << detail::fixed3(r.baseline->accuracy)
       << " +- " << detail::fixed3(r.baseline->standard_error) << " ("
       << r.baseline->folds << " folds)\n";
  os << "top token/label mutual information (bits):\n";
  for (std::size_t i = 0; i < r.token_mi.size() && i < mi_top_k; ++i)
    os << "  " << r.token_mi[i].first << ": "
       << detail::fixed3(r.token_mi[i].second) << "\n";
  if (r.holdout) {
    os << "holdout: "
       << (r.holdout->ok() ? "ok"
                           : std::to_string(r.holdout->violations.size()) +
                                 " violation(s)")
       << "\n";
    for (const auto& v : r.holdout->violations) os << "  " << v << "\n";
  }
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace shapecap
