#pragma once

// ROC curves and the capped, normalized area under them.

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqd/error.hpp"
#include "dqd/text.hpp"

namespace dqd {

/// Default false-positive-rate cap for the headline metric.
inline constexpr double kDefaultFprCap = 0.05;

struct ScoredPair {
  std::string id;
  double score = 0.0;
  int gold = 0;  // 1 = duplicate
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// One point per distinct score, thresholds descending, from (0,0) to (1,1).
inline RocCurve roc(const std::vector<ScoredPair>& pairs) {
  RocCurve curve;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.score)) throw std::invalid_argument("roc: non-finite score for " + p.id);
    if (p.gold == 1) {
      ++curve.positives;
    } else if (p.gold == 0) {
      ++curve.negatives;
    } else {
      throw std::invalid_argument("roc: gold label must be 0 or 1 for " + p.id);
    }
  }
  if (curve.positives == 0) throw std::invalid_argument("roc: no positive pairs");
  if (curve.negatives == 0) throw std::invalid_argument("roc: no negative pairs");

  std::vector<std::pair<double, int>> order;
  order.reserve(pairs.size());
  for (const auto& p : pairs) order.emplace_back(p.score, p.gold);
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double np = static_cast<double>(curve.positives);
  const double nn = static_cast<double>(curve.negatives);
  std::size_t tp = 0;
  std::size_t fp = 0;
  curve.points.push_back({0.0, 0.0});
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && order[j].first == order[i].first) {
      (order[j].second == 1 ? tp : fp) += 1;
      ++j;
    }
    curve.points.push_back({fp / nn, tp / np});
    i = j;
  }
  return curve;
}

/// Trapezoidal area over fpr in [0, fpr_cap], divided by fpr_cap.
/// The curve is interpolated linearly at the cap. fpr_cap = 1 is plain AUC.
inline double auc_at(const RocCurve& curve, double fpr_cap = kDefaultFprCap) {
  if (!(fpr_cap > 0.0 && fpr_cap <= 1.0)) {
    throw std::invalid_argument("auc_at: fpr cap must lie in (0, 1], got " +
                                text::format_general(fpr_cap));
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    if (a.fpr >= fpr_cap) break;
    if (b.fpr <= fpr_cap) {
      area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    } else {
      double t = (fpr_cap - a.fpr) / (b.fpr - a.fpr);
      double tpr_cap = a.tpr + t * (b.tpr - a.tpr);
      area += (fpr_cap - a.fpr) * (a.tpr + tpr_cap) / 2.0;
      break;
    }
  }
  return area / fpr_cap;
}

// Score files: one pair per line, `target_id <TAB> score [<TAB> gold]`.
// Lines starting with '#' are comments.

inline void write_scores(std::ostream& out, const std::vector<ScoredPair>& pairs,
                         bool with_gold = true) {
  out << "#target_id\tscore" << (with_gold ? "\tgold" : "") << '\n';
  for (const auto& p : pairs) {
    out << p.id << '\t' << text::format_exact(p.score);
    if (with_gold) out << '\t' << p.gold;
    out << '\n';
  }
}

struct ScoreFile {
  std::vector<ScoredPair> pairs;
  bool has_gold = true;
};

inline ScoreFile read_scores(std::istream& in, const std::string& name = "scores") {
  ScoreFile file;
  std::optional<bool> gold_column;
  std::string line;
  std::size_t lineno = 0;
  while (text::read_line(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto where = [&] { return name + ":" + std::to_string(lineno) + ": "; };
    auto f = text::split_tabs(line);
    if (f.size() != 2 && f.size() != 3) {
      throw DataError(where() + "expected 2 or 3 tab-separated fields, got " +
                      std::to_string(f.size()));
    }
    bool has_gold = f.size() == 3;
    if (gold_column && *gold_column != has_gold) {
      throw DataError(where() + "inconsistent gold column");
    }
    gold_column = has_gold;
    ScoredPair p;
    p.id = std::string(f[0]);
    auto score = text::parse_double(f[1]);
    if (!score || !std::isfinite(*score)) throw DataError(where() + "bad score '" + std::string(f[1]) + "'");
    p.score = *score;
    if (has_gold) {
      if (f[2] != "0" && f[2] != "1") throw DataError(where() + "gold label must be 0 or 1");
      p.gold = f[2] == "1";
    }
    file.pairs.push_back(std::move(p));
  }
  file.has_gold = gold_column.value_or(true);
  return file;
}

}  // namespace dqd
