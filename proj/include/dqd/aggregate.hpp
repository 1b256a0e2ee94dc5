#pragma once

// Distance-weighted label voting over a neighbor list.
//
// Each neighbor i carries weight w_i = max(1 - d_i, 0). The score of class y
// is the share of total weight held by neighbors labeled y. When every weight
// is zero the query carries no evidence and both classes score 0.5.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "dqd/embedding_store.hpp"
#include "dqd/knn.hpp"

namespace dqd {

struct ClassScore {
  double s_duplicate = 0.5;
  double s_not_duplicate = 0.5;
  double weight_mass = 0.0;
  std::size_t clamped_count = 0;
};

inline ClassScore aggregate(const NeighborList& neighbors) {
  if (neighbors.entries.empty()) throw std::invalid_argument("aggregate: empty neighbor list");
  double dup_mass = 0.0;
  double total = 0.0;
  std::size_t clamped = 0;
  for (const Neighbor& n : neighbors.entries) {
    double w = 1.0 - n.distance;
    if (w < 0.0) {
      w = 0.0;
      ++clamped;
    }
    total += w;
    if (n.label == Label::kDuplicate) dup_mass += w;
  }
  ClassScore score;
  score.weight_mass = total;
  score.clamped_count = clamped;
  if (total > 0.0) {
    score.s_duplicate = dup_mass / total;
    score.s_not_duplicate = 1.0 - score.s_duplicate;
  }
  return score;
}

struct TargetScore {
  std::size_t index = 0;
  double score = 0.0;
};

/// s(duplicate) for every target row, in target order.
inline std::vector<TargetScore> rank_targets(const EmbeddingSet& store, const EmbeddingSet& targets,
                                             std::size_t k,
                                             unsigned threads = default_thread_count()) {
  if (targets.empty()) throw std::invalid_argument("rank_targets: no targets");
  if (targets.dim() != store.dim()) {
    throw std::invalid_argument("rank_targets: target dim " + std::to_string(targets.dim()) +
                                " does not match source dim " + std::to_string(store.dim()));
  }
  auto lists = batch_top_k(store, targets, k, threads);
  std::vector<TargetScore> out;
  out.reserve(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) {
    out.push_back({i, aggregate(lists[i]).s_duplicate});
  }
  return out;
}

}  // namespace dqd
