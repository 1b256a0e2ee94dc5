#pragma once

// Exact cosine-distance top-k retrieval over an EmbeddingSet.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dqd/embedding_store.hpp"

namespace dqd {

/// Default neighborhood size used for scoring.
inline constexpr std::size_t kDefaultK = 100;

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
  Label label = Label::kNotDuplicate;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The nearest source rows for one query, sorted by (distance, index).
struct NeighborList {
  std::size_t query_index = 0;
  std::vector<Neighbor> entries;

  std::size_t k_effective() const { return entries.size(); }
  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

namespace detail {

template <class T>
double dot(std::span<const T> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

template <class T>
double l2_norm(std::span<const T> v) {
  double sq = 0.0;
  for (T x : v) sq += static_cast<double>(x) * x;
  return std::sqrt(sq);
}

inline double distance_from_cosine(double dot, double norm_a, double norm_b) {
  return std::clamp(1.0 - dot / (norm_a * norm_b), 0.0, 2.0);
}

inline bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

}  // namespace detail

/// d(u, v) = 1 - cos(u, v), clamped to [0, 2]. Accumulates in double.
inline double cosine_distance(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine_distance: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " + std::to_string(v.size()) +
                                ")");
  }
  double nu = detail::l2_norm(u);
  double nv = detail::l2_norm(v);
  if (!(nu > 0.0) || !(nv > 0.0)) throw std::invalid_argument("cosine_distance: zero-norm vector");
  return detail::distance_from_cosine(detail::dot(u, v), nu, nv);
}

/// The min(k, store.count()) rows of `store` closest to `query`.
/// Ties on distance are broken by ascending source index.
inline NeighborList top_k(const EmbeddingSet& store, std::span<const float> query, std::size_t k) {
  if (k == 0) throw std::invalid_argument("top_k: k must be positive");
  if (!store.labeled()) throw std::invalid_argument("top_k: source store is unlabeled");
  if (store.empty()) throw std::invalid_argument("top_k: source store is empty");
  if (query.size() != store.dim()) {
    throw std::invalid_argument("top_k: query dim " + std::to_string(query.size()) +
                                " does not match store dim " + std::to_string(store.dim()));
  }
  double qnorm = detail::l2_norm(query);
  if (!(qnorm > 0.0)) throw std::invalid_argument("top_k: zero-norm query");

  const std::size_t keep = std::min(k, store.count());
  NeighborList out;
  out.entries.reserve(keep + 1);
  // Max-heap on (distance, index): the root is the worst kept neighbor.
  auto& heap = out.entries;
  for (std::size_t i = 0; i < store.count(); ++i) {
    Neighbor cand{i, detail::distance_from_cosine(detail::dot(query, store.row(i)), qnorm,
                                                  store.norm(i)),
                  store.label(i)};
    if (heap.size() < keep) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), detail::closer);
    } else if (detail::closer(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), detail::closer);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), detail::closer);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), detail::closer);
  return out;
}

/// Worker count for batch retrieval: DQD_THREADS if set, else hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("DQD_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// top_k for every row of `queries`, in query order. Output does not depend on `threads`.
inline std::vector<NeighborList> batch_top_k(const EmbeddingSet& store,
                                             const EmbeddingSet& queries, std::size_t k,
                                             unsigned threads = default_thread_count()) {
  std::vector<NeighborList> results(queries.count());
  if (queries.empty()) return results;

  auto run = [&](std::size_t q) {
    try {
      results[q] = top_k(store, queries.row(q), k);
      results[q].query_index = q;
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("query " + std::to_string(q) + ": " + e.what());
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(queries.count())));
  if (threads == 1) {
    for (std::size_t q = 0; q < queries.count(); ++q) run(q);
    return results;
  }

  // Strided partition; every slot is written by exactly one worker.
  struct Failure {
    std::size_t query = SIZE_MAX;
    std::exception_ptr error;
  };
  std::vector<Failure> failures(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      std::size_t q = t;
      try {
        for (; q < queries.count(); q += threads) run(q);
      } catch (...) {
        failures[t] = {q, std::current_exception()};
      }
    });
  }
  for (auto& th : pool) th.join();
  // Surface the lowest failing query, as a sequential loop would.
  auto worst = std::min_element(failures.begin(), failures.end(),
                                [](const Failure& a, const Failure& b) { return a.query < b.query; });
  if (worst->error) std::rethrow_exception(worst->error);
  return results;
}

}  // namespace dqd
