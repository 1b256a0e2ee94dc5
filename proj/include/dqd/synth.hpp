#pragma once

// Seeded synthetic source/target embedding scenarios with a controllable
// labeling-function shift.
//
// Geometry. `topics` cluster centers c_m (random directions, length
// center_scale) share one class axis g. A pair drawn from topic m with class
// sign s (+1 duplicate, -1 not) sits at
//     c_m + s * class_offset * a_m + spread * z / sqrt(dim)
// where z is standard normal. Even-numbered topics use a_m = +g, odd-numbered
// ("flipped") topics use a_m = -g, so the class rule is consistent inside each
// topic but reverses between the two topic groups. Target points are further
// translated by domain_offset along a random direction h.
//
// Shift. The source draws a topic from the flipped group with probability
// source_flip_weight; the target does so with probability label_shift. At
// label_shift = 0 the target follows the source's dominant rule; as it grows,
// a larger share of target pairs obeys the reversed rule, which a single
// global linear boundary fitted on the source cannot track but local
// neighborhoods can.
//
// Randomness. std::mt19937_64 seeded with `seed` (its output sequence is fixed
// by the C++ standard). Uniforms are (x >> 11) * 2^-53; normals use the basic
// Box-Muller transform, consuming two uniforms per pair of normals. Draw order:
// g, h, the centers in topic order, then source rows (all positives, then all
// negatives), then target rows in the same order. For each row: group
// uniform, topic uniform, then dim normals.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqd/embedding_store.hpp"
#include "dqd/error.hpp"

namespace dqd {

struct SynthConfig {
  std::uint64_t seed = 20200711;
  std::size_t dim = 64;
  std::size_t topics = 8;
  std::size_t source_positives = 400;
  std::size_t source_negatives = 4000;
  std::size_t target_positives = 100;
  std::size_t target_negatives = 2000;
  double center_scale = 1.0;
  double class_offset = 0.15;
  double spread = 0.5;
  double domain_offset = 0.1;
  double source_flip_weight = 0.15;
  double label_shift = 0.5;

  void validate() const {
    auto fail = [](const std::string& m) { throw DataError("invalid synth config: " + m); };
    if (dim == 0) fail("dim must be positive");
    if (topics < 2) fail("topics must be at least 2");
    if (source_positives == 0 || source_negatives == 0) fail("source counts must be positive");
    if (target_positives == 0 || target_negatives == 0) fail("target counts must be positive");
    if (!(center_scale > 0.0) || !std::isfinite(center_scale)) fail("center_scale must be positive");
    if (!(class_offset > 0.0) || !std::isfinite(class_offset)) fail("class_offset must be positive");
    if (!(spread > 0.0) || !std::isfinite(spread)) fail("spread must be positive");
    if (!(domain_offset >= 0.0) || !std::isfinite(domain_offset)) fail("domain_offset must be >= 0");
    if (!(source_flip_weight >= 0.0 && source_flip_weight <= 1.0)) {
      fail("source_flip_weight must lie in [0, 1]");
    }
    if (!(label_shift >= 0.0 && label_shift <= 1.0)) fail("label_shift must lie in [0, 1]");
  }
};

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"seed", c.seed},
                     {"dim", c.dim},
                     {"topics", c.topics},
                     {"source_positives", c.source_positives},
                     {"source_negatives", c.source_negatives},
                     {"target_positives", c.target_positives},
                     {"target_negatives", c.target_negatives},
                     {"center_scale", c.center_scale},
                     {"class_offset", c.class_offset},
                     {"spread", c.spread},
                     {"domain_offset", c.domain_offset},
                     {"source_flip_weight", c.source_flip_weight},
                     {"label_shift", c.label_shift}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  if (!j.is_object()) throw DataError("synth config must be a JSON object");
  const nlohmann::json known = SynthConfig{};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw DataError("unknown synth config key '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("synth config key '") + key + "': " + e.what());
    }
  };
  get("seed", c.seed);
  get("dim", c.dim);
  get("topics", c.topics);
  get("source_positives", c.source_positives);
  get("source_negatives", c.source_negatives);
  get("target_positives", c.target_positives);
  get("target_negatives", c.target_negatives);
  get("center_scale", c.center_scale);
  get("class_offset", c.class_offset);
  get("spread", c.spread);
  get("domain_offset", c.domain_offset);
  get("source_flip_weight", c.source_flip_weight);
  get("label_shift", c.label_shift);
}

/// Portable seeded stream of uniforms and normals.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));  // 1 - u1 lies in (0, 1]
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    cached_ = true;
    return r * std::cos(theta);
  }

  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

struct SynthScenario {
  EmbeddingSet source;
  EmbeddingSet target;
};

namespace detail {

inline std::vector<double> random_unit(SynthRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double sq = 0.0;
  while (!(sq > 0.0)) {
    sq = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      sq += x * x;
    }
  }
  double n = std::sqrt(sq);
  for (auto& x : v) x /= n;
  return v;
}

}  // namespace detail

inline SynthScenario synth_generate(const SynthConfig& config) {
  config.validate();
  const std::size_t dim = config.dim;
  SynthRng rng(config.seed);

  const std::vector<double> axis = detail::random_unit(rng, dim);
  const std::vector<double> shift_dir = detail::random_unit(rng, dim);
  std::vector<std::vector<double>> centers;
  centers.reserve(config.topics);
  for (std::size_t m = 0; m < config.topics; ++m) {
    auto c = detail::random_unit(rng, dim);
    for (auto& x : c) x *= config.center_scale;
    centers.push_back(std::move(c));
  }
  const std::size_t regular_topics = (config.topics + 1) / 2;
  const std::size_t flipped_topics = config.topics / 2;
  const double noise_scale = config.spread / std::sqrt(static_cast<double>(dim));

  auto make_split = [&](std::size_t positives, std::size_t negatives, double flip_weight,
                        double offset) {
    const std::size_t n = positives + negatives;
    std::vector<float> values;
    values.reserve(n * dim);
    std::vector<Label> labels;
    labels.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      const bool duplicate = r < positives;
      const bool flipped = rng.uniform() < flip_weight;
      const std::size_t topic =
          flipped ? 2 * rng.index(flipped_topics) + 1 : 2 * rng.index(regular_topics);
      const double sign = (duplicate ? 1.0 : -1.0) * (flipped ? -1.0 : 1.0);
      const auto& c = centers[topic];
      // A row that rounds to zero norm is resampled; vanishingly rare.
      while (true) {
        std::vector<float> row(dim);
        double sq = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          double x = c[d] + sign * config.class_offset * axis[d] + noise_scale * rng.normal() +
                     offset * shift_dir[d];
          row[d] = static_cast<float>(x);
          sq += static_cast<double>(row[d]) * row[d];
        }
        if (sq > 0.0) {
          values.insert(values.end(), row.begin(), row.end());
          break;
        }
      }
      labels.push_back(duplicate ? Label::kDuplicate : Label::kNotDuplicate);
    }
    return EmbeddingSet(dim, std::move(values), std::move(labels));
  };

  EmbeddingSet source = make_split(config.source_positives, config.source_negatives,
                                   config.source_flip_weight, 0.0);
  EmbeddingSet target = make_split(config.target_positives, config.target_negatives,
                                   config.label_shift, config.domain_offset);
  return {std::move(source), std::move(target)};
}

}  // namespace dqd
