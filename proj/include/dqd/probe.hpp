#pragma once

// Logistic-regression probe on frozen pair embeddings.
//
// Objective over n labeled rows (x_i, y_i), y_i in {0, 1}:
//   L(w, b) = (1/n) sum_i [softplus(z_i) - y_i z_i] + (l2 / 2) |w|^2,
//   z_i = w.x_i + b.
// Trained by full-batch gradient descent for a fixed number of epochs.

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqd/aggregate.hpp"
#include "dqd/embedding_store.hpp"
#include "dqd/error.hpp"
#include "dqd/text.hpp"

namespace dqd {

struct ProbeConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 300;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
};

struct ProbeModel {
  std::vector<double> weights;
  double bias = 0.0;
  ProbeConfig config;
  double final_loss = 0.0;

  std::size_t dim() const { return weights.size(); }
};

namespace detail {

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

inline double affine(const std::vector<double>& w, double b, std::span<const float> x) {
  double z = b;
  for (std::size_t d = 0; d < w.size(); ++d) z += w[d] * x[d];
  return z;
}

}  // namespace detail

inline double probe_loss(const std::vector<double>& weights, double bias, const EmbeddingSet& store,
                         double l2) {
  double sum = 0.0;
  for (std::size_t i = 0; i < store.count(); ++i) {
    double z = detail::affine(weights, bias, store.row(i));
    double y = store.label(i) == Label::kDuplicate ? 1.0 : 0.0;
    sum += detail::softplus(z) - y * z;
  }
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return sum / static_cast<double>(store.count()) + 0.5 * l2 * reg;
}

struct ProbeGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

inline ProbeGradient probe_gradient(const std::vector<double>& weights, double bias,
                                    const EmbeddingSet& store, double l2) {
  ProbeGradient g{std::vector<double>(weights.size(), 0.0), 0.0};
  for (std::size_t i = 0; i < store.count(); ++i) {
    auto x = store.row(i);
    double y = store.label(i) == Label::kDuplicate ? 1.0 : 0.0;
    double r = detail::sigmoid(detail::affine(weights, bias, x)) - y;
    for (std::size_t d = 0; d < weights.size(); ++d) g.weights[d] += r * x[d];
    g.bias += r;
  }
  const double inv_n = 1.0 / static_cast<double>(store.count());
  for (std::size_t d = 0; d < weights.size(); ++d) g.weights[d] = g.weights[d] * inv_n + l2 * weights[d];
  g.bias *= inv_n;
  return g;
}

/// Initial parameters: weights ~ N(0, 0.01^2) from mt19937_64(seed), bias 0.
inline std::vector<double> probe_initial_weights(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<double> w(dim);
  // Box-Muller over 53-bit uniforms, so the draw does not depend on the
  // standard library's normal_distribution.
  for (std::size_t d = 0; d < dim; d += 2) {
    double u1 = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    double u2 = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    w[d] = 0.01 * r * std::cos(2.0 * std::numbers::pi * u2);
    if (d + 1 < dim) w[d + 1] = 0.01 * r * std::sin(2.0 * std::numbers::pi * u2);
  }
  return w;
}

/// Called after each epoch with (epoch index, loss after the step).
using ProbeObserver = std::function<void(std::size_t, double)>;

inline ProbeModel train_probe(const EmbeddingSet& store, const ProbeConfig& config,
                              const ProbeObserver& observer = {}) {
  if (!store.labeled()) throw std::invalid_argument("train_probe: store is unlabeled");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < store.count(); ++i) pos += store.label(i) == Label::kDuplicate;
  if (pos == 0 || pos == store.count()) {
    throw DataError("train_probe: training store must contain both classes");
  }
  if (!(config.learning_rate > 0.0) || !(config.l2 >= 0.0)) {
    throw std::invalid_argument("train_probe: learning rate must be positive and l2 non-negative");
  }

  ProbeModel model;
  model.config = config;
  model.weights = probe_initial_weights(store.dim(), config.seed);
  model.bias = 0.0;
  double loss = probe_loss(model.weights, model.bias, store, config.l2);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    ProbeGradient g = probe_gradient(model.weights, model.bias, store, config.l2);
    for (std::size_t d = 0; d < model.weights.size(); ++d) {
      model.weights[d] -= config.learning_rate * g.weights[d];
    }
    model.bias -= config.learning_rate * g.bias;
    loss = probe_loss(model.weights, model.bias, store, config.l2);
    if (!std::isfinite(loss)) {
      throw DataError("train_probe: loss diverged at epoch " + std::to_string(epoch) +
                      "; lower the learning rate");
    }
    if (observer) observer(epoch, loss);
  }
  model.final_loss = loss;
  return model;
}

/// Probability of duplicate for every target row, in order.
inline std::vector<TargetScore> probe_score(const ProbeModel& model, const EmbeddingSet& targets) {
  if (targets.dim() != model.dim()) {
    throw std::invalid_argument("probe_score: target dim " + std::to_string(targets.dim()) +
                                " does not match model dim " + std::to_string(model.dim()));
  }
  std::vector<TargetScore> out;
  out.reserve(targets.count());
  for (std::size_t i = 0; i < targets.count(); ++i) {
    out.push_back({i, detail::sigmoid(detail::affine(model.weights, model.bias, targets.row(i)))});
  }
  return out;
}

// Model file: `key <TAB> value` lines, then one `w <TAB> index <TAB> value`
// line per weight. Doubles are written with round-trip precision.

inline void write_probe(std::ostream& out, const ProbeModel& m) {
  out << "dim\t" << m.dim() << '\n';
  out << "bias\t" << text::format_exact(m.bias) << '\n';
  out << "learning_rate\t" << text::format_exact(m.config.learning_rate) << '\n';
  out << "epochs\t" << m.config.epochs << '\n';
  out << "seed\t" << m.config.seed << '\n';
  out << "l2\t" << text::format_exact(m.config.l2) << '\n';
  out << "final_loss\t" << text::format_exact(m.final_loss) << '\n';
  for (std::size_t d = 0; d < m.dim(); ++d) {
    out << "w\t" << d << '\t' << text::format_exact(m.weights[d]) << '\n';
  }
}

inline ProbeModel read_probe(std::istream& in, const std::string& name = "model") {
  ProbeModel m;
  std::optional<std::size_t> dim;
  std::vector<bool> seen;
  std::string line;
  std::size_t lineno = 0;
  auto bad = [&](const std::string& why) {
    return DataError(name + ":" + std::to_string(lineno) + ": " + why);
  };
  auto number = [&](std::string_view s) {
    auto v = text::parse_double(s);
    if (!v || !std::isfinite(*v)) throw bad("bad number '" + std::string(s) + "'");
    return *v;
  };
  while (text::read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = text::split_tabs(line);
    if (f[0] == "w") {
      if (!dim) throw bad("weight before dim");
      if (f.size() != 3) throw bad("expected `w <TAB> index <TAB> value`");
      auto idx = text::parse_int<std::size_t>(f[1]);
      if (!idx || *idx >= *dim) throw bad("weight index out of range");
      m.weights[*idx] = number(f[2]);
      seen[*idx] = true;
      continue;
    }
    if (f.size() != 2) throw bad("expected `key <TAB> value`");
    if (f[0] == "dim") {
      auto d = text::parse_int<std::size_t>(f[1]);
      if (!d || *d == 0) throw bad("dim must be a positive integer");
      dim = *d;
      m.weights.assign(*d, 0.0);
      seen.assign(*d, false);
    } else if (f[0] == "bias") {
      m.bias = number(f[1]);
    } else if (f[0] == "learning_rate") {
      m.config.learning_rate = number(f[1]);
    } else if (f[0] == "epochs") {
      auto e = text::parse_int<std::size_t>(f[1]);
      if (!e) throw bad("bad epochs");
      m.config.epochs = *e;
    } else if (f[0] == "seed") {
      auto s = text::parse_int<std::uint64_t>(f[1]);
      if (!s) throw bad("bad seed");
      m.config.seed = *s;
    } else if (f[0] == "l2") {
      m.config.l2 = number(f[1]);
    } else if (f[0] == "final_loss") {
      m.final_loss = number(f[1]);
    } else {
      throw bad("unknown key '" + std::string(f[0]) + "'");
    }
  }
  if (!dim) throw DataError(name + ": missing dim");
  for (std::size_t d = 0; d < *dim; ++d) {
    if (!seen[d]) throw DataError(name + ": missing weight " + std::to_string(d));
  }
  return m;
}

}  // namespace dqd
