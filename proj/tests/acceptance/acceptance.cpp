// Acceptance suite. Prints one line per criterion:
//   criterion <n>: PASS|FAIL|SKIP (<seconds>s) <detail>
// Usage: dqd_acceptance [criterion numbers...]   (default: all)
// Exit status: 0 when nothing failed and at least one criterion ran, 1 on any
// failure, 77 when every requested criterion was skipped.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli_harness.hpp"
#include "dqd/dqd.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

Outcome fail(std::string why) { return {Status::kFail, std::move(why)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

dqd::SynthConfig load_config(const std::string& name) {
  std::ifstream in(fs::path(DQD_SOURCE_DIR) / "configs" / name);
  if (!in) throw dqd::DataError("missing config " + name);
  return nlohmann::json::parse(in).get<dqd::SynthConfig>();
}

// --- 1: weighted vote against direct summation ---------------------------

Outcome criterion_vote() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> klen(1, 128);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    dqd::NeighborList list;
    std::vector<double> d;
    std::vector<int> dup;
    const std::size_t k = klen(rng);
    for (std::size_t i = 0; i < k; ++i) {
      double x = dist(rng);
      bool y = coin(rng);
      d.push_back(x);
      dup.push_back(y);
      list.entries.push_back({i, x, y ? dqd::Label::kDuplicate : dqd::Label::kNotDuplicate});
    }
    auto got = dqd::aggregate(list);
    double want = oracle::duplicate_share(d, dup);
    worst = std::max({worst, std::abs(got.s_duplicate - want),
                      std::abs(got.s_not_duplicate - (1.0 - want))});
  }
  if (worst > 1e-12) return fail("max deviation " + fmt("%.3g", worst));

  auto make = [](std::vector<std::pair<double, dqd::Label>> items) {
    dqd::NeighborList l;
    for (std::size_t i = 0; i < items.size(); ++i) l.entries.push_back({i, items[i].first, items[i].second});
    return dqd::aggregate(l);
  };
  using dqd::Label;
  // Distances past 1 contribute nothing.
  auto clamped = make({{0.2, Label::kDuplicate}, {1.7, Label::kNotDuplicate}, {0.6, Label::kNotDuplicate}});
  if (std::abs(clamped.s_duplicate - 2.0 / 3.0) > 1e-12 || clamped.clamped_count != 1) {
    return fail("clamping fixture gave " + fmt("%.17g", clamped.s_duplicate));
  }
  // No similarity mass at all falls back to an even split.
  auto empty_mass = make({{1.0, Label::kDuplicate}, {1.5, Label::kNotDuplicate}, {2.0, Label::kDuplicate}});
  if (empty_mass.s_duplicate != 0.5 || empty_mass.s_not_duplicate != 0.5) {
    return fail("zero-mass fixture did not fall back to 0.5");
  }
  return {Status::kPass, "1000 lists, max deviation " + fmt("%.3g", worst) + "; clamping and zero-mass fixtures ok"};
}

// --- 2: exact retrieval against a full sort --------------------------------

Outcome criterion_retrieval() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> n_dist(1, 2000), dim_dist(1, 64);
  const std::size_t ks[] = {1, 10, 100};
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = n_dist(rng), dim = dim_dist(rng), k = ks[trial % 3];
    auto values = testutil::random_rows(rng, n, dim, 0.1);
    std::vector<dqd::Label> labels(n);
    for (auto& l : labels) l = coin(rng) ? dqd::Label::kDuplicate : dqd::Label::kNotDuplicate;
    dqd::EmbeddingSet store(dim, values, labels);

    std::vector<float> query;
    if (coin(rng)) {  // an existing row, so exact ties with its copies occur
      std::size_t r = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      query.assign(values.begin() + r * dim, values.begin() + (r + 1) * dim);
    } else {
      query = testutil::random_rows(rng, 1, dim);
    }
    auto got = dqd::top_k(store, query, k);
    auto want = oracle::full_sort_top_k(values, dim, query.data(), k);
    if (got.entries.size() != want.size()) return fail("trial " + std::to_string(trial) + ": wrong length");
    for (std::size_t i = 0; i < want.size(); ++i) {
      const auto& g = got.entries[i];
      if (g.index != want[i].index || std::abs(g.distance - want[i].distance) > 1e-12 ||
          g.label != labels[g.index]) {
        return fail("trial " + std::to_string(trial) + ": mismatch at rank " + std::to_string(i));
      }
    }
  }
  return {Status::kPass, "200 instances match the full-sort oracle including tie order"};
}

// --- 3: metric correctness --------------------------------------------------

double auc_of(const std::vector<double>& scores, const std::vector<int>& gold, double cap) {
  std::vector<dqd::ScoredPair> pairs;
  for (std::size_t i = 0; i < scores.size(); ++i) pairs.push_back({std::to_string(i), scores[i], gold[i]});
  return dqd::auc_at(dqd::roc(pairs), cap);
}

Outcome criterion_metrics() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> count(1, 60), level(0, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s;
    std::vector<int> g;
    const int pos = count(rng), neg = count(rng);
    const bool coarse = trial % 2 == 0;  // coarse scores force ties
    for (int i = 0; i < pos + neg; ++i) {
      s.push_back(coarse ? level(rng) / 10.0 : u(rng));
      g.push_back(i < pos ? 1 : 0);
    }
    worst = std::max(worst, std::abs(auc_of(s, g, 1.0) - oracle::mann_whitney_auc(s, g)));
  }
  if (worst > 1e-9) return fail("full AUC deviates from Mann-Whitney by " + fmt("%.3g", worst));

  double perfect = auc_of({0.9, 0.8, 0.1, 0.2, 0.3}, {1, 1, 0, 0, 0}, 0.05);
  if (perfect != 1.0) return fail("perfect ranking gave " + fmt("%.17g", perfect));
  std::vector<int> half(50, 0);
  std::fill(half.begin(), half.begin() + 25, 1);
  double diagonal = auc_of(std::vector<double>(50, 0.5), half, 0.05);  // one tied threshold
  if (std::abs(diagonal - 0.025) > 1e-9) return fail("diagonal gave " + fmt("%.17g", diagonal));

  double sum = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(10100);
    std::vector<int> g(10100, 0);
    for (auto& x : s) x = u(rng);
    std::fill(g.begin(), g.begin() + 100, 1);
    sum += auc_of(s, g, 0.05);
  }
  double mean = sum / 200.0;
  if (mean < 0.015 || mean > 0.035) return fail("random-label mean AUC(.05) " + fmt("%.4f", mean));
  return {Status::kPass, "Mann-Whitney deviation " + fmt("%.3g", worst) + ", diagonal " +
                             fmt("%.12f", diagonal) + ", random-label mean " + fmt("%.4f", mean)};
}

// --- 4: k-NN versus linear probe under labeling shift ------------------------

struct Pair {
  double knn = 0.0;
  double probe = 0.0;
  std::string store_bytes;
};

Pair run_scenario(const dqd::SynthConfig& config) {
  auto sc = dqd::synth_generate(config);
  auto gold_of = [&](std::size_t i) { return sc.target.label(i) == dqd::Label::kDuplicate ? 1 : 0; };
  auto to_auc = [&](const std::vector<dqd::TargetScore>& ts) {
    std::vector<dqd::ScoredPair> pairs;
    for (const auto& t : ts) pairs.push_back({std::to_string(t.index), t.score, gold_of(t.index)});
    return dqd::auc_at(dqd::roc(pairs), dqd::kDefaultFprCap);
  };
  Pair out;
  out.knn = to_auc(dqd::rank_targets(sc.source, sc.target, dqd::kDefaultK));
  out.probe = to_auc(dqd::probe_score(dqd::train_probe(sc.source, dqd::ProbeConfig{}), sc.target));
  out.store_bytes = dqd::encode_store(sc.source) + dqd::encode_store(sc.target);
  return out;
}

Outcome criterion_shift() {
  auto shifted_cfg = load_config("synth_default.json");
  if (shifted_cfg.label_shift != 0.5) return fail("default config label_shift is not 0.5");
  auto separable_cfg = load_config("synth_separable.json");
  if (separable_cfg.label_shift != 0.0) return fail("separable config label_shift is not 0");

  Pair shifted = run_scenario(shifted_cfg);
  Pair again = run_scenario(shifted_cfg);
  if (shifted.store_bytes != again.store_bytes || shifted.knn != again.knn || shifted.probe != again.probe) {
    return fail("rerun with the same seed differs");
  }
  Pair separable = run_scenario(separable_cfg);
  std::string detail = "shift 0.5: knn " + fmt("%.4f", shifted.knn) + " probe " + fmt("%.4f", shifted.probe) +
                       "; separable: knn " + fmt("%.4f", separable.knn) + " probe " +
                       fmt("%.4f", separable.probe);
  if (shifted.knn - shifted.probe < 0.05) return fail("gap below 0.05; " + detail);
  if (separable.knn < 0.95 || separable.probe < 0.95) return fail("separable below 0.95; " + detail);
  return {Status::kPass, detail};
}

// --- 5: lexical statistics on the public dataset ------------------------------

Outcome criterion_lexical() {
  const char* root_env = std::getenv("DQD_DATA_DIR");
  if (!root_env || !*root_env) return {Status::kSkip, "DQD_DATA_DIR not set; needs the ingested public dataset"};
  const fs::path root(root_env);
  const fs::path au = root / "askubuntu", sp = root / "sprint";
  if (!fs::exists(au / "corpus.tsv") || !fs::exists(sp / "corpus.tsv")) {
    return {Status::kSkip, "expected askubuntu/ and sprint/ ingest outputs under " + root.string()};
  }
  auto load_corpus = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return dqd::TokenizedCorpus(dqd::read_corpus(in, p.string()), dqd::TextMode::kTitleBody);
  };
  auto askubuntu = load_corpus(au / "corpus.tsv");
  auto sprint = load_corpus(sp / "corpus.tsv");
  std::vector<dqd::PairRecord> pairs;
  for (const auto& e : fs::directory_iterator(au)) {
    const auto name = e.path().filename().string();
    if (name.size() > 10 && name.ends_with(".pairs.tsv")) {
      std::ifstream in(e.path(), std::ios::binary);
      auto part = dqd::read_pairs(in, e.path().string());
      pairs.insert(pairs.end(), part.begin(), part.end());
    }
  }
  if (pairs.empty()) return fail("no askubuntu pair files found");
  auto cj = dqd::class_mean_jaccard(askubuntu, pairs);
  double self = dqd::vocab_jaccard(askubuntu, askubuntu);
  double cross = dqd::vocab_jaccard(sprint, askubuntu);
  if (!cj.duplicate || !cj.not_duplicate) return fail("askubuntu pairs lack one class");
  std::string detail = "dup " + fmt("%.4f", *cj.duplicate) + ", not_dup " + fmt("%.4f", *cj.not_duplicate) +
                       ", self vocab " + fmt("%.4f", self) + ", sprint vs askubuntu " + fmt("%.4f", cross);
  bool ok = std::abs(*cj.duplicate - 0.16) <= 0.05 && std::abs(*cj.not_duplicate - 0.03) <= 0.02 &&
            self == 1.0 && std::abs(cross - 0.03) <= 0.02;
  return {ok ? Status::kPass : Status::kFail, detail};
}

// --- 6: format round trip and pipeline determinism --------------------------------

Outcome criterion_determinism() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> dim_dist(1, 64), n_dist(0, 40);
  std::uniform_int_distribution<std::uint32_t> bits;
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = dim_dist(rng), n = n_dist(rng);
    std::vector<float> v(n * dim);
    // Arbitrary finite bit patterns, including subnormals and negative zero.
    for (auto& x : v) {
      float f;
      do {
        std::uint32_t b = bits(rng);
        std::memcpy(&f, &b, sizeof f);
      } while (!std::isfinite(f));
      x = f;
    }
    for (std::size_t r = 0; r < n; ++r) v[r * dim] = v[r * dim] == 0.0f ? 1.0f : v[r * dim];
    std::optional<std::vector<dqd::Label>> labels;
    if (coin(rng)) {
      labels.emplace(n);
      for (auto& l : *labels) l = coin(rng) ? dqd::Label::kDuplicate : dqd::Label::kNotDuplicate;
    }
    dqd::EmbeddingSet set(dim, v, labels);
    std::string bytes = dqd::encode_store(set);
    auto back = dqd::decode_store(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
    if (!(back == set) || dqd::encode_store(back) != bytes ||
        std::memcmp(back.values().data(), v.data(), v.size() * sizeof(float)) != 0) {
      return fail("round trip " + std::to_string(trial) + " not bit-exact");
    }
  }

  // Run every subcommand twice in separate directories and compare outputs.
  testutil::TempDir tmp;
  const fs::path data = tmp / "raw" / "toy";
  fs::create_directories(data);
  std::ofstream(data / "corpus.tsv") << "q1\tHow to mount a USB drive\tdetails\n"
                                        "q2\tMounting usb drives\tmore\n"
                                        "q3\tWifi drops after suspend\t\n";
  std::ofstream(data / "train.pos.txt") << "q1 q2\n";
  std::ofstream(data / "train.neg.txt") << "q1 q3\nq2 q3\n";

  std::map<std::string, std::string> stdout_of[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path d = tmp / ("run" + std::to_string(run));
    auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"synth", "synth --config " + q(fs::path(DQD_SOURCE_DIR) / "configs/synth_default.json") + " --out " + q(d / "syn")},
        {"knn", "knn-score --source " + q(d / "syn/source.dqde") + " --target " + q(d / "syn/target.dqde") + " --out " + q(d / "knn.tsv")},
        {"train", "probe-train --source " + q(d / "syn/source.dqde") + " --out " + q(d / "model.tsv")},
        {"pscore", "probe-score --model " + q(d / "model.tsv") + " --target " + q(d / "syn/target.dqde") + " --out " + q(d / "probe.tsv")},
        {"eval", "eval --scores " + q(d / "knn.tsv")},
        {"inspect", "inspect " + q(d / "syn/target.dqde")},
        {"ingest", "ingest " + q(tmp / "raw") + " --domain toy --out " + q(d / "toy")},
        {"lexstats", "lexstats --corpus-a " + q(d / "toy/corpus.tsv") + " --corpus-b " + q(d / "toy/corpus.tsv") +
                         " --pairs " + q(d / "toy/train.pairs.tsv") + " --out " + q(d / "lex.tsv")},
    };
    for (const auto& [name, args] : steps) {
      auto r = testutil::run_cli(args, tmp);
      if (r.exit_code != 0) return fail(name + " exited " + std::to_string(r.exit_code) + ": " + r.err);
      stdout_of[run][name] = r.out;
    }
  }
  if (stdout_of[0] != stdout_of[1]) return fail("subcommand stdout differs between runs");
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(tmp / "run0")) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (name.ends_with("manifest.json")) continue;  // carries wall-clock duration
    const fs::path twin = tmp / "run1" / fs::relative(e.path(), tmp / "run0");
    if (testutil::slurp(e.path()) != testutil::slurp(twin)) return fail(name + " differs between runs");
    ++compared;
  }
  return {Status::kPass, "1000 bit-exact round trips; " + std::to_string(compared) +
                             " pipeline outputs and all stdout byte-identical on rerun"};
}

struct Criterion {
  int number;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, 1.0, criterion_vote},         {2, 30.0, criterion_retrieval}, {3, 60.0, criterion_metrics},
      {4, 60.0, criterion_shift},       {5, 1800.0, criterion_lexical}, {6, 120.0, criterion_determinism},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  if (wanted.empty()) {
    for (const auto& c : all) wanted.push_back(c.number);
  }

  int failed = 0, ran = 0;
  for (int n : wanted) {
    auto it = std::find_if(all.begin(), all.end(), [n](const Criterion& c) { return c.number == n; });
    if (it == all.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 1;
    }
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Status::kPass && secs > it->limit_seconds) {
      o = fail("exceeded " + fmt("%.0f", it->limit_seconds) + "s budget; " + o.detail);
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    std::printf("criterion %d: %s (%.2fs) %s\n", n, tag, secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.status == Status::kFail;
    ran += o.status != Status::kSkip;
  }
  if (failed) return 1;
  return ran == 0 ? 77 : 0;
}
