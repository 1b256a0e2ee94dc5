// dqd: command-line front end for scoring, evaluating and diagnosing
// cross-domain duplicate-question rankings.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dqd/dqd.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw dqd::DataError("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw dqd::DataError("cannot create " + p.string());
  return out;
}

fs::path manifest_beside(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

std::vector<dqd::ScoredPair> to_scored(const std::vector<dqd::TargetScore>& scores,
                                       const dqd::EmbeddingSet& targets) {
  std::vector<dqd::ScoredPair> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    int gold = targets.labeled() ? static_cast<int>(targets.label(s.index)) : 0;
    out.push_back({std::to_string(s.index), s.score, gold});
  }
  return out;
}

void write_score_file(const fs::path& path, const std::vector<dqd::ScoredPair>& pairs, bool gold) {
  auto out = open_out(path);
  dqd::write_scores(out, pairs, gold);
  if (!out) throw dqd::DataError("failed writing " + path.string());
}

std::vector<dqd::CorpusRecord> load_corpus(const fs::path& p) {
  auto in = open_in(p);
  return dqd::read_corpus(in, p.string());
}

// ---- subcommands ---------------------------------------------------------

struct Run {
  dqd::RunManifest manifest;
  fs::path manifest_path;
};

struct InspectArgs {
  std::string file;
  std::string manifest;
};

int cmd_inspect(const InspectArgs& a, Run& m) {
  m.manifest.add_input(a.file);
  auto set = dqd::read_store_file(a.file);
  std::cout << "count\t" << set.count() << '\n'
            << "dim\t" << set.dim() << '\n'
            << "labeled\t" << (set.labeled() ? "yes" : "no") << '\n';
  if (set.labeled()) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < set.count(); ++i) pos += set.label(i) == dqd::Label::kDuplicate;
    std::cout << "duplicates\t" << pos << '\n' << "not_duplicates\t" << set.count() - pos << '\n';
  }
  std::cout << "bytes\t" << dqd::dqde_size(set.count(), set.dim(), set.labeled()) << '\n';
  return 0;
}

struct IngestArgs {
  std::string dir;
  std::string domain;
  std::string out;
};

std::optional<fs::path> first_existing(const fs::path& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (fs::exists(dir / n)) return dir / n;
  }
  return std::nullopt;
}

int cmd_ingest(const IngestArgs& a, Run& m) {
  const fs::path domain_dir = fs::path(a.dir) / a.domain;
  if (!fs::is_directory(domain_dir)) throw dqd::DataError("no domain directory " + domain_dir.string());
  auto corpus_path = first_existing(domain_dir, {"corpus.tsv", "corpus.txt"});
  if (!corpus_path) throw dqd::DataError("no corpus.tsv or corpus.txt in " + domain_dir.string());

  m.manifest.add_input(*corpus_path);
  dqd::CorpusReadStats corpus_stats;
  auto corpus_in = open_in(*corpus_path);
  auto corpus = dqd::read_corpus(corpus_in, corpus_path->string(), &corpus_stats);

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "corpus.tsv");
    dqd::write_corpus(out, corpus);
  }
  m.manifest.outputs.push_back((out_dir / "corpus.tsv").string());

  std::cout << "split\tpositives\tnegatives\tneg_per_pos\tduplicate_entries\tself_pairs\n";
  std::size_t splits = 0;
  for (const char* split : {"train", "dev", "test"}) {
    std::vector<std::ifstream> streams;
    std::vector<dqd::PairSource> sources;
    streams.reserve(2);
    if (auto normalized = first_existing(domain_dir, {(std::string(split) + ".pairs.tsv").c_str()})) {
      m.manifest.add_input(*normalized);
      streams.push_back(open_in(*normalized));
      sources.push_back({&streams.back(), normalized->string(), std::nullopt});
    } else {
      auto pos = first_existing(domain_dir, {(std::string(split) + ".pos.txt").c_str(),
                                             (std::string(split) + ".pos").c_str()});
      auto neg = first_existing(domain_dir, {(std::string(split) + ".neg.txt").c_str(),
                                             (std::string(split) + ".neg").c_str()});
      if (!pos && !neg) continue;
      for (auto [path, label] : {std::pair{pos, dqd::Label::kDuplicate},
                                 std::pair{neg, dqd::Label::kNotDuplicate}}) {
        if (!path) continue;
        m.manifest.add_input(*path);
        streams.push_back(open_in(*path));
        sources.push_back({&streams.back(), path->string(), label});
      }
    }
    auto result = dqd::ingest_domain(corpus, sources);
    const fs::path pairs_path = out_dir / (std::string(split) + ".pairs.tsv");
    auto out = open_out(pairs_path);
    dqd::write_pairs(out, result.pairs);
    m.manifest.outputs.push_back(pairs_path.string());
    const auto& r = result.report;
    std::cout << split << '\t' << r.positives << '\t' << r.negatives << '\t'
              << dqd::text::format_fixed(r.negative_ratio(), 3) << '\t' << r.duplicate_entries
              << '\t' << r.self_pairs << '\n';
    ++splits;
  }
  if (splits == 0) throw dqd::DataError("no pair files (train/dev/test) in " + domain_dir.string());
  std::cout << "questions\t" << corpus.size() << '\n'
            << "duplicate_question_ids\t" << corpus_stats.duplicate_ids << '\n';
  m.manifest_path = out_dir / "manifest.json";
  return 0;
}

struct SynthArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> label_shift;
};

int cmd_synth(const SynthArgs& a, Run& m) {
  dqd::SynthConfig config;
  if (!a.config.empty()) {
    m.manifest.add_input(a.config);
    auto in = open_in(a.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw dqd::DataError(a.config + ": " + e.what());
    }
    config = j.get<dqd::SynthConfig>();
  }
  if (a.seed) config.seed = *a.seed;
  if (a.label_shift) config.label_shift = *a.label_shift;
  auto scenario = dqd::synth_generate(config);

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  dqd::write_store_file(scenario.source, out_dir / "source.dqde");
  dqd::write_store_file(scenario.target, out_dir / "target.dqde");
  {
    auto out = open_out(out_dir / "config.json");
    out << nlohmann::json(config).dump(2) << '\n';
  }
  for (const char* f : {"source.dqde", "target.dqde", "config.json"}) {
    m.manifest.outputs.push_back((out_dir / f).string());
  }
  m.manifest_path = out_dir / "manifest.json";
  std::cout << "source\t" << scenario.source.count() << '\n'
            << "target\t" << scenario.target.count() << '\n'
            << "dim\t" << config.dim << '\n';
  return 0;
}

struct KnnArgs {
  std::string source;
  std::string target;
  std::size_t k = dqd::kDefaultK;
  std::string out;
};

int cmd_knn_score(const KnnArgs& a, Run& m) {
  m.manifest.add_input(a.source);
  m.manifest.add_input(a.target);
  auto source = dqd::read_store_file(a.source);
  auto target = dqd::read_store_file(a.target);
  if (!source.labeled()) throw dqd::DataError(a.source + ": source store has no labels");
  auto scores = dqd::rank_targets(source, target, a.k);
  write_score_file(a.out, to_scored(scores, target), target.labeled());
  m.manifest.outputs.push_back(a.out);
  m.manifest_path = manifest_beside(a.out);
  return 0;
}

struct ProbeTrainArgs {
  std::string source;
  std::string out;
  dqd::ProbeConfig config;
};

int cmd_probe_train(const ProbeTrainArgs& a, Run& m) {
  m.manifest.add_input(a.source);
  auto source = dqd::read_store_file(a.source);
  if (!source.labeled()) throw dqd::DataError(a.source + ": source store has no labels");
  auto model = dqd::train_probe(source, a.config);
  auto out = open_out(a.out);
  dqd::write_probe(out, model);
  out.close();
  m.manifest.outputs.push_back(a.out);
  m.manifest_path = manifest_beside(a.out);
  std::cout << "final_loss\t" << dqd::text::format_fixed(model.final_loss) << '\n';
  return 0;
}

struct ProbeScoreArgs {
  std::string model;
  std::string target;
  std::string out;
};

int cmd_probe_score(const ProbeScoreArgs& a, Run& m) {
  m.manifest.add_input(a.model);
  m.manifest.add_input(a.target);
  auto model_in = open_in(a.model);
  auto model = dqd::read_probe(model_in, a.model);
  auto target = dqd::read_store_file(a.target);
  auto scores = dqd::probe_score(model, target);
  write_score_file(a.out, to_scored(scores, target), target.labeled());
  m.manifest.outputs.push_back(a.out);
  m.manifest_path = manifest_beside(a.out);
  return 0;
}

struct EvalArgs {
  std::string scores;
  double cap = dqd::kDefaultFprCap;
  std::string manifest;
};

int cmd_eval(const EvalArgs& a, Run& m) {
  m.manifest.add_input(a.scores);
  auto in = open_in(a.scores);
  auto file = dqd::read_scores(in, a.scores);
  if (!file.has_gold) throw dqd::DataError(a.scores + ": no gold column; cannot evaluate");
  dqd::RocCurve curve;
  try {
    curve = dqd::roc(file.pairs);
  } catch (const std::invalid_argument& e) {
    throw dqd::DataError(a.scores + ": " + e.what());
  }
  std::cout << "auc@" << dqd::text::format_general(a.cap) << '\t'
            << dqd::text::format_fixed(dqd::auc_at(curve, a.cap)) << '\n'
            << "auc\t" << dqd::text::format_fixed(dqd::auc_at(curve, 1.0)) << '\n'
            << "positives\t" << curve.positives << '\n'
            << "negatives\t" << curve.negatives << '\n';
  return 0;
}

struct LexArgs {
  std::string corpus_a;
  std::string corpus_b;
  std::string pairs;
  bool title_only = false;
  std::string out;
};

// Normalized corpora are all named corpus.tsv, so their directory names the domain.
std::string corpus_label(const fs::path& p) {
  fs::path abs = fs::absolute(p);
  if (abs.stem() == "corpus" && !abs.parent_path().filename().empty()) {
    return abs.parent_path().filename().string();
  }
  return abs.stem().string();
}

int cmd_lexstats(const LexArgs& a, Run& m) {
  const auto mode = a.title_only ? dqd::TextMode::kTitleOnly : dqd::TextMode::kTitleBody;
  m.manifest.add_input(a.corpus_a);
  m.manifest.add_input(a.corpus_b);
  dqd::TokenizedCorpus corpus_a(load_corpus(a.corpus_a), mode);
  dqd::TokenizedCorpus corpus_b(load_corpus(a.corpus_b), mode);
  if (corpus_a.question_count() == 0) throw dqd::DataError(a.corpus_a + ": empty corpus");
  if (corpus_b.question_count() == 0) throw dqd::DataError(a.corpus_b + ": empty corpus");

  std::optional<dqd::ClassJaccard> classes;
  if (!a.pairs.empty()) {
    m.manifest.add_input(a.pairs);
    auto in = open_in(a.pairs);
    classes = dqd::class_mean_jaccard(corpus_a, dqd::read_pairs(in, a.pairs));
  }
  auto cell = [](const std::optional<double>& v) {
    return v ? dqd::text::format_fixed(*v) : std::string("NA");
  };

  std::ostringstream report;
  report << "corpus\tdup\tnot_dup\tdup_pairs\tnot_dup_pairs\tvocab_jaccard\n";
  report << corpus_label(a.corpus_a) << '\t' << cell(classes ? classes->duplicate : std::nullopt)
         << '\t' << cell(classes ? classes->not_duplicate : std::nullopt) << '\t'
         << (classes ? classes->duplicate_pairs : 0) << '\t'
         << (classes ? classes->not_duplicate_pairs : 0) << '\t'
         << dqd::text::format_fixed(dqd::vocab_jaccard(corpus_a, corpus_b)) << '\n';
  if (a.out.empty()) {
    std::cout << report.str();
  } else {
    auto out = open_out(a.out);
    out << report.str();
    m.manifest.outputs.push_back(a.out);
    m.manifest_path = manifest_beside(a.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score, evaluate and diagnose cross-domain duplicate-question rankings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dqd::kToolVersion);

  InspectArgs inspect;
  auto* sc_inspect = app.add_subcommand("inspect", "Validate a .dqde file and print its shape");
  sc_inspect->add_option("file", inspect.file, ".dqde file")->required();
  sc_inspect->add_option("--manifest", inspect.manifest, "Write a run manifest to this path");

  IngestArgs ingest;
  auto* sc_ingest = app.add_subcommand("ingest", "Normalize one domain of the released dataset");
  sc_ingest->add_option("dir", ingest.dir, "Dataset root directory")->required();
  sc_ingest->add_option("--domain", ingest.domain, "Domain subdirectory name")->required();
  sc_ingest->add_option("--out", ingest.out, "Output directory")->required();

  SynthArgs synth;
  auto* sc_synth = app.add_subcommand("synth", "Generate a synthetic source/target scenario");
  sc_synth->add_option("--config", synth.config, "JSON config (defaults when omitted)");
  sc_synth->add_option("--out", synth.out, "Output directory")->required();
  sc_synth->add_option("--seed", synth.seed, "Override the config seed");
  sc_synth->add_option("--label-shift", synth.label_shift, "Override label_shift")
      ->check(CLI::Range(0.0, 1.0));

  KnnArgs knn;
  auto* sc_knn = app.add_subcommand("knn-score", "Score target pairs by k-NN over a labeled source");
  sc_knn->add_option("--source", knn.source, "Labeled source .dqde")->required();
  sc_knn->add_option("--target", knn.target, "Target .dqde")->required();
  sc_knn->add_option("--k", knn.k, "Neighbors per query")->capture_default_str()->check(CLI::PositiveNumber);
  sc_knn->add_option("--out", knn.out, "Output scores TSV")->required();

  ProbeTrainArgs probe_train;
  auto* sc_ptrain = app.add_subcommand("probe-train", "Train a logistic probe on a labeled source");
  sc_ptrain->add_option("--source", probe_train.source, "Labeled source .dqde")->required();
  sc_ptrain->add_option("--out", probe_train.out, "Output model TSV")->required();
  sc_ptrain->add_option("--lr", probe_train.config.learning_rate, "Learning rate")->capture_default_str();
  sc_ptrain->add_option("--epochs", probe_train.config.epochs, "Full-batch epochs")->capture_default_str();
  sc_ptrain->add_option("--l2", probe_train.config.l2, "L2 strength")->capture_default_str();
  sc_ptrain->add_option("--seed", probe_train.config.seed, "Initialization seed")->capture_default_str();

  ProbeScoreArgs probe_score;
  auto* sc_pscore = app.add_subcommand("probe-score", "Score target pairs with a trained probe");
  sc_pscore->add_option("--model", probe_score.model, "Model TSV")->required();
  sc_pscore->add_option("--target", probe_score.target, "Target .dqde")->required();
  sc_pscore->add_option("--out", probe_score.out, "Output scores TSV")->required();

  EvalArgs eval;
  auto* sc_eval = app.add_subcommand("eval", "Report AUC at an FPR cap and full AUC");
  sc_eval->add_option("--scores", eval.scores, "Scores TSV with gold labels")->required();
  sc_eval->add_option("--cap", eval.cap, "False-positive-rate cap")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sc_eval->add_option("--manifest", eval.manifest, "Write a run manifest to this path");

  LexArgs lex;
  auto* sc_lex = app.add_subcommand("lexstats", "Jaccard statistics for pairs and vocabularies");
  sc_lex->add_option("--corpus-a", lex.corpus_a, "Corpus TSV whose pairs are measured")->required();
  sc_lex->add_option("--corpus-b", lex.corpus_b, "Reference corpus TSV")->required();
  sc_lex->add_option("--pairs", lex.pairs, "Pair TSV over corpus A");
  sc_lex->add_flag("--title-only", lex.title_only, "Use titles only");
  sc_lex->add_option("--out", lex.out, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  dqd::Stopwatch clock;
  Run run;
  dqd::RunManifest& manifest = run.manifest;
  auto* chosen = app.get_subcommands().front();
  manifest.subcommand = chosen->get_name();
  for (const CLI::Option* opt : chosen->get_options()) {
    if (opt->get_name() == "--help") continue;
    if (opt->count() > 0) {
      manifest.options[opt->get_name()] = opt->as<std::string>();
    } else if (!opt->get_default_str().empty()) {
      manifest.options[opt->get_name()] = opt->get_default_str();
    }
  }

  try {
    int rc = 0;
    if (chosen == sc_inspect) {
      run.manifest_path = inspect.manifest;
      rc = cmd_inspect(inspect, run);
    } else if (chosen == sc_ingest) {
      rc = cmd_ingest(ingest, run);
    } else if (chosen == sc_synth) {
      rc = cmd_synth(synth, run);
    } else if (chosen == sc_knn) {
      rc = cmd_knn_score(knn, run);
    } else if (chosen == sc_ptrain) {
      rc = cmd_probe_train(probe_train, run);
    } else if (chosen == sc_pscore) {
      rc = cmd_probe_score(probe_score, run);
    } else if (chosen == sc_eval) {
      run.manifest_path = eval.manifest;
      rc = cmd_eval(eval, run);
    } else if (chosen == sc_lex) {
      rc = cmd_lexstats(lex, run);
    }
    if (!run.manifest_path.empty()) {
      manifest.duration_seconds = clock.seconds();
      manifest.write(run.manifest_path);
    }
    return rc;
  } catch (const dqd::DataError& e) {
    std::cerr << "dqd " << manifest.subcommand << ": error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "dqd " << manifest.subcommand << ": error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    std::cerr << "dqd " << manifest.subcommand << ": error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "dqd " << manifest.subcommand << ": error: " << e.what() << '\n';
  }
  return kExitData;
}
