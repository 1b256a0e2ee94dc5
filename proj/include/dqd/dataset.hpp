#pragma once

// Question corpora and labeled question pairs, in the normalized TSV forms
//   corpus: id <TAB> title <TAB> body
//   pairs:  id1 <TAB> id2 <TAB> label      (label 1 = duplicate)
// and ingestion of raw per-split positive/negative pair lists into them.

#include <istream>
#include <stdexcept>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dqd/embedding_store.hpp"
#include "dqd/error.hpp"
#include "dqd/text.hpp"

namespace dqd {

struct CorpusRecord {
  std::string id;
  std::string title;
  std::string body;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct PairRecord {
  std::string id1;
  std::string id2;
  Label label = Label::kNotDuplicate;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

namespace detail {

inline std::string flatten_field(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace detail

struct CorpusReadStats {
  std::size_t duplicate_ids = 0;
};

/// Reads `id <TAB> title [<TAB> body ...]`. Columns past the third are folded
/// into the body. A repeated id keeps its first record.
inline std::vector<CorpusRecord> read_corpus(std::istream& in, const std::string& name = "corpus",
                                             CorpusReadStats* stats = nullptr) {
  std::vector<CorpusRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (text::read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = text::split_tabs(line);
    if (f.size() < 2 || f[0].empty()) {
      throw DataError(name + ":" + std::to_string(lineno) +
                      ": expected `id <TAB> title [<TAB> body]`");
    }
    CorpusRecord r{std::string(f[0]), std::string(f[1]), {}};
    for (std::size_t i = 2; i < f.size(); ++i) {
      if (i > 2) r.body += ' ';
      r.body += f[i];
    }
    if (!seen.insert(r.id).second) {
      if (stats) ++stats->duplicate_ids;
      continue;
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (const auto& r : records) {
    out << detail::flatten_field(r.id) << '\t' << detail::flatten_field(r.title) << '\t'
        << detail::flatten_field(r.body) << '\n';
  }
}

inline void write_pairs(std::ostream& out, const std::vector<PairRecord>& pairs) {
  for (const auto& p : pairs) {
    out << p.id1 << '\t' << p.id2 << '\t' << static_cast<int>(p.label) << '\n';
  }
}

/// One pair list to ingest. With `label` set, lines are whitespace-separated
/// `id1 id2` and all carry that label; without it, lines are normalized
/// `id1 <TAB> id2 <TAB> label`.
struct PairSource {
  std::istream* stream = nullptr;
  std::string name;
  std::optional<Label> label;
};

struct IngestReport {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t duplicate_entries = 0;  // repeated (id1, id2) entries dropped
  std::size_t self_pairs = 0;         // id1 == id2 entries dropped

  /// Negatives per positive; infinite when there are no positives.
  double negative_ratio() const {
    if (positives == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(negatives) / static_cast<double>(positives);
  }
};

struct IngestResult {
  std::vector<PairRecord> pairs;
  IngestReport report;
};

/// Validates every pair against the corpus and emits them in source order.
/// Unresolvable ids are errors naming the file and line; repeated pairs and
/// self-pairs are dropped and counted.
inline IngestResult ingest_domain(const std::vector<CorpusRecord>& corpus,
                                  std::span<const PairSource> sources) {
  std::unordered_set<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& r : corpus) ids.insert(r.id);

  IngestResult result;
  std::set<std::pair<std::string, std::string>> seen;
  for (const PairSource& src : sources) {
    if (!src.stream) throw std::invalid_argument("ingest_domain: null stream for " + src.name);
    std::string line;
    std::size_t lineno = 0;
    while (text::read_line(*src.stream, line)) {
      ++lineno;
      auto where = [&] { return src.name + ":" + std::to_string(lineno) + ": "; };
      auto f = src.label ? text::split_ws(line) : text::split_tabs(line);
      if (f.empty() || (f.size() == 1 && f[0].empty())) continue;

      PairRecord rec;
      if (src.label) {
        if (f.size() != 2) throw DataError(where() + "expected `id1 id2`");
        rec.label = *src.label;
      } else {
        if (f.size() != 3) throw DataError(where() + "expected `id1 <TAB> id2 <TAB> label`");
        if (f[2] != "0" && f[2] != "1") throw DataError(where() + "label must be 0 or 1");
        rec.label = f[2] == "1" ? Label::kDuplicate : Label::kNotDuplicate;
      }
      rec.id1 = std::string(f[0]);
      rec.id2 = std::string(f[1]);
      for (const std::string* id : {&rec.id1, &rec.id2}) {
        if (!ids.count(*id)) throw DataError(where() + "id '" + *id + "' not found in corpus");
      }
      if (rec.id1 == rec.id2) {
        ++result.report.self_pairs;
        continue;
      }
      if (!seen.emplace(rec.id1, rec.id2).second) {
        ++result.report.duplicate_entries;
        continue;
      }
      (rec.label == Label::kDuplicate ? result.report.positives : result.report.negatives) += 1;
      result.pairs.push_back(std::move(rec));
    }
  }
  return result;
}

/// Reads a normalized pair TSV.
inline std::vector<PairRecord> read_pairs(std::istream& in, const std::string& name = "pairs") {
  std::vector<PairRecord> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (text::read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = text::split_tabs(line);
    if (f.size() != 3 || (f[2] != "0" && f[2] != "1")) {
      throw DataError(name + ":" + std::to_string(lineno) +
                      ": expected `id1 <TAB> id2 <TAB> label` with label 0/1");
    }
    pairs.push_back({std::string(f[0]), std::string(f[1]),
                     f[2] == "1" ? Label::kDuplicate : Label::kNotDuplicate});
  }
  return pairs;
}

}  // namespace dqd
