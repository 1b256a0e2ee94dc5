#pragma once

// Word-overlap statistics between questions and between corpora.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dqd/dataset.hpp"
#include "dqd/error.hpp"

namespace dqd {

/// Sorted, deduplicated word tokens.
using TokenSet = std::vector<std::string>;

/// Lowercases ASCII and splits on every run of characters that are not ASCII
/// letters or digits. Bytes >= 0x80 are kept as token characters so UTF-8 words
/// stay whole.
inline TokenSet tokenize(std::string_view text) {
  TokenSet tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')) {
      current.push_back(ch);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      flush();
    }
  }
  flush();
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

/// |a ∩ b| / |a ∪ b|, with 0 for two empty sets. Inputs must be sorted and unique.
inline double jaccard(const TokenSet& a, const TokenSet& b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

enum class TextMode { kTitleBody, kTitleOnly };

inline std::string question_text(const CorpusRecord& q, TextMode mode) {
  if (mode == TextMode::kTitleOnly || q.body.empty()) return q.title;
  return q.title + " " + q.body;
}

/// Per-question token sets plus the union vocabulary.
///
/// The sorted vocabulary is rebuilt lazily after add_question(), so concurrent
/// readers are only safe once vocabulary() has been called after the last add.
class TokenizedCorpus {
 public:
  TokenizedCorpus() = default;

  TokenizedCorpus(const std::vector<CorpusRecord>& records, TextMode mode) {
    for (const auto& r : records) add_question(r.id, question_text(r, mode));
    vocabulary();
  }

  /// Re-adding an id replaces nothing: the first occurrence wins.
  void add_question(const std::string& id, std::string_view text) {
    if (index_.count(id)) return;
    TokenSet tokens = tokenize(text);
    for (const auto& t : tokens) {
      if (vocab_set_.insert(t).second) vocab_dirty_ = true;
    }
    index_.emplace(id, sets_.size());
    sets_.push_back(std::move(tokens));
  }

  std::size_t question_count() const { return sets_.size(); }
  const TokenSet& vocabulary() const {
    if (vocab_dirty_) {
      vocabulary_.assign(vocab_set_.begin(), vocab_set_.end());
      std::sort(vocabulary_.begin(), vocabulary_.end());
      vocab_dirty_ = false;
    }
    return vocabulary_;
  }
  const TokenSet& tokens(std::size_t i) const { return sets_[i]; }

  const TokenSet* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &sets_[it->second];
  }

 private:
  std::vector<TokenSet> sets_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_set<std::string> vocab_set_;
  mutable TokenSet vocabulary_;
  mutable bool vocab_dirty_ = false;
};

struct ClassJaccard {
  std::optional<double> duplicate;      // absent when no duplicate pairs
  std::optional<double> not_duplicate;  // absent when no non-duplicate pairs
  std::size_t duplicate_pairs = 0;
  std::size_t not_duplicate_pairs = 0;
};

struct TextPair {
  std::string first;
  std::string second;
  Label label = Label::kNotDuplicate;
};

namespace detail {

struct ClassJaccardAccumulator {
  double sum[2] = {0.0, 0.0};
  std::size_t n[2] = {0, 0};

  void add(double j, Label label) {
    auto c = static_cast<int>(label);
    sum[c] += j;
    n[c] += 1;
  }

  ClassJaccard finish() const {
    ClassJaccard out;
    out.duplicate_pairs = n[1];
    out.not_duplicate_pairs = n[0];
    if (n[1]) out.duplicate = sum[1] / static_cast<double>(n[1]);
    if (n[0]) out.not_duplicate = sum[0] / static_cast<double>(n[0]);
    return out;
  }
};

}  // namespace detail

/// Mean within-pair Jaccard per class, tokenizing each text with tokenize().
inline ClassJaccard class_mean_jaccard(const std::vector<TextPair>& pairs) {
  detail::ClassJaccardAccumulator acc;
  for (const auto& p : pairs) acc.add(jaccard(tokenize(p.first), tokenize(p.second)), p.label);
  return acc.finish();
}

/// Same statistic for id pairs resolved against a tokenized corpus.
inline ClassJaccard class_mean_jaccard(const TokenizedCorpus& corpus,
                                       const std::vector<PairRecord>& pairs) {
  detail::ClassJaccardAccumulator acc;
  for (const auto& p : pairs) {
    const TokenSet* a = corpus.find(p.id1);
    const TokenSet* b = corpus.find(p.id2);
    if (!a || !b) {
      throw DataError("pair (" + p.id1 + ", " + p.id2 + ") references an id missing from the corpus");
    }
    acc.add(jaccard(*a, *b), p.label);
  }
  return acc.finish();
}

inline double vocab_jaccard(const TokenizedCorpus& a, const TokenizedCorpus& b) {
  if (a.question_count() == 0 || b.question_count() == 0) {
    throw std::invalid_argument("vocab_jaccard: empty corpus");
  }
  return jaccard(a.vocabulary(), b.vocabulary());
}

}  // namespace dqd
