#pragma once

// Dense embedding sets and the .dqde binary container.
//
// Layout (all little-endian):
//   offset 0   magic   "DQDE"
//   offset 4   u16     version (1)
//   offset 6   u16     flags   (bit 0: label block present)
//   offset 8   u32     dim
//   offset 12  u64     count
//   offset 20  f32     count*dim payload, row-major
//   then       u8      count labels (0 or 1) when flagged

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dqd/error.hpp"

namespace dqd {

/// Class tag of a question pair. Duplicate is the positive class everywhere.
enum class Label : std::uint8_t { kNotDuplicate = 0, kDuplicate = 1 };

inline constexpr std::array<char, 4> kDqdeMagic = {'D', 'Q', 'D', 'E'};
inline constexpr std::uint16_t kDqdeVersion = 1;
inline constexpr std::uint16_t kDqdeFlagLabels = 0x1;
inline constexpr std::size_t kDqdeHeaderBytes = 20;

/// Immutable count x dim matrix of pair representations with optional labels.
///
/// Every row is finite with a strictly positive Euclidean norm; norms are
/// computed once on construction in double precision.
class EmbeddingSet {
 public:
  EmbeddingSet(std::size_t dim, std::vector<float> values,
               std::optional<std::vector<Label>> labels = std::nullopt)
      : dim_(dim), values_(std::move(values)), labels_(std::move(labels)) {
    if (dim_ == 0) throw DataError("embedding dim must be positive");
    if (values_.size() % dim_ != 0) {
      throw DataError("embedding payload of " + std::to_string(values_.size()) +
                      " values is not a multiple of dim " + std::to_string(dim_));
    }
    count_ = values_.size() / dim_;
    if (labels_ && labels_->size() != count_) {
      throw DataError("label count " + std::to_string(labels_->size()) +
                      " does not match row count " + std::to_string(count_));
    }
    if (labels_) {
      for (std::size_t i = 0; i < count_; ++i) {
        auto raw = static_cast<std::uint8_t>((*labels_)[i]);
        if (raw > 1) throw DataError("label at row " + std::to_string(i) + " is not 0/1");
      }
    }
    norms_.resize(count_);
    for (std::size_t r = 0; r < count_; ++r) {
      double sq = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) {
        float v = values_[r * dim_ + c];
        if (!std::isfinite(v)) {
          throw DataError("non-finite value at row " + std::to_string(r) + ", col " +
                          std::to_string(c));
        }
        sq += static_cast<double>(v) * v;
      }
      if (!(sq > 0.0)) throw DataError("zero-norm vector at row " + std::to_string(r));
      norms_[r] = std::sqrt(sq);
    }
  }

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }
  bool labeled() const { return labels_.has_value(); }
  bool empty() const { return count_ == 0; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const { return values_; }
  double norm(std::size_t i) const { return norms_[i]; }

  /// Requires labeled().
  Label label(std::size_t i) const { return (*labels_)[i]; }
  const std::optional<std::vector<Label>>& labels() const { return labels_; }

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.dim_ != b.dim_ || a.count_ != b.count_ || a.labels_ != b.labels_) return false;
    // Bitwise so that -0.0f and 0.0f count as different.
    return a.values_.size() == b.values_.size() &&
           (a.values_.empty() ||
            std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) ==
                0);
  }

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<float> values_;
  std::optional<std::vector<Label>> labels_;
  std::vector<double> norms_;
};

namespace detail {

template <class UInt>
void put_le(std::string& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <class UInt>
UInt get_le(const unsigned char* p) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline std::size_t dqde_size(std::size_t count, std::size_t dim, bool labeled) {
  return kDqdeHeaderBytes + 4 * count * dim + (labeled ? count : 0);
}

/// Serializes to the .dqde byte layout.
inline std::string encode_store(const EmbeddingSet& set) {
  if (set.dim() > UINT32_MAX) throw DataError("dim does not fit in u32");
  std::string out;
  out.reserve(dqde_size(set.count(), set.dim(), set.labeled()));
  out.append(kDqdeMagic.data(), kDqdeMagic.size());
  detail::put_le<std::uint16_t>(out, kDqdeVersion);
  detail::put_le<std::uint16_t>(out, set.labeled() ? kDqdeFlagLabels : 0);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim()));
  detail::put_le<std::uint64_t>(out, set.count());
  for (float v : set.values()) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  if (set.labeled()) {
    for (Label l : *set.labels()) out.push_back(static_cast<char>(l));
  }
  return out;
}

/// Writes `set` to `sink`; returns bytes written.
inline std::size_t write_store(const EmbeddingSet& set, std::ostream& sink) {
  std::string bytes = encode_store(set);
  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw DataError("failed writing .dqde payload");
  return bytes.size();
}

/// Parses a complete .dqde image.
inline EmbeddingSet decode_store(std::span<const unsigned char> bytes) {
  if (bytes.size() < kDqdeHeaderBytes) {
    throw DataError("truncated .dqde header: expected " + std::to_string(kDqdeHeaderBytes) +
                    " bytes, got " + std::to_string(bytes.size()));
  }
  const unsigned char* p = bytes.data();
  if (std::memcmp(p, kDqdeMagic.data(), 4) != 0) throw DataError("bad magic: not a .dqde file");
  auto version = detail::get_le<std::uint16_t>(p + 4);
  if (version != kDqdeVersion) {
    throw DataError("unsupported .dqde version " + std::to_string(version));
  }
  auto flags = detail::get_le<std::uint16_t>(p + 6);
  if (flags & ~kDqdeFlagLabels) throw DataError("unknown .dqde flag bits set");
  auto dim = detail::get_le<std::uint32_t>(p + 8);
  auto count = detail::get_le<std::uint64_t>(p + 12);
  if (dim == 0) throw DataError("dim must be positive");
  bool labeled = flags & kDqdeFlagLabels;

  // Guard the size arithmetic against absurd headers before multiplying.
  if (count > (UINT64_MAX - kDqdeHeaderBytes) / (4ull * dim + 1)) {
    throw DataError("truncated .dqde payload: header claims an impossible size");
  }
  std::size_t expected = dqde_size(count, dim, labeled);
  if (bytes.size() < expected) {
    throw DataError("truncated .dqde payload: expected " + std::to_string(expected) +
                    " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw DataError("trailing data in .dqde: expected " + std::to_string(expected) +
                    " bytes, got " + std::to_string(bytes.size()));
  }

  std::vector<float> values(count * dim);
  const unsigned char* payload = p + kDqdeHeaderBytes;
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(detail::get_le<std::uint32_t>(payload + 4 * i));
  }
  std::optional<std::vector<Label>> labels;
  if (labeled) {
    const unsigned char* lp = payload + 4 * values.size();
    labels.emplace(count);
    for (std::size_t i = 0; i < count; ++i) {
      if (lp[i] > 1) {
        throw DataError("label byte at row " + std::to_string(i) + " is " +
                        std::to_string(lp[i]) + ", expected 0 or 1");
      }
      (*labels)[i] = static_cast<Label>(lp[i]);
    }
  }
  return EmbeddingSet(dim, std::move(values), std::move(labels));
}

inline EmbeddingSet read_store(std::istream& source) {
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(source),
                                   std::istreambuf_iterator<char>()};
  return decode_store(bytes);
}

inline EmbeddingSet read_store_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_store(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline std::size_t write_store_file(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  return write_store(set, out);
}

}  // namespace dqd
