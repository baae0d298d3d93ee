#ifndef DEAREST_DATASET_HPP
#define DEAREST_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dearest/objective.hpp"

namespace dearest {

struct SparseRow {
  std::vector<int> index;  // 0-based, strictly increasing
  std::vector<double> value;

  bool operator==(const SparseRow &) const = default;
};

/// Labelled sparse samples. Labels are always +-1.
struct SampleSet {
  std::vector<SparseRow> features;
  std::vector<double> labels;
  int dim = 0;

  std::size_t size() const noexcept { return labels.size(); }
  bool operator==(const SampleSet &) const = default;
};

/// Reads LIBSVM text: `label idx:val idx:val ...` with 1-based, strictly
/// increasing indices. Labels 0/1/-1/+1 are accepted; 0 maps to -1. The
/// dimension is `dim_override` when given (indices beyond it are errors),
/// otherwise the largest index seen. Blank lines are skipped.
///
/// Throws ParseError naming the offending line.
SampleSet parse_libsvm(std::istream &in, std::optional<int> dim_override = std::nullopt);
SampleSet read_libsvm(const std::string &path, std::optional<int> dim_override = std::nullopt);

/// Emits LIBSVM text that parses back to exactly `samples`.
void write_libsvm(std::ostream &out, const SampleSet &samples);

/// Scales every nonzero row to unit Euclidean norm.
void normalize_rows(SampleSet &samples);

/// Dense Gaussian features scaled to unit norm with labels drawn from a
/// planted logistic model, so the data are not linearly separable.
SampleSet make_synthetic_binary(int count, int dim, std::uint64_t seed);

struct Partition {
  std::vector<std::vector<int>> shards;  // m shards of n sample indices
  std::vector<int> dropped;              // indices left out to keep n equal
  std::uint64_t seed = 0;

  int agents() const noexcept { return static_cast<int>(shards.size()); }
  int per_agent() const noexcept { return shards.empty() ? 0 : static_cast<int>(shards[0].size()); }
};

/// Shuffles 0..N-1 with the seeded generator and cuts the first m * floor(N/m)
/// entries into m contiguous shards; the remainder is dropped.
/// Throws ValidationError if N < m or m < 1.
Partition partition(std::size_t total, int m, std::uint64_t seed);
inline Partition partition(const SampleSet &samples, int m, std::uint64_t seed) {
  return partition(samples.size(), m, seed);
}

LogisticNCObjective build_logistic(const SampleSet &samples, const Partition &part,
                                   double lambda);

}  // namespace dearest

#endif  // DEAREST_DATASET_HPP
