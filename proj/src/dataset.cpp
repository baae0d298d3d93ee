#include "dearest/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string_view>

#include "dearest/error.hpp"

namespace dearest {

namespace {

bool parse_double(std::string_view tok, double &out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_int(std::string_view tok, long &out) {
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos > start) out.push_back(line.substr(start, pos - start));
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

SampleSet parse_libsvm(std::istream &in, std::optional<int> dim_override) {
  if (dim_override && *dim_override < 1)
    throw ParseError("dimension override must be positive");
  SampleSet set;
  std::string line;
  long lineno = 0;
  int max_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    double label = 0.0;
    if (!parse_double(tokens[0], label))
      throw ParseError("non-numeric label '" + std::string(tokens[0]) + "'", lineno);
    if (label == 0.0) {
      label = -1.0;
    } else if (label != 1.0 && label != -1.0) {
      throw ParseError("label " + std::string(tokens[0]) + " is not one of 0, 1, -1, +1",
                       lineno);
    }

    SparseRow row;
    long prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      long idx = 0;
      double val = 0.0;
      if (colon == std::string_view::npos || !parse_int(tok.substr(0, colon), idx))
        throw ParseError("malformed feature '" + std::string(tok) + "'", lineno);
      if (!parse_double(tok.substr(colon + 1), val))
        throw ParseError("non-numeric feature value in '" + std::string(tok) + "'", lineno);
      if (idx < 1) throw ParseError("feature index " + std::to_string(idx) + " < 1", lineno);
      if (idx <= prev)
        throw ParseError("feature indices not strictly increasing at " + std::to_string(idx),
                         lineno);
      if (dim_override && idx > *dim_override)
        throw ParseError("feature index " + std::to_string(idx) + " exceeds dimension " +
                             std::to_string(*dim_override),
                         lineno);
      prev = idx;
      row.index.push_back(static_cast<int>(idx - 1));
      row.value.push_back(val);
    }
    max_index = std::max(max_index, static_cast<int>(prev));
    set.features.push_back(std::move(row));
    set.labels.push_back(label);
  }
  if (in.bad()) throw ParseError("read error");
  set.dim = dim_override ? *dim_override : max_index;
  return set;
}

SampleSet read_libsvm(const std::string &path, std::optional<int> dim_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset '" + path + "'");
  return parse_libsvm(in, dim_override);
}

void write_libsvm(std::ostream &out, const SampleSet &samples) {
  for (std::size_t s = 0; s < samples.size(); ++s) {
    out << (samples.labels[s] > 0 ? "+1" : "-1");
    const auto &row = samples.features[s];
    for (std::size_t k = 0; k < row.index.size(); ++k)
      out << ' ' << row.index[k] + 1 << ':' << format_double(row.value[k]);
    out << '\n';
  }
}

void normalize_rows(SampleSet &samples) {
  for (auto &row : samples.features) {
    double sq = 0.0;
    for (double v : row.value) sq += v * v;
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (double &v : row.value) v *= inv;
  }
}

SampleSet make_synthetic_binary(int count, int dim, std::uint64_t seed) {
  if (count < 1 || dim < 1) throw ValidationError("synthetic data needs count >= 1, dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Vector planted(dim);
  for (int k = 0; k < dim; ++k) planted[k] = normal(rng);
  planted *= 4.0 / planted.norm();

  SampleSet set;
  set.dim = dim;
  for (int s = 0; s < count; ++s) {
    Vector a(dim);
    for (int k = 0; k < dim; ++k) a[k] = normal(rng);
    a /= a.norm();
    const double p_pos = 1.0 / (1.0 + std::exp(-a.dot(planted)));
    SparseRow row;
    for (int k = 0; k < dim; ++k) {
      row.index.push_back(k);
      row.value.push_back(a[k]);
    }
    set.features.push_back(std::move(row));
    set.labels.push_back(uniform(rng) < p_pos ? 1.0 : -1.0);
  }
  return set;
}

Partition partition(std::size_t total, int m, std::uint64_t seed) {
  if (m < 1) throw ValidationError("partition needs m >= 1");
  if (total < static_cast<std::size_t>(m))
    throw ValidationError("cannot split " + std::to_string(total) + " samples across " +
                          std::to_string(m) + " agents");
  std::vector<int> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const std::size_t n = total / static_cast<std::size_t>(m);
  Partition part;
  part.seed = seed;
  for (int i = 0; i < m; ++i)
    part.shards.emplace_back(perm.begin() + i * n, perm.begin() + (i + 1) * n);
  part.dropped.assign(perm.begin() + m * n, perm.end());
  return part;
}

LogisticNCObjective build_logistic(const SampleSet &samples, const Partition &part,
                                   double lambda) {
  if (part.agents() < 1) throw ValidationError("empty partition");
  const int n = part.per_agent();
  std::vector<LogisticNCObjective::SparseRows> features;
  std::vector<Vector> labels;
  for (const auto &shard : part.shards) {
    std::vector<Eigen::Triplet<double>> triplets;
    Vector b(n);
    for (int j = 0; j < n; ++j) {
      const auto s = static_cast<std::size_t>(shard[j]);
      if (s >= samples.size()) throw ValidationError("partition index out of range");
      const auto &row = samples.features[s];
      for (std::size_t k = 0; k < row.index.size(); ++k)
        triplets.emplace_back(j, row.index[k], row.value[k]);
      b[j] = samples.labels[s];
    }
    LogisticNCObjective::SparseRows a(n, samples.dim);
    a.setFromTriplets(triplets.begin(), triplets.end());
    features.push_back(std::move(a));
    labels.push_back(std::move(b));
  }
  return LogisticNCObjective(std::move(features), std::move(labels), lambda);
}

}  // namespace dearest
