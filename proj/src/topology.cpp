#include "dearest/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "dearest/error.hpp"

namespace dearest {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kRowSumTol = 1e-10;
constexpr double kUnitEigenTol = 1e-10;
constexpr int kMaxJacobiSweeps = 100;

int find_root(std::vector<int> &parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

double max_asymmetry(const Eigen::MatrixXd &a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

Graph::Graph(int m, std::vector<Edge> edges) : m_(m) {
  if (m < 1) throw TopologyError("graph needs at least one agent, got m = " + std::to_string(m));
  for (auto &[a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m)
      throw TopologyError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") out of range for m = " + std::to_string(m));
    if (a == b) throw TopologyError("self-loop at agent " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end())
    throw TopologyError("duplicate edge (" + std::to_string(dup->first) + ", " +
                        std::to_string(dup->second) + ")");
  if (!is_connected(m, edges)) throw TopologyError("graph is not connected");
  edges_ = std::move(edges);
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(m_, 0);
  for (const auto &[a, b] : edges_) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

Eigen::MatrixXd Graph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m_, m_);
  for (const auto &[i, j] : edges_) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

bool Graph::is_connected(int m, const std::vector<Edge> &edges) {
  if (m <= 0) return false;
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  int components = m;
  for (const auto &[a, b] : edges) {
    int ra = find_root(parent, a), rb = find_root(parent, b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

Graph build_ring(int m) {
  if (m < 3) throw TopologyError("ring needs m >= 3, got m = " + std::to_string(m));
  std::vector<Edge> edges;
  edges.reserve(m);
  for (int i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
  return Graph(m, std::move(edges));
}

Graph build_complete(int m) {
  if (m < 2) throw TopologyError("complete graph needs m >= 2, got m = " + std::to_string(m));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);
  return Graph(m, std::move(edges));
}

Graph build_path(int m) {
  if (m < 2) throw TopologyError("path needs m >= 2, got m = " + std::to_string(m));
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
  return Graph(m, std::move(edges));
}

Graph build_random(int m, double prob, std::uint64_t seed) {
  if (m < 2) throw ValidationError("random graph needs m >= 2, got m = " + std::to_string(m));
  if (!(prob > 0.0 && prob <= 1.0))
    throw ValidationError("edge probability must lie in (0, 1], got " + std::to_string(prob));

  for (int attempt = 0; attempt < kMaxRandomGraphAttempts; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::bernoulli_distribution coin(prob);
    std::vector<Edge> edges;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    if (Graph::is_connected(m, edges)) return Graph(m, std::move(edges));
  }
  throw TopologyError("no connected G(" + std::to_string(m) + ", " + std::to_string(prob) +
                      ") sample after " + std::to_string(kMaxRandomGraphAttempts) +
                      " attempts starting at seed " + std::to_string(seed));
}

Eigen::MatrixXd laplacian(const Graph &g) {
  Eigen::MatrixXd l = -g.adjacency();
  const auto deg = g.degrees();
  for (int i = 0; i < g.size(); ++i) l(i, i) = deg[i];
  return l;
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd &input) {
  if (input.rows() != input.cols())
    throw ValidationError("eigenvalues need a square matrix, got " +
                          std::to_string(input.rows()) + "x" + std::to_string(input.cols()));
  const Eigen::Index n = input.rows();
  if (n == 0) return {};
  if (!input.allFinite()) throw ValidationError("matrix has non-finite entries");
  const double asym = max_asymmetry(input);
  if (asym > kSymmetryTol * std::max(1.0, input.cwiseAbs().maxCoeff()))
    throw ValidationError("matrix is not symmetric (max |a_ij - a_ji| = " +
                          std::to_string(asym) + ")");

  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  const double scale = std::max(a.norm(), 1e-300);
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index q = 0; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  double off = off_norm();
  for (; sweep < kMaxJacobiSweeps && off > 1e-15 * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        // Rotation annihilating a(p, q); t is the smaller root of
        // t^2 + 2 theta t - 1 = 0.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
    off = off_norm();
  }
  if (off > 1e-12 * scale)
    throw NumericalError("Jacobi eigensolver did not converge: off-diagonal norm " +
                         std::to_string(off) + " after " + std::to_string(sweep) +
                         " sweeps (n = " + std::to_string(n) + ")");

  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

SpectralGap spectral_gap(const Eigen::MatrixXd &w) {
  if (w.rows() < 2) throw ValidationError("spectral gap needs at least a 2x2 matrix");
  const auto ev = symmetric_eigenvalues(w);
  return {ev[1], 1.0 - ev[1]};
}

GossipMatrix::GossipMatrix(Eigen::MatrixXd w, std::vector<double> eigenvalues)
    : w_(std::move(w)),
      sparse_(w_.sparseView()),
      eigenvalues_(std::move(eigenvalues)),
      lambda2_(eigenvalues_.size() > 1 ? eigenvalues_[1] : 0.0),
      lambda_min_(eigenvalues_.back()) {
  sparse_.makeCompressed();
}

GossipMatrix GossipMatrix::from_matrix(const Eigen::MatrixXd &w, const Graph &g) {
  const int m = g.size();
  if (w.rows() != m || w.cols() != m)
    throw ValidationError("gossip matrix is " + std::to_string(w.rows()) + "x" +
                          std::to_string(w.cols()) + " but the graph has " +
                          std::to_string(m) + " agents");
  if (m < 2) throw ValidationError("gossip matrix needs at least two agents");
  if (!w.allFinite()) throw ValidationError("gossip matrix has non-finite entries");
  if (max_asymmetry(w) > kSymmetryTol) throw ValidationError("gossip matrix is not symmetric");
  const Eigen::VectorXd row_sums = w.rowwise().sum();
  for (int i = 0; i < m; ++i)
    if (std::abs(row_sums[i] - 1.0) > kRowSumTol)
      throw ValidationError("gossip matrix row " + std::to_string(i) + " sums to " +
                            std::to_string(row_sums[i]) + ", expected 1");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && w(i, j) != 0.0 && !g.has_edge(i, j))
        throw ValidationError("gossip matrix has w(" + std::to_string(i) + ", " +
                              std::to_string(j) + ") != 0 but agents are not connected");

  auto ev = symmetric_eigenvalues(w);
  if (std::abs(ev[0] - 1.0) > kUnitEigenTol)
    throw ValidationError("largest eigenvalue of the gossip matrix is " + std::to_string(ev[0]) +
                          ", expected 1");
  if (ev[1] >= 1.0 - kUnitEigenTol)
    throw ValidationError("eigenvalue 1 of the gossip matrix is not simple");
  // Chebyshev mixing is tuned to the interval [-lambda2, lambda2].
  if (ev.back() < -ev[1] - kUnitEigenTol)
    throw ValidationError("smallest eigenvalue " + std::to_string(ev.back()) +
                          " lies below -lambda2 = " + std::to_string(-ev[1]));
  return GossipMatrix(w, std::move(ev));
}

GossipMatrix gossip_from_laplacian(const Eigen::MatrixXd &l) {
  const Eigen::Index m = l.rows();
  if (l.cols() != m || m < 2) throw ValidationError("Laplacian must be square with m >= 2");
  if (max_asymmetry(l) > kSymmetryTol) throw ValidationError("Laplacian is not symmetric");
  if (l.rowwise().sum().cwiseAbs().maxCoeff() > kRowSumTol)
    throw ValidationError("Laplacian rows do not sum to zero");

  const auto lev = symmetric_eigenvalues(l);
  const double lambda1 = lev.front();
  // The zero eigenvalue is simple iff the graph is connected.
  if (lev[m - 2] <= 1e-10 * std::max(1.0, lambda1))
    throw TopologyError("Laplacian belongs to a disconnected graph (second-smallest eigenvalue " +
                        std::to_string(lev[m - 2]) + ")");

  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(m, m) - l / lambda1;
  // Entries off the sparsity pattern are exactly zero already; restore the
  // symmetry that the division preserves up to rounding.
  w = 0.5 * (w + w.transpose()).eval();
  std::vector<double> ev(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) ev[i] = 1.0 - lev[m - 1 - i] / lambda1;
  std::sort(ev.begin(), ev.end(), std::greater<>());
  ev.front() = 1.0;
  return GossipMatrix(std::move(w), std::move(ev));
}

Graph parse_graph(std::istream &in) {
  std::string line;
  long lineno = 0;
  int m = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    std::string extra;
    if (m < 0) {
      if (first != "m" || !(ss >> m) || m < 1)
        throw ParseError("expected header 'm <count>'", lineno);
    } else {
      std::istringstream es(line);
      int a = 0, b = 0;
      if (!(es >> a >> b)) throw ParseError("expected two integer agent indices", lineno);
      if (es >> extra) throw ParseError("trailing token '" + extra + "'", lineno);
      edges.emplace_back(a, b);
      continue;
    }
    if (ss >> extra) throw ParseError("trailing token '" + extra + "'", lineno);
  }
  if (m < 0) throw ParseError("missing header 'm <count>'");
  return Graph(m, std::move(edges));
}

Graph read_graph(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path + "'");
  return parse_graph(in);
}

void write_graph(std::ostream &out, const Graph &g) {
  out << "m " << g.size() << '\n';
  for (const auto &[a, b] : g.edges()) out << a << ' ' << b << '\n';
}

}  // namespace dearest
