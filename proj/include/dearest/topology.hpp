#ifndef DEAREST_TOPOLOGY_HPP
#define DEAREST_TOPOLOGY_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dearest {

using Edge = std::pair<int, int>;

/// Undirected, unweighted, connected communication network on agents
/// 0..m-1. Edges are stored normalized (first < second) and sorted.
class Graph {
 public:
  /// Throws TopologyError on out-of-range endpoints, self-loops, duplicate
  /// edges or a disconnected graph.
  Graph(int m, std::vector<Edge> edges);

  int size() const noexcept { return m_; }
  const std::vector<Edge> &edges() const noexcept { return edges_; }
  bool has_edge(int i, int j) const;
  std::vector<int> degrees() const;
  Eigen::MatrixXd adjacency() const;

  /// Connectivity test that does not require a valid Graph.
  static bool is_connected(int m, const std::vector<Edge> &edges);

 private:
  int m_;
  std::vector<Edge> edges_;
};

Graph build_ring(int m);
Graph build_complete(int m);
Graph build_path(int m);

/// Erdos-Renyi G(m, prob). A disconnected draw is resampled with seed + 1,
/// seed + 2, ... for at most kMaxRandomGraphAttempts draws.
Graph build_random(int m, double prob, std::uint64_t seed);

inline constexpr int kMaxRandomGraphAttempts = 1000;

/// L = D - A.
Eigen::MatrixXd laplacian(const Graph &g);

/// Eigenvalues of a dense symmetric matrix in descending order, computed by
/// cyclic Jacobi rotations. Throws ValidationError for non-square or
/// non-symmetric input and NumericalError if the sweeps do not converge.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd &a);

struct SpectralGap {
  double lambda2;  // second-largest eigenvalue
  double gap;      // 1 - lambda2
};

/// Second-largest eigenvalue of a raw symmetric matrix (m >= 2).
SpectralGap spectral_gap(const Eigen::MatrixXd &w);

/// Symmetric mixing matrix with W1 = 1 that respects the network sparsity,
/// together with its cached spectrum.
class GossipMatrix {
 public:
  /// Validates a user-supplied matrix against `g`: symmetry to 1e-12, unit
  /// row sums to 1e-10, zero entries off the edge set, a simple unit
  /// eigenvalue and all remaining eigenvalues in [-lambda2, lambda2].
  static GossipMatrix from_matrix(const Eigen::MatrixXd &w, const Graph &g);

  int size() const noexcept { return static_cast<int>(w_.rows()); }
  const Eigen::MatrixXd &dense() const noexcept { return w_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor> &sparse() const noexcept {
    return sparse_;
  }
  double lambda2() const noexcept { return lambda2_; }
  double lambda_min() const noexcept { return lambda_min_; }
  double gap() const noexcept { return 1.0 - lambda2_; }
  const std::vector<double> &eigenvalues() const noexcept { return eigenvalues_; }

 private:
  friend GossipMatrix gossip_from_laplacian(const Eigen::MatrixXd &l);
  GossipMatrix(Eigen::MatrixXd w, std::vector<double> eigenvalues);

  Eigen::MatrixXd w_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
  std::vector<double> eigenvalues_;
  double lambda2_;
  double lambda_min_;
};

/// W = I - L / lambda_1(L) for the Laplacian of a connected graph.
GossipMatrix gossip_from_laplacian(const Eigen::MatrixXd &l);

inline GossipMatrix gossip_for(const Graph &g) { return gossip_from_laplacian(laplacian(g)); }

inline SpectralGap spectral_gap(const GossipMatrix &w) { return {w.lambda2(), w.gap()}; }

/// Edge-list format:
///
///   m <count>
///   <i> <j>
///   ...
///
/// 0-based agent indices, one undirected edge per line. Blank lines and
/// text after '#' are ignored.
Graph parse_graph(std::istream &in);
Graph read_graph(const std::string &path);
void write_graph(std::ostream &out, const Graph &g);

}  // namespace dearest

#endif  // DEAREST_TOPOLOGY_HPP
