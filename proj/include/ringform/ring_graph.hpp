#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ringform {

/// Weighted ring digraph built from m macro-vertices of two agents each.
///
/// Inside macro-vertex i (1-based) agent 2i-1 listens to agent 2i with
/// weight k and agent 2i listens to agent 2i-1 with weight 1. Agent 2i-1
/// also listens to agent 2i-2 (agent N for i = 1) with weight 1, which closes
/// the ring. All agent indices in the public interface are 1-based.
class RingTopology {
public:
    /// Throws ValidationError if m < 2 or k is not finite.
    RingTopology(int m, double k);

    int macro_vertices() const noexcept { return m_; }
    double gain() const noexcept { return k_; }
    int agents() const noexcept { return 2 * m_; }

private:
    int m_;
    double k_;
};

/// Directed edge (from listens to to), 1-based agent indices.
struct Edge {
    int from;
    int to;
    double weight;
};

/// The 3m weighted edges of the ring, macro-vertex by macro-vertex.
std::vector<Edge> edges(const RingTopology& topology);

/// Number of edges with strictly negative weight (m when k < 0, else 0).
int negative_edge_count(const RingTopology& topology);

/// Out-Laplacian of a ring topology. Rows sum to zero.
struct WeightedLaplacian {
    RingTopology topology;
    Eigen::MatrixXd entries;

    int size() const noexcept { return topology.agents(); }
};

WeightedLaplacian build_laplacian(int m, double k);
WeightedLaplacian build_laplacian(const RingTopology& topology);

/// w = [1, 1+k, 1, 1+k, ...]; satisfies w^T L = 0 and sums to m(2+k).
Eigen::VectorXd left_null_vector(int m, double k);

/// Eigenvalues of L from a general-purpose dense solver (Eigen's real Schur
/// route), unsorted.
Eigen::VectorXcd dense_eigenvalues(const Eigen::MatrixXd& matrix);

} // namespace ringform
