#include "ringform/ring_graph.hpp"

#include "ringform/errors.hpp"

#include <cmath>
#include <string>

namespace ringform {

RingTopology::RingTopology(int m, double k) : m_(m), k_(k)
{
    if (m < 2)
        throw ValidationError("ring needs m >= 2 macro-vertices, got " + std::to_string(m));
    if (!std::isfinite(k))
        throw ValidationError("edge gain k must be finite");
}

std::vector<Edge> edges(const RingTopology& topology)
{
    const int m = topology.macro_vertices();
    const int n = topology.agents();
    const double k = topology.gain();

    std::vector<Edge> out;
    out.reserve(3 * static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i) {
        const int head = 2 * i - 1;
        const int tail = 2 * i;
        const int previous_tail = (i == 1) ? n : 2 * i - 2;
        out.push_back({head, tail, k});
        out.push_back({tail, head, 1.0});
        out.push_back({head, previous_tail, 1.0});
    }
    return out;
}

int negative_edge_count(const RingTopology& topology)
{
    int count = 0;
    for (const Edge& e : edges(topology))
        if (e.weight < 0.0)
            ++count;
    return count;
}

WeightedLaplacian build_laplacian(const RingTopology& topology)
{
    const int n = topology.agents();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : edges(topology)) {
        lap(e.from - 1, e.to - 1) -= e.weight;
        lap(e.from - 1, e.from - 1) += e.weight;
    }
    return {topology, std::move(lap)};
}

WeightedLaplacian build_laplacian(int m, double k)
{
    return build_laplacian(RingTopology(m, k));
}

Eigen::VectorXd left_null_vector(int m, double k)
{
    const RingTopology topology(m, k);
    Eigen::VectorXd w(topology.agents());
    for (int i = 0; i < topology.agents(); ++i)
        w(i) = (i % 2 == 0) ? 1.0 : 1.0 + k;
    return w;
}

Eigen::VectorXcd dense_eigenvalues(const Eigen::MatrixXd& matrix)
{
    Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw ValidationError("dense eigenvalue iteration did not converge");
    return solver.eigenvalues();
}

} // namespace ringform
