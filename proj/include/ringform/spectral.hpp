#pragma once

#include "ringform/ring_graph.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace ringform {

using cplx = std::complex<double>;
using RootPair = std::array<cplx, 2>;

/// Unitary DFT matrix of order n: entry (r, c) = w^(r c) / sqrt(n) with
/// w = exp(-2 pi i / n), 0-based r and c. Throws ValidationError for n < 1.
Eigen::MatrixXcd fourier_matrix(int n);

/// The m 2x2 blocks of -L in the Fourier basis F = F_m (x) F_2.
///
/// Block l (1-based) is
///     [ -a_l      -k + a_l     ]
///     [ -a_l      -k - 2 + a_l ]
/// with a_l = (1 - w_l) / 2, w_l = exp(-i theta_l), theta_l = 2 pi (l-1) / m.
struct BlockDiagonalForm {
    std::vector<Eigen::Matrix2cd> blocks;
    std::vector<cplx> alpha;   // a_l
    std::vector<double> theta; // theta_l
    /// Largest magnitude outside the diagonal blocks. Zero for the closed form.
    double off_block_residual = 0.0;
};

/// Computes F (-L) F^H numerically and reads off its diagonal blocks.
BlockDiagonalForm block_diagonalize(const WeightedLaplacian& laplacian);

/// Same blocks directly from the closed form; no matrix products.
BlockDiagonalForm closed_form_blocks(int m, double k);

/// Both roots of s^2 + b s + c for complex b, c, without cancellation.
RootPair quadratic_roots(cplx b, cplx c);

/// Roots of s^2 + (2 + k) s + 2 a_l, i.e. the eigenvalues of block l of -L.
/// Throws ValidationError unless 1 <= ell <= m.
RootPair block_eigenvalues(int m, double k, int ell);

/// Hurwitz test for s^2 + a1 s + (a2 + i b2) (real linear coefficient):
/// a1 > 0 and a1^2 a2 - b2^2 > 0.
bool hurwitz_stable_quadratic(double a1, double a2, double b2);

/// Direct route: both roots of s^2 + a1 s + (a2 + i b2) have Re < 0.
bool roots_in_open_left_half_plane(double a1, double a2, double b2);

/// Smallest k for which every nonzero eigenvalue of L has positive real part
/// (strict): -2 + sqrt(2) cos(pi / m).
double k_threshold(int m);

/// Eigenvalues of L other than its structural zero, ordered by block then by
/// root. Each entry carries the 1-based block index it came from.
struct BlockEigenvalue {
    int ell;
    cplx value;
};
std::vector<BlockEigenvalue> nonzero_laplacian_eigenvalues(int m, double k);

/// Boundary band applied to every stability verdict.
inline constexpr double stability_tolerance = 1e-9;

/// Maximizer of Im(r)^2 / (|Re r| |r|^2) over nonzero eigenvalues r of -L.
struct CouplingBound {
    double value = 0.0;
    int ell = 0;
    cplx eigenvalue; // eigenvalue of -L attaining the bound
};

/// Minimum admissible beta^2 / alpha (strict). Throws InfeasibleError when
/// k <= k_threshold(m).
CouplingBound coupling_bound_detail(int m, double k);
double coupling_bound(int m, double k);

/// beta^2 / alpha clears the bound and k clears the threshold.
bool gains_certified(int m, double k, double alpha, double beta);

struct SpectralReport {
    RingTopology topology;
    std::vector<BlockEigenvalue> nonzero_eigenvalues; // of L
    double k_threshold;
    double coupling_bound; // infinity when not stable
    bool stable;
};

SpectralReport analyze(int m, double k);

/// One k sample of a root-locus trace.
struct LocusPoint {
    double k;
    RootPair roots;
};

/// Roots of s^2 + (2 + k) s + 2 a_ell for every k in the grid. Consecutive
/// samples are paired by proximity so each slot traces a continuous branch.
std::vector<LocusPoint> root_locus_sweep(int m, int ell, const std::vector<double>& k_grid);

/// Second-order closed loop [[0, I], [-alpha L, -beta L]].
Eigen::MatrixXd closed_loop_matrix(const WeightedLaplacian& laplacian, double alpha, double beta);

} // namespace ringform
