#include "ringform/spectral.hpp"

#include "ringform/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ringform {

namespace {

cplx block_alpha(int m, int ell)
{
    const double theta = 2.0 * std::numbers::pi * (ell - 1) / m;
    return (1.0 - std::polar(1.0, -theta)) / 2.0;
}

void require_block_index(int m, int ell)
{
    if (ell < 1 || ell > m)
        throw ValidationError("block index " + std::to_string(ell) + " outside 1.." + std::to_string(m));
}

} // namespace

Eigen::MatrixXcd fourier_matrix(int n)
{
    if (n < 1)
        throw ValidationError("Fourier matrix order must be >= 1");
    Eigen::MatrixXcd f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            // Reduce the exponent mod n so large orders keep full accuracy.
            const long long e = (static_cast<long long>(r) * c) % n;
            f(r, c) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(e) / n);
        }
    return f;
}

BlockDiagonalForm block_diagonalize(const WeightedLaplacian& laplacian)
{
    const int m = laplacian.topology.macro_vertices();
    const int n = laplacian.size();

    const Eigen::MatrixXcd fm = fourier_matrix(m);
    const Eigen::MatrixXcd f2 = fourier_matrix(2);
    Eigen::MatrixXcd f(n, n);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            f.block<2, 2>(2 * r, 2 * c) = fm(r, c) * f2;

    const Eigen::MatrixXcd neg = -laplacian.entries.cast<cplx>();
    const Eigen::MatrixXcd d = f * neg * f.adjoint();

    BlockDiagonalForm form;
    form.blocks.reserve(m);
    double residual = 0.0;
    for (int br = 0; br < m; ++br) {
        for (int bc = 0; bc < m; ++bc) {
            if (br == bc)
                continue;
            residual = std::max(residual, d.block<2, 2>(2 * br, 2 * bc).cwiseAbs().maxCoeff());
        }
        form.blocks.push_back(d.block<2, 2>(2 * br, 2 * br));
        form.alpha.push_back(block_alpha(m, br + 1));
        form.theta.push_back(2.0 * std::numbers::pi * br / m);
    }
    form.off_block_residual = residual;
    return form;
}

BlockDiagonalForm closed_form_blocks(int m, double k)
{
    const RingTopology topology(m, k);
    BlockDiagonalForm form;
    form.blocks.reserve(m);
    for (int ell = 1; ell <= m; ++ell) {
        const cplx a = block_alpha(m, ell);
        Eigen::Matrix2cd block;
        block << -a, -k + a,
                 -a, -k - 2.0 + a;
        form.blocks.push_back(block);
        form.alpha.push_back(a);
        form.theta.push_back(2.0 * std::numbers::pi * (ell - 1) / m);
    }
    // Block 1 is real; pin it so tiny sin(0) noise never leaks in.
    form.blocks[0] << 0.0, -k,
                      0.0, -(k + 2.0);
    form.alpha[0] = 0.0;
    return form;
}

RootPair quadratic_roots(cplx b, cplx c)
{
    cplx root_disc = std::sqrt(b * b - 4.0 * c);
    if ((std::conj(b) * root_disc).real() < 0.0)
        root_disc = -root_disc;
    const cplx q = -(b + root_disc) / 2.0;
    if (q == cplx(0.0))
        return {cplx(0.0), cplx(0.0)};
    RootPair roots{q, c / q};
    if (roots[1].real() > roots[0].real())
        std::swap(roots[0], roots[1]);
    return roots;
}

RootPair block_eigenvalues(int m, double k, int ell)
{
    const RingTopology topology(m, k);
    require_block_index(m, ell);
    if (ell == 1) {
        // s^2 + (2+k) s has the exact roots 0 and -(2+k).
        RootPair roots{cplx(0.0), cplx(-(2.0 + k))};
        if (roots[1].real() > roots[0].real())
            std::swap(roots[0], roots[1]);
        return roots;
    }
    return quadratic_roots(cplx(2.0 + k), 2.0 * block_alpha(m, ell));
}

bool hurwitz_stable_quadratic(double a1, double a2, double b2)
{
    return a1 > 0.0 && a1 * a1 * a2 - b2 * b2 > 0.0;
}

bool roots_in_open_left_half_plane(double a1, double a2, double b2)
{
    const RootPair roots = quadratic_roots(cplx(a1), cplx(a2, b2));
    return roots[0].real() < 0.0 && roots[1].real() < 0.0;
}

double k_threshold(int m)
{
    if (m < 2)
        throw ValidationError("k threshold needs m >= 2");
    return -2.0 + std::numbers::sqrt2 * std::cos(std::numbers::pi / m);
}

std::vector<BlockEigenvalue> nonzero_laplacian_eigenvalues(int m, double k)
{
    std::vector<BlockEigenvalue> out;
    out.reserve(2 * static_cast<std::size_t>(m) - 1);
    // Block 1 contributes the structural zero plus -(k+2) of -L.
    out.push_back({1, cplx(k + 2.0)});
    for (int ell = 2; ell <= m; ++ell)
        for (const cplx& r : block_eigenvalues(m, k, ell))
            out.push_back({ell, -r});
    return out;
}

namespace {

bool spectrum_stable(const std::vector<BlockEigenvalue>& laplacian_eigs)
{
    return std::all_of(laplacian_eigs.begin(), laplacian_eigs.end(),
                       [](const BlockEigenvalue& e) { return e.value.real() > stability_tolerance; });
}

} // namespace

CouplingBound coupling_bound_detail(int m, double k)
{
    const auto eigs = nonzero_laplacian_eigenvalues(m, k);
    if (!spectrum_stable(eigs))
        throw InfeasibleError("k = " + std::to_string(k) + " does not exceed the threshold " +
                              std::to_string(k_threshold(m)) + " for m = " + std::to_string(m));
    CouplingBound best;
    for (const BlockEigenvalue& e : eigs) {
        const cplx rho = -e.value;
        const double im = rho.imag();
        const double value = im * im / (std::abs(rho.real()) * std::norm(rho));
        if (value > best.value || best.ell == 0) {
            best.value = value;
            best.ell = e.ell;
            best.eigenvalue = rho;
        }
    }
    return best;
}

double coupling_bound(int m, double k)
{
    return coupling_bound_detail(m, k).value;
}

bool gains_certified(int m, double k, double alpha, double beta)
{
    if (!(alpha > 0.0) || !(beta > 0.0))
        return false;
    if (!spectrum_stable(nonzero_laplacian_eigenvalues(m, k)))
        return false;
    return beta * beta / alpha > coupling_bound(m, k);
}

SpectralReport analyze(int m, double k)
{
    RingTopology topology(m, k);
    auto eigs = nonzero_laplacian_eigenvalues(m, k);
    const bool stable = spectrum_stable(eigs);
    const double bound = stable ? coupling_bound(m, k) : std::numeric_limits<double>::infinity();
    return {topology, std::move(eigs), k_threshold(m), bound, stable};
}

std::vector<LocusPoint> root_locus_sweep(int m, int ell, const std::vector<double>& k_grid)
{
    require_block_index(m, ell);
    const cplx constant = 2.0 * block_alpha(m, ell);

    std::vector<LocusPoint> trace;
    trace.reserve(k_grid.size());
    for (double k : k_grid) {
        if (!std::isfinite(k))
            throw ValidationError("root-locus grid contains a non-finite gain");
        RootPair roots = (ell == 1) ? RootPair{cplx(0.0), cplx(-(2.0 + k))}
                                    : quadratic_roots(cplx(2.0 + k), constant);
        if (!trace.empty()) {
            const RootPair& prev = trace.back().roots;
            const double keep = std::abs(roots[0] - prev[0]) + std::abs(roots[1] - prev[1]);
            const double swap = std::abs(roots[0] - prev[1]) + std::abs(roots[1] - prev[0]);
            if (swap < keep)
                std::swap(roots[0], roots[1]);
        }
        trace.push_back({k, roots});
    }
    return trace;
}

Eigen::MatrixXd closed_loop_matrix(const WeightedLaplacian& laplacian, double alpha, double beta)
{
    const int n = laplacian.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    out.topRightCorner(n, n).setIdentity();
    out.bottomLeftCorner(n, n) = -alpha * laplacian.entries;
    out.bottomRightCorner(n, n) = -beta * laplacian.entries;
    return out;
}

} // namespace ringform
