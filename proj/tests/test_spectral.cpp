#include "ringform/errors.hpp"
#include "ringform/ring_graph.hpp"
#include "ringform/spectral.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ringform;
using test_support::cplx;

namespace {

// Bound recomputed from the dense spectrum of -L.
double dense_coupling_bound(int m, double k)
{
    double bound = 0.0;
    for (const cplx& r : test_support::eigenvalues(-build_laplacian(m, k).entries)) {
        if (std::abs(r) < 1e-9)
            continue;
        bound = std::max(bound, r.imag() * r.imag() / (std::abs(r.real()) * std::norm(r)));
    }
    return bound;
}

bool dense_stable(int m, double k)
{
    for (const cplx& r : test_support::eigenvalues(build_laplacian(m, k).entries))
        if (std::abs(r) > 1e-9 && r.real() <= 0.0)
            return false;
    return true;
}

} // namespace

TEST_CASE("fourier matrix")
{
    const Eigen::MatrixXcd f2 = fourier_matrix(2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(f2(0, 0) - s) < 1e-15);
    CHECK(std::abs(f2(1, 1) + s) < 1e-15);
    CHECK(std::abs(f2(0, 1) - s) < 1e-15);
    CHECK(fourier_matrix(1)(0, 0) == cplx(1.0));
    for (int n : {1, 2, 3, 4, 7, 16}) {
        const Eigen::MatrixXcd f = fourier_matrix(n);
        CHECK((f * f.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(fourier_matrix(0), ValidationError);
}

TEST_CASE("first block is exact")
{
    for (double k : {-1.5, 0.0, 2.0}) {
        const auto d1 = closed_form_blocks(5, k).blocks[0];
        CHECK(d1(0, 0) == cplx(0.0));
        CHECK(d1(0, 1) == cplx(-k));
        CHECK(d1(1, 0) == cplx(0.0));
        CHECK(d1(1, 1) == cplx(-(k + 2.0)));
    }
    const auto numeric = block_diagonalize(build_laplacian(2, 0.0)).blocks[0];
    CHECK(std::abs(numeric(1, 1) + 2.0) < 1e-14);
    CHECK(numeric.cwiseAbs().sum() == doctest::Approx(2.0));
}

TEST_CASE("second block for m = 2")
{
    const double k = 0.7;
    const auto d2 = closed_form_blocks(2, k).blocks[1];
    CHECK(std::abs(d2(0, 0) - cplx(-1.0)) < 1e-15);
    CHECK(std::abs(d2(0, 1) - cplx(-k + 1.0)) < 1e-15);
    CHECK(std::abs(d2(1, 0) - cplx(-1.0)) < 1e-15);
    CHECK(std::abs(d2(1, 1) - cplx(-k - 1.0)) < 1e-15);
}

TEST_CASE("blocks come in conjugate pairs")
{
    for (int m : {3, 4, 7}) {
        const auto form = block_diagonalize(build_laplacian(m, -0.3));
        for (int l = 2; l <= m; ++l)
            CHECK((form.blocks[l - 1] - form.blocks[m + 1 - l].conjugate()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("similarity transform matches the closed form")
{
    const auto numeric = block_diagonalize(build_laplacian(3, 0.5));
    const auto closed = closed_form_blocks(3, 0.5);
    for (int l = 0; l < 3; ++l)
        CHECK((numeric.blocks[l] - closed.blocks[l]).cwiseAbs().maxCoeff() < 1e-12);

    for (int m = 2; m <= 64; ++m)
        for (double k : {-1.9, -0.5, 0.0, 1.0, 10.0}) {
            const auto n = block_diagonalize(build_laplacian(m, k));
            const auto c = closed_form_blocks(m, k);
            CHECK(n.off_block_residual < 1e-10);
            double worst = 0.0;
            for (int l = 0; l < m; ++l)
                worst = std::max(worst, (n.blocks[l] - c.blocks[l]).cwiseAbs().maxCoeff());
            CHECK(worst < 1e-10);
        }
}

TEST_CASE("block eigenvalues")
{
    const RootPair r = block_eigenvalues(4, 0.0, 2);
    CHECK(test_support::match_spectra({r[0], r[1]}, {cplx(-0.2929, -0.7071), cplx(-1.7071, 0.7071)}) < 1e-4);

    const RootPair e1 = block_eigenvalues(6, 1.3, 1);
    CHECK(test_support::match_spectra({e1[0], e1[1]}, {cplx(0.0), cplx(-3.3)}) < 1e-15);

    const RootPair ex1 = block_eigenvalues(4, -0.5, 2);
    CHECK(test_support::match_spectra({ex1[0], ex1[1]}, {cplx(-0.1781, -0.8744), cplx(-1.3218, 0.8744)}) < 1e-3);

    CHECK_THROWS_AS(block_eigenvalues(4, 0.0, 0), ValidationError);
    CHECK_THROWS_AS(block_eigenvalues(4, 0.0, 5), ValidationError);
}

TEST_CASE("union of block roots is the spectrum of -L")
{
    for (int m : {2, 3, 4, 6, 11})
        for (double k : {-1.0, -0.5, 0.0, 2.0}) {
            std::vector<cplx> blocks;
            for (int l = 1; l <= m; ++l) {
                const RootPair r = block_eigenvalues(m, k, l);
                blocks.push_back(r[0]);
                blocks.push_back(r[1]);
                const auto oracle = test_support::companion_roots(2.0 + k, 2.0 * closed_form_blocks(m, k).alpha[l - 1]);
                CHECK(test_support::match_spectra({r[0], r[1]}, oracle) < 1e-12);
            }
            CHECK(test_support::match_spectra(blocks, test_support::eigenvalues(-build_laplacian(m, k).entries)) < 1e-9);
        }
}

TEST_CASE("quadratic roots survive cancellation")
{
    const RootPair r = quadratic_roots(cplx(1e8), cplx(1.0));
    CHECK(std::abs(r[0] - cplx(-1e-8)) < 1e-20);
    CHECK(std::abs(r[1] - cplx(-1e8)) < 1e-6);
}

TEST_CASE("hurwitz test")
{
    CHECK(hurwitz_stable_quadratic(1.5, 1.0, 1.0));
    CHECK(hurwitz_stable_quadratic(2.0, 1.0, 0.0));
    CHECK_FALSE(hurwitz_stable_quadratic(0.5, 1.0, 1.0));
    CHECK_FALSE(roots_in_open_left_half_plane(0.5, 1.0, 1.0));

    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> coef(-10.0, 10.0);
    int compared = 0;
    for (int i = 0; i < 10000; ++i) {
        const double a1 = coef(gen);
        const double a2 = coef(gen);
        const double b2 = coef(gen);
        const auto roots = test_support::companion_roots(a1, cplx(a2, b2));
        const double max_re = std::max(roots[0].real(), roots[1].real());
        if (std::abs(max_re) < 1e-9)
            continue;
        ++compared;
        CHECK(hurwitz_stable_quadratic(a1, a2, b2) == (max_re < 0.0));
        CHECK(roots_in_open_left_half_plane(a1, a2, b2) == (max_re < 0.0));
    }
    CHECK(compared > 9900);
}

TEST_CASE("k threshold")
{
    CHECK(k_threshold(4) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(k_threshold(4) + 1.0) < 1e-12);
    CHECK(k_threshold(2) == doctest::Approx(-2.0));
    CHECK(k_threshold(3) == doctest::Approx(-1.292893).epsilon(1e-6));
    CHECK_THROWS_AS(k_threshold(1), ValidationError);

    for (int m = 2; m <= 12; ++m) {
        CHECK(dense_stable(m, k_threshold(m) + 0.01));
        CHECK_FALSE(dense_stable(m, k_threshold(m) - 0.01));
        CHECK(analyze(m, k_threshold(m) + 0.01).stable);
        CHECK_FALSE(analyze(m, k_threshold(m) - 0.01).stable);
        CHECK_FALSE(analyze(m, k_threshold(m)).stable); // strict
    }
}

TEST_CASE("coupling bound")
{
    CHECK(coupling_bound(4, -0.5) == doctest::Approx(5.39).epsilon(0.01 / 5.39));
    CHECK(coupling_bound(4, 1.0) == doctest::Approx(2.13).epsilon(0.01 / 2.13));
    CHECK(coupling_bound(2, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(coupling_bound(4, -1.0), InfeasibleError);
    CHECK_THROWS_AS(coupling_bound(4, -1.2), InfeasibleError);

    for (int m = 2; m <= 12; ++m)
        for (double dk : {0.01, 0.3, 1.0, 5.0}) {
            const double k = k_threshold(m) + dk;
            CHECK(coupling_bound(m, k) == doctest::Approx(dense_coupling_bound(m, k)).epsilon(1e-8));
            CHECK(coupling_bound(m, k) >= 0.0);
        }
    CHECK(std::isinf(analyze(4, -1.5).coupling_bound));
}

TEST_CASE("second block decides the bound near the threshold")
{
    for (int m = 3; m <= 12; ++m)
        for (double dk : {0.01, 0.1, 0.25, 0.5}) {
            const CouplingBound b = coupling_bound_detail(m, k_threshold(m) + dk);
            CHECK((b.ell == 2 || b.ell == m));
        }
}

TEST_CASE("certified gains")
{
    CHECK(gains_certified(4, -0.5, 1.0, 6.0));
    CHECK_FALSE(gains_certified(4, -0.5, 1.0, 2.0));
    CHECK_FALSE(gains_certified(4, -1.5, 1.0, 100.0));
}

TEST_CASE("root locus")
{
    const auto at_boundary = root_locus_sweep(4, 1, {-2.0});
    CHECK(std::abs(at_boundary[0].roots[0]) < 1e-15);
    CHECK(std::abs(at_boundary[0].roots[1]) < 1e-15);

    const auto threshold = root_locus_sweep(4, 2, {-1.0});
    const double max_re = std::max(threshold[0].roots[0].real(), threshold[0].roots[1].real());
    CHECK(std::abs(max_re) < 1e-9);

    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i)
        grid.push_back(-1.5 + i * 0.01);
    const auto sweep = root_locus_sweep(4, 2, grid);
    int sign_changes = 0;
    double previous = 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const double re = std::max(sweep[i].roots[0].real(), sweep[i].roots[1].real());
        if (std::abs(re) < 1e-12)
            continue;
        if (i > 0 && previous != 0.0 && (re > 0) != (previous > 0)) {
            ++sign_changes;
            CHECK(sweep[i].k > -1.0 - 0.011);
            CHECK(sweep[i].k < -1.0 + 0.011);
        }
        previous = re;
    }
    CHECK(sign_changes == 1);

    // Branches are continuous: consecutive roots in the same slot stay close.
    for (std::size_t i = 1; i < sweep.size(); ++i)
        for (int s = 0; s < 2; ++s)
            CHECK(std::abs(sweep[i].roots[s] - sweep[i - 1].roots[s]) < 0.05);
}

TEST_CASE("closed-loop verdicts of the second-order system")
{
    const auto stable = test_support::eigenvalues(closed_loop_matrix(build_laplacian(4, -0.5), 1.0, 6.0));
    int zeros = 0;
    for (const cplx& e : stable) {
        if (std::abs(e) < 1e-7) {
            ++zeros;
            continue;
        }
        CHECK(e.real() < 0.0);
    }
    CHECK(zeros == 2);

    const auto unstable = test_support::eigenvalues(closed_loop_matrix(build_laplacian(4, -0.8), 1.0, 3.0));
    double max_re = -1e300;
    for (const cplx& e : unstable)
        max_re = std::max(max_re, e.real());
    CHECK(max_re > 0.0);
    CHECK_FALSE(gains_certified(4, -0.8, 1.0, 3.0));
}
