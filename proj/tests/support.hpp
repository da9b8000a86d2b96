#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <limits>
#include <vector>

namespace test_support {

using cplx = std::complex<double>;

// Greedy nearest-neighbour pairing; returns the largest pair distance.
inline double match_spectra(std::vector<cplx> a, std::vector<cplx> b)
{
    if (a.size() != b.size())
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const cplx& x : a) {
        auto best = b.begin();
        for (auto it = b.begin(); it != b.end(); ++it)
            if (std::abs(*it - x) < std::abs(*best - x))
                best = it;
        worst = std::max(worst, std::abs(*best - x));
        b.erase(best);
    }
    return worst;
}

inline std::vector<cplx> eigenvalues(const Eigen::MatrixXd& a)
{
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// Roots of s^2 + b s + c from the companion matrix.
inline std::vector<cplx> companion_roots(cplx b, cplx c)
{
    Eigen::Matrix2cd comp;
    comp << -b, -c, 1.0, 0.0;
    const Eigen::Vector2cd ev = Eigen::ComplexEigenSolver<Eigen::Matrix2cd>(comp, false).eigenvalues();
    return {ev(0), ev(1)};
}

// Hand-written Laplacian from the row pattern, independent of the library.
inline Eigen::MatrixXd reference_laplacian(int m, double k)
{
    const int n = 2 * m;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= m; ++i) {
        const int odd = 2 * i - 2; // 0-based row of agent 2i-1
        const int even = 2 * i - 1;
        const int prev = (i == 1) ? n - 1 : 2 * i - 3;
        l(odd, odd) = 1.0 + k;
        l(odd, even) = -k;
        l(odd, prev) = -1.0;
        l(even, even) = 1.0;
        l(even, odd) = -1.0;
    }
    return l;
}

} // namespace test_support
