#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "precis/estimator.hpp"
#include "precis/types.hpp"

namespace testing {

using precis::Index;
using precis::Matrix;
using precis::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, Index r, Index c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j) {
        for (Index i = 0; i < r; ++i) {
            m(i, j) = n(rng);
        }
    }
    return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, Index n) {
    const Matrix a = random_matrix(rng, n, n);
    return 0.5 * (a + a.transpose());
}

// Random matrix shifted to have every eigenvalue real part <= -margin.
inline Matrix random_hurwitz(std::mt19937_64& rng, Index n, double margin = 0.2) {
    Matrix a = random_matrix(rng, n, n);
    const Eigen::VectorXcd eig = a.eigenvalues();
    const double shift = eig.real().maxCoeff() + margin;
    a -= shift * Matrix::Identity(n, n);
    return a;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Golden-section minimizer of a unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// sigma_max(C (i w - A)^-1 B) computed directly.
inline double gain_at(const precis::estimator::ErrorSystem& s, double w) {
    const Index n = s.A.rows();
    const Eigen::MatrixXcd m = std::complex<double>(0.0, w) * Eigen::MatrixXcd::Identity(n, n) -
                               s.A.cast<std::complex<double>>();
    const Eigen::MatrixXcd g = s.C.cast<std::complex<double>>() * m.partialPivLu().solve(s.B.cast<std::complex<double>>());
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(g).singularValues()(0);
}

// Peak gain over n log-spaced frequencies in [1e-3, 1e3], plus w = 0.
inline double sweep_hinf(const precis::estimator::ErrorSystem& s, int n = 10000) {
    double best = gain_at(s, 0.0);
    for (int k = 0; k < n; ++k) {
        const double w = std::pow(10.0, -3.0 + 6.0 * k / (n - 1));
        best = std::max(best, gain_at(s, w));
    }
    return best;
}

// (1/pi) int_0^inf ||G(iw)||_F^2 dw with w = tan(t), Simpson on [0, pi/2).
inline double quadrature_h2(const precis::estimator::ErrorSystem& s, int n = 20000) {
    const Index nx = s.A.rows();
    auto integrand = [&](double t) {
        if (t >= M_PI / 2) {
            return (s.C * s.B).squaredNorm();  // limit of ||G||^2 (1 + w^2)
        }
        const double w = std::tan(t);
        const Eigen::MatrixXcd m = std::complex<double>(0.0, w) * Eigen::MatrixXcd::Identity(nx, nx) -
                                   s.A.cast<std::complex<double>>();
        const Eigen::MatrixXcd g =
            s.C.cast<std::complex<double>>() * m.partialPivLu().solve(s.B.cast<std::complex<double>>());
        return g.squaredNorm() * (1.0 + w * w);
    };
    const double h = (M_PI / 2) / n;
    double acc = integrand(0.0) + integrand(M_PI / 2);
    for (int k = 1; k < n; ++k) {
        acc += (k % 2 ? 4.0 : 2.0) * integrand(k * h);
    }
    return std::sqrt(acc * h / 3.0 / M_PI);
}

}  // namespace testing
