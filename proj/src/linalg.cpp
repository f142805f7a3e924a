#include "precis/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "precis/error.hpp"

namespace precis::linalg {

Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
    if (v.size() != rows * cols) {
        fail(ErrorCode::Dimension, "unvec: vector length does not match shape");
    }
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix commutation_matrix(Index m, Index n) {
    if (m < 1 || n < 1) {
        fail(ErrorCode::InvalidArgument, "commutation_matrix: m and n must be >= 1");
    }
    // vec(Y)[j*m + i] = Y(i,j) ; vec(Y^T)[i*n + j] = Y(i,j)
    Matrix t = Matrix::Zero(m * n, m * n);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) {
            t(i * n + j, j * m + i) = 1.0;
        }
    }
    return t;
}

double soft_threshold(double a, double b) {
    return std::max(0.0, a - b) - std::max(0.0, -a - b);
}

Vector soft_threshold(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        fail(ErrorCode::Dimension, "soft_threshold: length mismatch");
    }
    Vector out(a.size());
    for (Index i = 0; i < a.size(); ++i) {
        if (b[i] < 0.0) {
            fail(ErrorCode::InvalidArgument, "soft_threshold: threshold must be nonnegative");
        }
        out[i] = soft_threshold(a[i], b[i]);
    }
    return out;
}

SymEig sym_eig(const Matrix& p) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(p);
    return {es.eigenvalues(), es.eigenvectors()};
}

Matrix psd_project(const Matrix& p, double eps) {
    if (p.rows() != p.cols()) {
        fail(ErrorCode::Dimension, "psd_project: matrix is not square");
    }
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        fail(ErrorCode::Symmetry, "psd_project: input is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (p + p.transpose()));
    if (es.eigenvalues().minCoeff() >= eps) {
        return 0.5 * (p + p.transpose());
    }
    const Vector clamped = es.eigenvalues().cwiseMax(eps);
    Matrix out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

Matrix pinv(const Matrix& a) {
    if (a.size() == 0) {
        return Matrix::Zero(a.cols(), a.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = 1e-10 * (s.size() > 0 ? s[0] : 0.0);
    Vector inv = Vector::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i) {
        if (s[i] > cutoff && s[i] > 0.0) {
            inv[i] = 1.0 / s[i];
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector lstsq_pinv(const Matrix& a, const Vector& b) {
    if (a.rows() != b.size()) {
        fail(ErrorCode::Dimension, "lstsq_pinv: row count does not match rhs");
    }
    return pinv(a) * b;
}

ReducedVecMap::ReducedVecMap(Index n) : n_(n) {
    if (n < 1) {
        fail(ErrorCode::InvalidArgument, "ReducedVecMap: order must be >= 1");
    }
}

Index ReducedVecMap::index(Index i, Index j) const {
    if (i < j) {
        std::swap(i, j);
    }
    // columns 0..j-1 hold n, n-1, ..., n-j+1 entries
    return j * n_ - j * (j - 1) / 2 + (i - j);
}

Vector ReducedVecMap::vec_r(const Matrix& x) const {
    if (x.rows() != n_ || x.cols() != n_) {
        fail(ErrorCode::Dimension, "vec_r: matrix order mismatch");
    }
    Vector v(size());
    for (Index j = 0; j < n_; ++j) {
        for (Index i = j; i < n_; ++i) {
            v[index(i, j)] = x(i, j);
        }
    }
    return v;
}

Matrix ReducedVecMap::unvec_r(const Vector& v) const {
    if (v.size() != size()) {
        fail(ErrorCode::Dimension, "unvec_r: vector length mismatch");
    }
    Matrix x(n_, n_);
    for (Index j = 0; j < n_; ++j) {
        for (Index i = j; i < n_; ++i) {
            x(i, j) = v[index(i, j)];
            x(j, i) = x(i, j);
        }
    }
    return x;
}

Matrix reduced_columns(const Matrix& a, const ReducedVecMap& map) {
    const Index n = map.order();
    if (a.cols() != n * n) {
        fail(ErrorCode::Dimension, "reduced_columns: expected n^2 columns");
    }
    Matrix out = Matrix::Zero(a.rows(), map.size());
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            out.col(map.index(i, j)) += a.col(j * n + i);
        }
    }
    return out;
}

Vector svec(const Matrix& s) {
    const Index n = s.rows();
    Vector v(n * (n + 1) / 2);
    Index k = 0;
    for (Index j = 0; j < n; ++j) {
        v[k++] = s(j, j);
        for (Index i = j + 1; i < n; ++i) {
            v[k++] = std::sqrt(2.0) * s(i, j);
        }
    }
    return v;
}

Matrix unsvec(const Vector& v, Index n) {
    if (v.size() != n * (n + 1) / 2) {
        fail(ErrorCode::Dimension, "unsvec: length does not match order");
    }
    Matrix s(n, n);
    Index k = 0;
    for (Index j = 0; j < n; ++j) {
        s(j, j) = v[k++];
        for (Index i = j + 1; i < n; ++i) {
            s(i, j) = s(j, i) = v[k++] / std::sqrt(2.0);
        }
    }
    return s;
}

double spectral_abscissa(const Matrix& a) {
    if (a.size() == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& a) {
    return spectral_abscissa(a) < 0.0;
}

Matrix lyap_solve(const Matrix& a, const Matrix& w) {
    using Complex = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    const Index n = a.rows();
    if (a.cols() != n || w.rows() != n || w.cols() != n) {
        fail(ErrorCode::Dimension, "lyap_solve: dimension mismatch");
    }
    Eigen::ComplexSchur<Matrix> schur(a);
    const CMatrix& t = schur.matrixT();
    const CMatrix& u = schur.matrixU();
    for (Index i = 0; i < n; ++i) {
        if (t(i, i).real() >= 0.0) {
            std::ostringstream os;
            os << "lyap_solve: A is not Hurwitz (eigenvalue " << t(i, i) << ")";
            fail(ErrorCode::Unstable, os.str());
        }
    }
    // T Y + Y T^H = -U^H W U, with Y = U^H P U. Column j of Y depends on
    // columns k > j through the lower-triangular T^H.
    CMatrix c = -(u.adjoint() * w.cast<Complex>() * u);
    CMatrix y = CMatrix::Zero(n, n);
    for (Index j = n - 1; j >= 0; --j) {
        Eigen::VectorXcd rhs = c.col(j);
        for (Index k = j + 1; k < n; ++k) {
            rhs -= std::conj(t(j, k)) * y.col(k);
        }
        CMatrix lhs = t;
        lhs.diagonal().array() += std::conj(t(j, j));
        y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
    }
    Matrix p = (u * y * u.adjoint()).real();
    return 0.5 * (p + p.transpose());
}

}  // namespace precis::linalg
