#pragma once

#include <utility>

#include "precis/types.hpp"

// Dense kernels behind the ADMM updates and the norm certificates.
namespace precis::linalg {

// Column-major vec of a matrix.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

Matrix kron(const Matrix& a, const Matrix& b);

// Permutation T of order m*n with T * vec(Y) = vec(Y^T) for every m x n Y.
Matrix commutation_matrix(Index m, Index n);

// Elementwise max(0, a - b) - max(0, -a - b).
Vector soft_threshold(const Vector& a, const Vector& b);
double soft_threshold(double a, double b);

struct SymEig {
    Vector values;   // ascending
    Matrix vectors;  // orthonormal columns
};

SymEig sym_eig(const Matrix& p);

// Clamp the spectrum of a symmetric matrix at eps. Throws Symmetry when p is
// not symmetric to within 1e-8 relative.
Matrix psd_project(const Matrix& p, double eps);

// Moore-Penrose pseudo-inverse; singular values below 1e-10 * sigma_max are
// treated as zero.
Matrix pinv(const Matrix& a);

// Minimum-norm least-squares solution of min ||A x - b||.
Vector lstsq_pinv(const Matrix& a, const Vector& b);

// Maps the lower triangle of a symmetric n x n matrix, packed column-major,
// to a vector of length n(n+1)/2.
class ReducedVecMap {
public:
    explicit ReducedVecMap(Index n);

    [[nodiscard]] Index order() const noexcept { return n_; }
    [[nodiscard]] Index size() const noexcept { return n_ * (n_ + 1) / 2; }

    // Position of entry (i, j) (either triangle) in the packed vector.
    [[nodiscard]] Index index(Index i, Index j) const;

    [[nodiscard]] Vector vec_r(const Matrix& x) const;
    [[nodiscard]] Matrix unvec_r(const Vector& v) const;

private:
    Index n_;
};

// Combine the n^2 columns of `a` (acting on vec(X)) into n(n+1)/2 columns
// acting on vec_r(X) for symmetric X: off-diagonal pairs are summed.
Matrix reduced_columns(const Matrix& a, const ReducedVecMap& map);

// Symmetric-weighted vectorization: lower triangle column-major, off-diagonal
// entries scaled by sqrt(2) so that ||svec(S)||_2 = ||S||_F.
Vector svec(const Matrix& s);
Matrix unsvec(const Vector& v, Index n);

[[nodiscard]] bool is_hurwitz(const Matrix& a);
[[nodiscard]] double spectral_abscissa(const Matrix& a);

// Solves A P + P A^T + W = 0 (complex Schur / Bartels-Stewart). Throws
// Unstable when A is not Hurwitz.
Matrix lyap_solve(const Matrix& a, const Matrix& w);

}  // namespace precis::linalg
