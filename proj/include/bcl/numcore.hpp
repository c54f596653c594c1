#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "bcl/errors.hpp"

namespace bcl {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using SMat = Eigen::SparseMatrix<cplx>;

inline constexpr double kDefaultTol = 1e-9;

/// Orthonormal column frame spanning a subspace of an ambient space.
/// columns is ambient x k with columns^H columns = I_k.
struct Frame {
    Eigen::Index ambient = 0;
    CMat columns; // ambient x k

    Frame() = default;
    Frame(Eigen::Index amb, CMat cols) : ambient(amb), columns(std::move(cols)) {}

    Eigen::Index rank() const { return columns.cols(); }

    static Frame identity(Eigen::Index n)
    {
        return Frame(n, CMat::Identity(n, n));
    }
    static Frame empty(Eigen::Index n) { return Frame(n, CMat::Zero(n, 0)); }
    static Frame coordinate_span(Eigen::Index n, Eigen::Index first, Eigen::Index count)
    {
        CMat cols = CMat::Zero(n, count);
        for (Eigen::Index j = 0; j < count; ++j)
            cols(first + j, j) = 1.0;
        return Frame(n, std::move(cols));
    }
};

/// Spectral decomposition of a Hermitian matrix: eigenvalues ascending,
/// eigenvector columns paired with them and phase-normalized so that the
/// first component of largest modulus is real positive.
struct Spectrum {
    RVec eigenvalues;
    CMat eigenvectors;
};

bool all_finite(const CMat& m);

/// Orthonormal basis of the column span of M.  Rank is decided by the
/// relative singular-value threshold tol * sigma_max.
Frame orthonormalize_columns(const CMat& m, double tol = kDefaultTol);

/// Orthonormal basis of { x : M x = 0 } at the same relative threshold.
Frame kernel(const CMat& m, double tol = kDefaultTol);

/// Full spectral decomposition of a Hermitian matrix.  Throws NotHermitian
/// when ||H - H^*||_F > tol * max(1, ||H||_F).
Spectrum hermitian_eig(const CMat& h, double tol = kDefaultTol);

/// ||M^* M - I||_F for a square M; the caller compares against its own
/// tolerance.
double check_unitary(const CMat& m);

/// F F^* as a dense matrix (the orthogonal projection onto span F).
CMat projector(const Frame& f);

/// Orthonormal basis of the orthogonal complement of span F.
Frame complement_frame(const Frame& f, double tol = kDefaultTol);

/// Orthonormal basis of span A intersected with span B.
Frame intersect_frames(const Frame& a, const Frame& b, double tol = kDefaultTol);

/// || P_A - P_B ||_F; zero iff the spans agree.
double subspace_distance(const Frame& a, const Frame& b);

/// max column norm of (I - P_A) B, i.e. how far span B sticks out of span A.
double containment_residual(const Frame& a, const CMat& b_cols);

CMat kron(const CMat& a, const CMat& b);

/// Columns [start, start+count) of a column-major sparse matrix.
SMat sparse_col_slice(const SMat& m, long start, long count);

/// Dense copy of the rows [start, start+count).
CMat dense_row_band(const SMat& m, long start, long count);

/// I_blocks (x) M for dense M, assembled sparse.
SMat kron_identity_dense_block(long blocks, const CMat& m);

/// I_blocks (x) S, block-diagonal sparse.
SMat kron_identity_sparse(long blocks, const SMat& s);

} // namespace bcl
