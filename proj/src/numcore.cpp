#include "bcl/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace bcl {

bool all_finite(const CMat& m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const cplx& z = m(i, j);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                return false;
        }
    return true;
}

static void require_finite(const CMat& m, const char* who)
{
    if (!all_finite(m))
        throw Error(Errc::invalid_input, std::string(who) + ": non-finite entries");
}

// Anchor: first index whose modulus is within a hair of the maximum.
static Eigen::Index phase_anchor(const CVec& v)
{
    double maxmod = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        maxmod = std::max(maxmod, std::abs(v(i)));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) >= maxmod * (1.0 - 1e-12))
            return i;
    return 0;
}

// Rotate each column so its anchor component is real positive.  Keeps basis
// choices reproducible across LAPACK sign conventions.
static void phase_fix_columns(CMat& m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        CVec col = m.col(j);
        cplx z = col(phase_anchor(col));
        double r = std::abs(z);
        if (r > 0)
            m.col(j) *= std::conj(z) / r;
    }
}

Frame orthonormalize_columns(const CMat& m, double tol)
{
    require_finite(m, "orthonormalize_columns");
    if (tol <= 0)
        throw Error(Errc::invalid_input, "orthonormalize_columns: tol must be positive");
    if (m.cols() == 0 || m.rows() == 0)
        return Frame::empty(m.rows());

    Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    // Relative threshold, floored at scale one: the operators in this domain
    // are contractions, so a numerically tiny matrix has numerical rank zero.
    double scale = std::max(sv.size() ? sv(0) : 0.0, 1.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * scale)
            ++rank;
    CMat cols = svd.matrixU().leftCols(rank);
    phase_fix_columns(cols);
    return Frame(m.rows(), std::move(cols));
}

Frame kernel(const CMat& m, double tol)
{
    require_finite(m, "kernel");
    if (tol <= 0)
        throw Error(Errc::invalid_input, "kernel: tol must be positive");
    if (m.cols() == 0)
        return Frame::empty(0);
    if (m.rows() == 0)
        return Frame::identity(m.cols());

    Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double scale = std::max(sv.size() ? sv(0) : 0.0, 1.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * scale)
            ++rank;
    // Right singular vectors beyond the numerical rank span the null space;
    // columns of V past min(rows, cols) belong to it as well.
    CMat cols = svd.matrixV().rightCols(m.cols() - rank);
    phase_fix_columns(cols);
    return Frame(m.cols(), std::move(cols));
}

Spectrum hermitian_eig(const CMat& h, double tol)
{
    require_finite(h, "hermitian_eig");
    if (h.rows() != h.cols())
        throw Error(Errc::invalid_input, "hermitian_eig: matrix not square");
    double hnorm = h.norm();
    double herm_res = (h - h.adjoint()).norm();
    if (herm_res > tol * std::max(1.0, hnorm))
        throw Error(Errc::not_hermitian,
                    "hermitian_eig: ||H - H*|| = " + std::to_string(herm_res));

    CMat hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(hs);
    if (es.info() != Eigen::Success)
        throw Error(Errc::invalid_input, "hermitian_eig: eigensolver failed");

    const Eigen::Index n = h.rows();
    Spectrum sp;
    sp.eigenvalues = es.eigenvalues();
    sp.eigenvectors = es.eigenvectors();

    std::vector<Eigen::Index> anchors(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        CVec col = sp.eigenvectors.col(j);
        Eigen::Index a = phase_anchor(col);
        anchors[j] = a;
        cplx z = col(a);
        double r = std::abs(z);
        if (r > 0)
            sp.eigenvectors.col(j) *= std::conj(z) / r;
    }

    // Equal eigenvalues are ordered by ascending anchor index.
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (sp.eigenvalues(a) != sp.eigenvalues(b))
            return sp.eigenvalues(a) < sp.eigenvalues(b);
        return anchors[a] < anchors[b];
    });
    RVec vals(n);
    CMat vecs(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        vals(j) = sp.eigenvalues(order[j]);
        vecs.col(j) = sp.eigenvectors.col(order[j]);
    }
    sp.eigenvalues = std::move(vals);
    sp.eigenvectors = std::move(vecs);
    return sp;
}

double check_unitary(const CMat& m)
{
    require_finite(m, "check_unitary");
    if (m.rows() != m.cols())
        throw Error(Errc::invalid_input, "check_unitary: matrix not square");
    if (m.rows() == 0)
        return 0.0;
    return (m.adjoint() * m - CMat::Identity(m.cols(), m.cols())).norm();
}

CMat projector(const Frame& f)
{
    if (f.rank() == 0)
        return CMat::Zero(f.ambient, f.ambient);
    return f.columns * f.columns.adjoint();
}

Frame complement_frame(const Frame& f, double tol)
{
    if (f.rank() == 0)
        return Frame::identity(f.ambient);
    if (f.rank() == f.ambient)
        return Frame::empty(f.ambient);
    return kernel(f.columns.adjoint(), tol);
}

Frame intersect_frames(const Frame& a, const Frame& b, double tol)
{
    if (a.ambient != b.ambient)
        throw Error(Errc::dimension_mismatch, "intersect_frames: ambient dims differ");
    const Eigen::Index n = a.ambient;
    if (a.rank() == 0 || b.rank() == 0)
        return Frame::empty(n);
    CMat stack(2 * n, n);
    stack.topRows(n) = CMat::Identity(n, n) - projector(a);
    stack.bottomRows(n) = CMat::Identity(n, n) - projector(b);
    // x is in both spans iff the stacked complement projectors kill it.  The
    // stack has singular values in [0, sqrt(2)], so the relative threshold
    // needs an absolute floor for the case span A = span B = C^n.
    Eigen::JacobiSVD<CMat> svd(stack, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = std::max(sv.size() ? sv(0) : 0.0, 1.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax)
            ++rank;
    CMat cols = svd.matrixV().rightCols(n - rank);
    phase_fix_columns(cols);
    return Frame(n, std::move(cols));
}

double subspace_distance(const Frame& a, const Frame& b)
{
    if (a.ambient != b.ambient)
        throw Error(Errc::dimension_mismatch, "subspace_distance: ambient dims differ");
    return (projector(a) - projector(b)).norm();
}

double containment_residual(const Frame& a, const CMat& b_cols)
{
    if (b_cols.cols() == 0)
        return 0.0;
    CMat rem = b_cols - projector(a) * b_cols;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < rem.cols(); ++j)
        worst = std::max(worst, rem.col(j).norm());
    return worst;
}

CMat kron(const CMat& a, const CMat& b)
{
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

SMat sparse_col_slice(const SMat& m, long start, long count)
{
    std::vector<Eigen::Triplet<cplx>> trips;
    for (long c = 0; c < count; ++c)
        for (SMat::InnerIterator it(m, start + c); it; ++it)
            trips.emplace_back(it.row(), c, it.value());
    SMat out(m.rows(), count);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

CMat dense_row_band(const SMat& m, long start, long count)
{
    CMat out = CMat::Zero(count, m.cols());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SMat::InnerIterator it(m, k); it; ++it)
            if (it.row() >= start && it.row() < start + count)
                out(it.row() - start, it.col()) = it.value();
    return out;
}

SMat kron_identity_dense_block(long blocks, const CMat& m)
{
    std::vector<Eigen::Triplet<cplx>> trips;
    for (long g = 0; g < blocks; ++g)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                cplx val = m(r, c);
                if (val != cplx(0.0, 0.0))
                    trips.emplace_back(g * m.rows() + r, g * m.cols() + c, val);
            }
    SMat out(blocks * m.rows(), blocks * m.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

SMat kron_identity_sparse(long blocks, const SMat& s)
{
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<std::size_t>(blocks) * s.nonZeros());
    for (long blk = 0; blk < blocks; ++blk)
        for (int k = 0; k < s.outerSize(); ++k)
            for (SMat::InnerIterator it(s, k); it; ++it)
                trips.emplace_back(blk * s.rows() + it.row(), blk * s.cols() + it.col(),
                                   it.value());
    SMat out(blocks * s.rows(), blocks * s.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

} // namespace bcl
