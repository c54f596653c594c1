#include "bcl/rng.hpp"

#include <Eigen/QR>

namespace bcl {

CMat gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols)
{
    CMat m(rows, cols);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = rng.cgauss();
    return m;
}

CMat haar_unitary(Eigen::Index n, Rng& rng)
{
    if (n == 0)
        return CMat(0, 0);
    CMat a = gaussian_matrix(rng, n, n);
    Eigen::HouseholderQR<CMat> qr(a);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        cplx d = r(j, j);
        double mod = std::abs(d);
        cplx phase = mod > 0 ? d / mod : cplx(1, 0);
        q.col(j) *= phase;
    }
    return q;
}

} // namespace bcl
