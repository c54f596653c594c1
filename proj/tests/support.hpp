#pragma once

#include "bcl/graded.hpp"
#include "bcl/rng.hpp"
#include "bcl/triple.hpp"

namespace bcl::testing {

/// Scalar triple on C^m with W2 spanned by the last p coordinates and the
/// given unitary as u (acting W -> Pperp W (+) PW in standard coordinates).
inline BclTriple scalar_triple(int m, int p, const CMat& u_action)
{
    BclTriple t;
    t.d1 = t.d2 = 1;
    t.m = m;
    t.p = p;
    t.twist = CMat::Identity(1, 1);
    t.w2_frame = Frame::coordinate_span(m, m - p, p);
    Frame pperp = complement_frame(t.w2_frame);
    CMat u(m, m);
    u.topRows(m - p) = pperp.columns.adjoint() * u_action;
    u.bottomRows(p) = t.w2_frame.columns.adjoint() * u_action;
    t.u = u;
    return t;
}

inline BclTriple t_id()
{
    return scalar_triple(2, 1, CMat::Identity(2, 2));
}

inline BclTriple t_swap()
{
    CMat u(2, 2);
    u << 0, 1, 1, 0;
    return scalar_triple(2, 1, u);
}

inline BclTriple t_rot(double theta)
{
    CMat u(2, 2);
    u << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return scalar_triple(2, 1, u);
}

inline GradedVector random_graded(const StructuredPair& pair, int max_degree, Rng& rng)
{
    GradedVector v(pair.d1(), pair.d2(), pair.m());
    for (int n = 0; n <= max_degree; ++n) {
        CVec x(fiber_dim(pair.d1(), pair.d2(), pair.m(), n));
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x(i) = rng.cgauss();
        v.add_term(n, x);
    }
    return v;
}

/// || V1(a, V2(b, x)) - sum twist-coeffs V2(b', V1(a', x)) || maximized over
/// letters and all fiber basis vectors of degree <= max_degree.
inline double commutation_residual(const StructuredPair& pair, int max_degree)
{
    const int d1 = pair.d1(), d2 = pair.d2();
    const CMat& tw = pair.triple.twist;
    double worst = 0;
    for (int n = 0; n <= max_degree; ++n) {
        long f = fiber_dim(d1, d2, pair.m(), n);
        for (long idx = 0; idx < f; ++idx) {
            GradedVector x = GradedVector::basis(d1, d2, pair.m(), n, idx);
            std::vector<GradedVector> v1x(d1);
            for (int a = 0; a < d1; ++a)
                v1x[a] = apply_v1(pair, a, x);
            for (int a = 0; a < d1; ++a)
                for (int b = 0; b < d2; ++b) {
                    GradedVector lhs = apply_v1(pair, a, apply_v2(pair, b, x));
                    GradedVector rhs(d1, d2, pair.m());
                    for (int bp = 0; bp < d2; ++bp)
                        for (int ap = 0; ap < d1; ++ap) {
                            cplx coeff = std::conj(tw(a * d2 + b, bp * d1 + ap));
                            if (coeff == cplx(0.0, 0.0))
                                continue;
                            GradedVector term = apply_v2(pair, bp, v1x[ap]);
                            term *= coeff;
                            rhs += term;
                        }
                    lhs -= rhs;
                    worst = std::max(worst, lhs.norm());
                }
        }
    }
    return worst;
}

} // namespace bcl::testing
