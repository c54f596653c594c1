#include "bcl/triple.hpp"

#include <cmath>

#include "bcl/graded.hpp"
#include "bcl/rng.hpp"

namespace bcl {

CMat flip_twist(int d1, int d2)
{
    CMat t = CMat::Zero(static_cast<long>(d1) * d2, static_cast<long>(d1) * d2);
    for (int b = 0; b < d2; ++b)
        for (int a = 0; a < d1; ++a)
            t(a * d2 + b, b * d1 + a) = 1.0;
    return t;
}

// Channel-2 rows of u, i.e. the part mapping onto E2 (x) E1 (x) PW.
static CMat bottom_block(const BclTriple& t)
{
    long rows = static_cast<long>(t.d1) * t.d2 * t.p;
    return t.u.bottomRows(rows);
}

// Mean of the d2 diagonal blocks of the channel-2 rows; when the triple is
// valid this is U_L composed with the L-coordinate chart, a (d1 p) x m map.
static CMat tensor_factor(const BclTriple& t)
{
    const long dp = static_cast<long>(t.d1) * t.p;
    CMat a = bottom_block(t);
    CMat b = CMat::Zero(dp, t.m);
    for (int k = 0; k < t.d2; ++k)
        b += a.block(static_cast<long>(k) * dp, static_cast<long>(k) * t.m, dp, t.m);
    if (t.d2 > 0)
        b /= t.d2;
    return b;
}

std::vector<ValidationIssue> check_triple(const BclTriple& t, double tol)
{
    std::vector<ValidationIssue> issues;
    auto add = [&](Errc c, std::string msg) { issues.push_back({c, std::move(msg)}); };

    if (t.d1 < 1 || t.d2 < 1 || t.m < 1 || t.p < 0 || t.p > t.m) {
        add(Errc::invalid_input, "need d1,d2 >= 1, m >= 1 and 0 <= p <= m");
        return issues;
    }
    const long dd = static_cast<long>(t.d1) * t.d2;
    const long dm = static_cast<long>(t.d2) * t.m;
    if (t.twist.rows() != dd || t.twist.cols() != dd) {
        add(Errc::invalid_input, "twist must be (d1 d2) x (d1 d2)");
        return issues;
    }
    if (t.w2_frame.ambient != t.m || t.w2_frame.columns.rows() != t.m ||
        t.w2_frame.columns.cols() != t.p) {
        add(Errc::invalid_input, "w2_frame must be m x p in C^m");
        return issues;
    }
    if (t.u.rows() != dm || t.u.cols() != dm) {
        add(Errc::invalid_input, "u must be (d2 m) x (d2 m)");
        return issues;
    }
    if (!all_finite(t.twist) || !all_finite(t.u) || !all_finite(t.w2_frame.columns)) {
        add(Errc::invalid_input, "non-finite entries");
        return issues;
    }

    if (t.p > 0) {
        double fr = (t.w2_frame.columns.adjoint() * t.w2_frame.columns -
                     CMat::Identity(t.p, t.p))
                        .norm();
        if (fr > tol)
            add(Errc::invalid_input,
                "w2_frame columns not orthonormal, residual " + std::to_string(fr));
    }
    double ru = check_unitary(t.twist);
    if (ru > tol)
        add(Errc::not_unitary, "twist unitarity residual " + std::to_string(ru));
    ru = check_unitary(t.u);
    if (ru > tol)
        add(Errc::not_unitary, "u unitarity residual " + std::to_string(ru));

    // Forced by dim(E2 (x) W) = dim(Pperp W) + dim(E2 (x) E1 (x) PW).
    if (static_cast<long>(t.p) * (dd - 1) != static_cast<long>(t.m) * (t.d2 - 1)) {
        add(Errc::dimension_mismatch,
            "constraint p(d1 d2 - 1) = m(d2 - 1) violated: p=" + std::to_string(t.p) +
                ", m=" + std::to_string(t.m) + ", d1=" + std::to_string(t.d1) +
                ", d2=" + std::to_string(t.d2));
        return issues;
    }
    if (t.m - static_cast<long>(t.d1) * t.p < 0) {
        add(Errc::dimension_mismatch, "dim L = d1 p exceeds dim W");
        return issues;
    }
    if (!issues.empty())
        return issues;

    // Tensor-form condition: the channel-2 rows factor as I_{E2} (x) B.
    if (t.p > 0) {
        const long dp = static_cast<long>(t.d1) * t.p;
        CMat a = bottom_block(t);
        CMat b = tensor_factor(t);
        CMat model = kron(CMat::Identity(t.d2, t.d2), b);
        double res = (a - model).norm();
        if (res > 10 * tol) {
            add(Errc::tensor_form_violation,
                "channel-2 block of u does not factor as I (x) U_L, residual " +
                    std::to_string(res));
            return issues;
        }
        double row_ortho = (b * b.adjoint() - CMat::Identity(dp, dp)).norm();
        if (row_ortho > 10 * tol) {
            add(Errc::tensor_form_violation,
                "U_L factor is not a co-isometry onto E1 (x) PW, residual " +
                    std::to_string(row_ortho));
            return issues;
        }
        // U must carry E2 (x) W1 onto Pperp W: the channel-2 rows kill W1.
        Frame l = orthonormalize_columns(b.adjoint(), tol);
        if (l.rank() != dp) {
            add(Errc::tensor_form_violation, "extracted L has wrong dimension");
            return issues;
        }
        Frame w1 = complement_frame(l, tol);
        double leak =
            (a * kron(CMat::Identity(t.d2, t.d2), w1.columns)).norm();
        if (leak > 10 * tol)
            add(Errc::tensor_form_violation,
                "u does not map E2 (x) W1 into Pperp W, residual " + std::to_string(leak));
    }
    return issues;
}

StructuredPair build_pair(const BclTriple& t, double tol)
{
    auto issues = check_triple(t, tol);
    if (!issues.empty()) {
        std::string msg;
        for (const auto& is : issues)
            msg += (msg.empty() ? "" : "; ") + std::string(errc_name(is.code)) + ": " +
                   is.message;
        throw Error(issues.front().code, msg);
    }

    StructuredPair pair;
    pair.triple = t;
    pair.pperp_frame = complement_frame(t.w2_frame, tol);

    if (t.p > 0) {
        CMat b = tensor_factor(t);
        pair.l_frame = orthonormalize_columns(b.adjoint(), tol);
        pair.ul = b * pair.l_frame.columns; // L-coords -> E1 (x) PW coords
    } else {
        pair.l_frame = Frame::empty(t.m);
        pair.ul = CMat::Zero(0, 0);
    }
    pair.w1_frame = complement_frame(pair.l_frame, tol);

    const long mp = t.m - t.p;
    pair.theta2_deg0 = pair.pperp_frame.columns * t.u.topRows(mp);
    pair.theta2_deg1 = kron(t.twist, t.w2_frame.columns) * bottom_block(t);

    CMat v2w1 = pair.theta2_deg0 *
                kron(CMat::Identity(t.d2, t.d2), pair.w1_frame.columns);
    pair.v2w1_frame = orthonormalize_columns(v2w1, tol);

    CMat v1_stay0;
    if (t.p > 0)
        v1_stay0 = pair.l_frame.columns * pair.ul.adjoint() *
                   kron(CMat::Identity(t.d1, t.d1), t.w2_frame.columns.adjoint());
    else
        v1_stay0 = CMat::Zero(t.m, static_cast<long>(t.d1) * t.m);

    pair.moves = std::make_shared<MoveCache>(t.d1, t.d2, t.m, t.p, t.twist,
                                             pair.theta2_deg0, pair.theta2_deg1,
                                             v1_stay0);
    return pair;
}

DerivedFrames derive_frames(const BclTriple& t, double tol)
{
    StructuredPair pair = build_pair(t, tol);
    return DerivedFrames{pair.w1_frame, pair.triple.w2_frame, pair.l_frame};
}

BclTriple random_triple(int d1, int d2, int m, int p, std::uint64_t seed, const CMat& twist)
{
    if (d1 < 1 || d2 < 1 || m < 1 || p < 0 || p > m ||
        static_cast<long>(p) * (static_cast<long>(d1) * d2 - 1) !=
            static_cast<long>(m) * (d2 - 1) ||
        m - static_cast<long>(d1) * p < 0)
        throw Error(Errc::dimension_mismatch,
                    "infeasible dimensions: need p(d1 d2 - 1) = m(d2 - 1) and d1 p <= m");

    BclTriple t;
    t.d1 = d1;
    t.d2 = d2;
    t.m = m;
    t.p = p;
    t.twist = twist.size() ? twist : flip_twist(d1, d2);
    t.w2_frame = Frame::coordinate_span(m, m - p, p);
    t.seed = seed;

    Rng rng(seed);
    const long dp = static_cast<long>(d1) * p;
    const long q = m - dp;

    // Haar frame for L0 and its complement from the same unitary.
    CMat h = haar_unitary(m, rng);
    CMat l0 = h.leftCols(dp);
    CMat w10 = h.rightCols(q);
    CMat ulrand = haar_unitary(dp, rng);
    CMat g = haar_unitary(m - p, rng);

    CMat u(static_cast<long>(d2) * m, static_cast<long>(d2) * m);
    u.topRows(m - p) = g * kron(CMat::Identity(d2, d2), w10.adjoint());
    u.bottomRows(d2 * dp) =
        kron(CMat::Identity(d2, d2), CMat(ulrand * l0.adjoint()));
    t.u = u;

    auto issues = check_triple(t);
    if (!issues.empty())
        throw Error(issues.front().code, "random_triple built an invalid datum: " +
                                             issues.front().message);
    return t;
}

BclTriple doubly_commuting_triple(int m, int p, std::uint64_t seed)
{
    if (m < 1 || p < 0 || p > m)
        throw Error(Errc::dimension_mismatch, "need 0 <= p <= m, m >= 1");
    BclTriple t;
    t.d1 = t.d2 = 1;
    t.m = m;
    t.p = p;
    t.twist = CMat::Identity(1, 1);
    t.w2_frame = Frame::coordinate_span(m, m - p, p);
    t.seed = seed;

    Rng rng(seed);
    CMat a = haar_unitary(m - p, rng);
    CMat b = haar_unitary(p, rng);
    Frame pperp = complement_frame(t.w2_frame);
    // u block-diagonal with respect to Pperp W (+) W2 keeps W1 = Pperp W
    // invariant, which is the doubly commuting case.
    CMat action = pperp.columns * a * pperp.columns.adjoint() +
                  t.w2_frame.columns * b * t.w2_frame.columns.adjoint();
    CMat u(m, m);
    u.topRows(m - p) = pperp.columns.adjoint() * action;
    u.bottomRows(p) = t.w2_frame.columns.adjoint() * action;
    t.u = u;

    auto issues = check_triple(t);
    if (!issues.empty())
        throw Error(issues.front().code, "doubly_commuting_triple invalid: " +
                                             issues.front().message);
    return t;
}

BclTriple direct_sum(const BclTriple& a, const BclTriple& b, double tol)
{
    if (a.d1 != b.d1 || a.d2 != b.d2 || (a.twist - b.twist).norm() > tol)
        throw Error(Errc::dimension_mismatch,
                    "direct_sum requires the same product system on both summands");
    const int d1 = a.d1, d2 = a.d2;
    BclTriple s;
    s.d1 = d1;
    s.d2 = d2;
    s.twist = a.twist;
    s.m = a.m + b.m;
    s.p = a.p + b.p;

    CMat w2 = CMat::Zero(s.m, s.p);
    w2.block(0, 0, a.m, a.p) = a.w2_frame.columns;
    w2.block(a.m, a.p, b.m, b.p) = b.w2_frame.columns;
    s.w2_frame = Frame(s.m, w2);

    Frame ppa = complement_frame(a.w2_frame, tol);
    Frame ppb = complement_frame(b.w2_frame, tol);
    Frame pps = complement_frame(s.w2_frame, tol);

    const long dm = static_cast<long>(d2) * s.m;
    // Channel 1 as an action into W, then re-expressed in the canonical
    // complement frame of the summed triple.
    CMat w_img = CMat::Zero(s.m, dm);
    const long dps = static_cast<long>(d1) * s.p;
    CMat bottom = CMat::Zero(static_cast<long>(d2) * dps, dm);
    CMat abot = a.u.bottomRows(static_cast<long>(d2) * d1 * a.p);
    CMat bbot = b.u.bottomRows(static_cast<long>(d2) * d1 * b.p);
    for (int bb = 0; bb < d2; ++bb) {
        for (long j = 0; j < s.m; ++j) {
            long col = static_cast<long>(bb) * s.m + j;
            if (j < a.m) {
                long acol = static_cast<long>(bb) * a.m + j;
                w_img.col(col).head(a.m) = ppa.columns * a.u.topRows(a.m - a.p).col(acol);
                for (int bp = 0; bp < d2; ++bp)
                    for (int aa = 0; aa < d1; ++aa)
                        for (int k = 0; k < a.p; ++k)
                            bottom((static_cast<long>(bp) * d1 + aa) * s.p + k, col) =
                                abot((static_cast<long>(bp) * d1 + aa) * a.p + k, acol);
            } else {
                long bcol = static_cast<long>(bb) * b.m + (j - a.m);
                w_img.col(col).tail(b.m) = ppb.columns * b.u.topRows(b.m - b.p).col(bcol);
                for (int bp = 0; bp < d2; ++bp)
                    for (int aa = 0; aa < d1; ++aa)
                        for (int k = 0; k < b.p; ++k)
                            bottom((static_cast<long>(bp) * d1 + aa) * s.p + a.p + k, col) =
                                bbot((static_cast<long>(bp) * d1 + aa) * b.p + k, bcol);
            }
        }
    }
    CMat u(dm, dm);
    u.topRows(s.m - s.p) = pps.columns.adjoint() * w_img;
    u.bottomRows(static_cast<long>(d2) * dps) = bottom;
    s.u = u;

    auto issues = check_triple(s, tol);
    if (!issues.empty())
        throw Error(issues.front().code,
                    "direct_sum produced an invalid datum: " + issues.front().message);
    return s;
}

BclTriple conjugate_triple(const BclTriple& t, const CMat& y, double tol)
{
    if (y.rows() != t.m || y.cols() != t.m)
        throw Error(Errc::dimension_mismatch, "conjugate_triple: y must be m x m");
    if (check_unitary(y) > tol)
        throw Error(Errc::not_unitary, "conjugate_triple: y is not unitary");

    BclTriple c = t;
    c.w2_frame = Frame(t.m, y * t.w2_frame.columns);
    Frame pp_old = complement_frame(t.w2_frame, tol);
    Frame pp_new = complement_frame(c.w2_frame, tol);
    CMat r = pp_new.columns.adjoint() * y * pp_old.columns;
    CMat u(t.u.rows(), t.u.cols());
    CMat shrink = kron(CMat::Identity(t.d2, t.d2), CMat(y.adjoint()));
    u.topRows(t.m - t.p) = r * t.u.topRows(t.m - t.p) * shrink;
    u.bottomRows(static_cast<long>(t.d1) * t.d2 * t.p) = bottom_block(t) * shrink;
    c.u = u;

    auto issues = check_triple(c, tol);
    if (!issues.empty())
        throw Error(issues.front().code,
                    "conjugate_triple produced an invalid datum: " + issues.front().message);
    return c;
}

} // namespace bcl
