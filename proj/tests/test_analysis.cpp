#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bcl/analysis.hpp"
#include "bcl/oracle.hpp"

#include "support.hpp"

using namespace bcl;
using namespace bcl::testing;

namespace {

CMat scalar_closed_form_defect(const BclTriple& t)
{
    // Scalar case closed form: C = P - U* P U with u read as an action on W.
    Frame pperp = complement_frame(t.w2_frame);
    CMat action = pperp.columns * t.u.topRows(t.m - t.p) +
                  t.w2_frame.columns * t.u.bottomRows(t.p);
    CMat pr = projector(t.w2_frame);
    return pr - action.adjoint() * pr * action;
}

} // namespace

TEST_CASE("defect operator on the scalar models")
{
    StructuredPair id = build_pair(t_id());
    CHECK(defect_operator(id).norm() < 1e-12);

    StructuredPair sw = build_pair(t_swap());
    CMat c = defect_operator(sw);
    CMat want(2, 2);
    want << -1, 0, 0, 1;
    CHECK((c - want).norm() < 1e-12);
    CHECK((c - scalar_closed_form_defect(t_swap())).norm() < 1e-12);
    // oracle route at depth 6
    TruncatedRep tr = truncate(sw, 6);
    CHECK((oracle_defect(tr) - c).cwiseAbs().maxCoeff() < 1e-12);

    for (double th : {M_PI / 6, M_PI / 4, M_PI / 2}) {
        StructuredPair rot = build_pair(t_rot(th));
        CMat cr = defect_operator(rot);
        CHECK((cr - scalar_closed_form_defect(t_rot(th))).norm() < 1e-12);
        Spectrum sp = hermitian_eig(cr, 1e-9);
        CHECK(sp.eigenvalues(0) == doctest::Approx(-std::sin(th)).epsilon(1e-9));
        CHECK(sp.eigenvalues(1) == doctest::Approx(std::sin(th)).epsilon(1e-9));
        TruncatedRep trr = truncate(rot, 6);
        CHECK((oracle_defect(trr) - cr).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("defect routes agree across random instances")
{
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        int m = 2 + static_cast<int>(seed % 5);
        int p = static_cast<int>(seed % (m + 1));
        StructuredPair pair = build_pair(random_triple(1, 1, m, p, seed));
        CMat c = defect_operator(pair);
        CHECK((c - defect_operator_alt(pair)).norm() <= 1e-9);
        CHECK((c - c.adjoint()).norm() <= 1e-10);
        TruncatedRep tr = truncate(pair, 4);
        CHECK((c - oracle_defect(tr)).cwiseAbs().maxCoeff() <= 1e-8);
    }
    StructuredPair multi = build_pair(random_triple(2, 2, 3, 1, 77));
    CHECK((defect_operator(multi) - defect_operator_alt(multi)).norm() <= 1e-9);
    CHECK((defect_operator(multi) - oracle_defect(truncate(multi, 4))).cwiseAbs().maxCoeff()
          <= 1e-8);
}

TEST_CASE("defect_report on closed-form spectra")
{
    StructuredPair id = build_pair(t_id());
    DefectReport r0 = defect_report(id, CMat::Zero(2, 2), 1e-8);
    CHECK(r0.dim_e1 == 0);
    CHECK(r0.dim_em1 == 0);
    CHECK(r0.signature.pos == 0);
    CHECK(r0.signature.neg == 0);
    CHECK(r0.signature.null == 2);
    CHECK(r0.index == 0);

    StructuredPair sw = build_pair(t_swap());
    DefectReport r1 = defect_report(sw, defect_operator(sw), 1e-8);
    CHECK(r1.dim_e1 == 1);
    CHECK(r1.dim_em1 == 1);
    CHECK(r1.index == 0);
    CHECK(r1.signature.pos == 1);
    CHECK(r1.signature.neg == 1);
    CHECK(r1.signature.null == 0);
    CHECK(std::abs(r1.trace - (r1.dim_e1 - r1.dim_em1)) < 1e-8);
    // Eigenspace characterizations hold (E_1 = W1 meet W2, E_-1 = L meet Pperp W)
    CHECK(r1.e1_char_dist <= 1e-8);
    CHECK(r1.em1_char_dist <= 1e-8);

    StructuredPair rot = build_pair(t_rot(M_PI / 4));
    DefectReport r2 = defect_report(rot, defect_operator(rot), 1e-8);
    CHECK(r2.eigenvalues(0) == doctest::Approx(-0.707106781187).epsilon(1e-9));
    CHECK(r2.eigenvalues(1) == doctest::Approx(0.707106781187).epsilon(1e-9));
    CHECK(r2.dim_e1 == 0);
    CHECK(r2.dim_em1 == 0);
    CHECK(r2.paired);
    CHECK(r2.index == 0);
}

TEST_CASE("defect_report raises PairingViolation on unpairable spectra")
{
    StructuredPair id = build_pair(t_id());
    CMat bad(2, 2);
    bad << 0.3, 0, 0, 0.1; // two interior eigenvalues, no mirrors
    CHECK_THROWS_AS((void)defect_report(id, bad, 1e-8), Error);
    try {
        (void)defect_report(id, bad, 1e-8);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::pairing_violation);
    }
}

TEST_CASE("pairing holds across random instances")
{
    for (std::uint64_t seed = 30; seed < 50; ++seed) {
        int m = 2 + static_cast<int>(seed % 5);
        int p = static_cast<int>(seed % (m + 1));
        StructuredPair pair = build_pair(random_triple(1, 1, m, p, seed));
        DefectReport rep = defect_report(pair, defect_operator(pair), 1e-8);
        CHECK(rep.paired);
        CHECK(std::abs(rep.trace - (rep.dim_e1 - rep.dim_em1)) <= 1e-8);
        for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
            CHECK(rep.eigenvalues(i) >= -1.0 - 1e-9);
            CHECK(rep.eigenvalues(i) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("fringe operators on the rotation family")
{
    double th = M_PI / 6;
    StructuredPair rot = build_pair(t_rot(th));
    FringePair fr = fringe_operators(rot);
    REQUIRE(fr.f2.rows() == 1);
    REQUIRE(fr.f2.cols() == 1);
    CHECK(std::abs(fr.f2(0, 0)) == doctest::Approx(std::cos(th)).epsilon(1e-12));

    StructuredPair perp = build_pair(t_rot(M_PI / 2));
    FringePair fp = fringe_operators(perp);
    CHECK(std::abs(fp.f2(0, 0)) < 1e-12);
    CHECK(kernel(fp.f2, 1e-9).rank() == 1);
    DefectReport rep = defect_report(perp, defect_operator(perp), 1e-8);
    CHECK(rep.dim_em1 == 1); // dim ker F2 = dim E_-1(C)

    StructuredPair id = build_pair(t_id());
    FringePair fi = fringe_operators(id);
    CHECK(std::abs(std::abs(fi.f2(0, 0)) - 1.0) < 1e-12); // unitary: doubly commuting
}

TEST_CASE("commutator defect and the K7 family")
{
    StructuredPair id = build_pair(t_id());
    CHECK(commutator_defect(id, 1, 2).norm() < 1e-12);
    CHECK(commutator_defect(id, 2, 1).norm() < 1e-12);

    double th = 0.8;
    StructuredPair rot = build_pair(t_rot(th));
    double leak = 0;
    CMat cd = commutator_defect(rot, 1, 2, &leak);
    CHECK(leak < 1e-12);
    CHECK(cd.squaredNorm() == doctest::Approx(std::sin(th) * std::sin(th)).epsilon(1e-10));

    CHECK(k7_residual(rot, 1, 2) <= 1e-10);
    CHECK(k7_residual(rot, 2, 1) <= 1e-10);
    CHECK(kk7_residual(rot, 1, 2) <= 1e-10);
    CHECK(k8_residual(rot, 1, 2) <= 1e-10);
    CHECK(w4_residual(rot, 1, 2) <= 1e-10);
}

TEST_CASE("quantitative identities on random instances")
{
    struct Shape {
        int d1, d2, m, p;
    };
    std::uint64_t seed = 400;
    for (Shape s : {Shape{1, 1, 4, 2}, Shape{1, 1, 5, 3}, Shape{2, 2, 3, 1},
                    Shape{1, 2, 4, 4}}) {
        for (int rep = 0; rep < 3; ++rep) {
            StructuredPair pair = build_pair(random_triple(s.d1, s.d2, s.m, s.p, ++seed));
            for (auto [i, j] : {std::pair{1, 2}, std::pair{2, 1}}) {
                CHECK(k7_residual(pair, i, j) <= 1e-9);
                CHECK(kk7_residual(pair, i, j) <= 1e-9);
                CHECK(k8_residual(pair, i, j) <= 1e-9);
                CHECK(w4_residual(pair, i, j) <= 1e-9);
            }
            CHECK(wandering_residual(pair) <= 1e-9);
            CHECK(remark_k3_residual(pair) <= 1e-9);
            CHECK(k5_distance(pair, 1e-9) <= 1e-7);
        }
    }
}

TEST_CASE("fredholm index: scalars are zero, (2,2,3,1) is one")
{
    for (std::uint64_t seed = 60; seed < 70; ++seed) {
        int m = 1 + static_cast<int>(seed % 6);
        int p = static_cast<int>(seed % (m + 1));
        StructuredPair pair = build_pair(random_triple(1, 1, m, p, seed));
        CHECK(fredholm_index(pair, 1e-9) == 0);
    }
    for (std::uint64_t seed = 70; seed < 75; ++seed) {
        StructuredPair pair = build_pair(random_triple(2, 2, 3, 1, seed));
        CHECK(fredholm_index(pair, 1e-9) == 1);
        FringePair fr = fringe_operators(pair);
        CHECK(fr.f2.rows() == 1);
        CHECK(fr.f2.cols() == 2);
    }
    StructuredPair full = build_pair(random_triple(1, 2, 4, 4, 80));
    CHECK(fredholm_index(full, 1e-9) == 0);
}

TEST_CASE("classification flags and consistency")
{
    ClassificationRecord id = classify(build_pair(t_id()), 1e-8);
    CHECK(id.doubly_commuting);
    CHECK(id.defect_zero);
    CHECK(id.defect_nonneg);
    CHECK(!id.defect_negdef_on_supp);
    for (bool b : id.h6)
        CHECK(b);
    for (bool b : id.u1)
        CHECK(b);
    CHECK(id.consistent);

    ClassificationRecord rot = classify(build_pair(t_rot(M_PI / 4)), 1e-8);
    CHECK(!rot.doubly_commuting);
    CHECK(!rot.defect_zero);
    CHECK(!rot.defect_nonneg);
    CHECK(rot.consistent);

    ClassificationRecord sw = classify(build_pair(t_swap()), 1e-8);
    CHECK(!sw.defect_nonneg); // C = diag(-1, 1) is not >= 0
    CHECK(!sw.doubly_commuting);
    CHECK(sw.consistent);

    // constructed doubly commuting instances are recognized
    for (std::uint64_t seed = 90; seed < 95; ++seed) {
        ClassificationRecord dc =
            classify(build_pair(doubly_commuting_triple(4, 2, seed)), 1e-8);
        CHECK(dc.doubly_commuting);
        CHECK(dc.defect_zero);
        CHECK(dc.consistent);
    }
    // the full-W2 multiplicity shape has zero defect automatically
    ClassificationRecord m1244 = classify(build_pair(random_triple(1, 2, 4, 4, 96)), 1e-8);
    CHECK(m1244.defect_zero);
    CHECK(m1244.consistent);
}

TEST_CASE("congruence signature and witness")
{
    StructuredPair id = build_pair(t_id());
    CMat d3(3, 3);
    d3.setZero();
    d3(0, 0) = 1;
    d3(1, 1) = -1;
    Signature s = congruence_signature(d3, 1e-9);
    CHECK(s.pos == 1);
    CHECK(s.neg == 1);
    CHECK(s.null == 1);

    Signature z = congruence_signature(CMat::Zero(4, 4), 1e-9);
    CHECK(z.pos == 0);
    CHECK(z.neg == 0);
    CHECK(z.null == 4);

    CMat c1(2, 2), c2(2, 2);
    c1.setZero();
    c2.setZero();
    c1(0, 0) = 2;
    c1(1, 1) = -3;
    c2(0, 0) = 1;
    c2(1, 1) = -1;
    auto l = congruence_witness(c1, c2, 1e-9);
    REQUIRE(l.has_value());
    CHECK((CMat(*l * c1 * l->adjoint()) - c2).norm() <= 1e-7);

    CMat pos2(2, 2);
    pos2.setZero();
    pos2(0, 0) = 1;
    pos2(1, 1) = 1;
    CHECK(!congruence_witness(c2, pos2, 1e-9).has_value());

    // defects of the rotation and swap models share signature (1,1,0)
    CMat ca = defect_operator(build_pair(t_rot(M_PI / 4)));
    CMat cb = defect_operator(build_pair(t_swap()));
    auto lw = congruence_witness(ca, cb, 1e-9);
    REQUIRE(lw.has_value());
    CHECK((CMat(*lw * ca * lw->adjoint()) - cb).norm() <= 1e-7);

    CHECK_THROWS_AS((void)congruence_witness(ca, d3, 1e-9), Error);
}

TEST_CASE("reducing subspaces")
{
    StructuredPair id = build_pair(t_id());
    CHECK(is_reducing_subspace(id, Frame::identity(2), 1e-9));
    CHECK(is_reducing_subspace(id, Frame::coordinate_span(2, 0, 1), 1e-9));
    CHECK(reducing_leak(id, Frame::coordinate_span(2, 0, 1), 5) <= 1e-9);

    StructuredPair rot = build_pair(t_rot(M_PI / 4));
    CHECK(!is_reducing_subspace(rot, Frame::coordinate_span(2, 0, 1), 1e-9));
    CHECK(reducing_leak(rot, Frame::coordinate_span(2, 0, 1), 5) > 1e-3);

    // direct sums reduce along the first summand, conjugation transports it
    BclTriple a = random_triple(1, 1, 3, 2, 101);
    BclTriple b = random_triple(1, 1, 2, 1, 102);
    BclTriple s = direct_sum(a, b);
    StructuredPair ps = build_pair(s);
    Frame first = Frame::coordinate_span(5, 0, 3);
    CHECK(is_reducing_subspace(ps, first, 1e-9));
    CHECK(reducing_leak(ps, first, 5) <= 1e-9);

    Rng rng(103);
    CMat y = haar_unitary(5, rng);
    BclTriple conj = conjugate_triple(s, y);
    Frame moved(5, y * first.columns);
    StructuredPair pc = build_pair(conj);
    CHECK(is_reducing_subspace(pc, moved, 1e-9));
    CHECK(reducing_leak(pc, moved, 5) <= 1e-9);

    Frame generic = orthonormalize_columns(gaussian_matrix(rng, 5, 2));
    CHECK(!is_reducing_subspace(ps, generic, 1e-9));
    CHECK(reducing_leak(ps, generic, 5) > 1e-3);

    CHECK_THROWS_AS((void)is_reducing_subspace(ps, Frame::identity(3), 1e-9), Error);
}

TEST_CASE("intertwiner verification")
{
    StructuredPair id = build_pair(t_id());
    CHECK(verify_intertwiner(id, id, CMat::Identity(2, 2), 4, 1e-9));

    // the swap of a doubled triple intertwines the pair with itself
    BclTriple base = random_triple(1, 1, 3, 2, 110);
    BclTriple doubled = direct_sum(base, base);
    StructuredPair pd = build_pair(doubled);
    CMat swap6 = CMat::Zero(6, 6);
    swap6.block(0, 3, 3, 3) = CMat::Identity(3, 3);
    swap6.block(3, 0, 3, 3) = CMat::Identity(3, 3);
    CHECK(verify_intertwiner(pd, pd, swap6, 3, 1e-9));

    // conjugation by any unitary gives an isomorphic pair, witnessed by it
    Rng rng(111);
    BclTriple t = random_triple(2, 2, 3, 1, 112);
    CMat y = haar_unitary(3, rng);
    StructuredPair pa = build_pair(t);
    StructuredPair pb = build_pair(conjugate_triple(t, y));
    CHECK(verify_intertwiner(pa, pb, y, 3, 1e-9));
    // and a wrong witness fails
    CHECK(!verify_intertwiner(pa, pb, CMat::Identity(3, 3), 3, 1e-9));

    // different models are not intertwined by the identity
    StructuredPair rot = build_pair(t_rot(M_PI / 4));
    CHECK(!verify_intertwiner(id, rot, CMat::Identity(2, 2), 3, 1e-9));

    CHECK_THROWS_AS((void)verify_intertwiner(id, rot, CMat::Identity(3, 3), 3, 1e-9),
                    Error);
    CHECK_THROWS_AS((void)verify_intertwiner(id, pa, CMat::Identity(2, 2), 3, 1e-9),
                    Error); // different multiplicities
}
