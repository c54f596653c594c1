#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bcl/graded.hpp"
#include "bcl/triple.hpp"

#include "support.hpp"

using namespace bcl;
using namespace bcl::testing;

TEST_CASE("validate accepts the scalar identity model")
{
    BclTriple t = t_id();
    CHECK(check_triple(t).empty());
    StructuredPair pair = build_pair(t);
    // L = U*(PW) = span e2
    CHECK(pair.l_frame.rank() == 1);
    CHECK(std::abs(pair.l_frame.columns(1, 0)) == doctest::Approx(1.0));
    CHECK(pair.q() == 1);
}

TEST_CASE("validate rejects the infeasible (2,2,3,2) shape")
{
    auto issues = check_triple([] {
        BclTriple t;
        t.d1 = t.d2 = 2;
        t.m = 3;
        t.p = 2;
        t.twist = flip_twist(2, 2);
        t.w2_frame = Frame::coordinate_span(3, 1, 2);
        t.u = CMat::Identity(6, 6);
        return t;
    }());
    REQUIRE(!issues.empty());
    CHECK(issues.front().code == Errc::dimension_mismatch);
    CHECK_THROWS_AS((void)random_triple(2, 2, 3, 2, 1), Error);
}

TEST_CASE("validate checks unitarity and the tensor-form condition")
{
    BclTriple t = random_triple(2, 2, 3, 1, 7);
    CHECK(check_triple(t).empty());

    BclTriple bad = t;
    bad.u(0, 0) += 0.5;
    bool saw_unitary = false;
    for (const auto& is : check_triple(bad))
        saw_unitary |= is.code == Errc::not_unitary;
    CHECK(saw_unitary);

    // A unitary u that scrambles E2 (x) L breaks the factored form: swap two
    // rows inside the channel-2 block across different E2 letters.
    BclTriple scr = t;
    scr.u.row(1).swap(scr.u.row(3)); // rows 1,3 live in E2 (x) E1 (x) PW
    bool saw_tensor = false;
    for (const auto& is : check_triple(scr))
        saw_tensor |= is.code == Errc::tensor_form_violation ||
                      is.code == Errc::not_unitary;
    CHECK(saw_tensor);
}

TEST_CASE("the (2,2,3,1) random construction satisfies the factored form directly")
{
    BclTriple t = random_triple(2, 2, 3, 1, 11);
    StructuredPair pair = build_pair(t);
    // Direct oracle: u(E2 (x) L) fills the channel-2 coordinates, with equal
    // blocks across the E2 index and nothing in channel 1.
    CMat img = t.u * kron(CMat::Identity(2, 2), pair.l_frame.columns);
    CHECK(img.topRows(t.m - t.p).norm() < 1e-12);
    const long dp = 2 * t.p;
    CMat blk00 = img.block(t.m - t.p, 0, dp, pair.l_frame.rank());
    CMat blk11 = img.block(t.m - t.p + dp, pair.l_frame.rank(), dp, pair.l_frame.rank());
    CMat off = img.block(t.m - t.p + dp, 0, dp, pair.l_frame.rank());
    CHECK((blk00 - blk11).norm() < 1e-12);
    CHECK(off.norm() < 1e-12);
    CHECK(check_unitary(blk00) < 1e-12);
    CHECK((blk00 - pair.ul).norm() < 1e-12);
}

TEST_CASE("derive_frames on the three scalar models")
{
    auto dist_to_span = [](const Frame& f, std::initializer_list<cplx> v) {
        CMat c(2, 1);
        Eigen::Index i = 0;
        for (cplx z : v)
            c(i++, 0) = z;
        c /= c.norm();
        return subspace_distance(f, Frame(2, c));
    };
    DerivedFrames a = derive_frames(t_id());
    CHECK(dist_to_span(a.w1, {1, 0}) < 1e-12);
    CHECK(dist_to_span(a.w2, {0, 1}) < 1e-12);
    CHECK(dist_to_span(a.l, {0, 1}) < 1e-12);

    DerivedFrames b = derive_frames(t_swap());
    CHECK(dist_to_span(b.w1, {0, 1}) < 1e-12);
    CHECK(dist_to_span(b.l, {1, 0}) < 1e-12);

    double th = 0.6;
    DerivedFrames c = derive_frames(t_rot(th));
    CHECK(dist_to_span(c.w1, {std::cos(th), -std::sin(th)}) < 1e-12);
}

TEST_CASE("letter_shuffle")
{
    BclTriple t = t_id();
    CHECK((letter_shuffle(0, t) - CMat::Identity(1, 1)).norm() == 0.0);

    // scalar twist lambda composes to lambda^n
    BclTriple lam = t_id();
    lam.twist(0, 0) = std::polar(1.0, M_PI / 3);
    CMat s2 = letter_shuffle(2, lam);
    CHECK(std::abs(s2(0, 0) - std::polar(1.0, 2 * M_PI / 3)) < 1e-15);

    // Flip twist, n = 1: the 8x8 permutation (b, a1, b1) -> (a1, b, b1).
    // The incoming letter crosses only the E1 letter and heads the E2 block;
    // the word's own b1 exits into the trailing slot.
    BclTriple f22 = random_triple(2, 2, 3, 1, 3);
    CMat sh = letter_shuffle(1, f22);
    REQUIRE(sh.rows() == 8);
    CMat want = CMat::Zero(8, 8);
    for (int b = 0; b < 2; ++b)
        for (int a1 = 0; a1 < 2; ++a1)
            for (int b1 = 0; b1 < 2; ++b1)
                want(4 * a1 + 2 * b + b1, 4 * b + 2 * a1 + b1) = 1.0;
    CHECK((sh - want).norm() == 0.0);
}

TEST_CASE("apply_v2 on the scalar identity model")
{
    StructuredPair pair = build_pair(t_id());
    CVec e1 = CVec::Zero(2), e2 = CVec::Zero(2);
    e1(0) = 1;
    e2(1) = 1;

    GradedVector r1 = apply_v2(pair, 0, GradedVector::from_w(1, 1, 2, e1));
    REQUIRE(r1.terms.count(0) == 1);
    CHECK(r1.terms.count(1) == 0);
    CHECK((r1.terms[0] - e1).norm() < 1e-15);

    GradedVector r2 = apply_v2(pair, 0, GradedVector::from_w(1, 1, 2, e2));
    CHECK(r2.terms.count(0) == 0);
    REQUIRE(r2.terms.count(1) == 1);
    CHECK((r2.terms[1] - e2).norm() < 1e-15);

    GradedVector zero(1, 1, 2);
    CHECK(apply_v2(pair, 0, zero).terms.empty());
}

TEST_CASE("apply_v1 on the scalar identity model")
{
    StructuredPair pair = build_pair(t_id());
    CVec e1 = CVec::Zero(2), e2 = CVec::Zero(2);
    e1(0) = 1;
    e2(1) = 1;

    GradedVector r2 = apply_v1(pair, 0, GradedVector::from_w(1, 1, 2, e2));
    REQUIRE(r2.terms.count(0) == 1);
    CHECK(r2.terms.count(1) == 0);
    CHECK((r2.terms[0] - e2).norm() < 1e-15);

    GradedVector r1 = apply_v1(pair, 0, GradedVector::from_w(1, 1, 2, e1));
    CHECK(r1.terms.count(0) == 0);
    REQUIRE(r1.terms.count(1) == 1);
    CHECK((r1.terms[1] - e1).norm() < 1e-15);
}

TEST_CASE("isometry, adjoints and the shift on random instances")
{
    struct Shape {
        int d1, d2, m, p;
        std::uint64_t seed;
    };
    for (Shape s : {Shape{1, 1, 4, 2, 5}, Shape{1, 1, 6, 3, 6}, Shape{2, 2, 3, 1, 7},
                    Shape{1, 2, 4, 4, 8}}) {
        StructuredPair pair = build_pair(random_triple(s.d1, s.d2, s.m, s.p, s.seed));
        Rng rng(s.seed + 100);
        GradedVector v = random_graded(pair, 3, rng);
        double nv = v.norm();

        for (int b = 0; b < s.d2; ++b)
            CHECK(apply_v2(pair, b, v).norm() == doctest::Approx(nv).epsilon(1e-10));
        for (int a = 0; a < s.d1; ++a)
            CHECK(apply_v1(pair, a, v).norm() == doctest::Approx(nv).epsilon(1e-10));

        // adjoint pairing <V2(e_b (x) x), y> = <x, (V2* y)_b>
        GradedVector y = random_graded(pair, 4, rng);
        auto v2a = apply_v2_adjoint(pair, y);
        auto v1a = apply_v1_adjoint(pair, y);
        for (int b = 0; b < s.d2; ++b) {
            cplx lhs = apply_v2(pair, b, v).dot(y);
            cplx rhs = v.dot(v2a[b]);
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }
        for (int a = 0; a < s.d1; ++a) {
            cplx lhs = apply_v1(pair, a, v).dot(y);
            cplx rhs = v.dot(v1a[a]);
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }

        // V* V = I letterwise: sum_b (V2* V2(e_b (x) v))_b recovers v
        for (int b = 0; b < s.d2; ++b) {
            auto back = apply_v2_adjoint(pair, apply_v2(pair, b, v));
            GradedVector diff = back[b];
            diff -= v;
            CHECK(diff.norm() < 1e-10);
            for (int bp = 0; bp < s.d2; ++bp)
                if (bp != b)
                    CHECK(back[bp].norm() < 1e-10);
        }

        // product equals the letter-concatenation shift
        for (int a = 0; a < s.d1; ++a)
            for (int b = 0; b < s.d2; ++b) {
                GradedVector lhs = apply_v1(pair, a, apply_v2(pair, b, v));
                lhs -= apply_shift(pair, a, b, v);
                CHECK(lhs.norm() < 1e-10);
            }

        // shift adjoint kills degree zero and inverts the shift
        CVec w0 = CVec::Zero(s.m);
        w0(0) = 1;
        auto dead = apply_shift_adjoint(pair, GradedVector::from_w(s.d1, s.d2, s.m, w0));
        for (const auto& g : dead)
            CHECK(g.norm() == 0.0);
        auto strip = apply_shift_adjoint(pair, apply_shift(pair, 0, 0, v));
        GradedVector diff = strip[0];
        diff -= v;
        CHECK(diff.norm() < 1e-10);
    }
}

TEST_CASE("commutation holds on every fiber basis vector")
{
    CHECK(commutation_residual(build_pair(random_triple(1, 1, 3, 2, 21)), 5) <= 1e-9);
    CHECK(commutation_residual(build_pair(random_triple(2, 2, 3, 1, 22)), 3) <= 1e-9);
    CHECK(commutation_residual(build_pair(random_triple(1, 2, 4, 4, 23)), 4) <= 1e-9);

    // scalar lambda-commuting pair: twist a unimodular scalar
    CMat lam(1, 1);
    lam(0, 0) = std::polar(1.0, 0.9);
    CHECK(commutation_residual(build_pair(random_triple(1, 1, 4, 2, 24, lam)), 5) <= 1e-9);

    // non-flip unitary twist on the (2,2,3,1) shape
    Rng rng(25);
    CHECK(commutation_residual(
              build_pair(random_triple(2, 2, 3, 1, 26, haar_unitary(4, rng))), 3) <= 1e-9);

    // d1 > 1 with d2 = 1 forces p = 0; only the E1 letters are nontrivial
    CHECK(commutation_residual(build_pair(random_triple(2, 1, 3, 0, 27)), 3) <= 1e-9);
}

TEST_CASE("a scalar twist lambda yields a lambda-commuting pair")
{
    // V2 V1 = lambda V1 V2; the orientation of the twist matters here.
    cplx lambda = std::polar(1.0, 1.3);
    CMat tw(1, 1);
    tw(0, 0) = lambda;
    StructuredPair pair = build_pair(random_triple(1, 1, 4, 2, 28, tw));
    Rng rng(29);
    GradedVector v = random_graded(pair, 3, rng);
    GradedVector lhs = apply_v2(pair, 0, apply_v1(pair, 0, v));
    GradedVector rhs = apply_v1(pair, 0, apply_v2(pair, 0, v));
    rhs *= lambda;
    lhs -= rhs;
    CHECK(lhs.norm() < 1e-10);
}

TEST_CASE("purity: k-fold adjoint shifts annihilate low degrees")
{
    StructuredPair pair = build_pair(random_triple(2, 2, 3, 1, 31));
    Rng rng(32);
    for (int maxdeg = 0; maxdeg <= 2; ++maxdeg) {
        GradedVector v = random_graded(pair, maxdeg, rng);
        // apply shift adjoint maxdeg+1 times; everything must vanish
        std::vector<GradedVector> layer{v};
        for (int step = 0; step <= maxdeg; ++step) {
            std::vector<GradedVector> next;
            for (const auto& g : layer) {
                if (g.terms.empty())
                    continue;
                auto parts = apply_shift_adjoint(pair, g);
                next.insert(next.end(), parts.begin(), parts.end());
            }
            layer = std::move(next);
        }
        double total = 0;
        for (const auto& g : layer)
            total += g.norm();
        CHECK(total == 0.0);
    }
}

TEST_CASE("random_triple is deterministic and shaped as documented")
{
    BclTriple a = random_triple(1, 1, 2, 1, 0);
    CHECK(check_triple(a).empty());

    BclTriple b1 = random_triple(2, 2, 3, 1, 9);
    BclTriple b2 = random_triple(2, 2, 3, 1, 9);
    CHECK((b1.u - b2.u).norm() == 0.0);
    CHECK(derive_frames(b1).w1.rank() == 1);

    for (int p = 0; p < 4; ++p)
        CHECK_THROWS_AS((void)random_triple(1, 2, 4, p, 1), Error);
    BclTriple c = random_triple(1, 2, 4, 4, 1);
    CHECK(derive_frames(c).w1.rank() == 0);
}

TEST_CASE("degree budget is enforced, never silently truncated")
{
    StructuredPair pair = build_pair(random_triple(1, 1, 2, 1, 41));
    pair.degree_budget = 3;
    Rng rng(42);
    GradedVector v = random_graded(pair, 3, rng);
    CHECK_THROWS_AS((void)apply_shift(pair, 0, 0, v), Error);
    GradedVector ok = random_graded(pair, 2, rng);
    CHECK_NOTHROW((void)apply_shift(pair, 0, 0, ok));
}

TEST_CASE("direct sums validate and conjugation preserves validity")
{
    BclTriple a = random_triple(1, 1, 3, 1, 51);
    BclTriple b = random_triple(1, 1, 2, 1, 52);
    BclTriple s = direct_sum(a, b);
    CHECK(s.m == 5);
    CHECK(s.p == 2);
    CHECK(check_triple(s).empty());

    BclTriple ab = random_triple(2, 2, 3, 1, 53);
    BclTriple bb = random_triple(2, 2, 3, 1, 54);
    BclTriple sb = direct_sum(ab, bb);
    CHECK(check_triple(sb).empty());
    CHECK(commutation_residual(build_pair(sb), 2) <= 1e-9);

    Rng rng(55);
    CMat y = haar_unitary(5, rng);
    BclTriple conj = conjugate_triple(s, y);
    CHECK(check_triple(conj).empty());
}
