#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bcl/numcore.hpp"

namespace bcl {

class MoveCache;

/// The flip permutation E2 (x) E1 -> E1 (x) E2, the default twist.
CMat flip_twist(int d1, int d2);

/// Model datum generating a commuting isometric pair on the graded Fock
/// space.  Index conventions, used everywhere downstream:
///   - tensor factors are numbered left to right and the *last* factor index
///     varies fastest (mixed radix);
///   - twist maps E2 (x) E1 -> E1 (x) E2, domain index (b,a), codomain (a,b);
///   - u maps E2 (x) W -> Pperp W  (+)  E2 (x) E1 (x) PW.  Domain index
///     (b, j) with j over W.  Codomain: the first m-p coordinates refer to
///     the canonical orthonormal frame of Pperp W (see complement_frame of
///     w2_frame), the remaining d2*d1*p coordinates are (b, a, k) with k
///     over the columns of w2_frame, k fastest.
struct BclTriple {
    int d1 = 1;
    int d2 = 1;
    CMat twist;     // (d1 d2) x (d1 d2), unitary
    int m = 0;      // dim W
    int p = 0;      // dim W2
    Frame w2_frame; // m x p
    CMat u;         // (d2 m) x (d2 m), unitary

    // optional metadata carried by triple files
    std::string name;
    std::optional<std::uint64_t> seed;
};

struct ValidationIssue {
    Errc code;
    std::string message;
};

/// All structural checks on a candidate triple: shapes, finiteness,
/// unitarity residuals, the dimension constraint p(d1 d2 - 1) = m(d2 - 1),
/// and the tensor-form condition that carves U_L out of u.  Empty result
/// means valid.
std::vector<ValidationIssue> check_triple(const BclTriple& t, double tol = kDefaultTol);

/// A validated triple together with everything derived from it: the
/// wandering frames, the degree-zero/degree-one blocks of the second
/// isometry, and U_L.  Immutable after construction; copies share the
/// cached per-degree operator blocks.
struct StructuredPair {
    BclTriple triple;

    Frame w1_frame;    // W1 = W minus L,            dim q = m - d1 p
    Frame l_frame;     // L  = V1(E1 (x) W2),        dim d1 p
    Frame pperp_frame; // canonical complement of W2, dim m - p
    Frame v2w1_frame;  // V2(E2 (x) W1) = Pperp W,   dim m - p

    CMat theta2_deg0; // m x (d2 m):        degree-preserving block of V2
    CMat theta2_deg1; // (d1 d2 m) x (d2 m): degree-raising block of V2
    CMat ul;          // (d1 p) x (d1 p):   U_L, L-coords -> E1 (x) PW coords

    int degree_budget = 8;

    std::shared_ptr<MoveCache> moves;

    int d1() const { return triple.d1; }
    int d2() const { return triple.d2; }
    int m() const { return triple.m; }
    int p() const { return triple.p; }
    int q() const { return triple.m - triple.d1 * triple.p; } // dim W1
    const Frame& w2_frame() const { return triple.w2_frame; }
};

/// Validates and derives; throws the first ValidationIssue as an Error.
StructuredPair build_pair(const BclTriple& t, double tol = kDefaultTol);

struct DerivedFrames {
    Frame w1, w2, l;
};
DerivedFrames derive_frames(const BclTriple& t, double tol = kDefaultTol);

/// Seed-deterministic valid triple.  W2 is the span of the last p
/// coordinates; U_L is Haar on a Haar-random domain L0, and the remaining
/// block of u is an independent Haar unitary onto Pperp W.  Empty twist
/// means the flip.
BclTriple random_triple(int d1, int d2, int m, int p, std::uint64_t seed,
                        const CMat& twist = CMat());

/// Scalar triple (d1 = d2 = 1) with u block-diagonal with respect to
/// W2 (+) Pperp W.  Such pairs are doubly commuting with zero defect.
BclTriple doubly_commuting_triple(int m, int p, std::uint64_t seed);

/// Block direct sum of two triples over the same product system.  The span
/// of the first summand's coordinates is a reducing subspace of the result.
BclTriple direct_sum(const BclTriple& a, const BclTriple& b, double tol = kDefaultTol);

/// Transport of the whole datum along a unitary y on W.  Conjugated pairs
/// are isomorphic; y itself is the intertwining witness.
BclTriple conjugate_triple(const BclTriple& t, const CMat& y, double tol = kDefaultTol);

} // namespace bcl
