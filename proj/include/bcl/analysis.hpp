#pragma once

#include <array>
#include <optional>

#include "bcl/graded.hpp"

namespace bcl {

struct Signature {
    int pos = 0, neg = 0, null = 0;
};

/// Spectral picture of the joint defect operator restricted to W.
struct DefectReport {
    CMat c_matrix;
    RVec eigenvalues;
    int dim_e1 = 0;  // multiplicity of +1 at the bucket tolerance
    int dim_em1 = 0; // multiplicity of -1
    bool paired = true;
    Signature signature;
    int index = 0; // dim_em1 - dim_e1
    double trace = 0.0;
    // Distances between the +-1 eigenframes and their independent
    // subspace characterizations (W1 meet W2, resp. L meet V2(E2 (x) W1)).
    double e1_char_dist = 0.0;
    double em1_char_dist = 0.0;
};

/// m x m matrix of C = I - V1 V1* - V2 V2* + V V* restricted to W, computed
/// as P_{W1} - P_{V2(E2 (x) W1)}.
CMat defect_operator(const StructuredPair& pair);

/// The other projector formula P_{W2} - P_{V1(E1 (x) W2)}; agrees with
/// defect_operator up to roundoff.
CMat defect_operator_alt(const StructuredPair& pair);

/// Eigen-analysis of C with +-1 bucketing (absolute tolerance 1e-7), greedy
/// interior pairing within 10*tol, Sylvester signature at tol, and the
/// eigenspace cross-characterizations.  Throws PairingViolation when an
/// interior eigenvalue has no mirror partner.
DefectReport defect_report(const StructuredPair& pair, const CMat& c, double tol);

struct FringePair {
    CMat f1; // p x (d1 p):  E1 (x) W2 -> W2, in the w2 / (a, w2) bases
    CMat f2; // q x (d2 q):  E2 (x) W1 -> W1, in the w1 / (b, w1) bases
};
FringePair fringe_operators(const StructuredPair& pair);

/// Matrix of [V^(j)*, V^(i)] restricted to E_i (x) W_j ({i,j} = {1,2}),
/// codomain E_j (x) W.  The graded residual outside that codomain is
/// reported through *leak when requested (it vanishes identically).
CMat commutator_defect(const StructuredPair& pair, int i, int j, double* leak = nullptr);

/// [V^(i)*, V^(j)] applied to e_letter (x) v, as d_i graded components.
std::vector<GradedVector> commutator_apply(const StructuredPair& pair, int i, int j,
                                           int letter, const GradedVector& v);

/// dim ker F2 - dim coker F2 at the numerical-rank tolerance; checked
/// against the eigenvalue route dim E_{-1}(C) - dim E_1(C).  Disagreement
/// throws IndexMismatch.
int fredholm_index(const StructuredPair& pair, double tol);

struct ClassificationRecord {
    bool doubly_commuting = false;
    bool defect_zero = false;
    bool defect_nonneg = false;
    bool defect_negdef_on_supp = false;
    std::array<bool, 6> h6{};
    std::array<bool, 6> u1{};
    bool consistent = false;
};
ClassificationRecord classify(const StructuredPair& pair, double tol);

Signature congruence_signature(const CMat& c, double tol);

/// Invertible L with L C1 L* = C2 when the signatures (and nullities)
/// match; absent otherwise.
std::optional<CMat> congruence_witness(const CMat& c1, const CMat& c2, double tol);

bool is_reducing_subspace(const StructuredPair& pair, const Frame& wprime, double tol);
bool is_reducing_subspace(const BclTriple& t, const Frame& wprime, double tol);

/// Checks that the unitary X transports the wandering data of pair a onto
/// that of pair b and intertwines the multipliers fiberwise up to the given
/// degree.
bool verify_intertwiner(const StructuredPair& a, const StructuredPair& b, const CMat& x,
                        int depth, double tol);

// --- identity residuals used by the theorem suite -------------------------

/// Wandering decompositions of W, worst projector residual over both splits,
/// with the image frames recomputed through the graded operators.
double wandering_residual(const StructuredPair& pair);

/// I - F^(i)* F^(i) against the double-commutator product on E_i (x) W_j.
double k7_residual(const StructuredPair& pair, int i, int j);

/// F^(i) F^(i)* against I - P_{W_j} P_{W_i} P_{W_j} on W_j.
double kk7_residual(const StructuredPair& pair, int i, int j);

/// C against P_{W_j} P_{W_i} - V^(j) [V^(j)*, V^(i)] V^(i)* on W.
double k8_residual(const StructuredPair& pair, int i, int j);

/// Block-diagonal form of C^2 on W = W_j (+) V^(j)(E_j (x) W_i).
double w4_residual(const StructuredPair& pair, int i, int j);

/// Range of F^(2) against (R(V1) + R(V2)) minus R(V1), inside W.
double k5_distance(const StructuredPair& pair, double tol);

/// Derived one-letter blocks of the first multiplier against their
/// closed-form assembly from u.
double remark_k3_residual(const StructuredPair& pair);

} // namespace bcl
