#pragma once

#include "bcl/analysis.hpp"
#include "bcl/graded.hpp"

namespace bcl {

/// Dense truncation of the pair up to degree N.  The operators are stored
/// sparsely (their columns are genuinely sparse); v1_dense() etc. expand to
/// the dense matrices when a caller wants them.  Column layout: letter-major
/// blocks of the graded space, degrees stacked by `offsets`.
struct TruncatedRep {
    StructuredPair pair; // shares the cached operator blocks
    int N = 0;
    std::vector<long> dims;    // fiber dims per degree, 0..N
    std::vector<long> offsets; // prefix sums, offsets[N+1] = total
    long total = 0;
    long interior_total = 0; // degrees <= N-1

    SMat v1; // total x (d1 total)
    SMat v2; // total x (d2 total)
    SMat v;  // total x (d1 d2 total), the letter-concatenation shift

    CMat v1_dense() const { return CMat(v1); }
    CMat v2_dense() const { return CMat(v2); }
    CMat v_dense() const { return CMat(v); }
};

/// Builds the truncation; BudgetExceeded when the summed fiber dims pass
/// the budget.  The assembly is OpenMP-parallel over operator blocks.
TruncatedRep truncate(const StructuredPair& pair, int N, long budget = 20000);

/// Single-threaded reference assembly, kept for testing the parallel path.
TruncatedRep truncate_serial(const StructuredPair& pair, int N, long budget = 20000);

/// m x m block of I - V1 V1* - V2 V2* + V V* on degree zero, straight from
/// the truncated matrices.
CMat oracle_defect(const TruncatedRep& trunc);

/// Frobenius residuals of the defining identities, asserted on the interior
/// (degrees <= N-1, where the truncation represents the operators exactly).
struct ResidualReport {
    int depth = 0;
    bool reduced_coverage = false; // N <= 2 leaves little room for two-step checks
    double isometry_v1 = 0, isometry_v2 = 0, isometry_v = 0;
    double commutation_12 = 0, commutation_21 = 0;
    double product_shift = 0;
    double kernel_w = 0;
    double max() const
    {
        return std::max({isometry_v1, isometry_v2, isometry_v, commutation_12,
                         commutation_21, product_shift, kernel_w});
    }
};
ResidualReport residuals(const TruncatedRep& trunc, double tol);

/// Cross-check of the analysis outputs against oracle recomputations.
struct CompareReport {
    double c_dev = 0;       // max abs entry, defect operator vs oracle
    double c_alt_dev = 0;   // second projector formula vs oracle
    double w1_dist = 0, w2_dist = 0;
    double f1_sv_dev = 0, f2_sv_dev = 0; // singular-value deviations
    double e1_dist = 0, em1_dist = 0;    // +-1 eigenspace frames
    int index_oracle = 0, index_analysis = 0;
    bool index_match = true;
    double max_deviation() const
    {
        return std::max({c_dev, c_alt_dev, w1_dist, w2_dist, f1_sv_dev, f2_sv_dev,
                         e1_dist, em1_dist});
    }
};
CompareReport compare(const StructuredPair& pair, const TruncatedRep& trunc, double tol);

/// How far the truncated operators push F(E) (x) W' out of itself: the
/// worst Frobenius leak of v1, v2 and their adjoints applied to the graded
/// W'-subspace, measured inside the depth-N truncation.
double reducing_leak(const StructuredPair& pair, const Frame& wprime, int depth);

} // namespace bcl
