#pragma once

#include <map>
#include <mutex>
#include <vector>

#include "bcl/triple.hpp"

namespace bcl {

/// Dimension of the degree-n fiber E1^n (x) E2^n (x) W.
long fiber_dim(int d1, int d2, int m, int n);

/// Finitely supported vector on the graded Fock space.  Coefficients of the
/// degree-n term are indexed (a_1..a_n, b_1..b_n, j), j fastest.
struct GradedVector {
    int d1 = 1, d2 = 1, m = 0;
    std::map<int, CVec> terms;

    GradedVector() = default;
    GradedVector(int d1_, int d2_, int m_) : d1(d1_), d2(d2_), m(m_) {}

    static GradedVector basis(int d1, int d2, int m, int degree, long index);
    static GradedVector from_w(int d1, int d2, int m, const CVec& w0);

    long fiber(int n) const { return fiber_dim(d1, d2, m, n); }
    double norm() const;
    int max_degree() const; // -1 when zero
    void add_term(int n, const CVec& x);
    void prune(double eps = 1e-14);

    GradedVector& operator+=(const GradedVector& o);
    GradedVector& operator-=(const GradedVector& o);
    GradedVector& operator*=(cplx s);
    cplx dot(const GradedVector& o) const; // <this, o>, conjugate-linear in this
};

/// Per-degree sparse operator blocks of the pair, built once and shared.
///
/// Naming: "stay" blocks map the degree-n fiber to itself, "up" blocks raise
/// the degree by one.  sh/sa/sp are the letter moves in the sorted fiber:
///   sh(n): E2 (x) F_n (x) W -> F_n (x) E2 (x) W   (incoming E2 letter walks
///          right across the n E1 letters and lands after the E2 block)
///   sa(n): F_n (x) E1 (x) E2 (x) W -> F_{n+1} (x) W  (trailing new pair is
///          sorted in: the E1 letter walks left across the E2 block)
///   sp(n): E1 (x) E2 (x) F_n (x) W -> F_{n+1} (x) W  (prepended pair: the
///          new E2 letter walks right across the E1 block)
/// Each move applies the twist once per letter crossed.
class MoveCache {
public:
    MoveCache(int d1, int d2, int m, int p, CMat twist, CMat theta0, CMat theta1,
              CMat v1_stay0);

    long fiber(int n) const { return fiber_dim(d1_, d2_, m_, n); }

    const CMat& right_chain(int n) const; // E2 (x) E1^n -> E1^n (x) E2
    const CMat& left_chain(int n) const;  // E2^n (x) E1 -> E1 (x) E2^n

    const SMat& sh(int n) const;
    const SMat& sa(int n) const;
    const SMat& sp(int n) const;

    const SMat& v2_stay(int n) const; // f_n x (d2 f_n), columns (b, i)
    const SMat& v2_up(int n) const;   // f_{n+1} x (d2 f_n)
    const SMat& v1_stay(int n) const; // f_n x (d1 f_n), columns (a, i)
    const SMat& v1_up(int n) const;   // f_{n+1} x (d1 f_n)

    bool raises() const { return p_ > 0; } // v2 has a degree-raising part iff p > 0

private:
    int d1_, d2_, m_, p_;
    CMat twist_, theta0_, theta1_, v1_stay0_;

    mutable std::mutex mu_;
    mutable std::map<int, CMat> right_, left_;
    mutable std::map<int, SMat> sh_, sa_, sp_, v2s_, v2u_, v1s_, v1u_;

    const CMat& right_chain_locked(int n) const;
    const CMat& left_chain_locked(int n) const;
    const SMat& sh_locked(int n) const;
    const SMat& sa_locked(int n) const;
    const SMat& sp_locked(int n) const;
    const SMat& v2_stay_locked(int n) const;
    const SMat& v2_up_locked(int n) const;
    const SMat& v1_stay_locked(int n) const;
    const SMat& v1_up_locked(int n) const;
};

/// Coefficient matrix of the full letter shuffle on E2 (x) E(n,n) ->
/// E(n,n) (x) E2 (no W factor).  Intended for small n.
CMat letter_shuffle(int n, const BclTriple& t);

GradedVector apply_v2(const StructuredPair& pair, int b, const GradedVector& v);
GradedVector apply_v1(const StructuredPair& pair, int a, const GradedVector& v);
std::vector<GradedVector> apply_v2_adjoint(const StructuredPair& pair, const GradedVector& v);
std::vector<GradedVector> apply_v1_adjoint(const StructuredPair& pair, const GradedVector& v);
GradedVector apply_shift(const StructuredPair& pair, int a, int b, const GradedVector& v);
/// Strips the leading letter pair; result indexed a*d2 + b.  Kills degree 0.
std::vector<GradedVector> apply_shift_adjoint(const StructuredPair& pair, const GradedVector& v);

} // namespace bcl
