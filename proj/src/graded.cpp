#include "bcl/graded.hpp"

#include <cmath>

namespace bcl {

long fiber_dim(int d1, int d2, int m, int n)
{
    long f = m;
    for (int i = 0; i < n; ++i)
        f *= static_cast<long>(d1) * d2;
    return f;
}

static long ipow(long b, int e)
{
    long r = 1;
    for (int i = 0; i < e; ++i)
        r *= b;
    return r;
}

// ---------------------------------------------------------------------------
// GradedVector

GradedVector GradedVector::basis(int d1, int d2, int m, int degree, long index)
{
    GradedVector v(d1, d2, m);
    CVec x = CVec::Zero(fiber_dim(d1, d2, m, degree));
    x(index) = 1.0;
    v.terms.emplace(degree, std::move(x));
    return v;
}

GradedVector GradedVector::from_w(int d1, int d2, int m, const CVec& w0)
{
    GradedVector v(d1, d2, m);
    if (w0.size() != m)
        throw Error(Errc::invalid_input, "from_w: wrong length");
    v.terms.emplace(0, w0);
    return v;
}

double GradedVector::norm() const
{
    double s = 0;
    for (const auto& [n, x] : terms)
        s += x.squaredNorm();
    return std::sqrt(s);
}

int GradedVector::max_degree() const
{
    return terms.empty() ? -1 : terms.rbegin()->first;
}

void GradedVector::add_term(int n, const CVec& x)
{
    if (x.size() != fiber(n))
        throw Error(Errc::invalid_input, "add_term: fiber length mismatch at degree " +
                                             std::to_string(n));
    auto it = terms.find(n);
    if (it == terms.end())
        terms.emplace(n, x);
    else
        it->second += x;
}

void GradedVector::prune(double eps)
{
    for (auto it = terms.begin(); it != terms.end();) {
        if (it->second.norm() < eps)
            it = terms.erase(it);
        else
            ++it;
    }
}

GradedVector& GradedVector::operator+=(const GradedVector& o)
{
    for (const auto& [n, x] : o.terms)
        add_term(n, x);
    return *this;
}

GradedVector& GradedVector::operator-=(const GradedVector& o)
{
    for (const auto& [n, x] : o.terms)
        add_term(n, -x);
    return *this;
}

GradedVector& GradedVector::operator*=(cplx s)
{
    for (auto& [n, x] : terms)
        x *= s;
    return *this;
}

cplx GradedVector::dot(const GradedVector& o) const
{
    cplx s = 0;
    for (const auto& [n, x] : terms) {
        auto it = o.terms.find(n);
        if (it != o.terms.end())
            s += x.dot(it->second);
    }
    return s;
}

// ---------------------------------------------------------------------------
// MoveCache

MoveCache::MoveCache(int d1, int d2, int m, int p, CMat twist, CMat theta0, CMat theta1,
                     CMat v1_stay0)
    : d1_(d1), d2_(d2), m_(m), p_(p), twist_(std::move(twist)), theta0_(std::move(theta0)),
      theta1_(std::move(theta1)), v1_stay0_(std::move(v1_stay0))
{
}

const CMat& MoveCache::right_chain_locked(int n) const
{
    auto it = right_.find(n);
    if (it != right_.end())
        return it->second;
    CMat k;
    if (n == 0) {
        k = CMat::Identity(d2_, d2_);
    } else if (n == 1) {
        k = twist_;
    } else {
        const CMat& prev = right_chain_locked(n - 1);
        long a_prev = ipow(d1_, n - 1);
        k = kron(CMat::Identity(a_prev, a_prev), twist_) *
            kron(prev, CMat::Identity(d1_, d1_));
    }
    return right_.emplace(n, std::move(k)).first->second;
}

const CMat& MoveCache::left_chain_locked(int n) const
{
    auto it = left_.find(n);
    if (it != left_.end())
        return it->second;
    CMat k;
    if (n == 0) {
        k = CMat::Identity(d1_, d1_);
    } else if (n == 1) {
        k = twist_;
    } else {
        const CMat& prev = left_chain_locked(n - 1);
        long b_prev = ipow(d2_, n - 1);
        k = kron(twist_, CMat::Identity(b_prev, b_prev)) *
            kron(CMat::Identity(d2_, d2_), prev);
    }
    return left_.emplace(n, std::move(k)).first->second;
}

const SMat& MoveCache::sh_locked(int n) const
{
    auto it = sh_.find(n);
    if (it != sh_.end())
        return it->second;
    const long a = ipow(d1_, n), b = ipow(d2_, n), m = m_;
    const CMat& k = right_chain_locked(n); // rows (alpha', b'), cols (bb, alpha)
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<std::size_t>(a * b * m * d2_));
    // The incoming letter crosses the E1 block only (t_{2,2} = id never
    // swaps same-type letters): it lands at the front of the E2 block and
    // the word's last E2 letter exits into the trailing slot.
    for (long row = 0; row < k.rows(); ++row)
        for (long col = 0; col < k.cols(); ++col) {
            cplx val = k(row, col);
            if (val == cplx(0.0, 0.0))
                continue;
            long alphap = row / d2_, bp = row % d2_;
            long bb = col / a, alpha = col % a;
            for (long beta = 0; beta < b; ++beta) {
                long beta_out = (n == 0) ? 0 : bp * (b / d2_) + beta / d2_;
                long exit = (n == 0) ? bp : beta % d2_;
                for (long j = 0; j < m; ++j)
                    trips.emplace_back(((alphap * b + beta_out) * d2_ + exit) * m + j,
                                       ((bb * a + alpha) * b + beta) * m + j, val);
            }
        }
    SMat s(a * b * d2_ * m, d2_ * a * b * m);
    s.setFromTriplets(trips.begin(), trips.end());
    return sh_.emplace(n, std::move(s)).first->second;
}

const SMat& MoveCache::sa_locked(int n) const
{
    auto it = sa_.find(n);
    if (it != sa_.end())
        return it->second;
    const long a = ipow(d1_, n), b = ipow(d2_, n), m = m_;
    const CMat& k = left_chain_locked(n); // rows (a', beta'), cols (beta, aa)
    std::vector<Eigen::Triplet<cplx>> trips;
    for (long row = 0; row < k.rows(); ++row)
        for (long col = 0; col < k.cols(); ++col) {
            cplx val = k(row, col);
            if (val == cplx(0.0, 0.0))
                continue;
            long ap = row / b, betap = row % b;
            long beta = col / d1_, aa = col % d1_;
            for (long alpha = 0; alpha < a; ++alpha)
                for (long bb = 0; bb < d2_; ++bb)
                    for (long j = 0; j < m; ++j)
                        trips.emplace_back(
                            ((alpha * d1_ + ap) * (b * d2_) + (betap * d2_ + bb)) * m + j,
                            (((alpha * b + beta) * d1_ + aa) * d2_ + bb) * m + j, val);
        }
    SMat s(a * d1_ * b * d2_ * m, a * b * d1_ * d2_ * m);
    s.setFromTriplets(trips.begin(), trips.end());
    return sa_.emplace(n, std::move(s)).first->second;
}

const SMat& MoveCache::sp_locked(int n) const
{
    auto it = sp_.find(n);
    if (it != sp_.end())
        return it->second;
    const long a = ipow(d1_, n), b = ipow(d2_, n), m = m_;
    const CMat& k = right_chain_locked(n); // rows (alpha', b'), cols (bb, alpha)
    std::vector<Eigen::Triplet<cplx>> trips;
    for (long row = 0; row < k.rows(); ++row)
        for (long col = 0; col < k.cols(); ++col) {
            cplx val = k(row, col);
            if (val == cplx(0.0, 0.0))
                continue;
            long alphap = row / d2_, bp = row % d2_;
            long bb = col / a, alpha = col % a;
            for (long aa = 0; aa < d1_; ++aa)
                for (long beta = 0; beta < b; ++beta)
                    for (long j = 0; j < m; ++j)
                        trips.emplace_back(
                            ((aa * a + alphap) * (d2_ * b) + (bp * b + beta)) * m + j,
                            (((aa * d2_ + bb) * a + alpha) * b + beta) * m + j, val);
        }
    SMat s(d1_ * a * d2_ * b * m, d1_ * d2_ * a * b * m);
    s.setFromTriplets(trips.begin(), trips.end());
    return sp_.emplace(n, std::move(s)).first->second;
}

const SMat& MoveCache::v2_stay_locked(int n) const
{
    auto it = v2s_.find(n);
    if (it != v2s_.end())
        return it->second;
    long blocks = ipow(d1_, n) * ipow(d2_, n);
    SMat s = kron_identity_dense_block(blocks, theta0_) * sh_locked(n);
    return v2s_.emplace(n, std::move(s)).first->second;
}

const SMat& MoveCache::v2_up_locked(int n) const
{
    auto it = v2u_.find(n);
    if (it != v2u_.end())
        return it->second;
    long blocks = ipow(d1_, n) * ipow(d2_, n);
    SMat s = sa_locked(n) * (kron_identity_dense_block(blocks, theta1_) * sh_locked(n));
    return v2u_.emplace(n, std::move(s)).first->second;
}

const SMat& MoveCache::v1_stay_locked(int n) const
{
    auto it = v1s_.find(n);
    if (it != v1s_.end())
        return it->second;
    SMat s;
    if (n == 0) {
        s = v1_stay0_.sparseView();
    } else {
        long blocks = ipow(d1_, n - 1) * ipow(d2_, n - 1);
        SMat m2down = SMat(sh_locked(n - 1).adjoint()) *
                      (SMat(kron_identity_dense_block(blocks, theta1_).adjoint()) *
                       SMat(sa_locked(n - 1).adjoint()));
        s = sp_locked(n - 1) * kron_identity_sparse(d1_, m2down);
    }
    return v1s_.emplace(n, std::move(s)).first->second;
}

const SMat& MoveCache::v1_up_locked(int n) const
{
    auto it = v1u_.find(n);
    if (it != v1u_.end())
        return it->second;
    long blocks = ipow(d1_, n) * ipow(d2_, n);
    SMat m2stay = SMat(sh_locked(n).adjoint()) *
                  SMat(kron_identity_dense_block(blocks, theta0_).adjoint());
    SMat s = sp_locked(n) * kron_identity_sparse(d1_, m2stay);
    return v1u_.emplace(n, std::move(s)).first->second;
}

#define BCL_LOCKED_GETTER(name)                         \
    const SMat& MoveCache::name(int n) const            \
    {                                                   \
        std::lock_guard<std::mutex> lock(mu_);          \
        return name##_locked(n);                        \
    }

const CMat& MoveCache::right_chain(int n) const
{
    std::lock_guard<std::mutex> lock(mu_);
    return right_chain_locked(n);
}
const CMat& MoveCache::left_chain(int n) const
{
    std::lock_guard<std::mutex> lock(mu_);
    return left_chain_locked(n);
}
BCL_LOCKED_GETTER(sh)
BCL_LOCKED_GETTER(sa)
BCL_LOCKED_GETTER(sp)
BCL_LOCKED_GETTER(v2_stay)
BCL_LOCKED_GETTER(v2_up)
BCL_LOCKED_GETTER(v1_stay)
BCL_LOCKED_GETTER(v1_up)

#undef BCL_LOCKED_GETTER

// ---------------------------------------------------------------------------

CMat letter_shuffle(int n, const BclTriple& t)
{
    const long a = ipow(t.d1, n), b = ipow(t.d2, n);
    CMat k;
    if (n == 0) {
        k = CMat::Identity(t.d2, t.d2);
    } else {
        k = t.twist;
        for (int i = 2; i <= n; ++i) {
            long a_prev = ipow(t.d1, i - 1);
            k = kron(CMat::Identity(a_prev, a_prev), t.twist) *
                kron(k, CMat::Identity(t.d1, t.d1));
        }
    }
    CMat out = CMat::Zero(a * b * t.d2, t.d2 * a * b);
    for (long row = 0; row < k.rows(); ++row)
        for (long col = 0; col < k.cols(); ++col) {
            cplx val = k(row, col);
            if (val == cplx(0.0, 0.0))
                continue;
            long alphap = row / t.d2, bp = row % t.d2;
            long bb = col / a, alpha = col % a;
            for (long beta = 0; beta < b; ++beta) {
                long beta_out = (n == 0) ? 0 : bp * (b / t.d2) + beta / t.d2;
                long exit = (n == 0) ? bp : beta % t.d2;
                out((alphap * b + beta_out) * t.d2 + exit, (bb * a + alpha) * b + beta) =
                    val;
            }
        }
    return out;
}

static void check_shape(const StructuredPair& pair, const GradedVector& v)
{
    if (v.d1 != pair.d1() || v.d2 != pair.d2() || v.m != pair.m())
        throw Error(Errc::invalid_input, "graded vector shape does not match the pair");
}

static void check_budget(const StructuredPair& pair, int degree)
{
    if (degree > pair.degree_budget)
        throw Error(Errc::budget_exceeded,
                    "degree " + std::to_string(degree) + " exceeds budget " +
                        std::to_string(pair.degree_budget));
}

GradedVector apply_v2(const StructuredPair& pair, int b, const GradedVector& v)
{
    check_shape(pair, v);
    const MoveCache& mc = *pair.moves;
    GradedVector out(v.d1, v.d2, v.m);
    for (const auto& [n, x] : v.terms) {
        long f = mc.fiber(n);
        out.add_term(n, mc.v2_stay(n).middleCols(b * f, f) * x);
        if (mc.raises()) {
            check_budget(pair, n + 1);
            out.add_term(n + 1, mc.v2_up(n).middleCols(b * f, f) * x);
        }
    }
    out.prune();
    return out;
}

GradedVector apply_v1(const StructuredPair& pair, int a, const GradedVector& v)
{
    check_shape(pair, v);
    const MoveCache& mc = *pair.moves;
    GradedVector out(v.d1, v.d2, v.m);
    for (const auto& [n, x] : v.terms) {
        long f = mc.fiber(n);
        out.add_term(n, mc.v1_stay(n).middleCols(a * f, f) * x);
        check_budget(pair, n + 1);
        out.add_term(n + 1, mc.v1_up(n).middleCols(a * f, f) * x);
    }
    out.prune();
    return out;
}

std::vector<GradedVector> apply_v2_adjoint(const StructuredPair& pair, const GradedVector& v)
{
    check_shape(pair, v);
    const MoveCache& mc = *pair.moves;
    std::vector<GradedVector> outs(pair.d2(), GradedVector(v.d1, v.d2, v.m));
    for (const auto& [k, y] : v.terms) {
        long f = mc.fiber(k);
        CVec z = mc.v2_stay(k).adjoint() * y;
        for (int b = 0; b < pair.d2(); ++b)
            outs[b].add_term(k, z.segment(b * f, f));
        if (k >= 1 && mc.raises()) {
            long fd = mc.fiber(k - 1);
            CVec z2 = mc.v2_up(k - 1).adjoint() * y;
            for (int b = 0; b < pair.d2(); ++b)
                outs[b].add_term(k - 1, z2.segment(b * fd, fd));
        }
    }
    for (auto& o : outs)
        o.prune();
    return outs;
}

std::vector<GradedVector> apply_v1_adjoint(const StructuredPair& pair, const GradedVector& v)
{
    check_shape(pair, v);
    const MoveCache& mc = *pair.moves;
    std::vector<GradedVector> outs(pair.d1(), GradedVector(v.d1, v.d2, v.m));
    for (const auto& [k, y] : v.terms) {
        long f = mc.fiber(k);
        CVec z = mc.v1_stay(k).adjoint() * y;
        for (int a = 0; a < pair.d1(); ++a)
            outs[a].add_term(k, z.segment(a * f, f));
        if (k >= 1) {
            long fd = mc.fiber(k - 1);
            CVec z2 = mc.v1_up(k - 1).adjoint() * y;
            for (int a = 0; a < pair.d1(); ++a)
                outs[a].add_term(k - 1, z2.segment(a * fd, fd));
        }
    }
    for (auto& o : outs)
        o.prune();
    return outs;
}

GradedVector apply_shift(const StructuredPair& pair, int a, int b, const GradedVector& v)
{
    check_shape(pair, v);
    const MoveCache& mc = *pair.moves;
    GradedVector out(v.d1, v.d2, v.m);
    for (const auto& [n, x] : v.terms) {
        long f = mc.fiber(n);
        check_budget(pair, n + 1);
        out.add_term(n + 1, mc.sp(n).middleCols((a * pair.d2() + b) * f, f) * x);
    }
    out.prune();
    return out;
}

std::vector<GradedVector> apply_shift_adjoint(const StructuredPair& pair, const GradedVector& v)
{
    check_shape(pair, v);
    const MoveCache& mc = *pair.moves;
    const int de = pair.d1() * pair.d2();
    std::vector<GradedVector> outs(de, GradedVector(v.d1, v.d2, v.m));
    for (const auto& [k, y] : v.terms) {
        if (k == 0)
            continue; // degree zero is the kernel of the adjoint shift
        long fd = mc.fiber(k - 1);
        CVec z = mc.sp(k - 1).adjoint() * y;
        for (int e = 0; e < de; ++e)
            outs[e].add_term(k - 1, z.segment(e * fd, fd));
    }
    for (auto& o : outs)
        o.prune();
    return outs;
}

} // namespace bcl
