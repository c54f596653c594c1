#include "bcl/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bcl {

namespace {

struct BlockJob {
    const SMat* block;  // per-degree operator block
    long row_off;       // degree offset of the output rows
    long col_deg_off;   // degree offset inside each letter block
    int letters;        // number of leading letters (d1, d2, or d1*d2)
    long fiber;         // fiber dim of the domain degree
    long col_stride;    // = total dim, one letter block spans this many columns
};

// Expand the per-degree blocks into global triplets.  Each job writes a
// precomputed span of the triplet array, so the loop parallelizes with
// bit-identical output.
void expand_jobs(const std::vector<BlockJob>& jobs, std::vector<Eigen::Triplet<cplx>>& out,
                 bool parallel)
{
    std::vector<std::size_t> starts(jobs.size() + 1, 0);
    for (std::size_t i = 0; i < jobs.size(); ++i)
        starts[i + 1] = starts[i] + jobs[i].block->nonZeros();
    out.resize(starts.back());

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long ji = 0; ji < static_cast<long>(jobs.size()); ++ji) {
        const BlockJob& job = jobs[ji];
        std::size_t w = starts[ji];
        for (int k = 0; k < job.block->outerSize(); ++k)
            for (SMat::InnerIterator it(*job.block, k); it; ++it) {
                long letter = it.col() / job.fiber;
                long within = it.col() % job.fiber;
                out[w++] = Eigen::Triplet<cplx>(
                    job.row_off + it.row(),
                    letter * job.col_stride + job.col_deg_off + within, it.value());
            }
    }
}

TruncatedRep truncate_impl(const StructuredPair& pair, int N, long budget, bool parallel)
{
    if (N < 2)
        throw Error(Errc::invalid_input, "truncate: need N >= 2");
    TruncatedRep tr;
    tr.pair = pair;
    tr.pair.degree_budget = std::max(pair.degree_budget, N + 1);
    tr.N = N;
    tr.offsets.assign(1, 0);
    for (int n = 0; n <= N; ++n) {
        long f = fiber_dim(pair.d1(), pair.d2(), pair.m(), n);
        tr.dims.push_back(f);
        tr.offsets.push_back(tr.offsets.back() + f);
        if (tr.offsets.back() > budget)
            throw Error(Errc::budget_exceeded,
                        "truncated dimension " + std::to_string(tr.offsets.back()) +
                            " exceeds budget " + std::to_string(budget));
    }
    tr.total = tr.offsets[N + 1];
    tr.interior_total = tr.offsets[N];

    const MoveCache& mc = *tr.pair.moves;
    const int d1 = pair.d1(), d2 = pair.d2();

    // Warm the caches serially; block construction is cheap and ordered.
    for (int n = 0; n <= N; ++n) {
        mc.v1_stay(n);
        mc.v2_stay(n);
        if (n < N) {
            mc.v1_up(n);
            if (mc.raises())
                mc.v2_up(n);
            mc.sp(n);
        }
    }

    auto assemble = [&](int letters, auto stay_of, auto up_of, bool has_stay) {
        std::vector<BlockJob> jobs;
        for (int n = 0; n <= N; ++n) {
            if (has_stay)
                jobs.push_back(BlockJob{stay_of(n), tr.offsets[n], tr.offsets[n], letters,
                                        tr.dims[n], tr.total});
            if (n < N) {
                const SMat* up = up_of(n);
                if (up)
                    jobs.push_back(BlockJob{up, tr.offsets[n + 1], tr.offsets[n], letters,
                                            tr.dims[n], tr.total});
            }
        }
        std::vector<Eigen::Triplet<cplx>> trips;
        expand_jobs(jobs, trips, parallel);
        SMat out(tr.total, static_cast<long>(letters) * tr.total);
        out.setFromTriplets(trips.begin(), trips.end());
        return out;
    };

    tr.v1 = assemble(
        d1, [&](int n) { return &mc.v1_stay(n); },
        [&](int n) { return &mc.v1_up(n); }, true);
    tr.v2 = assemble(
        d2, [&](int n) { return &mc.v2_stay(n); },
        [&](int n) { return mc.raises() ? &mc.v2_up(n) : nullptr; }, true);
    tr.v = assemble(
        d1 * d2, [&](int n) { return &mc.sp(n); },
        [&](int n) { return &mc.sp(n); }, false);
    return tr;
}

} // namespace

TruncatedRep truncate(const StructuredPair& pair, int N, long budget)
{
    return truncate_impl(pair, N, budget, true);
}

TruncatedRep truncate_serial(const StructuredPair& pair, int N, long budget)
{
    return truncate_impl(pair, N, budget, false);
}

CMat oracle_defect(const TruncatedRep& tr)
{
    if (tr.N < 3)
        throw Error(Errc::invalid_input, "oracle_defect: need N >= 3");
    const long m = tr.pair.m();
    CMat b1 = dense_row_band(tr.v1, 0, m);
    CMat b2 = dense_row_band(tr.v2, 0, m);
    CMat bv = dense_row_band(tr.v, 0, m);
    return CMat::Identity(m, m) - b1 * b1.adjoint() - b2 * b2.adjoint() +
           bv * bv.adjoint();
}

namespace {

double frob(const SMat& s) { return s.norm(); }

SMat sparse_identity(long n)
{
    SMat s(n, n);
    s.setIdentity();
    return s;
}

} // namespace

ResidualReport residuals(const TruncatedRep& tr, double /*tol*/)
{
    ResidualReport rep;
    rep.depth = tr.N;
    rep.reduced_coverage = tr.N <= 2;
    const int d1 = tr.pair.d1(), d2 = tr.pair.d2();
    const long total = tr.total, itot = tr.interior_total;
    const CMat& twist = tr.pair.triple.twist;

    std::vector<SMat> v1b(d1), v2b(d2);
    std::vector<SMat> v1i(d1), v2i(d2);
    for (int a = 0; a < d1; ++a) {
        v1b[a] = sparse_col_slice(tr.v1, static_cast<long>(a) * total, total);
        v1i[a] = sparse_col_slice(tr.v1, static_cast<long>(a) * total, itot);
    }
    for (int b = 0; b < d2; ++b) {
        v2b[b] = sparse_col_slice(tr.v2, static_cast<long>(b) * total, total);
        v2i[b] = sparse_col_slice(tr.v2, static_cast<long>(b) * total, itot);
    }

    // Isometry on interior columns: the letter-blocked Gram matrix is the
    // identity.
    auto gram_residual = [&](const std::vector<SMat>& slices) {
        double acc = 0.0;
        const int d = static_cast<int>(slices.size());
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y) {
                SMat g = SMat(slices[x].adjoint()) * slices[y];
                if (x == y)
                    g = g - sparse_identity(itot);
                double nn = frob(g);
                acc += nn * nn;
            }
        return std::sqrt(acc);
    };
    rep.isometry_v1 = gram_residual(v1i);
    rep.isometry_v2 = gram_residual(v2i);
    std::vector<SMat> vi(static_cast<std::size_t>(d1) * d2);
    for (int e = 0; e < d1 * d2; ++e)
        vi[e] = sparse_col_slice(tr.v, static_cast<long>(e) * total, itot);
    rep.isometry_v = gram_residual(vi);

    // Commutation, both orders, and product-equals-shift on the interior.
    // Letter pairs are independent; results are summed in index order so the
    // parallel run reproduces the serial numbers exactly.
    const int pairs = d1 * d2;
    std::vector<double> sq12(pairs, 0.0), sq21(pairs, 0.0), sqps(pairs, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int e = 0; e < pairs; ++e) {
        const int a = e / d2, b = e % d2;
        SMat v2ab = sparse_col_slice(v2b[b], 0, itot);
        SMat lhs12 = v1b[a] * v2ab;
        SMat rhs12(total, itot);
        for (int bp = 0; bp < d2; ++bp)
            for (int ap = 0; ap < d1; ++ap) {
                cplx coeff = std::conj(twist(a * d2 + b, bp * d1 + ap));
                if (coeff == cplx(0.0, 0.0))
                    continue;
                rhs12 = rhs12 + SMat(coeff * SMat(v2b[bp] * v1i[ap]));
            }
        double nn = frob(SMat(lhs12 - rhs12));
        sq12[e] = nn * nn;

        SMat lhs21 = v2b[b] * sparse_col_slice(v1b[a], 0, itot);
        SMat rhs21(total, itot);
        for (int ap = 0; ap < d1; ++ap)
            for (int bp = 0; bp < d2; ++bp) {
                cplx coeff = twist(ap * d2 + bp, b * d1 + a);
                if (coeff == cplx(0.0, 0.0))
                    continue;
                rhs21 = rhs21 + SMat(coeff * SMat(v1b[ap] * v2i[bp]));
            }
        nn = frob(SMat(lhs21 - rhs21));
        sq21[e] = nn * nn;

        SMat shift_blk =
            sparse_col_slice(tr.v, (static_cast<long>(a) * d2 + b) * total, itot);
        nn = frob(SMat(lhs12 - shift_blk));
        sqps[e] = nn * nn;
    }
    double acc12 = 0, acc21 = 0, accps = 0;
    for (int e = 0; e < pairs; ++e) {
        acc12 += sq12[e];
        acc21 += sq21[e];
        accps += sqps[e];
    }
    rep.commutation_12 = std::sqrt(acc12);
    rep.commutation_21 = std::sqrt(acc21);
    rep.product_shift = std::sqrt(accps);

    // W = ker(V*): the shift never reaches degree zero, and V V* is the
    // identity on interior degrees >= 1.
    const long m = tr.pair.m();
    double kw = dense_row_band(tr.v, 0, m).norm();
    if (itot > m) {
        SMat emid(total, itot - m);
        {
            std::vector<Eigen::Triplet<cplx>> trips;
            for (long k = 0; k < itot - m; ++k)
                trips.emplace_back(m + k, k, cplx(1.0, 0.0));
            emid.setFromTriplets(trips.begin(), trips.end());
        }
        SMat vh = SMat(tr.v.adjoint()) * emid;
        SMat back = tr.v * vh;
        double nn = frob(SMat(back - emid));
        kw = std::max(kw, nn);
    }
    rep.kernel_w = kw;
    return rep;
}

double reducing_leak(const StructuredPair& pair, const Frame& wprime, int depth)
{
    if (wprime.ambient != pair.m())
        throw Error(Errc::dimension_mismatch, "reducing_leak: frame not in C^m");
    TruncatedRep tr = truncate(pair, depth);
    const long total = tr.total;
    const int d1 = pair.d1(), d2 = pair.d2();

    // Graded embedding of F(E) (x) W' into the truncation.
    std::vector<Eigen::Triplet<cplx>> trips;
    long wcols = 0;
    std::vector<long> woff(1, 0);
    for (int n = 0; n <= tr.N; ++n) {
        long blocks = tr.dims[n] / pair.m();
        for (long g = 0; g < blocks; ++g)
            for (Eigen::Index c = 0; c < wprime.rank(); ++c)
                for (Eigen::Index r = 0; r < wprime.ambient; ++r) {
                    cplx val = wprime.columns(r, c);
                    if (val != cplx(0.0, 0.0))
                        trips.emplace_back(tr.offsets[n] + g * pair.m() + r,
                                           wcols + g * wprime.rank() + c, val);
                }
        wcols += blocks * wprime.rank();
        woff.push_back(wcols);
    }
    SMat emb(total, wcols);
    emb.setFromTriplets(trips.begin(), trips.end());
    long wcols_int = woff[tr.N]; // degrees <= N-1

    SMat emb_int = sparse_col_slice(emb, 0, wcols_int);
    auto leak_of = [&](const SMat& cols) {
        SMat proj = emb * SMat(SMat(emb.adjoint()) * cols);
        return SMat(cols - proj).norm();
    };

    double worst = 0.0;
    for (int a = 0; a < d1; ++a) {
        SMat blk = sparse_col_slice(tr.v1, static_cast<long>(a) * total, total);
        worst = std::max(worst, leak_of(SMat(blk * emb_int)));
        worst = std::max(worst, leak_of(SMat(SMat(blk.adjoint()) * emb)));
    }
    for (int b = 0; b < d2; ++b) {
        SMat blk = sparse_col_slice(tr.v2, static_cast<long>(b) * total, total);
        worst = std::max(worst, leak_of(SMat(blk * emb_int)));
        worst = std::max(worst, leak_of(SMat(SMat(blk.adjoint()) * emb)));
    }
    return worst;
}

CompareReport compare(const StructuredPair& pair, const TruncatedRep& tr, double tol)
{
    CompareReport rep;
    const long m = pair.m();
    const int d1 = pair.d1(), d2 = pair.d2();

    CMat c_or = oracle_defect(tr);
    CMat c = defect_operator(pair);
    CMat c_alt = defect_operator_alt(pair);
    rep.c_dev = (c - c_or).cwiseAbs().maxCoeff();
    rep.c_alt_dev = (c_alt - c_or).cwiseAbs().maxCoeff();

    // Wandering frames straight from the truncated adjoints.
    CMat b1 = dense_row_band(tr.v1, 0, m); // m x (d1 total)
    CMat b2 = dense_row_band(tr.v2, 0, m);
    Frame w1_or = kernel(CMat(b1.adjoint()), tol);
    Frame w2_or = kernel(CMat(b2.adjoint()), tol);
    rep.w1_dist = subspace_distance(w1_or, pair.w1_frame);
    rep.w2_dist = subspace_distance(w2_or, pair.triple.w2_frame);

    // Fringe operators rebuilt in the oracle frames; singular values are
    // base-independent.
    auto deg0_block = [&](const CMat& band, int letters) {
        CMat out(m, static_cast<long>(letters) * m);
        for (int l = 0; l < letters; ++l)
            out.middleCols(static_cast<long>(l) * m, m) =
                band.middleCols(static_cast<long>(l) * tr.total, m);
        return out;
    };
    CMat v1_00 = deg0_block(b1, d1);
    CMat v2_00 = deg0_block(b2, d2);
    CMat f1_or = w2_or.columns.adjoint() * v1_00 *
                 kron(CMat::Identity(d1, d1), w2_or.columns);
    CMat f2_or = w1_or.columns.adjoint() * v2_00 *
                 kron(CMat::Identity(d2, d2), w1_or.columns);
    FringePair fr = fringe_operators(pair);
    auto sv_dev = [](const CMat& x, const CMat& y) {
        if (x.size() == 0 && y.size() == 0)
            return 0.0;
        Eigen::JacobiSVD<CMat> sx(x), sy(y);
        if (sx.singularValues().size() != sy.singularValues().size())
            return 1.0;
        return (sx.singularValues() - sy.singularValues()).cwiseAbs().maxCoeff();
    };
    rep.f1_sv_dev = sv_dev(f1_or, fr.f1);
    rep.f2_sv_dev = sv_dev(f2_or, fr.f2);

    // +-1 eigenspaces of the oracle defect vs the analysis report.
    constexpr double bucket = 1e-7;
    Spectrum sp_or = hermitian_eig(c_or, std::max(tol, 1e-8));
    Spectrum sp = hermitian_eig(c, tol);
    auto bucket_frame = [&](const Spectrum& sp_, double centre) {
        std::vector<Eigen::Index> cols;
        for (Eigen::Index k = 0; k < sp_.eigenvalues.size(); ++k)
            if (std::abs(sp_.eigenvalues(k) - centre) <= bucket)
                cols.push_back(k);
        CMat f(m, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k)
            f.col(static_cast<Eigen::Index>(k)) = sp_.eigenvectors.col(cols[k]);
        return Frame(m, std::move(f));
    };
    rep.e1_dist = subspace_distance(bucket_frame(sp_or, 1.0), bucket_frame(sp, 1.0));
    rep.em1_dist = subspace_distance(bucket_frame(sp_or, -1.0), bucket_frame(sp, -1.0));

    rep.index_oracle = static_cast<int>(kernel(f2_or, tol).rank()) -
                       static_cast<int>(kernel(CMat(f2_or.adjoint()), tol).rank());
    rep.index_analysis = fredholm_index(pair, tol);
    int index_defect_or = static_cast<int>(bucket_frame(sp_or, -1.0).rank()) -
                          static_cast<int>(bucket_frame(sp_or, 1.0).rank());
    rep.index_match =
        rep.index_oracle == rep.index_analysis && rep.index_oracle == index_defect_or;
    return rep;
}

} // namespace bcl
