#pragma once

#include "bcl/corpus.hpp"
#include "bcl/oracle.hpp"

namespace bcl {

struct SuiteOptions {
    int depth = 5;
    double tol = 1e-9;
    bool parallel = true;
};

struct SuiteRow {
    std::string label;
    std::string note;
    bool pass = true;
    double worst = 0.0; // worst residual/distance observed (-1 when n/a)
    int failures = 0;
    std::string detail; // first failure
};

/// Everything the theorem suite derives from one instance; the big
/// truncations are consumed inside and only numbers survive.
struct InstanceFacts {
    std::string label;
    CorpusKind kind = CorpusKind::scalar_generic;
    bool constructed_dc = false;
    bool valid = true;
    std::string error;

    double model_resid = 0;
    bool reduced_coverage = false;
    double www = 0;
    double l3_dev = 0;
    double h5_e1 = 0, h5_em1 = 0;
    bool paired = true;
    ClassificationRecord cls;
    double eig_max = 0, c_norm = 0;
    int index = 0, expected_index = 0;
    bool index_routes_ok = true; // fredholm_index's two routes
    bool index_oracle_ok = true; // oracle truncation route
    double k7 = -1, kk7 = -1, k8 = -1, w4 = -1; // identity subset only
    double k5 = 0, remark_k3 = 0;
    double stability_dev = 0; // oracle defect, depth N vs N-1
    Signature sig;
    CMat c_matrix;
};

InstanceFacts instance_facts(const CorpusEntry& entry, const SuiteOptions& opt,
                             bool run_identity_battery);

/// Runs every theorem-tagged property over the instances.  Row labels:
/// model, WWW, L3, H5, H6, TT, EEE, AAA, K7, KK7, K8, W4, U1, CRR, K5,
/// RemarkK3, stability.
std::vector<SuiteRow> run_theorem_suite(const std::vector<CorpusEntry>& corpus,
                                        const SuiteOptions& opt);

std::vector<InstanceFacts> gather_facts(const std::vector<CorpusEntry>& corpus,
                                        const SuiteOptions& opt);
std::vector<SuiteRow> rows_from_facts(const std::vector<InstanceFacts>& facts,
                                      const SuiteOptions& opt);

} // namespace bcl
