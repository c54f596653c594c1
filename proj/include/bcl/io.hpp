#pragma once

#include <string>

#include "bcl/oracle.hpp"
#include "bcl/suite.hpp"

namespace bcl::io {

/// All numbers are printed with 12 significant digits ("%.12g").
std::string fmt_num(double x);

BclTriple parse_triple_json(const std::string& text, const std::string& origin);
BclTriple load_triple(const std::string& path);
std::string triple_to_json(const BclTriple& t);
void write_triple(const BclTriple& t, const std::string& path);

/// Frame file: {"columns": m rows of k [re,im] pairs}, orthonormal columns.
Frame parse_frame_json(const std::string& text, const std::string& origin);
Frame load_frame(const std::string& path);

struct FringeSummary {
    long rows = 0, cols = 0;
    int rank = 0, ker = 0, coker = 0;
    std::vector<double> singular_values;
};

struct Report {
    std::string source;
    int d1 = 1, d2 = 1, m = 0, p = 0;
    double tol = kDefaultTol;
    int depth = 5;
    DefectReport defect;
    ClassificationRecord cls;
    FringeSummary f1, f2;
    int index = 0;
    Signature signature;
    ResidualReport residuals;
    CompareReport comp;
    bool ok = false;
};

/// Full pipeline on a validated triple: build, analyze, truncate, compare.
/// Throws Error for consistency violations surfaced as exceptions
/// (PairingViolation, IndexMismatch); sets ok=false for threshold failures.
Report analyze(const BclTriple& t, int depth, double tol, const std::string& source);

std::string report_text(const Report& r);
std::string report_json(const Report& r);
std::string report_csv(const Report& r);

std::string suite_table(const std::vector<SuiteRow>& rows);

} // namespace bcl::io
