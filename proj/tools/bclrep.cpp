#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bcl/io.hpp"

using namespace bcl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConsistency = 3;

double default_tol()
{
    // BCLREP_TOL overrides the default tolerance for every subcommand.
    if (const char* env = std::getenv("BCLREP_TOL")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0)
            return v;
        std::cerr << "warning: ignoring invalid BCLREP_TOL='" << env << "'\n";
    }
    return kDefaultTol;
}

bool is_validation_error(Errc c)
{
    return c == Errc::parse_error || c == Errc::invalid_input || c == Errc::not_unitary ||
           c == Errc::dimension_mismatch || c == Errc::tensor_form_violation;
}

int run_analyze(const std::string& path, int depth, double tol, const std::string& format)
{
    BclTriple t;
    try {
        t = io::load_triple(path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    auto issues = check_triple(t, tol);
    if (!issues.empty()) {
        for (const auto& is : issues)
            std::cerr << "validation: " << errc_name(is.code) << ": " << is.message << "\n";
        return kExitValidation;
    }
    io::Report rep;
    try {
        rep = io::analyze(t, depth, tol, path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e.code()) ? kExitValidation : kExitConsistency;
    }
    if (format == "json")
        std::cout << io::report_json(rep);
    else if (format == "csv")
        std::cout << io::report_csv(rep);
    else
        std::cout << io::report_text(rep);
    return rep.ok ? kExitOk : kExitConsistency;
}

int run_random(int d1, int d2, int m, int p, std::uint64_t seed, const std::string& out,
               const std::string& name)
{
    BclTriple t;
    try {
        t = random_triple(d1, d2, m, p, seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "the shape must satisfy p(d1 d2 - 1) = m(d2 - 1) and d1 p <= m\n";
        return kExitValidation;
    }
    t.name = name.empty() ? ("random-" + std::to_string(d1) + "-" + std::to_string(d2) +
                             "-" + std::to_string(m) + "-" + std::to_string(p) + "-s" +
                             std::to_string(seed))
                          : name;
    if (out.empty()) {
        std::cout << io::triple_to_json(t);
    } else {
        try {
            io::write_triple(t, out);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidation;
        }
    }
    return kExitOk;
}

int run_check(const std::vector<std::string>& paths, bool corpus, int depth, double tol)
{
    std::vector<CorpusEntry> entries;
    if (corpus || paths.empty()) {
        entries = default_corpus();
    } else {
        for (const auto& path : paths) {
            try {
                entries.push_back(
                    CorpusEntry{io::load_triple(path), CorpusKind::scalar_generic, path,
                                false});
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitValidation;
            }
        }
    }
    SuiteOptions opt;
    opt.depth = depth;
    opt.tol = tol;
    auto rows = run_theorem_suite(entries, opt);
    std::cout << io::suite_table(rows);
    bool all_pass = true;
    bool validation_failure = false;
    for (const auto& r : rows) {
        all_pass = all_pass && r.pass;
        if (!r.pass && r.detail.find("NotUnitary") != std::string::npos)
            validation_failure = true;
        if (!r.pass && r.detail.find("DimensionMismatch") != std::string::npos)
            validation_failure = true;
    }
    if (all_pass)
        return kExitOk;
    return validation_failure ? kExitValidation : kExitConsistency;
}

int run_reduce(const std::string& path, const std::string& subspace, int depth, double tol)
{
    BclTriple t;
    Frame wprime;
    try {
        t = io::load_triple(path);
        wprime = io::load_frame(subspace);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    auto issues = check_triple(t, tol);
    if (!issues.empty()) {
        for (const auto& is : issues)
            std::cerr << "validation: " << errc_name(is.code) << ": " << is.message << "\n";
        return kExitValidation;
    }
    try {
        StructuredPair pair = build_pair(t, tol);
        bool verdict = is_reducing_subspace(pair, wprime, tol);
        double leak = reducing_leak(pair, wprime, depth);
        std::cout << "reducing          : " << (verdict ? "true" : "false") << "\n";
        std::cout << "subspace dim      : " << wprime.rank() << " of " << t.m << "\n";
        std::cout << "oracle leak       : " << io::fmt_num(leak) << "  (depth " << depth
                  << ")\n";
        bool agree = verdict == (leak <= 100 * tol);
        if (!agree) {
            std::cout << "warning           : triple-level verdict and oracle disagree\n";
            return kExitConsistency;
        }
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e.code()) ? kExitValidation : kExitConsistency;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"BCL-model toolkit: commuting isometric pairs from (P, U, W) data"};
    app.require_subcommand(1);

    double tol = default_tol();
    int depth = 5;

    auto* analyze = app.add_subcommand("analyze", "validate a triple file and report "
                                                  "every invariant");
    std::string an_path, an_format = "text";
    double an_tol = tol;
    int an_depth = depth;
    analyze->add_option("path", an_path, "triple file")->required();
    analyze->add_option("--depth", an_depth, "oracle truncation depth");
    analyze->add_option("--tol", an_tol, "tolerance");
    analyze->add_option("--format", an_format, "text|json|csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));

    auto* random = app.add_subcommand("random", "write a seeded random triple file");
    int r_d1 = 1, r_d2 = 1, r_m = 2, r_p = 1;
    std::uint64_t r_seed = 0;
    std::string r_out, r_name;
    random->add_option("--d1", r_d1)->required();
    random->add_option("--d2", r_d2)->required();
    random->add_option("--m", r_m)->required();
    random->add_option("--p", r_p)->required();
    random->add_option("--seed", r_seed)->required();
    random->add_option("--out", r_out, "output path (stdout when omitted)");
    random->add_option("--name", r_name, "metadata name");

    auto* check = app.add_subcommand("check", "run the theorem suite over files or the "
                                              "default corpus");
    std::vector<std::string> c_paths;
    bool c_corpus = false;
    double c_tol = tol;
    int c_depth = depth;
    check->add_option("paths", c_paths, "triple files");
    check->add_flag("--corpus", c_corpus, "use the built-in 200-instance corpus");
    check->add_option("--depth", c_depth, "oracle truncation depth");
    check->add_option("--tol", c_tol, "tolerance");

    auto* reduce = app.add_subcommand("reduce", "test a subspace frame for reducing the "
                                                "pair");
    std::string rd_path, rd_sub;
    double rd_tol = tol;
    int rd_depth = depth;
    reduce->add_option("path", rd_path, "triple file")->required();
    reduce->add_option("--subspace", rd_sub, "frame file")->required();
    reduce->add_option("--depth", rd_depth, "oracle invariance depth");
    reduce->add_option("--tol", rd_tol, "tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze)
            return run_analyze(an_path, an_depth, an_tol, an_format);
        if (*random)
            return run_random(r_d1, r_d2, r_m, r_p, r_seed, r_out, r_name);
        if (*check)
            return run_check(c_paths, c_corpus, c_depth, c_tol);
        if (*reduce)
            return run_reduce(rd_path, rd_sub, rd_depth, rd_tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConsistency;
    }
    return kExitOk;
}
