#include "bcl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bcl::io {

using nlohmann::json;

std::string fmt_num(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::parse_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

cplx parse_complex(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(Errc::parse_error, where + ": complex entries must be [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

CMat parse_matrix(const json& j, const std::string& where)
{
    if (!j.is_array())
        throw Error(Errc::parse_error, where + ": expected an array of rows");
    const long rows = static_cast<long>(j.size());
    long cols = -1;
    CMat m;
    for (long r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array())
            throw Error(Errc::parse_error,
                        where + ": row " + std::to_string(r) + " is not an array");
        if (cols < 0) {
            cols = static_cast<long>(row.size());
            m = CMat::Zero(rows, cols);
        }
        if (static_cast<long>(row.size()) != cols)
            throw Error(Errc::parse_error,
                        where + ": row " + std::to_string(r) + " has ragged length");
        for (long c = 0; c < cols; ++c)
            m(r, c) = parse_complex(row[c], where + "[" + std::to_string(r) + "][" +
                                                std::to_string(c) + "]");
    }
    if (rows == 0)
        m = CMat::Zero(0, 0);
    return m;
}

void emit_matrix(std::ostringstream& out, const CMat& m, const char* indent)
{
    out << "[";
    for (long r = 0; r < m.rows(); ++r) {
        out << (r ? ",\n" : "\n") << indent << "[";
        for (long c = 0; c < m.cols(); ++c) {
            if (c)
                out << ", ";
            out << "[" << fmt_num(m(r, c).real()) << ", " << fmt_num(m(r, c).imag())
                << "]";
        }
        out << "]";
    }
    out << (m.rows() ? "\n  ]" : "]");
}

} // namespace

BclTriple parse_triple_json(const std::string& text, const std::string& origin)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::parse_error, origin + ": " + e.what());
    }
    if (!j.is_object())
        throw Error(Errc::parse_error, origin + ": top level must be an object");

    BclTriple t;
    auto need_int = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number_integer())
            throw Error(Errc::parse_error,
                        origin + ": missing or non-integer field '" + key + "'");
        return j[key].get<long>();
    };
    t.d1 = static_cast<int>(need_int("d1"));
    t.d2 = static_cast<int>(need_int("d2"));
    t.m = static_cast<int>(need_int("dim_w"));
    if (j.contains("name")) {
        if (!j["name"].is_string())
            throw Error(Errc::parse_error, origin + ": 'name' must be a string");
        t.name = j["name"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw Error(Errc::parse_error, origin + ": 'seed' must be an integer");
        t.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("twist"))
        t.twist = parse_matrix(j["twist"], origin + ": twist");
    else if (t.d1 >= 1 && t.d2 >= 1)
        t.twist = flip_twist(t.d1, t.d2);
    if (!j.contains("w2_frame"))
        throw Error(Errc::parse_error, origin + ": missing field 'w2_frame'");
    CMat w2 = parse_matrix(j["w2_frame"], origin + ": w2_frame");
    if (w2.rows() == 0 && t.m > 0)
        w2 = CMat::Zero(t.m, 0);
    t.p = static_cast<int>(w2.cols());
    t.w2_frame = Frame(w2.rows(), w2);
    if (!j.contains("u"))
        throw Error(Errc::parse_error, origin + ": missing field 'u'");
    t.u = parse_matrix(j["u"], origin + ": u");
    return t;
}

BclTriple load_triple(const std::string& path)
{
    return parse_triple_json(read_file(path), path);
}

std::string triple_to_json(const BclTriple& t)
{
    std::ostringstream out;
    out << "{\n";
    if (!t.name.empty())
        out << "  \"name\": " << json(t.name).dump() << ",\n";
    if (t.seed)
        out << "  \"seed\": " << *t.seed << ",\n";
    out << "  \"d1\": " << t.d1 << ",\n";
    out << "  \"d2\": " << t.d2 << ",\n";
    out << "  \"dim_w\": " << t.m << ",\n";
    out << "  \"twist\": ";
    emit_matrix(out, t.twist, "    ");
    out << ",\n  \"w2_frame\": ";
    emit_matrix(out, t.w2_frame.columns, "    ");
    out << ",\n  \"u\": ";
    emit_matrix(out, t.u, "    ");
    out << "\n}\n";
    return out.str();
}

void write_triple(const BclTriple& t, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::invalid_input, "cannot write " + path);
    out << triple_to_json(t);
}

Frame parse_frame_json(const std::string& text, const std::string& origin)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::parse_error, origin + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("columns"))
        throw Error(Errc::parse_error, origin + ": expected an object with 'columns'");
    CMat cols = parse_matrix(j["columns"], origin + ": columns");
    Frame f(cols.rows(), cols);
    if (f.rank() > 0) {
        double res = (cols.adjoint() * cols - CMat::Identity(cols.cols(), cols.cols()))
                         .norm();
        if (res > 1e-9)
            throw Error(Errc::invalid_input,
                        origin + ": columns not orthonormal, residual " + fmt_num(res));
    }
    return f;
}

Frame load_frame(const std::string& path)
{
    return parse_frame_json(read_file(path), path);
}

Report analyze(const BclTriple& t, int depth, double tol, const std::string& source)
{
    Report r;
    r.source = source;
    r.depth = depth;
    r.tol = tol;

    StructuredPair pair = build_pair(t, tol);
    pair.degree_budget = std::max(pair.degree_budget, depth + 2);
    r.d1 = t.d1;
    r.d2 = t.d2;
    r.m = t.m;
    r.p = t.p;

    CMat c = defect_operator(pair);
    r.defect = defect_report(pair, c, std::max(tol, 1e-8));
    r.cls = classify(pair, std::max(tol * 10, 1e-8));
    r.signature = congruence_signature(c, std::max(tol, 1e-8));
    r.index = fredholm_index(pair, tol);

    FringePair fr = fringe_operators(pair);
    auto summarize = [&](const CMat& f) {
        FringeSummary s;
        s.rows = f.rows();
        s.cols = f.cols();
        if (f.size() > 0) {
            Eigen::JacobiSVD<CMat> svd(f);
            for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
                s.singular_values.push_back(svd.singularValues()(k));
        }
        s.ker = static_cast<int>(kernel(f, tol).rank());
        s.coker = static_cast<int>(kernel(CMat(f.adjoint()), tol).rank());
        s.rank = static_cast<int>(f.cols()) - s.ker;
        return s;
    };
    r.f1 = summarize(fr.f1);
    r.f2 = summarize(fr.f2);

    TruncatedRep tr = truncate(pair, depth);
    r.residuals = residuals(tr, tol);
    if (depth >= 3)
        r.comp = compare(pair, tr, tol);

    r.ok = r.residuals.max() <= tol && r.comp.max_deviation() <= 100 * tol &&
           r.comp.index_match && r.cls.consistent && r.defect.paired &&
           r.defect.e1_char_dist <= 100 * tol && r.defect.em1_char_dist <= 100 * tol;
    return r;
}

namespace {

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string vec_json(const RVec& v)
{
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + fmt_num(v(i));
    return s + "]";
}

std::string vec_json(const std::vector<double>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + fmt_num(v[i]);
    return s + "]";
}

std::string flags_json(const std::array<bool, 6>& f)
{
    std::string s = "[";
    for (int i = 0; i < 6; ++i)
        s += (i ? ", " : "") + bool_str(f[i]);
    return s + "]";
}

} // namespace

std::string report_json(const Report& r)
{
    std::ostringstream o;
    o << "{\n";
    o << "  \"source\": " << json(r.source).dump() << ",\n";
    o << "  \"d1\": " << r.d1 << ", \"d2\": " << r.d2 << ", \"dim_w\": " << r.m
      << ", \"dim_w2\": " << r.p << ",\n";
    o << "  \"depth\": " << r.depth << ", \"tol\": " << fmt_num(r.tol) << ",\n";
    o << "  \"defect\": {\n";
    o << "    \"eigenvalues\": " << vec_json(r.defect.eigenvalues) << ",\n";
    o << "    \"dim_e1\": " << r.defect.dim_e1 << ", \"dim_em1\": " << r.defect.dim_em1
      << ",\n";
    o << "    \"paired\": " << bool_str(r.defect.paired) << ",\n";
    o << "    \"signature\": [" << r.defect.signature.pos << ", " << r.defect.signature.neg
      << ", " << r.defect.signature.null << "],\n";
    o << "    \"index\": " << r.defect.index << ",\n";
    o << "    \"trace\": " << fmt_num(r.defect.trace) << ",\n";
    o << "    \"e1_char_dist\": " << fmt_num(r.defect.e1_char_dist)
      << ", \"em1_char_dist\": " << fmt_num(r.defect.em1_char_dist) << "\n";
    o << "  },\n";
    o << "  \"classification\": {\n";
    o << "    \"doubly_commuting\": " << bool_str(r.cls.doubly_commuting) << ",\n";
    o << "    \"defect_zero\": " << bool_str(r.cls.defect_zero) << ",\n";
    o << "    \"defect_nonneg\": " << bool_str(r.cls.defect_nonneg) << ",\n";
    o << "    \"defect_negdef_on_supp\": " << bool_str(r.cls.defect_negdef_on_supp)
      << ",\n";
    o << "    \"h6\": " << flags_json(r.cls.h6) << ",\n";
    o << "    \"u1\": " << flags_json(r.cls.u1) << ",\n";
    o << "    \"consistent\": " << bool_str(r.cls.consistent) << "\n";
    o << "  },\n";
    auto fringe = [&](const char* key, const FringeSummary& f) {
        o << "  \"" << key << "\": {\"rows\": " << f.rows << ", \"cols\": " << f.cols
          << ", \"rank\": " << f.rank << ", \"ker\": " << f.ker
          << ", \"coker\": " << f.coker << ", \"singular_values\": "
          << vec_json(f.singular_values) << "},\n";
    };
    fringe("fringe1", r.f1);
    fringe("fringe2", r.f2);
    o << "  \"index\": " << r.index << ",\n";
    o << "  \"signature\": [" << r.signature.pos << ", " << r.signature.neg << ", "
      << r.signature.null << "],\n";
    o << "  \"residuals\": {\n";
    o << "    \"depth\": " << r.residuals.depth
      << ", \"reduced_coverage\": " << bool_str(r.residuals.reduced_coverage) << ",\n";
    o << "    \"isometry_v1\": " << fmt_num(r.residuals.isometry_v1)
      << ", \"isometry_v2\": " << fmt_num(r.residuals.isometry_v2)
      << ", \"isometry_v\": " << fmt_num(r.residuals.isometry_v) << ",\n";
    o << "    \"commutation_12\": " << fmt_num(r.residuals.commutation_12)
      << ", \"commutation_21\": " << fmt_num(r.residuals.commutation_21) << ",\n";
    o << "    \"product_shift\": " << fmt_num(r.residuals.product_shift)
      << ", \"kernel_w\": " << fmt_num(r.residuals.kernel_w) << "\n";
    o << "  },\n";
    o << "  \"oracle\": {\n";
    o << "    \"c_dev\": " << fmt_num(r.comp.c_dev) << ", \"c_alt_dev\": "
      << fmt_num(r.comp.c_alt_dev) << ",\n";
    o << "    \"w1_dist\": " << fmt_num(r.comp.w1_dist) << ", \"w2_dist\": "
      << fmt_num(r.comp.w2_dist) << ",\n";
    o << "    \"f1_sv_dev\": " << fmt_num(r.comp.f1_sv_dev) << ", \"f2_sv_dev\": "
      << fmt_num(r.comp.f2_sv_dev) << ",\n";
    o << "    \"e1_dist\": " << fmt_num(r.comp.e1_dist) << ", \"em1_dist\": "
      << fmt_num(r.comp.em1_dist) << ",\n";
    o << "    \"index_oracle\": " << r.comp.index_oracle
      << ", \"index_analysis\": " << r.comp.index_analysis
      << ", \"index_match\": " << bool_str(r.comp.index_match) << "\n";
    o << "  },\n";
    o << "  \"ok\": " << bool_str(r.ok) << "\n";
    o << "}\n";
    return o.str();
}

std::string report_text(const Report& r)
{
    std::ostringstream o;
    o << "triple " << r.source << "  (d1=" << r.d1 << ", d2=" << r.d2 << ", dim W=" << r.m
      << ", dim W2=" << r.p << ")\n";
    o << "depth " << r.depth << ", tol " << fmt_num(r.tol) << "\n\n";
    o << "defect spectrum   :";
    for (Eigen::Index i = 0; i < r.defect.eigenvalues.size(); ++i)
        o << " " << fmt_num(r.defect.eigenvalues(i));
    o << "\n";
    o << "dim E_1 / E_-1    : " << r.defect.dim_e1 << " / " << r.defect.dim_em1
      << "   (paired: " << bool_str(r.defect.paired) << ")\n";
    o << "signature         : (" << r.signature.pos << ", " << r.signature.neg << ", "
      << r.signature.null << ")\n";
    o << "fredholm index    : " << r.index << "\n";
    o << "doubly commuting  : " << bool_str(r.cls.doubly_commuting) << "\n";
    o << "defect zero       : " << bool_str(r.cls.defect_zero) << "\n";
    o << "classification ok : " << bool_str(r.cls.consistent) << "\n";
    o << "fringe F1         : " << r.f1.rows << "x" << r.f1.cols << ", rank " << r.f1.rank
      << ", ker " << r.f1.ker << ", coker " << r.f1.coker << "\n";
    o << "fringe F2         : " << r.f2.rows << "x" << r.f2.cols << ", rank " << r.f2.rank
      << ", ker " << r.f2.ker << ", coker " << r.f2.coker << "\n";
    o << "model residuals   : max " << fmt_num(r.residuals.max());
    if (r.residuals.reduced_coverage)
        o << "   [reduced coverage at this depth]";
    o << "\n";
    o << "oracle deviation  : max " << fmt_num(r.comp.max_deviation())
      << ", index match " << bool_str(r.comp.index_match) << "\n";
    o << "overall           : " << (r.ok ? "PASS" : "FAIL") << "\n";
    return o.str();
}

std::string report_csv(const Report& r)
{
    std::ostringstream o;
    o << "key,value\n";
    o << "source," << r.source << "\n";
    o << "d1," << r.d1 << "\nd2," << r.d2 << "\ndim_w," << r.m << "\ndim_w2," << r.p
      << "\n";
    o << "depth," << r.depth << "\ntol," << fmt_num(r.tol) << "\n";
    o << "eigenvalues,";
    for (Eigen::Index i = 0; i < r.defect.eigenvalues.size(); ++i)
        o << (i ? ";" : "") << fmt_num(r.defect.eigenvalues(i));
    o << "\n";
    o << "dim_e1," << r.defect.dim_e1 << "\ndim_em1," << r.defect.dim_em1 << "\n";
    o << "paired," << bool_str(r.defect.paired) << "\n";
    o << "signature," << r.signature.pos << ";" << r.signature.neg << ";"
      << r.signature.null << "\n";
    o << "index," << r.index << "\n";
    o << "trace," << fmt_num(r.defect.trace) << "\n";
    o << "doubly_commuting," << bool_str(r.cls.doubly_commuting) << "\n";
    o << "defect_zero," << bool_str(r.cls.defect_zero) << "\n";
    o << "consistent," << bool_str(r.cls.consistent) << "\n";
    o << "f1_rank," << r.f1.rank << "\nf1_ker," << r.f1.ker << "\nf1_coker," << r.f1.coker
      << "\n";
    o << "f2_rank," << r.f2.rank << "\nf2_ker," << r.f2.ker << "\nf2_coker," << r.f2.coker
      << "\n";
    o << "f1_singular_values,";
    for (std::size_t i = 0; i < r.f1.singular_values.size(); ++i)
        o << (i ? ";" : "") << fmt_num(r.f1.singular_values[i]);
    o << "\n";
    o << "f2_singular_values,";
    for (std::size_t i = 0; i < r.f2.singular_values.size(); ++i)
        o << (i ? ";" : "") << fmt_num(r.f2.singular_values[i]);
    o << "\n";
    o << "residual_max," << fmt_num(r.residuals.max()) << "\n";
    o << "oracle_dev_max," << fmt_num(r.comp.max_deviation()) << "\n";
    o << "index_match," << bool_str(r.comp.index_match) << "\n";
    o << "ok," << bool_str(r.ok) << "\n";
    return o.str();
}

std::string suite_table(const std::vector<SuiteRow>& rows)
{
    auto pad = [](std::string s, std::size_t w) {
        while (s.size() < w)
            s.push_back(' ');
        return s;
    };
    std::ostringstream o;
    o << pad("check", 12) << " " << pad("result", 8) << " " << pad("worst", 18)
      << " note\n";
    for (const auto& r : rows) {
        o << pad(r.label, 12) << " " << pad(r.pass ? "PASS" : "FAIL", 8) << " "
          << pad(fmt_num(r.worst), 18) << " " << r.note;
        if (!r.pass)
            o << "  [" << r.failures << " failure(s): " << r.detail << "]";
        o << "\n";
    }
    return o.str();
}

} // namespace bcl::io
