#pragma once

// JSON formats for sampled functions, realizations, measures and matrix tuples, plus a canonical writer
// (sorted keys, 17 significant digits) so that write . load . write is byte-identical.
//
// Complex numbers are [re, im]; complex matrices are arrays of rows of complex numbers.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "certify.hpp"
#include "realization.hpp"

namespace loewner::io {

using Json = nlohmann::json;

/// Input that does not match its schema; pointer() locates the first violation.
class SchemaError : public Error {
public:
    SchemaError(std::string pointer, const std::string& what)
        : Error(ErrorKind::SchemaError, "at '" + pointer + "': " + what), pointer_(std::move(pointer))
    {
    }

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

// ---------------------------------------------------------------------------
// Canonical output

namespace detail {

inline std::string format_double(double x)
{
    if (!std::isfinite(x)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    if (s == "-0") s = "0";
    return s;
}

inline void dump(const Json& j, int indent, int depth, std::string& out)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) { // object_t is an ordered map: keys come sorted
            if (!first) out += ",\n";
            first = false;
            out += pad + Json(it.key()).dump() + ": ";
            dump(it.value(), indent, depth + 1, out);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // arrays of scalars and of scalar arrays (matrix rows) stay on one line
        auto scalar_array = [](const Json& e) {
            return !e.is_structured() || (e.is_array() && std::none_of(e.begin(), e.end(), [](const Json& x) { return x.is_structured(); }));
        };
        const bool flat = std::all_of(j.begin(), j.end(), scalar_array);
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                dump(j[i], indent, depth + 1, out);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            dump(j[i], indent, depth + 1, out);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case Json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
    }
}

} // namespace detail

/// Pretty-printed canonical text with a trailing newline.
inline std::string canonical_dump(const Json& j)
{
    std::string out;
    detail::dump(j, 2, 0, out);
    out += "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Readers

/// A JSON value together with its location.
class Node {
public:
    Node(const Json& j, std::string pointer = "") : j_(&j), ptr_(std::move(pointer)) {}

    const Json& json() const { return *j_; }
    const std::string& pointer() const { return ptr_; }

    [[noreturn]] void error(const std::string& what) const { throw SchemaError(ptr_, what); }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Node at(const std::string& key) const
    {
        if (!j_->is_object()) error("expected an object");
        const auto it = j_->find(key);
        if (it == j_->end()) throw SchemaError(ptr_ + "/" + key, "missing field");
        return Node(*it, ptr_ + "/" + key);
    }

    Node at(std::size_t i) const { return Node((*j_)[i], ptr_ + "/" + std::to_string(i)); }

    std::size_t array_size() const
    {
        if (!j_->is_array()) error("expected an array");
        return j_->size();
    }

    double number() const
    {
        if (!j_->is_number()) error("expected a number");
        const double x = j_->get<double>();
        if (!std::isfinite(x)) error("expected a finite number");
        return x;
    }

    long integer() const
    {
        if (!j_->is_number_integer()) error("expected an integer");
        return j_->get<long>();
    }

    bool boolean() const
    {
        if (!j_->is_boolean()) error("expected a boolean");
        return j_->get<bool>();
    }

    std::string string() const
    {
        if (!j_->is_string()) error("expected a string");
        return j_->get<std::string>();
    }

    cplx complex() const
    {
        if (!j_->is_array() || j_->size() != 2) error("expected a complex number [re, im]");
        return {at(0).number(), at(1).number()};
    }

    RealVector real_vector() const
    {
        RealVector v(static_cast<Index>(array_size()));
        for (std::size_t i = 0; i < j_->size(); ++i) v(static_cast<Index>(i)) = at(i).number();
        return v;
    }

    Vector complex_vector() const
    {
        Vector v(static_cast<Index>(array_size()));
        for (std::size_t i = 0; i < j_->size(); ++i) v(static_cast<Index>(i)) = at(i).complex();
        return v;
    }

    Matrix complex_matrix() const
    {
        const std::size_t rows = array_size();
        if (rows == 0) error("expected a nonempty matrix");
        const std::size_t cols = at(0).array_size();
        Matrix M(static_cast<Index>(rows), static_cast<Index>(cols));
        for (std::size_t i = 0; i < rows; ++i) {
            const Node row = at(i);
            if (row.array_size() != cols) row.error("ragged matrix row");
            for (std::size_t k = 0; k < cols; ++k) M(static_cast<Index>(i), static_cast<Index>(k)) = row.at(k).complex();
        }
        return M;
    }

    RealMatrix real_matrix() const
    {
        const std::size_t rows = array_size();
        if (rows == 0) error("expected a nonempty matrix");
        const std::size_t cols = at(0).array_size();
        RealMatrix M(static_cast<Index>(rows), static_cast<Index>(cols));
        for (std::size_t i = 0; i < rows; ++i) {
            const Node row = at(i);
            if (row.array_size() != cols) row.error("ragged matrix row");
            for (std::size_t k = 0; k < cols; ++k) M(static_cast<Index>(i), static_cast<Index>(k)) = row.at(k).number();
        }
        return M;
    }

    GradedSpace grading() const
    {
        std::vector<int> dims;
        for (std::size_t i = 0; i < array_size(); ++i) {
            const long m = at(i).integer();
            if (m < 1) at(i).error("block sizes must be positive");
            dims.push_back(static_cast<int>(m));
        }
        if (dims.empty()) error("grading needs at least one block");
        return GradedSpace(std::move(dims));
    }

private:
    const Json* j_;
    std::string ptr_;
};

// ---------------------------------------------------------------------------
// Writers for numeric values

inline Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

inline Json to_json(const Vector& v)
{
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

inline Json to_json(const RealVector& v)
{
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Json to_json(const Matrix& M)
{
    Json a = Json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (Index k = 0; k < M.cols(); ++k) row.push_back(to_json(M(i, k)));
        a.push_back(std::move(row));
    }
    return a;
}

inline Json to_json(const RealMatrix& M)
{
    Json a = Json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        a.push_back(std::move(row));
    }
    return a;
}

inline Json to_json(const GradedSpace& G) { return Json(G.dims()); }

inline Json tuple_to_json(std::span<const Matrix> S)
{
    Json a = Json::array();
    for (const auto& M : S) a.push_back(to_json(M));
    return a;
}

inline std::vector<Matrix> tuple_from_json(const Node& node)
{
    std::vector<Matrix> out;
    for (std::size_t r = 0; r < node.array_size(); ++r) {
        out.push_back(node.at(r).complex_matrix());
        if (out.back().rows() != out.back().cols() || out.back().rows() != out.front().rows()) {
            node.at(r).error("tuple components must be square of a common size");
        }
    }
    if (out.empty()) node.error("tuple needs at least one matrix");
    return out;
}

// ---------------------------------------------------------------------------
// Sampled functions: {d, nodes: [{x, f, grad}]}

inline SampledFunction sampled_function_from_json(const Json& j)
{
    const Node root(j);
    const long d = root.at("d").integer();
    if (d < 1) root.at("d").error("dimension must be positive");
    const Node nodes = root.at("nodes");
    if (nodes.array_size() == 0) nodes.error("at least one node is required");
    std::vector<SampleNode> out;
    for (std::size_t i = 0; i < nodes.array_size(); ++i) {
        const Node n = nodes.at(i);
        SampleNode s;
        s.x = n.at("x").real_vector();
        if (s.x.size() != d) n.at("x").error("point dimension differs from d");
        s.f = n.at("f").number();
        s.grad = n.at("grad").real_vector();
        if (s.grad.size() != d) n.at("grad").error("gradient dimension differs from d");
        out.push_back(std::move(s));
    }
    return SampledFunction(static_cast<int>(d), std::move(out));
}

inline Json to_json(const SampledFunction& sf)
{
    Json nodes = Json::array();
    for (const auto& n : sf.nodes()) nodes.push_back({{"x", to_json(n.x)}, {"f", n.f}, {"grad", to_json(n.grad)}});
    return {{"d", sf.d()}, {"nodes", std::move(nodes)}};
}

// ---------------------------------------------------------------------------
// Realizations: {kind, grading, ...}

using AnyRealization = std::variant<TransferRealization, SelfAdjointRealization, CauchyRealization>;

inline std::string kind_of(const AnyRealization& r)
{
    switch (r.index()) {
    case 0: return "transfer";
    case 1: return "selfadjoint";
    default: return "cauchy";
    }
}

inline AnyRealization realization_from_json(const Json& j)
{
    const Node root(j);
    const std::string kind = root.at("kind").string();
    const GradedSpace G = root.at("grading").grading();
    auto check_size = [&](const Node& n, Index size) {
        if (n.array_size() != static_cast<std::size_t>(size)) n.error("size differs from the grading total " + std::to_string(G.total()));
    };
    auto check_square = [&](const Node& n, const Matrix& M) {
        if (M.rows() != G.total() || M.cols() != G.total()) n.error("matrix size differs from the grading total " + std::to_string(G.total()));
    };
    if (kind == "transfer") {
        const bool unitary = root.has("unitary_flag") ? root.at("unitary_flag").boolean() : false;
        check_size(root.at("beta"), G.total());
        check_size(root.at("gamma"), G.total());
        const Matrix D = root.at("D").complex_matrix();
        check_square(root.at("D"), D);
        return TransferRealization(root.at("a").complex(), root.at("beta").complex_vector(), root.at("gamma").complex_vector(), D, G, unitary);
    }
    if (kind == "selfadjoint") {
        SelfAdjointRealization sr;
        sr.c = root.at("c").number();
        sr.X = root.at("X").complex_matrix();
        check_square(root.at("X"), sr.X);
        check_size(root.at("v"), G.total());
        sr.v = root.at("v").complex_vector();
        check_size(root.at("z0"), G.d());
        sr.z0 = root.at("z0").complex_vector();
        sr.t = root.at("t").number();
        sr.grading = G;
        sr.validate();
        return sr;
    }
    if (kind == "cauchy") {
        CauchyRealization cr;
        cr.C = root.at("C").number();
        cr.X = root.at("X").complex_matrix();
        check_square(root.at("X"), cr.X);
        check_size(root.at("v1"), G.total());
        cr.v1 = root.at("v1").complex_vector();
        cr.grading = G;
        cr.validate();
        return cr;
    }
    root.at("kind").error("unknown realization kind '" + kind + "'");
}

inline Json to_json(const TransferRealization& tr)
{
    return {{"kind", "transfer"}, {"grading", to_json(tr.grading)}, {"a", to_json(tr.a)}, {"beta", to_json(tr.beta)},
            {"gamma", to_json(tr.gamma)}, {"D", to_json(tr.D)}, {"unitary_flag", tr.unitary_flag}};
}

inline Json to_json(const SelfAdjointRealization& sr)
{
    return {{"kind", "selfadjoint"}, {"grading", to_json(sr.grading)}, {"c", sr.c}, {"X", to_json(sr.X)},
            {"v", to_json(sr.v)}, {"z0", to_json(sr.z0)}, {"t", sr.t}};
}

inline Json to_json(const CauchyRealization& cr)
{
    return {{"kind", "cauchy"}, {"grading", to_json(cr.grading)}, {"C", cr.C}, {"X", to_json(cr.X)}, {"v1", to_json(cr.v1)}};
}

inline Json to_json(const AnyRealization& r)
{
    return std::visit([](const auto& x) { return to_json(x); }, r);
}

// ---------------------------------------------------------------------------
// Measures: {support: "line" | "circle", atoms: [{loc | theta, mass}]}

inline DiscreteMeasure measure_from_json(const Json& j)
{
    const Node root(j);
    const std::string support = root.at("support").string();
    DiscreteMeasure dm;
    if (support == "line") {
        dm.support = MeasureSupport::Line;
    } else if (support == "circle") {
        dm.support = MeasureSupport::Circle;
    } else {
        root.at("support").error("support must be 'line' or 'circle'");
    }
    const char* key = dm.support == MeasureSupport::Line ? "loc" : "theta";
    const Node atoms = root.at("atoms");
    for (std::size_t i = 0; i < atoms.array_size(); ++i) {
        const Node a = atoms.at(i);
        const double mass = a.at("mass").number();
        if (!(mass > 0.0)) a.at("mass").error("mass must be positive");
        dm.atoms.push_back({a.at(key).number(), mass});
    }
    return dm;
}

inline Json to_json(const DiscreteMeasure& dm)
{
    const bool line = dm.support == MeasureSupport::Line;
    Json atoms = Json::array();
    for (const auto& a : dm.atoms) atoms.push_back({{line ? "loc" : "theta", a.location}, {"mass", a.mass}});
    return {{"support", line ? "line" : "circle"}, {"atoms", std::move(atoms)}};
}

// ---------------------------------------------------------------------------
// Files

inline Json parse_json(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw SchemaError("", std::string("malformed JSON: ") + e.what());
    }
}

inline Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str());
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    out << text;
    if (!out) fail(ErrorKind::InvalidArgument, "write to '" + path + "' failed");
}

inline SampledFunction load_sampled_function(const std::string& path) { return sampled_function_from_json(read_json_file(path)); }
inline AnyRealization load_realization(const std::string& path) { return realization_from_json(read_json_file(path)); }
inline DiscreteMeasure load_measure(const std::string& path) { return measure_from_json(read_json_file(path)); }
inline void write_report(const std::string& path, const Json& report) { write_text_file(path, canonical_dump(report)); }

} // namespace loewner::io
