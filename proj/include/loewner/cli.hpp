#pragma once

// Batch front end. Subcommands:
//   certify --input f.json                       certificate or refutation for a sampled function
//   eval    --input r.json --point ... --tuple   evaluate a realization at points or on a matrix tuple
//   synth   --input transfer.json                self-adjoint and Cauchy realizations from a unitary transfer block
//   fuzz    --mode ... --seed ...                randomized monotonicity trials
//   report  --input report.json                  re-emit a report canonically and return its exit code
//
// Exit codes: 0 certified / all pass, 2 refuted / violation found, 3 inconclusive, 1 error.
// A report is written (to --out, or standard output) for exit codes 0, 2 and 3.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harness.hpp"
#include "io.hpp"

namespace loewner::cli {

using io::Json;

enum ExitCode : int { kPass = 0, kError = 1, kViolation = 2, kInconclusive = 3 };

// ---------------------------------------------------------------------------
// Flag parsing helpers

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used == 0 || used != s.size() || !std::isfinite(x)) fail(ErrorKind::InvalidArgument, "cannot read a number from '" + s + "' in " + what);
    return x;
}

/// "a1,b1;a2,b2" -> box.
inline Box parse_box(const std::string& s)
{
    Box box;
    for (const auto& part : split(s, ';')) {
        const auto ab = split(part, ',');
        if (ab.size() != 2) fail(ErrorKind::InvalidArgument, "--box expects 'a1,b1;a2,b2'");
        box.lo.push_back(parse_double(ab[0], "--box"));
        box.hi.push_back(parse_double(ab[1], "--box"));
    }
    if (box.lo.empty()) fail(ErrorKind::InvalidArgument, "--box expects 'a1,b1;a2,b2'");
    box.validate();
    return box;
}

/// "re,im" -> complex.
inline cplx parse_complex(const std::string& s, const std::string& what)
{
    const auto parts = split(s, ',');
    if (parts.size() != 2) fail(ErrorKind::InvalidArgument, what + " expects 're,im'");
    return {parse_double(parts[0], what), parse_double(parts[1], what)};
}

/// "re1,im1;re2,im2" -> complex point.
inline Vector parse_point(const std::string& s, const std::string& what)
{
    const auto parts = split(s, ';');
    Vector z(static_cast<Index>(parts.size()));
    for (std::size_t r = 0; r < parts.size(); ++r) z(static_cast<Index>(r)) = parse_complex(parts[r], what);
    if (z.size() == 0) fail(ErrorKind::InvalidArgument, what + " is empty");
    return z;
}

inline Json box_to_json(const Box& box)
{
    Json a = Json::array();
    for (int r = 0; r < box.d(); ++r) a.push_back({box.lo[static_cast<std::size_t>(r)], box.hi[static_cast<std::size_t>(r)]});
    return a;
}

inline Json tolerances_to_json(const Tolerances& tol)
{
    return {{"tol_herm", tol.tol_herm}, {"tol_psd", tol.tol_psd}, {"tol_commute", tol.tol_commute}, {"tol_residual", tol.tol_residual}, {"max_iter", tol.max_iter}};
}

inline CauchyRealization as_cauchy(const io::AnyRealization& r)
{
    if (const auto* cr = std::get_if<CauchyRealization>(&r)) return *cr;
    if (const auto* sr = std::get_if<SelfAdjointRealization>(&r)) return reduce_to_cauchy(*sr);
    fail(ErrorKind::InvalidArgument, "a Cauchy or self-adjoint realization is required");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Report builders

inline Json certify_report(const SampledFunction& sf, const CertifyResult& res, const Tolerances& tol)
{
    Json rep;
    rep["command"] = "certify";
    rep["d"] = sf.d();
    rep["n"] = sf.n();
    rep["tolerances"] = detail::tolerances_to_json(tol);
    rep["iterations"] = res.distances.size();
    rep["outcome"] = to_string(res.outcome);
    rep["certificate"] = nullptr;
    rep["refutation"] = nullptr;
    if (res.certificate) {
        const auto& c = *res.certificate;
        rep["certificate"] = {{"A", io::tuple_to_json(c.A)},
                              {"min_psd_eig", io::to_json(c.min_psd_eig)},
                              {"max_diagonal_violation", c.max_diagonal_violation},
                              {"max_constraint_violation", c.max_constraint_violation},
                              {"iterations", c.iterations},
                              {"final_distance", c.final_distance}};
    }
    if (res.refutation) {
        const auto& r = *res.refutation;
        Json j = {{"status", to_string(r.status)},
                  {"witness_source", r.witness_source},
                  {"witness_min_eig", r.witness_min_eig},
                  {"raw_min_eig", r.raw_min_eig},
                  {"iterations", r.iterations},
                  {"final_distance", r.final_distance}};
        j["K"] = r.K ? io::to_json(*r.K) : Json(nullptr);
        j["witness"] = r.witness ? io::tuple_to_json(r.witness->span()) : Json(nullptr);
        j["raw_witness"] = r.raw_witness ? io::tuple_to_json(r.raw_witness->span()) : Json(nullptr);
        rep["refutation"] = std::move(j);
    }
    return rep;
}

inline Json trial_report(const TrialConfig& cfg, const TrialReport& r)
{
    Json rep;
    rep["command"] = "fuzz";
    rep["mode"] = r.mode;
    rep["function"] = r.function;
    rep["seed"] = r.seed;
    rep["trials"] = r.trials;
    rep["passes"] = r.passes;
    rep["failures"] = r.failures;
    rep["worst_violation"] = r.worst_violation;
    rep["asserted"] = r.asserted;
    rep["stats"] = r.stats;
    rep["config"] = {{"box", detail::box_to_json(cfg.box)}, {"n", cfg.n},       {"s", cfg.s},
                     {"panels", cfg.panels},                {"budget", cfg.budget}, {"threshold", cfg.threshold},
                     {"layout", cfg.layout == PairLayout::Thirds ? "thirds" : "overlapping"}};
    const char* second = cfg.mode == TrialMode::Local ? "Delta" : "T";
    Json ex = Json::array();
    for (const auto& f : r.failure_examples) {
        ex.push_back({{"trial", f.trial}, {"value", f.value}, {"S", io::tuple_to_json(f.S)}, {second, io::tuple_to_json(f.T)}});
    }
    rep["failure_examples"] = std::move(ex);
    return rep;
}

// ---------------------------------------------------------------------------
// Commands

struct Outcome {
    int code = kError;
    Json report;
};

inline Json finish(Json rep, int code)
{
    rep["exit_code"] = code;
    rep["status"] = code == kPass ? "pass" : code == kViolation ? "violation" : "inconclusive";
    if (rep["command"] == "certify") rep["status"] = code == kPass ? "certified" : code == kViolation ? "refuted" : "inconclusive";
    return rep;
}

inline Outcome run_certify(const std::string& input, const Tolerances& tol)
{
    const auto sf = io::load_sampled_function(input);
    const auto res = certify(sf, tol);
    const int code = res.outcome == CertifyOutcome::Certified ? kPass : res.outcome == CertifyOutcome::Infeasible ? kViolation : kInconclusive;
    return {code, finish(certify_report(sf, res, tol), code)};
}

inline Outcome run_eval(const std::string& input, const std::vector<std::string>& points, const std::optional<std::string>& tuple_path, double tol)
{
    const auto real = io::load_realization(input);
    if (points.empty() && !tuple_path) fail(ErrorKind::InvalidArgument, "eval needs --point or --tuple");
    Json rep;
    rep["command"] = "eval";
    rep["kind"] = io::kind_of(real);
    rep["tol"] = tol;
    bool ok = true;
    Json vals = Json::array();
    for (const auto& p : points) {
        const Vector z = detail::parse_point(p, "--point");
        Json entry = {{"z", io::to_json(z)}};
        if (const auto* tr = std::get_if<TransferRealization>(&real)) {
            for (Index r = 0; r < z.size(); ++r)
                if (!(std::abs(z(r)) < 1.0)) fail(ErrorKind::DomainViolation, "transfer realizations are evaluated in the open polydisk");
            const cplx phi = transfer_eval(*tr, z);
            entry["value"] = io::to_json(phi);
            entry["contractive"] = std::abs(phi) <= 1.0 + tol;
            ok = ok && entry["contractive"].get<bool>();
        } else {
            const cplx F = std::holds_alternative<CauchyRealization>(real) ? eval_cauchy(std::get<CauchyRealization>(real), z)
                                                                          : eval_selfadjoint(std::get<SelfAdjointRealization>(real), z);
            entry["value"] = io::to_json(F);
            const bool upper = (z.imag().array() > 0.0).all();
            const bool lower = (z.imag().array() < 0.0).all();
            if (upper || lower) {
                entry["pick"] = upper ? F.imag() >= -tol * (1.0 + std::abs(F)) : F.imag() <= tol * (1.0 + std::abs(F));
                ok = ok && entry["pick"].get<bool>();
            }
        }
        vals.push_back(std::move(entry));
    }
    rep["values"] = std::move(vals);
    rep["tuple_value"] = nullptr;
    if (tuple_path) {
        const auto S = io::tuple_from_json(io::Node(io::read_json_file(*tuple_path)));
        const Matrix F = eval_on_tuple(detail::as_cauchy(real), S);
        const double herm = hermitian_defect(F);
        rep["tuple_value"] = {{"F", io::to_json(F)}, {"hermitian_defect", herm}};
        ok = ok && herm <= tol * (1.0 + F.norm());
    }
    const int code = ok ? kPass : kViolation;
    return {code, finish(std::move(rep), code)};
}

inline Outcome run_synth(const std::string& input, const std::optional<std::string>& z0_flag, const std::optional<std::string>& tau_flag,
                         std::uint64_t seed, int points, double tol)
{
    const auto real = io::load_realization(input);
    const auto* tr = std::get_if<TransferRealization>(&real);
    if (!tr) fail(ErrorKind::InvalidArgument, "synth needs a transfer realization");
    const int d = tr->grading.d();
    const Vector z0 = z0_flag ? detail::parse_point(*z0_flag, "--z0") : Vector(Vector::Constant(d, I_unit));
    const cplx tau = tau_flag ? detail::parse_complex(*tau_flag, "--tau") : choose_tau(*tr);
    const auto sr = synthesize_selfadjoint(*tr, z0, tau);
    const auto cr = reduce_to_cauchy(sr);

    double max_synth = 0.0, max_reduce = 0.0;
    for (int k = 0; k < points; ++k) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
        Vector z(d);
        for (int r = 0; r < d; ++r) z(r) = cplx(rng.uniform(-2.0, 2.0), rng.uniform(0.1, 2.0));
        max_synth = std::max(max_synth, synthesis_residual(*tr, sr, z));
        max_reduce = std::max(max_reduce, std::abs(eval_cauchy(cr, z) - eval_selfadjoint(sr, z)));
    }
    Json rep;
    rep["command"] = "synth";
    rep["seed"] = seed;
    rep["points"] = points;
    rep["tol"] = tol;
    rep["tau"] = io::to_json(tau);
    rep["t"] = sr.t;
    rep["selfadjoint"] = io::to_json(sr);
    rep["cauchy"] = io::to_json(cr);
    rep["max_synthesis_residual"] = max_synth;
    rep["max_reduction_residual"] = max_reduce;
    const int code = max_synth <= tol && max_reduce <= tol ? kPass : kViolation;
    return {code, finish(std::move(rep), code)};
}

inline Outcome run_fuzz(const TrialConfig& cfg)
{
    const auto r = run_trials(cfg);
    const int code = r.failures == 0 ? kPass : kViolation;
    return {code, finish(trial_report(cfg, r), code)};
}

inline Outcome run_report(const std::string& input)
{
    const Json j = io::read_json_file(input);
    const io::Node root(j);
    root.at("command").string();
    root.at("status").string();
    const long code = root.at("exit_code").integer();
    if (code != kPass && code != kViolation && code != kInconclusive) root.at("exit_code").error("exit code must be 0, 2 or 3");
    return {static_cast<int>(code), j};
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Matrix monotonicity toolkit: certificates, realizations and randomized trials"};
    app.require_subcommand(1);

    std::string input, out_path;
    std::vector<std::string> points;
    std::string tuple_path, z0, tau, mode = "global", box, function, layout = "overlapping";
    double tol = 0.0, s = 0.5;
    int max_iter = 0, trials = 100, panels = 64, n = 0;
    long budget = 100000;
    std::uint64_t seed = 0;

    auto* certify_cmd = app.add_subcommand("certify", "certify or refute a sampled function");
    certify_cmd->add_option("--input", input, "sampled function JSON")->required();
    auto* certify_tol = certify_cmd->add_option("--tol", tol, "PSD tolerance");
    auto* certify_iter = certify_cmd->add_option("--max-iter", max_iter, "iteration cap");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a realization");
    eval_cmd->add_option("--input", input, "realization JSON")->required();
    eval_cmd->add_option("--point", points, "point 're1,im1;re2,im2' (repeatable)");
    auto* eval_tuple = eval_cmd->add_option("--tuple", tuple_path, "JSON array of matrices for the lifted resolvent");
    auto* eval_tol = eval_cmd->add_option("--tol", tol, "check tolerance");

    auto* synth_cmd = app.add_subcommand("synth", "self-adjoint and Cauchy realizations from a unitary transfer block");
    synth_cmd->add_option("--input", input, "transfer realization JSON")->required();
    auto* synth_z0 = synth_cmd->add_option("--z0", z0, "base point 're1,im1;re2,im2' (default i,...,i)");
    auto* synth_tau = synth_cmd->add_option("--tau", tau, "unimodular 're,im' (default chosen away from the spectrum)");
    auto* synth_seed = synth_cmd->add_option("--seed", seed, "seed for test points");
    auto* synth_trials = synth_cmd->add_option("--trials", trials, "number of test points");
    auto* synth_tol = synth_cmd->add_option("--tol", tol, "residual tolerance");

    auto* fuzz_cmd = app.add_subcommand("fuzz", "randomized monotonicity trials");
    fuzz_cmd->add_option("--seed", seed, "64-bit seed")->required();
    fuzz_cmd->add_option("--mode", mode, "global | local | geomean | intermediate | path");
    fuzz_cmd->add_option("--trials", trials, "number of trials");
    fuzz_cmd->add_option("--s", s, "exponent for geomean");
    auto* fuzz_box = fuzz_cmd->add_option("--box", box, "box 'a1,b1;a2,b2'");
    fuzz_cmd->add_option("--panels", panels, "Simpson panels for path mode");
    fuzz_cmd->add_option("--n", n, "matrix size (0 cycles through 2..4)");
    auto* fuzz_fn = fuzz_cmd->add_option("--function", function, "built-in function");
    fuzz_cmd->add_option("--budget", budget, "evaluation budget for intermediate mode");
    fuzz_cmd->add_option("--layout", layout, "ordered pair layout: thirds | overlapping");
    auto* fuzz_input = fuzz_cmd->add_option("--input", input, "Cauchy or self-adjoint realization JSON");
    auto* fuzz_tol = fuzz_cmd->add_option("--tol", tol, "a trial fails below -tol");

    auto* report_cmd = app.add_subcommand("report", "re-emit a report canonically and return its exit code");
    report_cmd->add_option("--input", input, "report JSON")->required();

    for (auto* cmd : {certify_cmd, eval_cmd, synth_cmd, fuzz_cmd, report_cmd}) cmd->add_option("--out", out_path, "report path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kPass;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }

    try {
        Outcome res;
        if (certify_cmd->parsed()) {
            Tolerances t;
            if (certify_tol->count()) t.tol_psd = tol;
            if (certify_iter->count()) t.max_iter = max_iter;
            t.validate();
            res = run_certify(input, t);
        } else if (eval_cmd->parsed()) {
            res = run_eval(input, points, eval_tuple->count() ? std::optional(tuple_path) : std::nullopt, eval_tol->count() ? tol : 1e-9);
        } else if (synth_cmd->parsed()) {
            res = run_synth(input, synth_z0->count() ? std::optional(z0) : std::nullopt, synth_tau->count() ? std::optional(tau) : std::nullopt,
                            synth_seed->count() ? seed : 0, synth_trials->count() ? trials : 20, synth_tol->count() ? tol : 1e-8);
        } else if (fuzz_cmd->parsed()) {
            TrialConfig cfg;
            cfg.seed = seed;
            cfg.trials = trials;
            cfg.mode = parse_trial_mode(mode);
            cfg.s = s;
            cfg.panels = panels;
            cfg.n = n;
            cfg.budget = budget;
            if (layout == "thirds") {
                cfg.layout = PairLayout::Thirds;
            } else if (layout != "overlapping") {
                fail(ErrorKind::InvalidArgument, "--layout must be 'thirds' or 'overlapping'");
            }
            if (fuzz_fn->count()) cfg.function = function;
            if (fuzz_input->count()) {
                cfg.realization = detail::as_cauchy(io::load_realization(input));
            }
            cfg.box = cfg.mode == TrialMode::Geomean ? Box::cube(2, 0.1, 4.0) : builtin_function(cfg.function).default_box;
            if (cfg.realization) cfg.box = Box::cube(cfg.realization->grading.d(), -0.4, 0.4);
            if (fuzz_box->count()) cfg.box = detail::parse_box(box);
            if (fuzz_tol->count()) {
                if (!(tol >= 0.0)) fail(ErrorKind::InvalidArgument, "--tol must be nonnegative");
                cfg.threshold = -tol;
            }
            res = run_fuzz(cfg);
        } else {
            res = run_report(input);
        }
        const std::string text = io::canonical_dump(res.report);
        if (out_path.empty()) {
            out << text;
        } else {
            io::write_text_file(out_path, text);
        }
        return res.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
}

} // namespace loewner::cli
