#pragma once

// Randomized checks of matrix monotonicity: generators for commuting tuples and
// ordered pairs, global and local trials, the geometric-mean family, a search
// for commuting tuples between two ordered ones, and path-integral checks for
// Cauchy realizations. Every trial draws from its own stream keyed by
// (seed, trial index), so reports are reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certify.hpp"
#include "linalg.hpp"
#include "random.hpp"
#include "realization.hpp"
#include "tuple_calculus.hpp"

namespace loewner {

using Tuple = std::vector<Matrix>;

// ---------------------------------------------------------------------------
// Generators

struct PlantedTuple {
    CommutingTuple S;
    RealMatrix points; // n x d joint eigenvalues used to build S
};

/// U diag(x^r) U^H with Haar U and i.i.d. uniform points strictly inside the box.
inline PlantedTuple random_planted_tuple(Index n, const Box& box, Rng& rng)
{
    box.validate();
    if (n < 1) fail(ErrorKind::InvalidArgument, "tuple size must be positive");
    const int d = box.d();
    const Matrix U = random_unitary(n, rng);
    RealMatrix pts(n, d);
    for (int attempt = 0;; ++attempt) {
        for (Index i = 0; i < n; ++i)
            for (int r = 0; r < d; ++r)
                pts(i, r) = rng.uniform(box.lo[static_cast<std::size_t>(r)], box.hi[static_cast<std::size_t>(r)]);
        if (is_generic(JointSpectrum::from_points(pts), 1e-6 * box.min_width())) break;
        if (attempt >= 100) fail(ErrorKind::RetryExhausted, "could not draw a generic tuple");
    }
    Tuple mats;
    for (int r = 0; r < d; ++r) mats.push_back(hermitian_part(U * pts.col(r).cast<cplx>().asDiagonal() * U.adjoint()));
    return {CommutingTuple::unchecked(std::move(mats)), pts};
}

inline CommutingTuple random_commuting_tuple(Index n, const Box& box, Rng& rng) { return random_planted_tuple(n, box, rng).S; }

/// Where the two independent tuples of an ordered pair are drawn.
enum class PairLayout {
    Thirds,      // lower and upper thirds of the box
    Overlapping, // both over the whole box
};

struct OrderedPair {
    CommutingTuple S;
    CommutingTuple T;
};

/// S <= T, both commuting with spectra inside the box: T^r = B^r + c_r I with
/// c_r = max(0, lambda_max(A^r - B^r)) + margin, then one increasing affine map per
/// coordinate places the union of both spectra inside the box.
inline OrderedPair random_ordered_pair(Index n, const Box& box, Rng& rng, PairLayout layout = PairLayout::Thirds, double margin = 0.0)
{
    box.validate();
    const int d = box.d();
    Box lower = box, upper = box;
    if (layout == PairLayout::Thirds) {
        for (int r = 0; r < d; ++r) {
            const auto k = static_cast<std::size_t>(r);
            const double w = box.width(r) / 3.0;
            lower.hi[k] = box.lo[k] + w;
            upper.lo[k] = box.hi[k] - w;
        }
    }
    for (int attempt = 0; attempt < 100; ++attempt) {
        const auto A = random_commuting_tuple(n, lower, rng);
        const auto B = random_commuting_tuple(n, upper, rng);
        Tuple S, T;
        bool ok = true;
        for (int r = 0; r < d; ++r) {
            const auto k = static_cast<std::size_t>(r);
            const Matrix Id = Matrix::Identity(n, n);
            const double c = std::max(0.0, max_eigenvalue(A[r] - B[r])) + margin;
            const Matrix Tr = B[r] + c * Id;
            const double lo = std::min(min_eigenvalue(A[r]), min_eigenvalue(Tr));
            const double hi = std::max(max_eigenvalue(A[r]), max_eigenvalue(Tr));
            // strictly inside: 1% of the width kept free on each side
            const double blo = box.lo[k] + 0.01 * box.width(r);
            const double bhi = box.hi[k] - 0.01 * box.width(r);
            const double scale = hi > lo ? std::min(1.0, (bhi - blo) / (hi - lo)) : 1.0;
            const double shift = hi > lo ? std::clamp(lo, blo, bhi - scale * (hi - lo)) : std::clamp(lo, blo, bhi);
            S.push_back(hermitian_part(shift * Id + scale * (A[r] - lo * Id)));
            T.push_back(hermitian_part(shift * Id + scale * (Tr - lo * Id)));
            for (const Matrix* M : {&S.back(), &T.back()}) {
                ok = ok && min_eigenvalue(*M) > box.lo[k] && max_eigenvalue(*M) < box.hi[k];
            }
        }
        if (ok && loewner_leq(std::span<const Matrix>(S), std::span<const Matrix>(T), 1e-12)) {
            return {CommutingTuple::unchecked(std::move(S)), CommutingTuple::unchecked(std::move(T))};
        }
    }
    fail(ErrorKind::RetryExhausted, "could not place an ordered pair inside the box");
}

// ---------------------------------------------------------------------------
// Matrix-valued evaluators

using TupleEvaluator = std::function<Matrix(std::span<const Matrix>)>;

/// f(S) through the joint spectrum of a commuting tuple.
inline TupleEvaluator spectral_evaluator(SmoothFunction f, Tolerances tol = {})
{
    return [f = std::move(f), tol](std::span<const Matrix> S) {
        return apply_function(f, joint_diagonalize(CommutingTuple(Tuple(S.begin(), S.end()), tol), tol));
    };
}

/// F(S) through the lifted resolvent of a Cauchy realization.
inline TupleEvaluator cauchy_evaluator(CauchyRealization cr)
{
    return [cr = std::move(cr)](std::span<const Matrix> S) { return eval_on_tuple(cr, S); };
}

// ---------------------------------------------------------------------------
// Single trials

/// min eig of f(T) - f(S).
inline double global_trial(const TupleEvaluator& f, std::span<const Matrix> S, std::span<const Matrix> T)
{
    return min_eigenvalue(hermitian_part(f(T) - f(S)));
}

/// min eig of D_Delta f(S).
inline double local_trial(const SmoothFunction& f, const JointSpectrum& js, const Direction& Delta, const Tolerances& tol = {})
{
    return min_eigenvalue(directional_derivative(f, js, Delta, tol), tol);
}

/// P^s for Hermitian PSD P, with P^0 = I.
inline Matrix psd_power(const Matrix& P, double s)
{
    if (s == 0.0) return Matrix::Identity(P.rows(), P.cols());
    return hermitian_function(P, [s](double x) { return std::pow(std::max(x, 0.0), s); });
}

/// (B^1 B^2)^s - (A^1 A^2)^s for positive commuting pairs; returns its min eigenvalue.
inline double geomean_trial(double s, const CommutingTuple& A, const CommutingTuple& B)
{
    if (!(s >= 0.0 && s <= 1.0)) fail(ErrorKind::InvalidArgument, "exponent s must lie in [0, 1]");
    auto power = [s](const CommutingTuple& P) {
        if (P.d() != 2) fail(ErrorKind::DimensionMismatch, "geometric mean trial needs pairs");
        for (int r = 0; r < 2; ++r)
            if (!(min_eigenvalue(P[r]) > 0.0)) fail(ErrorKind::DomainViolation, "geometric mean needs positive pairs");
        return psd_power(hermitian_part(P[0] * P[1]), s);
    };
    return min_eigenvalue(hermitian_part(power(B) - power(A)));
}

// ---------------------------------------------------------------------------
// Intermediate commuting tuples

struct IntermediateResult {
    bool found = false;
    Tuple best_candidate;
    double best_penalty = std::numeric_limits<double>::infinity(); // order violation of the best candidate
    double distance_from_endpoints = 0.0;                         // min(||R - S||, ||R - T||) of the best candidate
    double commutator = 0.0;                                      // ||[R^1, R^2]|| of the best candidate
    long evaluations = 0;
};

struct IntermediateOptions {
    long budget = 100000;
    bool commuting = true;   // false: R^r independent Hermitian matrices
    double min_distance = 1e-4;
    double feasibility_tol = 1e-8;
    double target_distance = 1e-3;
};

namespace detail {

inline Matrix unitary_2x2(double theta, double phi)
{
    Matrix U(2, 2);
    const double c = std::cos(theta), s = std::sin(theta);
    U << c, -std::polar(s, -phi), std::polar(s, phi), c;
    return U;
}

/// Order violation sum_r [lambda_min(R - S)]_- + [lambda_min(T - R)]_-.
inline double order_penalty(std::span<const Matrix> R, std::span<const Matrix> S, std::span<const Matrix> T)
{
    double p = 0.0;
    for (std::size_t r = 0; r < R.size(); ++r) {
        p += std::max(0.0, -min_eigenvalue(hermitian_part(R[r] - S[r])));
        p += std::max(0.0, -min_eigenvalue(hermitian_part(T[r] - R[r])));
    }
    return p;
}

inline double tuple_gap(std::span<const Matrix> A, std::span<const Matrix> B)
{
    double g = 0.0;
    for (std::size_t r = 0; r < A.size(); ++r) g = std::max(g, spectral_norm(A[r] - B[r]));
    return g;
}

/// Parameters -> tuple. Commuting: (theta, phi, diag entries); otherwise 4 real entries per component.
inline Tuple decode_candidate(const RealVector& p, int d, bool commuting)
{
    Tuple R;
    if (commuting) {
        const Matrix U = unitary_2x2(p(0), p(1));
        for (int r = 0; r < d; ++r) {
            Vector dg(2);
            dg << p(2 + 2 * r), p(3 + 2 * r);
            R.push_back(hermitian_part(U * dg.asDiagonal() * U.adjoint()));
        }
    } else {
        for (int r = 0; r < d; ++r) {
            Matrix M(2, 2);
            const cplx c(p(4 * r + 2), p(4 * r + 3));
            M << p(4 * r), c, std::conj(c), p(4 * r + 1);
            R.push_back(M);
        }
    }
    return R;
}

/// Shared eigenbasis of a generic combination, with each component replaced by its diagonal there.
inline Tuple nearest_commuting(const Tuple& R)
{
    Matrix M = Matrix::Zero(R[0].rows(), R[0].cols());
    double w = 1.0;
    for (const auto& A : R) {
        M += w * A;
        w *= 0.6180339887498949;
    }
    const Matrix Q = eig_hermitian(hermitian_part(M)).vectors;
    Tuple out;
    for (const auto& A : R) {
        const Vector dg = (Q.adjoint() * A * Q).diagonal().real().cast<cplx>();
        out.push_back(hermitian_part(Q * dg.asDiagonal() * Q.adjoint()));
    }
    return out;
}

} // namespace detail

/// Search for R with S <= R <= T (2 x 2 tuples) away from both endpoints: simulated annealing over
/// the parametrization, restarted periodically, followed by Douglas-Rachford refinement on the order constraints.
inline IntermediateResult intermediate_search(std::span<const Matrix> S, std::span<const Matrix> T, Rng& rng,
                                              const IntermediateOptions& opt = {})
{
    require_tuple_shape(S, T, "intermediate search endpoints");
    if (S[0].rows() != 2) fail(ErrorKind::InvalidArgument, "intermediate search works on 2 x 2 tuples");
    if (opt.budget < 1) fail(ErrorKind::InvalidArgument, "search budget must be positive");
    const int d = static_cast<int>(S.size());
    const Index dim = opt.commuting ? 2 + 2 * d : 4 * d;

    RealVector lo(d), hi(d);
    double scale = 0.0;
    for (int r = 0; r < d; ++r) {
        lo(r) = min_eigenvalue(S[static_cast<std::size_t>(r)]);
        hi(r) = max_eigenvalue(T[static_cast<std::size_t>(r)]);
        scale = std::max(scale, hi(r) - lo(r));
    }
    if (scale <= 0.0) scale = 1.0;

    IntermediateResult res;
    double best_objective = std::numeric_limits<double>::infinity();
    auto tuple_objective = [&](const Tuple& R) {
        ++res.evaluations;
        const double pen = detail::order_penalty(R, S, T);
        const double dist = std::min(detail::tuple_gap(R, S), detail::tuple_gap(R, T));
        const double value = pen + std::max(0.0, opt.target_distance - dist);
        if (value < best_objective) {
            best_objective = value;
            res.best_candidate = R;
            res.best_penalty = pen;
            res.distance_from_endpoints = dist;
        }
        if (pen <= opt.feasibility_tol && dist > opt.min_distance) res.found = true;
        return value;
    };
    auto objective = [&](const RealVector& p) { return tuple_objective(detail::decode_candidate(p, d, opt.commuting)); };
    auto random_state = [&]() {
        RealVector p(dim);
        if (opt.commuting) {
            p(0) = rng.uniform(0.0, std::numbers::pi);
            p(1) = rng.uniform(0.0, 2.0 * std::numbers::pi);
            for (int r = 0; r < d; ++r) {
                p(2 + 2 * r) = rng.uniform(lo(r), hi(r));
                p(3 + 2 * r) = rng.uniform(lo(r), hi(r));
            }
        } else {
            for (int r = 0; r < d; ++r) {
                const Matrix M = 0.5 * (S[static_cast<std::size_t>(r)] + T[static_cast<std::size_t>(r)]);
                const double w = 0.5 * (hi(r) - lo(r));
                p(4 * r) = M(0, 0).real() + rng.uniform(-w, w);
                p(4 * r + 1) = M(1, 1).real() + rng.uniform(-w, w);
                p(4 * r + 2) = M(0, 1).real() + rng.uniform(-w, w);
                p(4 * r + 3) = M(0, 1).imag() + rng.uniform(-w, w);
            }
        }
        return p;
    };

    const long sa_budget = std::max<long>(1, opt.budget * 4 / 5);
    const long restarts = 20;
    const long per_run = std::max<long>(1, sa_budget / restarts);
    RealVector best_state;
    double best_value = std::numeric_limits<double>::infinity();
    for (long run = 0; run < restarts && res.evaluations < sa_budget && !res.found; ++run) {
        RealVector p = random_state();
        double fp = objective(p);
        for (long k = 0; k < per_run && !res.found; ++k) {
            const double frac = static_cast<double>(k) / static_cast<double>(per_run);
            const double temp = 0.1 * scale * (1.0 - frac) + 1e-12;
            const double step = 0.2 * scale * std::pow(1e-4, frac);
            RealVector q = p;
            for (Index i = 0; i < dim; ++i) q(i) += step * rng.normal();
            const double fq = objective(q);
            if (fq <= fp || rng.uniform() < std::exp(-(fq - fp) / temp)) {
                p = q;
                fp = fq;
            }
            if (fp < best_value) {
                best_value = fp;
                best_state = p;
            }
        }
    }

    // Douglas-Rachford iteration for {R >= S} and {R <= T}, started from the best annealing state and
    // restarted from random states once the shadow sequence settles; in commuting mode each shadow is
    // replaced by the nearest commuting tuple before it is scored
    if (!res.found && best_state.size() == dim) {
        auto lower = [&](std::size_t r, const Matrix& Y) { return Matrix(S[r] + project_psd(hermitian_part(Y - S[r]))); };
        auto upper = [&](std::size_t r, const Matrix& Y) { return Matrix(T[r] - project_psd(hermitian_part(T[r] - Y))); };
        Tuple x = detail::decode_candidate(best_state, d, opt.commuting);
        Tuple prev;
        while (res.evaluations < opt.budget && !res.found) {
            Tuple shadow(x.size());
            for (std::size_t r = 0; r < x.size(); ++r) {
                shadow[r] = lower(r, x[r]);
                x[r] += upper(r, 2.0 * shadow[r] - x[r]) - shadow[r];
            }
            tuple_objective(opt.commuting ? detail::nearest_commuting(shadow) : shadow);
            if (!prev.empty() && detail::tuple_gap(prev, shadow) <= 1e-14 * scale) {
                x = detail::decode_candidate(random_state(), d, opt.commuting);
                prev.clear();
            } else {
                prev = std::move(shadow);
            }
        }
    }
    if (res.best_candidate.size() == 2) res.commutator = commutator(res.best_candidate[0], res.best_candidate[1]).norm();
    return res;
}

// ---------------------------------------------------------------------------
// Path positivity for Cauchy realizations

struct PathTrialResult {
    double integral_error = 0.0;           // ||Simpson(panels) - (F(T) - F(S))||_F
    double integral_error_fine = 0.0;      // same with 2 * panels
    double min_derivative_eig = std::numeric_limits<double>::infinity();
};

inline PathTrialResult path_positivity_trial(const CauchyRealization& cr, std::span<const Matrix> S, std::span<const Matrix> T, int panels = 64)
{
    PathTrialResult res;
    const Matrix diff = eval_on_tuple(cr, T) - eval_on_tuple(cr, S);
    res.integral_error = (path_integral(cr, S, T, panels) - diff).norm();
    res.integral_error_fine = (path_integral(cr, S, T, 2 * panels) - diff).norm();
    for (int k = 0; k <= panels; ++k) {
        res.min_derivative_eig = std::min(res.min_derivative_eig, min_eigenvalue(path_derivative_check(cr, S, T, static_cast<double>(k) / panels)));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Built-in test functions

/// x1 + x2, x1 x2, sqrt(x1 x2), -1/x, x^2, and the Cauchy transform -z2 / (z1 z2 - 1).
struct BuiltinFunction {
    std::string name;
    SmoothFunction f;
    std::optional<CauchyRealization> realization;
    bool known_monotone = true; // false: trials are exploration, failures contradict nothing
    Box default_box = Box::cube(2, -1.0, 1.0);
};

inline CauchyRealization swap_realization()
{
    CauchyRealization cr;
    cr.X = Matrix::Zero(2, 2);
    cr.X(0, 1) = cr.X(1, 0) = 1.0;
    cr.v1 = Vector::Unit(2, 0);
    cr.grading = GradedSpace({1, 1});
    return cr;
}

inline std::vector<std::string> builtin_function_names() { return {"affine", "xy", "sqrt_xy", "neg_inv", "square", "cauchy_swap"}; }

namespace detail {

inline BuiltinFunction builtin_function_base(const std::string& name)
{
    auto vec2 = [](double a, double b) {
        RealVector g(2);
        g << a, b;
        return g;
    };
    if (name == "affine") {
        return {name, SmoothFunction(2, [](const RealVector& x) { return x(0) + x(1); }, [vec2](const RealVector&) { return vec2(1, 1); }), {}};
    }
    if (name == "xy") {
        return {name, SmoothFunction(2, [](const RealVector& x) { return x(0) * x(1); }, [vec2](const RealVector& x) { return vec2(x(1), x(0)); }), {}, false};
    }
    if (name == "sqrt_xy") {
        Box pos{{0.0, 0.0}, {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()}};
        return {name,
                SmoothFunction(
                    2, [](const RealVector& x) { return std::sqrt(x(0) * x(1)); },
                    [vec2](const RealVector& x) {
                        const double s = std::sqrt(x(0) * x(1));
                        return vec2(0.5 * x(1) / s, 0.5 * x(0) / s);
                    },
                    pos),
                {}};
    }
    if (name == "neg_inv") {
        Box pos{{0.0}, {std::numeric_limits<double>::max()}};
        return {name, SmoothFunction(1, [](const RealVector& x) { return -1.0 / x(0); }, [](const RealVector& x) { return RealVector::Constant(1, 1.0 / (x(0) * x(0))); }, pos), {}};
    }
    if (name == "square") {
        return {name, SmoothFunction(1, [](const RealVector& x) { return x(0) * x(0); }, [](const RealVector& x) { return RealVector::Constant(1, 2.0 * x(0)); }), {}, false};
    }
    if (name == "cauchy_swap") {
        auto value = [](const RealVector& x) { return -x(1) / (x(0) * x(1) - 1.0); };
        auto grad = [vec2](const RealVector& x) {
            const double den = x(0) * x(1) - 1.0;
            return vec2(x(1) * x(1) / (den * den), 1.0 / (den * den));
        };
        return {name, SmoothFunction(2, value, grad), swap_realization()};
    }
    fail(ErrorKind::InvalidArgument, "unknown function '" + name + "'");
}

} // namespace detail

inline BuiltinFunction builtin_function(const std::string& name)
{
    auto fn = detail::builtin_function_base(name);
    if (name == "xy") fn.default_box = Box::cube(2, 0.0, 3.0);
    if (name == "sqrt_xy") fn.default_box = Box::cube(2, 0.5, 2.0);
    if (name == "neg_inv") fn.default_box = Box::cube(1, 0.5, 3.0);
    if (name == "square") fn.default_box = Box::cube(1, -1.0, 1.0);
    if (name == "cauchy_swap") fn.default_box = Box::cube(2, -0.4, 0.4);
    return fn;
}

// ---------------------------------------------------------------------------
// Trial runs

enum class TrialMode { Global, Local, Geomean, Intermediate, Path };

inline std::string to_string(TrialMode m)
{
    switch (m) {
    case TrialMode::Global: return "global";
    case TrialMode::Local: return "local";
    case TrialMode::Geomean: return "geomean";
    case TrialMode::Intermediate: return "intermediate";
    case TrialMode::Path: return "path";
    }
    return "unknown";
}

inline TrialMode parse_trial_mode(const std::string& s)
{
    for (TrialMode m : {TrialMode::Global, TrialMode::Local, TrialMode::Geomean, TrialMode::Intermediate, TrialMode::Path})
        if (to_string(m) == s) return m;
    fail(ErrorKind::InvalidArgument, "unknown mode '" + s + "'");
}

struct TrialConfig {
    std::uint64_t seed = 0;
    int trials = 100;
    int n = 0; // 0: n = 2 + (trial index mod 3)
    Box box = Box::cube(2, -0.4, 0.4);
    TrialMode mode = TrialMode::Global;
    double s = 0.5;
    int panels = 64;
    long budget = 100000;
    std::string function = "cauchy_swap";
    std::optional<CauchyRealization> realization; // overrides the built-in function's realization
    PairLayout layout = PairLayout::Overlapping;
    double threshold = -1e-8; // a trial passes when its value is >= threshold
    Tolerances tol;

    void validate() const
    {
        box.validate();
        tol.validate();
        if (trials < 1) fail(ErrorKind::InvalidArgument, "trials must be positive");
        if (n < 0 || n > 8) fail(ErrorKind::InvalidArgument, "n must lie in [0, 8]");
        if (panels < 2 || panels % 2) fail(ErrorKind::InvalidArgument, "panels must be a positive even number");
        if (budget < 1) fail(ErrorKind::InvalidArgument, "budget must be positive");
    }
};

struct FailureExample {
    int trial = 0;
    double value = 0.0;
    Tuple S;
    Tuple T; // second endpoint or direction, depending on the mode
};

struct TrialReport {
    std::string mode;
    std::string function;
    std::uint64_t seed = 0;
    int trials = 0;
    int passes = 0;
    int failures = 0;
    double worst_violation = std::numeric_limits<double>::infinity(); // smallest trial value
    bool asserted = true;                                            // false for exploration runs
    std::vector<FailureExample> failure_examples;
    std::map<std::string, double> stats; // deterministic summary statistics
};

namespace detail {

inline constexpr std::size_t kMaxFailureExamples = 5;

inline void record(TrialReport& rep, int trial, double value, bool pass, const Tuple& S, const Tuple& T)
{
    rep.worst_violation = std::min(rep.worst_violation, value);
    if (pass) {
        ++rep.passes;
        return;
    }
    ++rep.failures;
    if (rep.failure_examples.size() < kMaxFailureExamples) rep.failure_examples.push_back({trial, value, S, T});
}

inline Index trial_size(const TrialConfig& cfg, int trial, Index cap) { return cfg.n > 0 ? cfg.n : std::min<Index>(cap, 2 + trial % 3); }

} // namespace detail

/// The 2 x 2 ordered pair with no commuting tuple strictly between its endpoints.
inline OrderedPair rigid_pair()
{
    Matrix S1(2, 2), S2(2, 2), T1(2, 2), T2(2, 2);
    S1 << 0, 0, 0, 5;
    S2 << 1, 0, 0, 0;
    T1 << 4, 2, 2, 6;
    T2 << 2, 2, 2, 4;
    return {CommutingTuple({S1, S2}), CommutingTuple({T1, T2})};
}

inline TrialReport run_trials(const TrialConfig& cfg)
{
    cfg.validate();
    TrialReport rep;
    rep.mode = to_string(cfg.mode);
    rep.seed = cfg.seed;
    rep.trials = cfg.trials;
    std::vector<double> values;

    switch (cfg.mode) {
    case TrialMode::Global:
    case TrialMode::Local: {
        const auto fn = builtin_function(cfg.function);
        rep.function = cfg.realization ? "realization" : fn.name;
        rep.asserted = cfg.realization || fn.known_monotone;
        if (cfg.realization && cfg.mode == TrialMode::Local) fail(ErrorKind::InvalidArgument, "local trials need a built-in function");
        const int fd = cfg.realization ? cfg.realization->grading.d() : fn.f.d();
        if (fd != cfg.box.d()) fail(ErrorKind::DimensionMismatch, "box dimension differs from the function's");
        const auto cr = cfg.realization ? cfg.realization : fn.realization;
        const TupleEvaluator eval = cr ? cauchy_evaluator(*cr) : spectral_evaluator(fn.f, cfg.tol);
        for (int k = 0; k < cfg.trials; ++k) {
            Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(k));
            const Index n = detail::trial_size(cfg, k, 4);
            if (cfg.mode == TrialMode::Global) {
                const auto pair = random_ordered_pair(n, cfg.box, rng, cfg.layout);
                const double v = global_trial(eval, pair.S.span(), pair.T.span());
                values.push_back(v);
                detail::record(rep, k, v, v >= cfg.threshold, pair.S.matrices(), pair.T.matrices());
            } else {
                const auto S = random_commuting_tuple(n, cfg.box, rng);
                const auto js = joint_diagonalize(S, cfg.tol);
                const auto Delta = random_first_order_direction(js, rng, true);
                const double v = local_trial(fn.f, js, Delta, cfg.tol);
                values.push_back(v);
                detail::record(rep, k, v, v >= cfg.threshold, S.matrices(), Delta.matrices());
            }
        }
        break;
    }
    case TrialMode::Geomean: {
        if (cfg.box.d() != 2) fail(ErrorKind::DimensionMismatch, "geometric mean trials need a 2-d box");
        if (cfg.box.lo[0] < 0.0 || cfg.box.lo[1] < 0.0) fail(ErrorKind::DomainViolation, "geometric mean trials need a positive box");
        rep.function = "geomean";
        rep.asserted = cfg.s <= 0.5;
        rep.stats["s"] = cfg.s;
        for (int k = 0; k < cfg.trials; ++k) {
            Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(k));
            const Index n = detail::trial_size(cfg, k, 4);
            const auto pair = random_ordered_pair(n, cfg.box, rng, cfg.layout);
            const double v = geomean_trial(cfg.s, pair.S, pair.T);
            values.push_back(v);
            detail::record(rep, k, v, v >= cfg.threshold, pair.S.matrices(), pair.T.matrices());
        }
        break;
    }
    case TrialMode::Intermediate: {
        rep.function = "intermediate";
        const auto pair = rigid_pair();
        for (int k = 0; k < cfg.trials; ++k) {
            Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(k));
            IntermediateOptions opt;
            opt.budget = cfg.budget;
            const auto res = intermediate_search(pair.S.span(), pair.T.span(), rng, opt);
            // value: order violation of the best candidate that keeps its distance, or its distance when feasible
            const double v = res.found ? -res.distance_from_endpoints : res.best_penalty;
            values.push_back(v);
            rep.stats["best_penalty"] = res.best_penalty;
            rep.stats["best_distance"] = res.distance_from_endpoints;
            rep.stats["best_commutator"] = res.commutator;
            rep.stats["evaluations"] = static_cast<double>(res.evaluations);
            detail::record(rep, k, v, !res.found, res.best_candidate, pair.T.matrices());
        }
        break;
    }
    case TrialMode::Path: {
        const auto fn = builtin_function(cfg.function);
        rep.function = cfg.realization ? "realization" : fn.name;
        const auto cr = cfg.realization ? cfg.realization : fn.realization;
        if (!cr) fail(ErrorKind::InvalidArgument, "path trials need a Cauchy realization");
        if (cr->grading.d() != cfg.box.d()) fail(ErrorKind::DimensionMismatch, "box dimension differs from the realization's");
        double worst_err = 0.0, worst_ratio = std::numeric_limits<double>::infinity();
        for (int k = 0; k < cfg.trials; ++k) {
            Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(k));
            const Index n = detail::trial_size(cfg, k, 4);
            const auto pair = random_ordered_pair(n, cfg.box, rng, cfg.layout);
            const auto res = path_positivity_trial(*cr, pair.S.span(), pair.T.span(), cfg.panels);
            worst_err = std::max(worst_err, res.integral_error);
            if (res.integral_error_fine > 1e-13) worst_ratio = std::min(worst_ratio, res.integral_error / res.integral_error_fine);
            const double v = res.min_derivative_eig;
            values.push_back(v);
            detail::record(rep, k, v, v >= cfg.threshold && res.integral_error <= 1e-6, pair.S.matrices(), pair.T.matrices());
        }
        rep.stats["max_integral_error"] = worst_err;
        if (std::isfinite(worst_ratio)) rep.stats["min_richardson_ratio"] = worst_ratio;
        break;
    }
    }

    if (!values.empty()) {
        double sum = 0.0;
        for (double v : values) sum += v;
        rep.stats["mean_value"] = sum / static_cast<double>(values.size());
        rep.stats["max_value"] = *std::max_element(values.begin(), values.end());
    }
    return rep;
}

} // namespace loewner
