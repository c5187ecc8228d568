#pragma once

// Realizations of Pick-type functions on the polydisk and on the product of
// upper half-planes: transfer functions, self-adjoint (Nevanlinna-type)
// realizations, their reduced Cauchy form, the lifted resolvent that evaluates
// a realization on a commuting tuple, and discrete Herglotz/Cauchy transforms.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "linalg.hpp"
#include "tuple_calculus.hpp"

namespace loewner {

// ---------------------------------------------------------------------------
// Moebius maps between the disk and the upper half-plane

namespace detail {

inline cplx checked_quotient(cplx num, cplx den, const char* what)
{
    if (std::abs(den) <= 1e-14 * (1.0 + std::abs(num))) fail(ErrorKind::PoleHit, what);
    return num / den;
}

} // namespace detail

/// alpha(lambda) = i (1 + lambda) / (1 - lambda): disk -> upper half-plane.
inline cplx mobius_alpha(cplx lambda) { return detail::checked_quotient(I_unit * (1.0 + lambda), 1.0 - lambda, "alpha pole at 1"); }

/// beta(z) = (z - i) / (z + i): upper half-plane -> disk.
inline cplx mobius_beta(cplx z) { return detail::checked_quotient(z - I_unit, z + I_unit, "beta pole at -i"); }

/// rho_t(z) = (z + t) / (1 - t z).
inline cplx rho(double t, cplx z) { return detail::checked_quotient(z + t, 1.0 - t * z, "rho_t pole at 1/t"); }

inline Vector mobius_alpha(const Vector& lambda) { return lambda.unaryExpr([](cplx l) { return mobius_alpha(l); }); }
inline Vector mobius_beta(const Vector& z) { return z.unaryExpr([](cplx w) { return mobius_beta(w); }); }
inline Vector rho(double t, const Vector& z) { return z.unaryExpr([t](cplx w) { return rho(t, w); }); }

/// Componentwise map of a diagonal tuple's entries.
inline std::vector<Matrix> map_diagonal_tuple(std::span<const Matrix> S, const std::function<cplx(cplx)>& g)
{
    std::vector<Matrix> out;
    for (const auto& A : S) {
        if (!A.isDiagonal(0.0)) fail(ErrorKind::InvalidArgument, "componentwise maps apply to diagonal tuples only");
        Matrix B = A;
        for (Index i = 0; i < A.rows(); ++i) B(i, i) = g(A(i, i));
        out.push_back(B);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Linear solves with singularity detection

namespace detail {

/// Solve A x = b; throws `kind` when A is numerically singular.
inline Vector checked_solve(const Matrix& A, const Vector& b, ErrorKind kind, const char* what)
{
    Eigen::PartialPivLU<Matrix> lu(A);
    const double scale = 1.0 + max_abs(A);
    if (!(smallest_singular_value(A) > 1e-13 * scale)) fail(kind, what);
    return lu.solve(b);
}

inline Matrix checked_inverse(const Matrix& A, ErrorKind kind, const char* what)
{
    const double scale = 1.0 + max_abs(A);
    if (!(smallest_singular_value(A) > 1e-13 * scale)) fail(kind, what);
    return Eigen::PartialPivLU<Matrix>(A).inverse();
}

inline void require_point_dim(const Vector& z, const GradedSpace& G, const char* what)
{
    if (z.size() != G.d()) fail(ErrorKind::DimensionMismatch, what);
}

/// Blockwise scalar s^r applied to a graded vector.
inline Vector blockwise(const Vector& s, const GradedSpace& G, const Vector& eta) { return graded_apply(s, G, eta); }

} // namespace detail

// ---------------------------------------------------------------------------
// Transfer realizations on the polydisk

/// U = [[a, beta^*], [gamma, D]] on C (+) M; phi(lambda) = a + beta^* lambda (I - D lambda)^{-1} gamma.
struct TransferRealization {
    cplx a = 0.0;
    Vector beta;
    Vector gamma;
    Matrix D;
    GradedSpace grading;
    bool unitary_flag = false;

    TransferRealization() = default;

    TransferRealization(cplx a_, Vector beta_, Vector gamma_, Matrix D_, GradedSpace G, bool unitary = false, double tol = 1e-9)
        : a(a_), beta(std::move(beta_)), gamma(std::move(gamma_)), D(std::move(D_)), grading(std::move(G)), unitary_flag(unitary)
    {
        validate(tol);
    }

    Index m() const { return grading.total(); }

    Matrix block() const
    {
        Matrix U(m() + 1, m() + 1);
        U(0, 0) = a;
        U.block(0, 1, 1, m()) = beta.adjoint();
        U.block(1, 0, m(), 1) = gamma;
        U.block(1, 1, m(), m()) = D;
        return U;
    }

    double unitarity_defect() const
    {
        const Matrix U = block();
        return (U.adjoint() * U - Matrix::Identity(U.rows(), U.cols())).norm();
    }

    void validate(double tol = 1e-9) const
    {
        const Index n = m();
        if (beta.size() != n || gamma.size() != n || D.rows() != n || D.cols() != n) {
            fail(ErrorKind::ShapeMismatch, "transfer realization blocks do not match the grading");
        }
        if (spectral_norm(block()) > 1.0 + tol) fail(ErrorKind::InvalidArgument, "transfer realization is not a contraction");
        if (unitary_flag && unitarity_defect() > tol) fail(ErrorKind::NotUnitary, "transfer realization flagged unitary is not");
    }
};

/// u_lambda = (I - D lambda)^{-1} gamma.
inline Vector model_vector(const TransferRealization& tr, const Vector& lambda)
{
    detail::require_point_dim(lambda, tr.grading, "point dimension differs from grading");
    const Matrix A = Matrix::Identity(tr.m(), tr.m()) - tr.D * graded_diag(lambda, tr.grading);
    return detail::checked_solve(A, tr.gamma, ErrorKind::SingularResolvent, "I - D lambda is singular");
}

inline cplx transfer_eval(const TransferRealization& tr, const Vector& lambda)
{
    const Vector u = model_vector(tr, lambda);
    return tr.a + inner(graded_apply(lambda, tr.grading, u), tr.beta);
}

/// [1 - conj(phi(mu)) phi(lambda)] - <(1 - mu^* lambda) u_lambda, u_mu>.
inline cplx model_residual(const TransferRealization& tr, const Vector& lambda, const Vector& mu)
{
    const Vector ul = model_vector(tr, lambda);
    const Vector um = model_vector(tr, mu);
    const cplx lhs = 1.0 - std::conj(transfer_eval(tr, mu)) * transfer_eval(tr, lambda);
    const Vector weight = (Vector::Ones(lambda.size()).array() - mu.conjugate().array() * lambda.array()).matrix();
    return lhs - inner(graded_apply(weight, tr.grading, ul), um);
}

struct BPointResult {
    bool is_bpoint = false;
    std::optional<Vector> u; // minimal-norm least-squares solution of (I - D tau) u = gamma
    double residual = 0.0;   // relative residual
};

/// Boundary point test: gamma in the range of I - D tau.
inline BPointResult bpoint_check(const TransferRealization& tr, const Vector& tau, double tol = 1e-9)
{
    detail::require_point_dim(tau, tr.grading, "point dimension differs from grading");
    for (Index r = 0; r < tau.size(); ++r) {
        if (std::abs(std::abs(tau(r)) - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "boundary point must lie on the torus");
    }
    const Matrix A = Matrix::Identity(tr.m(), tr.m()) - tr.D * graded_diag(tau, tr.grading);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    cod.setThreshold(1e-12);
    const Vector u = cod.solve(tr.gamma);
    BPointResult res;
    const double g = tr.gamma.norm();
    res.residual = (A * u - tr.gamma).norm() / (g > 0.0 ? g : 1.0);
    res.is_bpoint = res.residual <= tol;
    if (res.is_bpoint) res.u = u;
    return res;
}

// ---------------------------------------------------------------------------
// Self-adjoint and Cauchy realizations on the product of upper half-planes

/// F_t(z) = c + <z v, v> + <(z - z0^*)(X - z)^{-1}(z - z0) v, v>.
struct SelfAdjointRealization {
    double c = 0.0;
    Matrix X;
    Vector v;
    Vector z0;
    GradedSpace grading;
    double t = 0.0;

    void validate(const Tolerances& tol = {}) const
    {
        const Index m = grading.total();
        if (X.rows() != m || X.cols() != m || v.size() != m) fail(ErrorKind::ShapeMismatch, "realization blocks do not match the grading");
        detail::require_point_dim(z0, grading, "z0 dimension differs from grading");
        require_hermitian(X, tol.tol_herm * (1.0 + X.norm()), "X");
        for (Index r = 0; r < z0.size(); ++r)
            if (!(z0(r).imag() > 0.0)) fail(ErrorKind::InvalidArgument, "z0 must lie in the upper half-plane");
        if (!std::isfinite(c) || !std::isfinite(t)) fail(ErrorKind::InvalidArgument, "c and t must be finite");
    }
};

/// F(z) = C + <(X - z)^{-1} v1, v1>.
struct CauchyRealization {
    double C = 0.0;
    Matrix X;
    Vector v1;
    GradedSpace grading;

    void validate(const Tolerances& tol = {}) const
    {
        const Index m = grading.total();
        if (X.rows() != m || X.cols() != m || v1.size() != m) fail(ErrorKind::ShapeMismatch, "realization blocks do not match the grading");
        require_hermitian(X, tol.tol_herm * (1.0 + X.norm()), "X");
        if (!std::isfinite(C)) fail(ErrorKind::InvalidArgument, "C must be finite");
    }
};

/// X - z with z acting blockwise.
inline Matrix shifted(const Matrix& X, const GradedSpace& G, const Vector& z)
{
    detail::require_point_dim(z, G, "point dimension differs from grading");
    return X - graded_diag(z, G);
}

inline cplx eval_selfadjoint(const SelfAdjointRealization& sr, const Vector& z)
{
    const Vector zv = graded_apply(z, sr.grading, sr.v);
    const Vector w = graded_apply(z - sr.z0, sr.grading, sr.v);
    const Vector Rw = detail::checked_solve(shifted(sr.X, sr.grading, z), w, ErrorKind::SingularResolvent, "X - z is singular");
    return sr.c + inner(zv, sr.v) + inner(graded_apply(z - sr.z0.conjugate(), sr.grading, Rw), sr.v);
}

inline cplx eval_cauchy(const CauchyRealization& cr, const Vector& z)
{
    const Vector Rv = detail::checked_solve(shifted(cr.X, cr.grading, z), cr.v1, ErrorKind::SingularResolvent, "X - z is singular");
    return cr.C + inner(Rv, cr.v1);
}

/// ||(X - z)^{-1}||, infinite when X - z is singular.
inline double mu_resolvent_norm(const Matrix& X, const GradedSpace& G, const Vector& z)
{
    const double smin = smallest_singular_value(shifted(X, G, z));
    return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

/// Bound 1 / min_r |Im z^r| on the resolvent norm off the real torus.
inline double resolvent_bound(const Vector& z)
{
    double m = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < z.size(); ++r) m = std::min(m, std::abs(z(r).imag()));
    return 1.0 / m;
}

/// z is in the mu-spectrum iff X - z is singular (smallest singular value below tol (1 + ||X||)).
inline bool in_mu_spectrum(const Matrix& X, const GradedSpace& G, const Vector& z, double tol = 1e-10)
{
    return smallest_singular_value(shifted(X, G, z)) <= tol * (1.0 + spectral_norm(X));
}

/// v1 = (X - z0) v, C = c + <z0 v, v> - <v, v1>.
inline CauchyRealization reduce_to_cauchy(const SelfAdjointRealization& sr, const Tolerances& tol = {})
{
    sr.validate(tol);
    CauchyRealization cr;
    cr.X = sr.X;
    cr.grading = sr.grading;
    cr.v1 = sr.X * sr.v - graded_apply(sr.z0, sr.grading, sr.v);
    const cplx C = sr.c + inner(graded_apply(sr.z0, sr.grading, sr.v), sr.v) - inner(sr.v, cr.v1);
    if (std::abs(C.imag()) > 1e-8 * (1.0 + std::abs(C) + sr.v.squaredNorm() * (1.0 + spectral_norm(sr.X)))) {
        fail(ErrorKind::RealityViolation, "Cauchy constant has a nonzero imaginary part");
    }
    cr.C = C.real();
    return cr;
}

// ---------------------------------------------------------------------------
// Evaluators and the rho_t conjugation

using Evaluator = std::function<cplx(const Vector&)>;

/// F_t = rho_t o F o rho_t (componentwise on the argument).
inline Evaluator conjugate_rho(Evaluator F, double t)
{
    return [F = std::move(F), t](const Vector& z) { return rho(t, F(rho(t, z))); };
}

/// F = alpha o phi o beta: the upper half-plane function of a transfer realization.
inline Evaluator halfplane_function(const TransferRealization& tr)
{
    return [tr](const Vector& z) { return mobius_alpha(transfer_eval(tr, mobius_beta(z))); };
}

inline Evaluator as_evaluator(const SelfAdjointRealization& sr)
{
    return [sr](const Vector& z) { return eval_selfadjoint(sr, z); };
}

inline Evaluator as_evaluator(const CauchyRealization& cr)
{
    return [cr](const Vector& z) { return eval_cauchy(cr, z); };
}

// ---------------------------------------------------------------------------
// Synthesis of a self-adjoint realization from a unitary transfer realization

inline std::vector<cplx> unitary_spectrum(const Matrix& U)
{
    Eigen::ComplexEigenSolver<Matrix> es(U, false);
    if (es.info() != Eigen::Success) fail(ErrorKind::DiagonalizationFailed, "eigenvalues of U did not converge");
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return ev;
}

inline double distance_to_spectrum(cplx tau, const std::vector<cplx>& spectrum)
{
    double best = std::numeric_limits<double>::infinity();
    for (cplx e : spectrum) best = std::min(best, std::abs(e - tau));
    return best;
}

/// Among 64 equispaced points of the unit circle (excluding -1), the one farthest from sigma(U).
inline cplx choose_tau(const TransferRealization& tr)
{
    const auto spec = unitary_spectrum(tr.block());
    cplx best = 1.0;
    double best_dist = -1.0;
    for (int k = 0; k < 64; ++k) {
        if (k == 32) continue;
        const cplx tau = std::polar(1.0, 2.0 * std::numbers::pi * k / 64.0);
        const double dist = distance_to_spectrum(tau, spec);
        if (dist > best_dist) {
            best_dist = dist;
            best = tau;
        }
    }
    return best;
}

/// t = -i (1 - tau) / (1 + tau), real for tau on the unit circle.
inline double tau_to_t(cplx tau)
{
    return (-I_unit * detail::checked_quotient(1.0 - tau, 1.0 + tau, "tau = -1 leaves t undefined")).real();
}

struct SynthesisOptions {
    double unitary_tol = 1e-9;
    double min_tau_distance = 1e-3;
    double reality_tol = 1e-8;
};

/// Self-adjoint realization of F_t, F = alpha o phi o beta, from a unitary U = [[a, beta^*], [gamma, D]].
///
/// Y = -i (U - tau)^{-1} (U + tau) is the Cayley transform of U; X is the compression of -Y to M;
/// v = (1 - tau lambda) u_lambda / (phi(lambda) - tau) at lambda = beta(rho_t(z0)); c = F_t(z0) - <z0 v, v>.
inline SelfAdjointRealization synthesize_selfadjoint(const TransferRealization& tr, const Vector& z0, cplx tau,
                                                     const SynthesisOptions& opt = {})
{
    detail::require_point_dim(z0, tr.grading, "z0 dimension differs from grading");
    for (Index r = 0; r < z0.size(); ++r)
        if (!(z0(r).imag() > 0.0)) fail(ErrorKind::InvalidArgument, "z0 must lie in the upper half-plane");
    if (std::abs(std::abs(tau) - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "tau must lie on the unit circle");
    const Matrix U = tr.block();
    if (tr.unitarity_defect() > opt.unitary_tol) fail(ErrorKind::NotUnitary, "synthesis needs a unitary transfer block");
    const double t = tau_to_t(tau);
    if (distance_to_spectrum(tau, unitary_spectrum(U)) < opt.min_tau_distance) {
        fail(ErrorKind::TauTooCloseToSpectrum, "tau is too close to an eigenvalue of U");
    }

    const Index m = tr.m();
    const Matrix Id = Matrix::Identity(m + 1, m + 1);
    const Matrix Y = hermitian_part(-I_unit * detail::checked_inverse(U - tau * Id, ErrorKind::TauTooCloseToSpectrum, "U - tau is singular") *
                                    (U + tau * Id));

    SelfAdjointRealization sr;
    sr.X = -Y.bottomRightCorner(m, m);
    sr.z0 = z0;
    sr.grading = tr.grading;
    sr.t = t;

    const Vector w = rho(t, z0);
    const Vector lambda = mobius_beta(w);
    const cplx phi = transfer_eval(tr, lambda);
    const Vector u = model_vector(tr, lambda);
    const Vector factor = (Vector::Ones(lambda.size()) - tau * lambda);
    sr.v = graded_apply(factor, tr.grading, u) * detail::checked_quotient(1.0, phi - tau, "phi(lambda) = tau");

    const cplx Ft = rho(t, mobius_alpha(phi));
    const cplx c = Ft - inner(graded_apply(z0, tr.grading, sr.v), sr.v);
    if (std::abs(c.imag()) > opt.reality_tol * (1.0 + std::abs(c))) fail(ErrorKind::RealityViolation, "synthesized constant c is not real");
    sr.c = c.real();
    return sr;
}

/// |F_t(z) - eval_selfadjoint(sr, z)| with F_t computed directly from the transfer realization.
inline double synthesis_residual(const TransferRealization& tr, const SelfAdjointRealization& sr, const Vector& z)
{
    return std::abs(conjugate_rho(halfplane_function(tr), sr.t)(z) - eval_selfadjoint(sr, z));
}

// ---------------------------------------------------------------------------
// Lifted resolvent: evaluating a Cauchy realization on a tuple of matrices

inline constexpr Index kMaxLiftedDim = 4096;

namespace detail {

/// I_H (x) X - S (.) I.
inline Matrix lifted_operator(const CauchyRealization& cr, std::span<const Matrix> S)
{
    const Index n = S.empty() ? 0 : S[0].rows();
    if (n * cr.grading.total() > kMaxLiftedDim) fail(ErrorKind::InvalidArgument, "lifted dimension exceeds the dense-solve cap");
    return kron(Matrix::Identity(n, n), cr.X) - graded_sum(S, cr.grading);
}

/// R_v : h -> h (x) v1.
inline Matrix lift_vector(const CauchyRealization& cr, Index n) { return kron(Matrix::Identity(n, n), cr.v1); }

} // namespace detail

/// F(S) = C I + R_v^* (I (x) X - S (.) I)^{-1} R_v.
inline Matrix eval_on_tuple(const CauchyRealization& cr, std::span<const Matrix> S)
{
    const Index n = S[0].rows();
    const Matrix L = detail::lifted_operator(cr, S);
    const Matrix Rv = detail::lift_vector(cr, n);
    const Matrix inv = detail::checked_inverse(L, ErrorKind::SingularLiftedResolvent, "I (x) X - S (.) I is singular");
    return cr.C * Matrix::Identity(n, n) + Rv.adjoint() * inv * Rv;
}

inline Matrix eval_on_tuple(const CauchyRealization& cr, const CommutingTuple& S) { return eval_on_tuple(cr, S.span()); }

/// d/dt of F along R(t) = (1 - t) S + t T: R_v^* Y(t)^{-1} (Delta (.) I) Y(t)^{-1} R_v with Delta = T - S.
inline Matrix path_derivative_check(const CauchyRealization& cr, std::span<const Matrix> S, std::span<const Matrix> T, double t)
{
    require_tuple_shape(S, T, "path endpoints");
    std::vector<Matrix> R, Delta;
    for (std::size_t r = 0; r < S.size(); ++r) {
        R.push_back((1.0 - t) * S[r] + t * T[r]);
        Delta.push_back(T[r] - S[r]);
    }
    const Index n = S[0].rows();
    const Matrix Yinv = detail::checked_inverse(detail::lifted_operator(cr, R), ErrorKind::SingularLiftedResolvent,
                                                "lifted resolvent is singular along the path");
    const Matrix Rv = detail::lift_vector(cr, n);
    const Matrix W = Yinv * Rv;
    return hermitian_part(W.adjoint() * graded_sum(Delta, cr.grading) * W);
}

/// Composite Simpson rule for the path derivative over [0, 1].
inline Matrix path_integral(const CauchyRealization& cr, std::span<const Matrix> S, std::span<const Matrix> T, int panels = 64)
{
    if (panels < 2 || panels % 2 != 0) fail(ErrorKind::InvalidArgument, "Simpson rule needs an even number of panels");
    const double h = 1.0 / panels;
    Matrix sum = Matrix::Zero(S[0].rows(), S[0].rows());
    for (int k = 0; k <= panels; ++k) {
        const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        sum += w * path_derivative_check(cr, S, T, k * h);
    }
    return sum * (h / 3.0);
}

// ---------------------------------------------------------------------------
// Rescaling a box to the unit cube

/// Y = C^{-1/2} (X - sum_r m^r P^r) C^{-1/2} with midpoints m^r and half-widths c^r.
struct BoxRescaling {
    Matrix Y;
    RealVector midpoint;
    RealVector half_width;

    /// T^r = (S^r - m^r) / c^r.
    std::vector<Matrix> map_tuple(std::span<const Matrix> S) const
    {
        std::vector<Matrix> out;
        for (std::size_t r = 0; r < S.size(); ++r) {
            const auto k = static_cast<Index>(r);
            out.push_back((S[r] - midpoint(k) * Matrix::Identity(S[r].rows(), S[r].cols())) / half_width(k));
        }
        return out;
    }

    /// z -> (z - m) / c componentwise.
    Vector map_point(const Vector& z) const
    {
        Vector out(z.size());
        for (Index r = 0; r < z.size(); ++r) out(r) = (z(r) - midpoint(r)) / half_width(r);
        return out;
    }
};

inline BoxRescaling rescale_to_box(const Matrix& X, const GradedSpace& G, const Box& box)
{
    box.validate();
    if (box.d() != G.d()) fail(ErrorKind::DimensionMismatch, "box dimension differs from grading");
    BoxRescaling out;
    out.midpoint.resize(G.d());
    out.half_width.resize(G.d());
    for (int r = 0; r < G.d(); ++r) {
        out.midpoint(r) = box.midpoint(r);
        out.half_width(r) = 0.5 * box.width(r);
    }
    Vector scale(G.d());
    for (int r = 0; r < G.d(); ++r) scale(r) = 1.0 / std::sqrt(out.half_width(r));
    const Matrix Cs = graded_diag(scale, G);
    out.Y = hermitian_part(Cs * shifted(X, G, out.midpoint.cast<cplx>()) * Cs);
    return out;
}

// ---------------------------------------------------------------------------
// Discrete measures

enum class MeasureSupport { Line, Circle };

struct Atom {
    double location = 0.0; // point on the line, or angle theta on the circle
    double mass = 0.0;
};

struct DiscreteMeasure {
    MeasureSupport support = MeasureSupport::Line;
    std::vector<Atom> atoms;

    void validate() const
    {
        for (const auto& a : atoms) {
            if (!(a.mass > 0.0) || !std::isfinite(a.mass) || !std::isfinite(a.location)) {
                fail(ErrorKind::InvalidArgument, "measure atoms need finite locations and positive masses");
            }
        }
    }
};

/// Cauchy transform F(z) = sum_k nu_k / (t_k - z): X = diag(t_k), v1 = (sqrt nu_k), C = 0.
inline CauchyRealization from_discrete_measure(const DiscreteMeasure& dm)
{
    dm.validate();
    if (dm.support != MeasureSupport::Line) fail(ErrorKind::InvalidArgument, "Cauchy transform needs a measure on the line");
    if (dm.atoms.empty()) fail(ErrorKind::InvalidArgument, "measure has no atoms");
    const auto m = static_cast<Index>(dm.atoms.size());
    CauchyRealization cr;
    cr.X = Matrix::Zero(m, m);
    cr.v1.resize(m);
    for (Index k = 0; k < m; ++k) {
        cr.X(k, k) = dm.atoms[static_cast<std::size_t>(k)].location;
        cr.v1(k) = std::sqrt(dm.atoms[static_cast<std::size_t>(k)].mass);
    }
    cr.grading = GradedSpace({static_cast<int>(m)});
    return cr;
}

/// sum_k nu_k (e^{i theta_k} + lambda) / (e^{i theta_k} - lambda) for |lambda| < 1.
inline cplx herglotz_eval(const DiscreteMeasure& dm, cplx lambda)
{
    dm.validate();
    if (dm.support != MeasureSupport::Circle) fail(ErrorKind::InvalidArgument, "Herglotz transform needs a measure on the circle");
    if (!(std::abs(lambda) < 1.0)) fail(ErrorKind::InvalidArgument, "Herglotz transform is evaluated in the open disk");
    cplx s = 0.0;
    for (const auto& a : dm.atoms) {
        const cplx e = std::polar(1.0, a.location);
        s += a.mass * (e + lambda) / (e - lambda);
    }
    return s;
}

struct BPointSum {
    double value = 0.0;      // infinite when tau is an atom
    bool atom_at_tau = false; // tau is a mass point
};

/// sum_k nu_k / |e^{i theta_k} - tau|^2.
inline BPointSum bpoint_sum(const DiscreteMeasure& dm, cplx tau, double atom_tol = 1e-14)
{
    dm.validate();
    if (dm.support != MeasureSupport::Circle) fail(ErrorKind::InvalidArgument, "boundary sum needs a measure on the circle");
    if (std::abs(std::abs(tau) - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "tau must lie on the unit circle");
    BPointSum out;
    for (const auto& a : dm.atoms) {
        const double dist = std::abs(std::polar(1.0, a.location) - tau);
        if (dist <= atom_tol) {
            out.atom_at_tau = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        out.value += a.mass / (dist * dist);
    }
    return out;
}

} // namespace loewner
