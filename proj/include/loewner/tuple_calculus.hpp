#pragma once

// Commuting d-tuples of Hermitian matrices: joint diagonalization, genericity,
// first-order-commuting directions, the curve S(t) = e^{tY}(S + t diag D)e^{-tY},
// spectral functional calculus, directional derivatives and eigenvalue tracking.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "random.hpp"

namespace loewner {

/// Open box (lo^1, hi^1) x ... x (lo^d, hi^d).
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box cube(int d, double a, double b)
    {
        return Box{std::vector<double>(static_cast<std::size_t>(d), a), std::vector<double>(static_cast<std::size_t>(d), b)};
    }

    int d() const { return static_cast<int>(lo.size()); }

    void validate() const
    {
        if (lo.empty() || lo.size() != hi.size()) fail(ErrorKind::DegenerateBox, "box bounds have mismatched lengths");
        for (std::size_t r = 0; r < lo.size(); ++r) {
            if (!std::isfinite(lo[r]) || !std::isfinite(hi[r]) || !(lo[r] < hi[r])) {
                fail(ErrorKind::DegenerateBox, "box interval " + std::to_string(r) + " is empty or unbounded");
            }
        }
    }

    bool contains(const RealVector& x) const
    {
        if (x.size() != d()) return false;
        for (int r = 0; r < d(); ++r)
            if (!(x(r) > lo[static_cast<std::size_t>(r)] && x(r) < hi[static_cast<std::size_t>(r)])) return false;
        return true;
    }

    double width(int r) const { return hi[static_cast<std::size_t>(r)] - lo[static_cast<std::size_t>(r)]; }
    double midpoint(int r) const { return 0.5 * (hi[static_cast<std::size_t>(r)] + lo[static_cast<std::size_t>(r)]); }

    double min_width() const
    {
        double w = std::numeric_limits<double>::infinity();
        for (int r = 0; r < d(); ++r) w = std::min(w, width(r));
        return w;
    }
};

inline Matrix commutator(const Matrix& A, const Matrix& B) { return A * B - B * A; }

/// d Hermitian n x n matrices with (numerically) vanishing pairwise commutators.
class CommutingTuple {
public:
    CommutingTuple() = default;

    CommutingTuple(std::vector<Matrix> matrices, const Tolerances& tol) : mats_(std::move(matrices))
    {
        check_shapes();
        for (const auto& A : mats_) require_hermitian(A, tol.tol_herm, "tuple component");
        for (std::size_t r = 0; r < mats_.size(); ++r)
            for (std::size_t s = r + 1; s < mats_.size(); ++s) {
                const double c = commutator(mats_[r], mats_[s]).norm();
                const double bound = tol.tol_commute * (1.0 + spectral_norm(mats_[r]) * spectral_norm(mats_[s]));
                if (c > bound) {
                    fail(ErrorKind::NotCommuting, "components " + std::to_string(r) + " and " + std::to_string(s) +
                                                      " have commutator norm " + std::to_string(c));
                }
            }
    }

    explicit CommutingTuple(std::vector<Matrix> matrices) : CommutingTuple(std::move(matrices), Tolerances{}) {}

    /// Skip validation; used for tuples that commute by construction.
    static CommutingTuple unchecked(std::vector<Matrix> matrices)
    {
        CommutingTuple t;
        t.mats_ = std::move(matrices);
        t.check_shapes();
        return t;
    }

    int d() const { return static_cast<int>(mats_.size()); }
    Index n() const { return mats_.front().rows(); }
    const Matrix& operator[](int r) const { return mats_[static_cast<std::size_t>(r)]; }
    const std::vector<Matrix>& matrices() const { return mats_; }
    std::span<const Matrix> span() const { return mats_; }

    double max_commutator() const
    {
        double c = 0.0;
        for (std::size_t r = 0; r < mats_.size(); ++r)
            for (std::size_t s = r + 1; s < mats_.size(); ++s) c = std::max(c, commutator(mats_[r], mats_[s]).norm());
        return c;
    }

private:
    void check_shapes() const
    {
        if (mats_.empty()) fail(ErrorKind::ShapeMismatch, "tuple must have at least one component");
        const Index n = mats_.front().rows();
        for (const auto& A : mats_) {
            if (A.rows() != n || A.cols() != n || n == 0) fail(ErrorKind::ShapeMismatch, "tuple components must share a square shape");
        }
    }

    std::vector<Matrix> mats_;
};

/// Tangent data (Delta^1, ..., Delta^d); Hermitian components.
class Direction {
public:
    Direction() = default;
    Direction(std::vector<Matrix> matrices, const Tolerances& tol = {}) : mats_(std::move(matrices))
    {
        if (mats_.empty()) fail(ErrorKind::ShapeMismatch, "direction must have at least one component");
        for (const auto& A : mats_) {
            require_hermitian(A, tol.tol_herm, "direction component");
            if (A.rows() != mats_.front().rows()) fail(ErrorKind::ShapeMismatch, "direction components must share a shape");
        }
    }

    static Direction zero(int d, Index n) { return Direction(std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(n, n))); }

    int d() const { return static_cast<int>(mats_.size()); }
    Index n() const { return mats_.front().rows(); }
    const Matrix& operator[](int r) const { return mats_[static_cast<std::size_t>(r)]; }
    const std::vector<Matrix>& matrices() const { return mats_; }
    std::span<const Matrix> span() const { return mats_; }

    Direction scaled(double a) const
    {
        std::vector<Matrix> out = mats_;
        for (auto& A : out) A *= a;
        return Direction(std::move(out));
    }

    friend Direction combine(double a, const Direction& x, double b, const Direction& y)
    {
        std::vector<Matrix> out;
        for (int r = 0; r < x.d(); ++r) out.push_back(a * x[r] + b * y[r]);
        return Direction(std::move(out));
    }

private:
    std::vector<Matrix> mats_;
};

/// Q unitary with Q^H S^r Q = diag(points(., r)).
struct JointSpectrum {
    Matrix Q;
    RealMatrix points; // n x d, row i is the joint eigenvalue x_i

    Index n() const { return points.rows(); }
    int d() const { return static_cast<int>(points.cols()); }
    RealVector point(Index i) const { return points.row(i).transpose(); }

    double min_gap() const
    {
        double g = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n(); ++i)
            for (Index j = i + 1; j < n(); ++j) g = std::min(g, (points.row(i) - points.row(j)).norm());
        return g;
    }

    /// Reassemble the tuple Q diag(x^r) Q^H.
    CommutingTuple reconstruct() const
    {
        std::vector<Matrix> mats;
        for (int r = 0; r < d(); ++r) {
            mats.push_back(hermitian_part(Q * points.col(r).cast<cplx>().asDiagonal() * Q.adjoint()));
        }
        return CommutingTuple::unchecked(std::move(mats));
    }

    /// Diagonal tuple whose joint eigenvalues are the given points (Q = I).
    static JointSpectrum from_points(RealMatrix pts)
    {
        JointSpectrum js;
        js.Q = Matrix::Identity(pts.rows(), pts.rows());
        js.points = std::move(pts);
        return js;
    }
};

namespace detail {

inline constexpr std::uint64_t kJointDiagonalizationSeed = 0x5eed10e3a7d1a6ULL;

/// Simultaneous Jacobi sweeps over Hermitian matrices minimizing their total
/// off-diagonal energy. Each 2x2 rotation maximizes sum_r (a'_pp - a'_qq)^2.
inline void joint_jacobi_sweeps(std::vector<Matrix>& A, Matrix& Q, int max_sweeps)
{
    const Index n = Q.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (Index p = 0; p < n - 1; ++p)
            for (Index q = p + 1; q < n; ++q) {
                Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
                for (const auto& M : A) {
                    const Eigen::Vector3d h(M(p, p).real() - M(q, q).real(), 2.0 * M(p, q).real(), 2.0 * M(p, q).imag());
                    G += h * h.transpose();
                }
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(G);
                Eigen::Vector3d v = es.eigenvectors().col(2);
                if (v(0) < 0.0) v = -v;
                const double c = std::sqrt(0.5 * (1.0 + v(0)));
                const cplx s(v(1) / (2.0 * c), -v(2) / (2.0 * c));
                if (std::abs(s) < 1e-15) continue;
                rotated = true;
                const cplx g00 = c, g01 = -std::conj(s), g10 = s, g11 = c;
                for (auto& M : A) {
                    rotate_columns(M, p, q, g00, g01, g10, g11);
                    rotate_rows(M, p, q, g00, g01, g10, g11);
                }
                rotate_columns(Q, p, q, g00, g01, g10, g11);
            }
        if (!rotated) break;
    }
}

inline double total_off_energy(const std::vector<Matrix>& A)
{
    double s = 0.0;
    for (const auto& M : A) s += std::pow(off_diagonal_norm(M), 2);
    return std::sqrt(s);
}

} // namespace detail

/// Simultaneously diagonalize a commuting tuple.
///
/// A fixed pseudo-random combination sum_r c_r S^r is eigendecomposed first;
/// joint Jacobi sweeps then remove any mixing left inside near-degenerate
/// clusters of the combination.
inline JointSpectrum joint_diagonalize(const CommutingTuple& S, const Tolerances& tol = {})
{
    const int d = S.d();
    const Index n = S.n();
    const double scale = 1.0 + tuple_norm(S.span());

    for (int r = 0; r < d; ++r)
        for (int s = r + 1; s < d; ++s) {
            const double c = commutator(S[r], S[s]).norm();
            if (c > tol.tol_commute * (1.0 + spectral_norm(S[r]) * spectral_norm(S[s]))) {
                fail(ErrorKind::NotCommuting, "commutator residual " + std::to_string(c) + " too large");
            }
        }

    Rng rng(detail::kJointDiagonalizationSeed);
    std::vector<double> coeff(static_cast<std::size_t>(d));
    double cn = 0.0;
    for (auto& c : coeff) {
        c = rng.normal();
        cn += c * c;
    }
    Matrix H = Matrix::Zero(n, n);
    for (int r = 0; r < d; ++r) H += (coeff[static_cast<std::size_t>(r)] / std::sqrt(cn)) * S[r];
    Matrix Q = eig_hermitian(hermitian_part(H), tol).vectors;

    std::vector<Matrix> A;
    for (int r = 0; r < d; ++r) A.push_back(Q.adjoint() * hermitian_part(S[r]) * Q);
    detail::joint_jacobi_sweeps(A, Q, 100);

    const double off = detail::total_off_energy(A);
    if (off > tol.tol_commute * scale) {
        fail(ErrorKind::DiagonalizationFailed, "off-diagonal energy " + std::to_string(off) + " above tolerance");
    }
    detail::normalize_column_phases(Q);
    if (std::all_of(S.matrices().begin(), S.matrices().end(), [](const Matrix& M) { return is_real(M); })) {
        // Real symmetric tuples have real orthogonal joint eigenbases.
        if (max_abs(Matrix(Q.imag().cast<cplx>())) < 1e-12) Q = Q.real().cast<cplx>();
    }

    JointSpectrum js;
    js.Q = Q;
    js.points.resize(n, d);
    for (int r = 0; r < d; ++r) {
        const Matrix Dr = Q.adjoint() * S[r] * Q;
        for (Index i = 0; i < n; ++i) js.points(i, r) = Dr(i, i).real();
    }
    return js;
}

/// True iff the n joint eigenvalues are pairwise more than gap_tol apart.
inline bool is_generic(const JointSpectrum& js, double gap_tol) { return js.n() <= 1 || js.min_gap() > gap_tol; }

/// max_{r != s} || [S^r, D^s] - [S^s, D^r] ||_F.
inline double check_first_order(const CommutingTuple& S, const Direction& D)
{
    if (S.d() != D.d() || S.n() != D.n()) fail(ErrorKind::ShapeMismatch, "tuple and direction shapes differ");
    double worst = 0.0;
    for (int r = 0; r < S.d(); ++r)
        for (int s = r + 1; s < S.d(); ++s)
            worst = std::max(worst, (commutator(S[r], D[s]) - commutator(S[s], D[r])).norm());
    return worst;
}

// ---------------------------------------------------------------------------
// Directions expressed in a joint eigenbasis

namespace detail {

struct EigenbasisDirection {
    std::vector<Matrix> D; // Q^H Delta^r Q
    double defect = 0.0;   // worst |D^s_ij (x_j^r - x_i^r) - D^r_ij (x_j^s - x_i^s)|
    Index wi = 0, wj = 0;
    int wr = 0, ws = 0;
};

inline EigenbasisDirection to_eigenbasis(const JointSpectrum& js, const Direction& Delta)
{
    if (Delta.d() != js.d() || Delta.n() != js.n()) fail(ErrorKind::ShapeMismatch, "direction does not match the joint spectrum");
    EigenbasisDirection out;
    for (int r = 0; r < js.d(); ++r) out.D.push_back(js.Q.adjoint() * Delta[r] * js.Q);
    for (Index i = 0; i < js.n(); ++i)
        for (Index j = 0; j < js.n(); ++j) {
            if (i == j) continue;
            for (int r = 0; r < js.d(); ++r)
                for (int s = r + 1; s < js.d(); ++s) {
                    const double wr = js.points(j, r) - js.points(i, r);
                    const double ws = js.points(j, s) - js.points(i, s);
                    const double e = std::abs(out.D[static_cast<std::size_t>(s)](i, j) * wr -
                                              out.D[static_cast<std::size_t>(r)](i, j) * ws);
                    if (e > out.defect) {
                        out.defect = e;
                        out.wi = i;
                        out.wj = j;
                        out.wr = r;
                        out.ws = s;
                    }
                }
        }
    return out;
}

inline double gap_tolerance(const JointSpectrum& js, const Tolerances& tol)
{
    return tol.tol_commute * (1.0 + js.points.cwiseAbs().maxCoeff());
}

inline void require_generic(const JointSpectrum& js, const Tolerances& tol)
{
    if (!is_generic(js, gap_tolerance(js, tol))) {
        fail(ErrorKind::NotGeneric, "joint spectrum has repeated points (min gap " + std::to_string(js.min_gap()) + ")");
    }
}

inline void require_consistent(const JointSpectrum& js, const EigenbasisDirection& eb, const Tolerances& tol)
{
    double dscale = 0.0;
    for (const auto& M : eb.D) dscale = std::max(dscale, max_abs(M));
    const double bound = tol.tol_commute * (1.0 + js.points.cwiseAbs().maxCoeff()) * (1.0 + dscale);
    if (eb.defect > bound) {
        fail(ErrorKind::InconsistentDirection,
             "direction is not first-order commuting: worst (i,j,r,s) = (" + std::to_string(eb.wi) + "," +
                 std::to_string(eb.wj) + "," + std::to_string(eb.wr) + "," + std::to_string(eb.ws) +
                 "), defect " + std::to_string(eb.defect));
    }
}

/// Coordinate r maximizing |x_j^r - x_i^r|.
inline int best_coordinate(const JointSpectrum& js, Index i, Index j)
{
    int best = 0;
    double w = -1.0;
    for (int r = 0; r < js.d(); ++r) {
        const double diff = std::abs(js.points(j, r) - js.points(i, r));
        if (diff > w) {
            w = diff;
            best = r;
        }
    }
    return best;
}

inline Matrix generator_in_eigenbasis(const JointSpectrum& js, const EigenbasisDirection& eb)
{
    const Index n = js.n();
    Matrix Y = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            const int r = best_coordinate(js, i, j);
            Y(i, j) = eb.D[static_cast<std::size_t>(r)](i, j) / (js.points(j, r) - js.points(i, r));
            Y(j, i) = -std::conj(Y(i, j));
        }
    return Y;
}

} // namespace detail

/// Skew-Hermitian Y (in the eigenbasis of js) with [Y, diag x^r]_{ij} = Delta^r_{ij} off the diagonal.
inline Matrix generator_Y(const JointSpectrum& js, const Direction& Delta, const Tolerances& tol = {})
{
    detail::require_generic(js, tol);
    const auto eb = detail::to_eigenbasis(js, Delta);
    detail::require_consistent(js, eb, tol);
    return detail::generator_in_eigenbasis(js, eb);
}

/// S(t) = Q e^{tY} (diag x^r + t diag D^r) e^{-tY} Q^H: a commuting curve with S(0) = S, S'(0) = Delta.
inline CommutingTuple curve_point(const JointSpectrum& js, const Direction& Delta, double t, const Tolerances& tol = {})
{
    detail::require_generic(js, tol);
    const auto eb = detail::to_eigenbasis(js, Delta);
    detail::require_consistent(js, eb, tol);
    const Matrix Y = detail::generator_in_eigenbasis(js, eb);
    const Matrix W = js.Q * expm_unitary(t * Y);
    std::vector<Matrix> mats;
    for (int r = 0; r < js.d(); ++r) {
        Vector diag(js.n());
        for (Index i = 0; i < js.n(); ++i) diag(i) = js.points(i, r) + t * eb.D[static_cast<std::size_t>(r)](i, i).real();
        mats.push_back(hermitian_part(W * diag.asDiagonal() * W.adjoint()));
    }
    return CommutingTuple::unchecked(std::move(mats));
}

/// Random first-order-commuting direction at js: Delta^r = Q([Y, diag x^r] + diag a^r)Q^H with Y
/// skew-Hermitian. With psd = true each component is shifted by a multiple of I to be PSD.
inline Direction random_first_order_direction(const JointSpectrum& js, Rng& rng, bool psd, double scale = 1.0)
{
    const Index n = js.n();
    Matrix Y = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            Y(i, j) = scale * rng.complex_normal();
            Y(j, i) = -std::conj(Y(i, j));
        }
    std::vector<Matrix> mats;
    for (int r = 0; r < js.d(); ++r) {
        const Vector x = js.points.col(r).cast<cplx>();
        Matrix D = Y * x.asDiagonal() - x.asDiagonal() * Y;
        for (Index i = 0; i < n; ++i) D(i, i) = scale * rng.normal();
        D = hermitian_part(D);
        if (psd) {
            const double lo = min_eigenvalue(D);
            D += (-lo + scale * rng.uniform()) * Matrix::Identity(n, n);
        }
        mats.push_back(hermitian_part(js.Q * D * js.Q.adjoint()));
    }
    return Direction(std::move(mats));
}

// ---------------------------------------------------------------------------
// Real C^1 functions on R^d

class SmoothFunction {
public:
    using ValueFn = std::function<double(const RealVector&)>;
    using GradientFn = std::function<RealVector(const RealVector&)>;

    SmoothFunction(int d, ValueFn value, GradientFn gradient = {}, std::optional<Box> domain = std::nullopt)
        : d_(d), value_(std::move(value)), gradient_(std::move(gradient)), domain_(std::move(domain))
    {
        if (d_ < 1) fail(ErrorKind::InvalidArgument, "function dimension must be positive");
        if (domain_) {
            domain_->validate();
            if (domain_->d() != d_) fail(ErrorKind::DimensionMismatch, "domain box dimension differs from function dimension");
        }
    }

    int d() const { return d_; }
    const std::optional<Box>& domain() const { return domain_; }
    bool numeric_gradient() const { return !gradient_; }

    void check_domain(const RealVector& x) const
    {
        if (x.size() != d_) fail(ErrorKind::DimensionMismatch, "point dimension differs from function dimension");
        if (domain_ && !domain_->contains(x)) fail(ErrorKind::DomainViolation, "point outside the function's domain");
    }

    double operator()(const RealVector& x) const { return value_(x); }

    RealVector gradient(const RealVector& x) const
    {
        if (gradient_) return gradient_(x);
        return central_difference(x);
    }

    /// Central differences with step 1e-6 (1 + |x^r|).
    RealVector central_difference(const RealVector& x) const
    {
        RealVector g(d_);
        for (int r = 0; r < d_; ++r) {
            const double h = 1e-6 * (1.0 + std::abs(x(r)));
            RealVector xp = x, xm = x;
            xp(r) += h;
            xm(r) -= h;
            g(r) = (value_(xp) - value_(xm)) / (2.0 * h);
        }
        return g;
    }

    /// Largest relative gap between the gradient evaluator and central differences.
    double gradient_discrepancy(std::span<const RealVector> probes) const
    {
        double worst = 0.0;
        for (const auto& x : probes) {
            const RealVector g = gradient(x);
            const RealVector fd = central_difference(x);
            worst = std::max(worst, (g - fd).norm() / (1.0 + g.norm()));
        }
        return worst;
    }

private:
    int d_;
    ValueFn value_;
    GradientFn gradient_;
    std::optional<Box> domain_;
};

/// f(S) = Q diag(f(x_1), ..., f(x_n)) Q^H.
inline Matrix apply_function(const SmoothFunction& f, const JointSpectrum& js)
{
    if (f.d() != js.d()) fail(ErrorKind::DimensionMismatch, "function and tuple dimensions differ");
    Vector vals(js.n());
    for (Index i = 0; i < js.n(); ++i) {
        const RealVector x = js.point(i);
        f.check_domain(x);
        vals(i) = f(x);
    }
    return hermitian_part(js.Q * vals.asDiagonal() * js.Q.adjoint());
}

inline Matrix apply_function(const SmoothFunction& f, const CommutingTuple& S, const Tolerances& tol = {})
{
    return apply_function(f, joint_diagonalize(S, tol));
}

/// D_Delta f(S) from the values and gradients of f at the joint eigenvalues.
///
/// Off the diagonal (eigenbasis): Delta^r_ij (f_j - f_i) / (x_j^r - x_i^r) with r maximizing the
/// denominator; on the diagonal: sum_r Delta^r_ii df/dx^r (x_i). Returned in the original basis.
inline Matrix directional_derivative_from_samples(const JointSpectrum& js, const Direction& Delta, const RealVector& values,
                                                  const RealMatrix& gradients, const Tolerances& tol = {})
{
    detail::require_generic(js, tol);
    if (values.size() != js.n() || gradients.rows() != js.n() || gradients.cols() != js.d()) {
        fail(ErrorKind::ShapeMismatch, "sample values/gradients do not match the joint spectrum");
    }
    const auto eb = detail::to_eigenbasis(js, Delta);
    detail::require_consistent(js, eb, tol);
    const Index n = js.n();
    Matrix M = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int r = 0; r < js.d(); ++r) diag += eb.D[static_cast<std::size_t>(r)](i, i).real() * gradients(i, r);
        M(i, i) = diag;
        for (Index j = i + 1; j < n; ++j) {
            const int r = detail::best_coordinate(js, i, j);
            M(i, j) = eb.D[static_cast<std::size_t>(r)](i, j) * (values(j) - values(i)) / (js.points(j, r) - js.points(i, r));
            M(j, i) = std::conj(M(i, j));
        }
    }
    return hermitian_part(js.Q * M * js.Q.adjoint());
}

inline Matrix directional_derivative(const SmoothFunction& f, const JointSpectrum& js, const Direction& Delta,
                                     const Tolerances& tol = {})
{
    if (f.d() != js.d()) fail(ErrorKind::DimensionMismatch, "function and tuple dimensions differ");
    RealVector values(js.n());
    RealMatrix grads(js.n(), js.d());
    for (Index i = 0; i < js.n(); ++i) {
        const RealVector x = js.point(i);
        f.check_domain(x);
        values(i) = f(x);
        grads.row(i) = f.gradient(x).transpose();
    }
    return directional_derivative_from_samples(js, Delta, values, grads, tol);
}

// ---------------------------------------------------------------------------
// Spectral perturbation

struct PerturbationReport {
    double max_min_distance = 0.0;
    double bound = 0.0;
    bool holds = true;
};

/// Every joint eigenvalue of R lies within sqrt(dn) ||R - S|| of some joint eigenvalue of S.
inline PerturbationReport perturbation_check(const CommutingTuple& R, const CommutingTuple& S, const Tolerances& tol = {})
{
    if (R.d() != S.d() || R.n() != S.n()) fail(ErrorKind::ShapeMismatch, "tuples differ in shape");
    const auto jr = joint_diagonalize(R, tol);
    const auto js = joint_diagonalize(S, tol);
    PerturbationReport rep;
    for (Index i = 0; i < jr.n(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Index p = 0; p < js.n(); ++p) best = std::min(best, (jr.points.row(i) - js.points.row(p)).norm());
        rep.max_min_distance = std::max(rep.max_min_distance, best);
    }
    std::vector<Matrix> diff;
    for (int r = 0; r < R.d(); ++r) diff.push_back(R[r] - S[r]);
    rep.bound = std::sqrt(static_cast<double>(R.d() * R.n())) * tuple_norm(diff);
    rep.holds = rep.max_min_distance <= rep.bound + tol.tol_commute * (1.0 + tuple_norm(S.span()));
    return rep;
}

struct EigenpathTracks {
    std::vector<RealMatrix> tracks; // tracks[j] is (steps x d): X_j(t_k)
    RealMatrix ratios;              // (steps - 1) x n Lipschitz ratios
    double max_ratio = 0.0;
    double ratio_bound = 0.0; // sqrt(dn)
    bool genericity_lost = false;
    Index steps_tracked = 0;
};

/// Follow the joint eigenvalues along a sampled path of commuting tuples.
///
/// Consecutive spectra are matched greedily by distance. Tracking stops (flagged)
/// as soon as sqrt(dn) ||R(t_{k+1}) - R(t_k)|| exceeds a third of the current minimum gap.
inline EigenpathTracks track_eigenpaths(std::span<const CommutingTuple> path, const Tolerances& tol = {})
{
    if (path.empty()) fail(ErrorKind::InvalidArgument, "empty path");
    const Index n = path[0].n();
    const int d = path[0].d();
    auto prev = joint_diagonalize(path[0], tol);
    detail::require_generic(prev, tol);

    EigenpathTracks out;
    out.ratio_bound = std::sqrt(static_cast<double>(d * n));
    out.tracks.assign(static_cast<std::size_t>(n), RealMatrix(static_cast<Index>(path.size()), d));
    out.ratios = RealMatrix::Zero(static_cast<Index>(path.size()) - 1, n);
    RealMatrix current = prev.points; // row j: current position of track j
    for (Index j = 0; j < n; ++j) out.tracks[static_cast<std::size_t>(j)].row(0) = current.row(j);
    out.steps_tracked = 1;

    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        std::vector<Matrix> diff;
        for (int r = 0; r < d; ++r) diff.push_back(path[k + 1][r] - path[k][r]);
        const double step = tuple_norm(diff);
        double gap = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j) gap = std::min(gap, (current.row(i) - current.row(j)).norm());
        if (out.ratio_bound * step > gap / 3.0) {
            out.genericity_lost = true;
            break;
        }
        const auto next = joint_diagonalize(path[k + 1], tol);

        std::vector<std::tuple<double, Index, Index>> pairs;
        for (Index j = 0; j < n; ++j)
            for (Index p = 0; p < n; ++p) pairs.emplace_back((current.row(j) - next.points.row(p)).norm(), j, p);
        std::sort(pairs.begin(), pairs.end());
        std::vector<bool> track_done(static_cast<std::size_t>(n), false), point_used(static_cast<std::size_t>(n), false);
        RealMatrix updated = current;
        for (const auto& [dist, j, p] : pairs) {
            if (track_done[static_cast<std::size_t>(j)] || point_used[static_cast<std::size_t>(p)]) continue;
            track_done[static_cast<std::size_t>(j)] = point_used[static_cast<std::size_t>(p)] = true;
            updated.row(j) = next.points.row(p);
            const double moved = dist;
            const double ratio = step > 0.0 ? moved / step : (moved > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            out.ratios(static_cast<Index>(k), j) = ratio;
            out.max_ratio = std::max(out.max_ratio, ratio);
        }
        current = updated;
        for (Index j = 0; j < n; ++j) out.tracks[static_cast<std::size_t>(j)].row(static_cast<Index>(k + 1)) = current.row(j);
        out.steps_tracked = static_cast<Index>(k + 2);
    }
    if (out.genericity_lost) {
        for (auto& tr : out.tracks) tr.conservativeResize(out.steps_tracked, d);
        out.ratios.conservativeResize(out.steps_tracked - 1, n);
    }
    return out;
}

} // namespace loewner
