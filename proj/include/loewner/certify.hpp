#pragma once

// n-point Loewner class membership as a semidefinite feasibility problem.
//
// Find PSD A^1..A^d with A^r(i,i) = df/dx^r(x_i) and
// sum_r (x_j^r - x_i^r) A^r(i,j) = f(x_j) - f(x_i). Dykstra's alternating
// projections between the PSD cones and the affine set either produce such
// kernels or stall at a positive gap, from which a direction with PSD
// components and a non-PSD derivative is extracted.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "random.hpp"
#include "tuple_calculus.hpp"

namespace loewner {

struct SampleNode {
    RealVector x;
    double f = 0.0;
    RealVector grad;
};

/// Values and gradients of a real function at n distinct points of R^d.
class SampledFunction {
public:
    SampledFunction() = default;

    SampledFunction(int d, std::vector<SampleNode> nodes) : d_(d), nodes_(std::move(nodes)) { validate(); }

    static SampledFunction from_function(const SmoothFunction& f, const RealMatrix& points)
    {
        std::vector<SampleNode> nodes;
        for (Index i = 0; i < points.rows(); ++i) {
            const RealVector x = points.row(i).transpose();
            f.check_domain(x);
            nodes.push_back({x, f(x), f.gradient(x)});
        }
        return SampledFunction(static_cast<int>(points.cols()), std::move(nodes));
    }

    int d() const { return d_; }
    Index n() const { return static_cast<Index>(nodes_.size()); }
    const std::vector<SampleNode>& nodes() const { return nodes_; }
    const SampleNode& node(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }

    RealMatrix points() const
    {
        RealMatrix P(n(), d_);
        for (Index i = 0; i < n(); ++i) P.row(i) = node(i).x.transpose();
        return P;
    }

    RealVector values() const
    {
        RealVector v(n());
        for (Index i = 0; i < n(); ++i) v(i) = node(i).f;
        return v;
    }

    RealMatrix gradients() const
    {
        RealMatrix G(n(), d_);
        for (Index i = 0; i < n(); ++i) G.row(i) = node(i).grad.transpose();
        return G;
    }

    /// The diagonal tuple S^r = diag(x_1^r, ..., x_n^r).
    JointSpectrum spectrum() const { return JointSpectrum::from_points(points()); }

    SampledFunction permuted(const std::vector<Index>& perm) const
    {
        std::vector<SampleNode> out;
        for (Index p : perm) out.push_back(node(p));
        return SampledFunction(d_, std::move(out));
    }

private:
    void validate() const
    {
        if (d_ < 1) fail(ErrorKind::InvalidArgument, "sampled function dimension must be positive");
        if (nodes_.empty()) fail(ErrorKind::InvalidArgument, "sampled function needs at least one node");
        for (const auto& nd : nodes_) {
            if (nd.x.size() != d_ || nd.grad.size() != d_) {
                fail(ErrorKind::DimensionMismatch, "node point/gradient length differs from d");
            }
            if (!nd.x.allFinite() || !nd.grad.allFinite() || !std::isfinite(nd.f)) {
                fail(ErrorKind::InvalidArgument, "sampled function entries must be finite");
            }
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (std::size_t j = i + 1; j < nodes_.size(); ++j)
                if ((nodes_[i].x - nodes_[j].x).norm() == 0.0) {
                    fail(ErrorKind::DegenerateNodes, "nodes " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
                }
    }

    int d_ = 0;
    std::vector<SampleNode> nodes_;
};

/// One-variable Loewner matrix of divided differences.
inline Matrix loewner_matrix_1d(const SampledFunction& sf)
{
    if (sf.d() != 1) fail(ErrorKind::DimensionMismatch, "loewner_matrix_1d needs d = 1");
    const Index n = sf.n();
    Matrix A(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const auto& a = sf.node(i);
            const auto& b = sf.node(j);
            A(i, j) = i == j ? a.grad(0) : (b.f - a.f) / (b.x(0) - a.x(0));
        }
    return A;
}

struct LoewnerCertificate {
    std::vector<Matrix> A;
    RealVector min_psd_eig;
    double max_diagonal_violation = 0.0;
    double max_constraint_violation = 0.0;
    int iterations = 0;
    double final_distance = 0.0;
};

enum class RefutationStatus { Infeasible, Inconclusive };

inline std::string to_string(RefutationStatus s) { return s == RefutationStatus::Infeasible ? "infeasible" : "inconclusive"; }

struct Refutation {
    RefutationStatus status = RefutationStatus::Inconclusive;
    std::optional<RealMatrix> K;      // real skew-symmetric separating matrix, max |K_ij| = 1
    std::optional<Direction> witness; // PSD, first-order commuting at the node tuple
    double witness_min_eig = 0.0;
    std::optional<Direction> raw_witness; // direction built from K alone (not PSD in general)
    double raw_min_eig = 0.0;
    std::string witness_source; // "gap", "shifted", "random" or ""
    int iterations = 0;
    double final_distance = 0.0;
};

enum class CertifyOutcome { Certified, Infeasible, Inconclusive };

inline std::string to_string(CertifyOutcome o)
{
    switch (o) {
    case CertifyOutcome::Certified: return "certified";
    case CertifyOutcome::Infeasible: return "infeasible";
    case CertifyOutcome::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct CertifyResult {
    CertifyOutcome outcome = CertifyOutcome::Inconclusive;
    std::optional<LoewnerCertificate> certificate;
    std::optional<Refutation> refutation;
    std::vector<double> distances; // ||PSD iterate - affine iterate|| per iteration
};

struct CertificateCheck {
    RealVector min_psd_eig;
    double max_diagonal_violation = 0.0;
    double max_constraint_violation = 0.0;
    bool psd_ok = false;
    bool diagonal_ok = false;
    bool constraint_ok = false;
    bool shape_ok = false;

    bool passed() const { return shape_ok && psd_ok && diagonal_ok && constraint_ok; }
};

/// Recompute every certificate condition from scratch.
inline CertificateCheck verify_certificate(const SampledFunction& sf, const std::vector<Matrix>& A, const Tolerances& tol = {})
{
    CertificateCheck c;
    c.shape_ok = static_cast<int>(A.size()) == sf.d();
    for (const auto& M : A) c.shape_ok = c.shape_ok && M.rows() == sf.n() && M.cols() == sf.n() && is_hermitian(M, tol.tol_herm);
    if (!c.shape_ok) return c;
    const Index n = sf.n();
    c.min_psd_eig.resize(sf.d());
    for (int r = 0; r < sf.d(); ++r) c.min_psd_eig(r) = min_eigenvalue(hermitian_part(A[static_cast<std::size_t>(r)]), tol);
    for (Index i = 0; i < n; ++i) {
        for (int r = 0; r < sf.d(); ++r) {
            c.max_diagonal_violation =
                std::max(c.max_diagonal_violation, std::abs(A[static_cast<std::size_t>(r)](i, i) - sf.node(i).grad(r)));
        }
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            cplx s = 0.0;
            for (int r = 0; r < sf.d(); ++r) s += (sf.node(j).x(r) - sf.node(i).x(r)) * A[static_cast<std::size_t>(r)](i, j);
            c.max_constraint_violation = std::max(c.max_constraint_violation, std::abs(s - (sf.node(j).f - sf.node(i).f)));
        }
    }
    c.psd_ok = c.min_psd_eig.minCoeff() >= -tol.tol_psd;
    c.diagonal_ok = c.max_diagonal_violation <= tol.tol_residual;
    c.constraint_ok = c.max_constraint_violation <= tol.tol_residual;
    return c;
}

inline CertificateCheck verify_certificate(const SampledFunction& sf, const LoewnerCertificate& cert, const Tolerances& tol = {})
{
    return verify_certificate(sf, cert.A, tol);
}

/// sum_r Delta^r o A^r, evaluated in the eigenbasis of js and returned in the original basis.
inline Matrix derivative_from_certificate(const LoewnerCertificate& cert, const Direction& Delta, const JointSpectrum& js,
                                          const Tolerances& tol = {})
{
    if (static_cast<int>(cert.A.size()) != js.d() || Delta.d() != js.d()) {
        fail(ErrorKind::ShapeMismatch, "certificate, direction and spectrum dimensions differ");
    }
    const auto eb = detail::to_eigenbasis(js, Delta);
    detail::require_consistent(js, eb, tol);
    Matrix M = Matrix::Zero(js.n(), js.n());
    for (int r = 0; r < js.d(); ++r) M += schur_product(eb.D[static_cast<std::size_t>(r)], cert.A[static_cast<std::size_t>(r)]);
    return hermitian_part(js.Q * M * js.Q.adjoint());
}

struct WitnessEvaluation {
    Direction Delta;
    double min_eig = 0.0;
    bool psd = false;
};

/// Delta^r_ij = (x_j^r - x_i^r) K_ji: first-order commuting at the node tuple for any skew-symmetric K.
inline WitnessEvaluation refutation_witness(const SampledFunction& sf, const RealMatrix& K, const Tolerances& tol = {})
{
    const Index n = sf.n();
    if (K.rows() != n || K.cols() != n) fail(ErrorKind::ShapeMismatch, "K must be n x n");
    if ((K + K.transpose()).cwiseAbs().maxCoeff() > tol.tol_herm * (1.0 + K.cwiseAbs().maxCoeff())) {
        fail(ErrorKind::NotSkewSymmetric, "K is not skew-symmetric");
    }
    std::vector<Matrix> mats;
    for (int r = 0; r < sf.d(); ++r) {
        Matrix D = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (i != j) D(i, j) = (sf.node(j).x(r) - sf.node(i).x(r)) * K(j, i);
        mats.push_back(D);
    }
    WitnessEvaluation w{Direction(std::move(mats)), 0.0, true};
    const auto js = sf.spectrum();
    w.min_eig = min_eigenvalue(directional_derivative_from_samples(js, w.Delta, sf.values(), sf.gradients(), tol), tol);
    for (int r = 0; r < sf.d(); ++r) w.psd = w.psd && is_psd(w.Delta[r], tol.tol_psd, tol);
    return w;
}

/// Min eigenvalue of D_Delta f(S) at the node tuple.
inline double witness_value(const SampledFunction& sf, const Direction& Delta, const Tolerances& tol = {})
{
    return min_eigenvalue(directional_derivative_from_samples(sf.spectrum(), Delta, sf.values(), sf.gradients(), tol), tol);
}

struct RefutationCheck {
    bool psd_ok = false;
    bool first_order_ok = false;
    bool negative_ok = false;
    double min_component_eig = 0.0;
    double first_order_residual = 0.0;
    double min_eig = 0.0;

    bool passed() const { return psd_ok && first_order_ok && negative_ok; }
};

inline RefutationCheck verify_refutation(const SampledFunction& sf, const Direction& witness, const Tolerances& tol = {})
{
    RefutationCheck c;
    c.min_component_eig = std::numeric_limits<double>::infinity();
    for (int r = 0; r < witness.d(); ++r) c.min_component_eig = std::min(c.min_component_eig, min_eigenvalue(witness[r], tol));
    std::vector<Matrix> S;
    for (int r = 0; r < sf.d(); ++r) S.push_back(sf.points().col(r).cast<cplx>().asDiagonal());
    c.first_order_residual = check_first_order(CommutingTuple::unchecked(S), witness);
    c.min_eig = witness_value(sf, witness, tol);
    c.psd_ok = c.min_component_eig >= -tol.tol_psd;
    c.first_order_ok = c.first_order_residual <= tol.tol_commute;
    c.negative_ok = c.min_eig < -tol.tol_psd;
    return c;
}

namespace detail {

inline constexpr std::uint64_t kWitnessSearchSeed = 0xc0ffee5eedULL;

/// Orthogonal projection onto the affine set: per pair (i, j), the d-vector of (i, j) entries
/// is projected onto sum_r w_r a_r = b; diagonals are set to the gradients.
inline void project_affine(const SampledFunction& sf, std::vector<Matrix>& A)
{
    const Index n = sf.n();
    const int d = sf.d();
    for (Index i = 0; i < n; ++i) {
        for (int r = 0; r < d; ++r) A[static_cast<std::size_t>(r)](i, i) = sf.node(i).grad(r);
        for (Index j = i + 1; j < n; ++j) {
            double ww = 0.0;
            cplx s = 0.0;
            for (int r = 0; r < d; ++r) {
                const double w = sf.node(j).x(r) - sf.node(i).x(r);
                ww += w * w;
                s += w * A[static_cast<std::size_t>(r)](i, j);
            }
            if (ww == 0.0) continue;
            const cplx excess = (s - (sf.node(j).f - sf.node(i).f)) / ww;
            for (int r = 0; r < d; ++r) {
                auto& M = A[static_cast<std::size_t>(r)];
                M(i, j) -= (sf.node(j).x(r) - sf.node(i).x(r)) * excess;
                M(j, i) = std::conj(M(i, j));
            }
        }
    }
}

inline std::vector<Matrix> least_norm_affine_point(const SampledFunction& sf)
{
    std::vector<Matrix> A(static_cast<std::size_t>(sf.d()), Matrix::Zero(sf.n(), sf.n()));
    project_affine(sf, A);
    return A;
}

inline double tuple_distance(const std::vector<Matrix>& a, const std::vector<Matrix>& b)
{
    double s = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) s += (a[r] - b[r]).squaredNorm();
    return std::sqrt(s);
}

inline double tuple_min_eig(const std::vector<Matrix>& A, const Tolerances& tol)
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& M : A) m = std::min(m, min_eigenvalue(hermitian_part(M), tol));
    return m;
}

/// Shift each component by the smallest multiple of I that makes it PSD.
inline Direction psd_shift(const Direction& D, const Tolerances& tol)
{
    std::vector<Matrix> out;
    for (int r = 0; r < D.d(); ++r) {
        const double lo = min_eigenvalue(D[r], tol);
        out.push_back(lo < 0.0 ? Matrix(D[r] - lo * Matrix::Identity(D.n(), D.n())) : D[r]);
    }
    return Direction(std::move(out));
}

/// Phase-I barrier method started from an exactly affine tuple x: maximize s subject to the
/// affine constraints and A^r - s I > 0. Newton steps keep the constraints exact, so the
/// method stops as soon as the certificate is PSD within tol_psd.
struct PhaseOne {
    std::optional<std::vector<Matrix>> certificate;
    std::optional<std::vector<Matrix>> dual; // PSD, trace one, normal to the affine set
};

inline PhaseOne polish(const SampledFunction& sf, const std::vector<Matrix>& x, const Tolerances& tol, int max_newton = 400)
{
    PhaseOne out;
    const Index n = sf.n();
    const int d = sf.d();
    const Index per = n * n; // real coordinates of one Hermitian n x n matrix
    const Index p = per * d;

    // coordinate k < n: (k,k); then for each i < j a real and an imaginary coordinate
    std::vector<Matrix> basis;
    std::vector<std::pair<Index, Index>> where;
    for (Index i = 0; i < n; ++i) {
        Matrix E = Matrix::Zero(n, n);
        E(i, i) = 1.0;
        basis.push_back(E);
        where.emplace_back(i, i);
    }
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            Matrix Er = Matrix::Zero(n, n), Ei = Matrix::Zero(n, n);
            Er(i, j) = Er(j, i) = 1.0;
            Ei(i, j) = I_unit;
            Ei(j, i) = -I_unit;
            basis.push_back(Er);
            basis.push_back(Ei);
            where.emplace_back(i, j);
            where.emplace_back(i, j);
        }

    auto to_theta = [&](const std::vector<Matrix>& A) {
        RealVector th(p);
        for (int r = 0; r < d; ++r)
            for (Index k = 0; k < per; ++k) {
                const auto [i, j] = where[static_cast<std::size_t>(k)];
                const cplx a = A[static_cast<std::size_t>(r)](i, j);
                th(r * per + k) = (k >= n && (k - n) % 2 == 1) ? a.imag() : a.real();
            }
        return th;
    };
    auto from_theta = [&](const RealVector& th) {
        std::vector<Matrix> A(static_cast<std::size_t>(d), Matrix::Zero(n, n));
        for (int r = 0; r < d; ++r)
            for (Index k = 0; k < per; ++k) A[static_cast<std::size_t>(r)] += th(r * per + k) * basis[static_cast<std::size_t>(k)];
        return A;
    };

    // equality constraints C theta = b; Newton steps live in the null space of C
    const Index m = d * n + n * (n - 1);
    RealMatrix C = RealMatrix::Zero(m, p);
    Index e = 0;
    for (int r = 0; r < d; ++r)
        for (Index i = 0; i < n; ++i) C(e++, r * per + i) = 1.0;
    Index k = n;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j, k += 2) {
            for (int r = 0; r < d; ++r) {
                const double w = sf.node(j).x(r) - sf.node(i).x(r);
                C(e, r * per + k) = w;
                C(e + 1, r * per + k + 1) = w;
            }
            e += 2;
        }
    Eigen::JacobiSVD<RealMatrix> svd(C, Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    const Index rank = svd.rank();
    const RealMatrix N = svd.matrixV().rightCols(p - rank);
    const Index q = N.cols();
    if (q == 0) return out;

    const RealVector theta0 = to_theta(x);
    double scale = 1.0;
    for (const auto& nd : sf.nodes()) scale = std::max({scale, std::abs(nd.f), nd.grad.cwiseAbs().maxCoeff()});
    RealVector z = RealVector::Zero(q + 1); // (u, s)
    z(q) = tuple_min_eig(x, tol) - 1e-2 * scale;

    auto shifted = [&](const RealVector& v, std::vector<Matrix>& B) {
        B = from_theta(theta0 + N * v.head(q));
        for (auto& M : B) M -= v(q) * Matrix::Identity(n, n);
        for (const auto& M : B) {
            Eigen::LLT<Matrix> llt(M);
            if (llt.info() != Eigen::Success) return false;
        }
        return true;
    };
    auto objective = [&](const RealVector& v, double t, double& val) {
        std::vector<Matrix> B;
        if (!shifted(v, B)) return false;
        val = -t * v(q);
        for (const auto& M : B) val -= 2.0 * Eigen::LLT<Matrix>(M).matrixLLT().diagonal().real().array().log().sum();
        return true;
    };

    const double barrier_terms = static_cast<double>(d * n);
    double t = 1.0;
    int newton = 0;
    while (newton < max_newton) {
        for (;;) {
            if (z(q) >= 0.0 || ++newton > max_newton) break;
            std::vector<Matrix> B;
            shifted(z, B);
            // gradient and Hessian in (theta, s), then reduced to (u, s)
            RealVector g = RealVector::Zero(p + 1);
            RealMatrix H = RealMatrix::Zero(p + 1, p + 1);
            g(p) = -t;
            for (int r = 0; r < d; ++r) {
                const Matrix Binv = B[static_cast<std::size_t>(r)].inverse();
                const Matrix Binv2 = Binv * Binv;
                std::vector<Matrix> left;
                for (Index a = 0; a < per; ++a) left.push_back(Binv * basis[static_cast<std::size_t>(a)]);
                g(p) += Binv.trace().real();
                H(p, p) += Binv2.trace().real();
                for (Index a = 0; a < per; ++a) {
                    g(r * per + a) = -left[static_cast<std::size_t>(a)].trace().real();
                    const double hs = -(Binv2 * basis[static_cast<std::size_t>(a)]).trace().real();
                    H(r * per + a, p) = H(p, r * per + a) = hs;
                    for (Index b = a; b < per; ++b) {
                        const double h = (left[static_cast<std::size_t>(a)] * left[static_cast<std::size_t>(b)]).trace().real();
                        H(r * per + a, r * per + b) = H(r * per + b, r * per + a) = h;
                    }
                }
            }
            RealMatrix T = RealMatrix::Zero(p + 1, q + 1);
            T.topLeftCorner(p, q) = N;
            T(p, q) = 1.0;
            const RealVector gr = T.transpose() * g;
            const RealMatrix Hr = T.transpose() * H * T;
            const RealVector dz = Hr.ldlt().solve(-gr);
            const double decrement = -gr.dot(dz);
            if (!(decrement / 2.0 > 1e-10)) break;

            double f0 = 0.0;
            objective(z, t, f0);
            double alpha = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
                double f1 = 0.0;
                if (objective(z + alpha * dz, t, f1) && f1 <= f0 - 0.25 * alpha * decrement) {
                    z += alpha * dz;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        if (z(q) >= 0.0) break;
        // the optimal s lies within barrier_terms / t of the current one
        if (z(q) + barrier_terms / t < -tol.tol_psd) {
            // near the central path B_r^{-1} / t is dual feasible: a separating PSD tuple
            std::vector<Matrix> B;
            shifted(z, B);
            std::vector<Matrix> Z;
            for (const auto& M : B) Z.push_back(hermitian_part(M.inverse() / t));
            out.dual = std::move(Z);
            return out;
        }
        if (z(q) >= -tol.tol_psd && barrier_terms / t < tol.tol_psd) break;
        t *= 8.0;
    }
    if (z(q) < -tol.tol_psd) return out;
    auto A = from_theta(theta0 + N * z.head(q));
    project_affine(sf, A);
    out.certificate = std::move(A);
    return out;
}

/// g is a separating tuple: PSD per component, off-diagonals of the form (x_j^r - x_i^r) lambda_ij.
/// Both the Dykstra gap (PSD iterate minus affine iterate) and the barrier dual have this shape.
inline void extract_refutation(const SampledFunction& sf, const std::vector<Matrix>& g, const char* source, const Tolerances& tol,
                               Refutation& ref)
{
    const Index n = sf.n();
    const int d = sf.d();

    RealMatrix K = RealMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            double ww = 0.0;
            cplx s = 0.0;
            for (int r = 0; r < d; ++r) {
                const double w = sf.node(j).x(r) - sf.node(i).x(r);
                ww += w * w;
                s += w * g[static_cast<std::size_t>(r)](i, j);
            }
            if (ww == 0.0) continue;
            K(j, i) = (s / ww).real();
            K(i, j) = -K(j, i);
        }
    const double kmax = K.cwiseAbs().maxCoeff();
    if (kmax > 0.0) {
        K /= kmax;
        ref.K = K;
        const auto raw = refutation_witness(sf, K, tol);
        ref.raw_witness = raw.Delta;
        ref.raw_min_eig = raw.min_eig;
    }

    auto accept = [&](const Direction& D, const char* source) {
        const auto chk = verify_refutation(sf, D, tol);
        if (!chk.passed()) return false;
        if (ref.witness && chk.min_eig >= ref.witness_min_eig) return false;
        ref.witness = D;
        ref.witness_min_eig = chk.min_eig;
        ref.witness_source = source;
        return true;
    };

    // The gap itself, rebuilt with exactly first-order-commuting off-diagonals.
    if (kmax > 0.0) {
        std::vector<Matrix> gd;
        for (int r = 0; r < d; ++r) {
            Matrix D = (*ref.raw_witness)[r];
            for (Index i = 0; i < n; ++i) D(i, i) = g[static_cast<std::size_t>(r)](i, i).real() / kmax;
            gd.push_back(D);
        }
        accept(psd_shift(Direction(std::move(gd)), tol), source);
        accept(psd_shift(*ref.raw_witness, tol), "shifted");
    }
    if (!ref.witness) {
        Rng rng(kWitnessSearchSeed);
        const auto js = sf.spectrum();
        for (int trial = 0; trial < 2000; ++trial) accept(random_first_order_direction(js, rng, true), "random");
    }
    ref.status = ref.witness ? RefutationStatus::Infeasible : RefutationStatus::Inconclusive;
}

} // namespace detail

/// Decide whether sf extends to the n-point Loewner class.
inline CertifyResult certify(const SampledFunction& sf, const Tolerances& tol = {})
{
    tol.validate();
    const int d = sf.d();
    CertifyResult result;

    std::vector<Matrix> x = detail::least_norm_affine_point(sf);
    std::vector<Matrix> p(static_cast<std::size_t>(d), Matrix::Zero(sf.n(), sf.n()));
    std::vector<Matrix> y = x;

    auto finish_certificate = [&](const std::vector<Matrix>& A, int iterations, double dist) {
        const auto chk = verify_certificate(sf, A, tol);
        if (!chk.passed()) return false;
        LoewnerCertificate cert;
        cert.A = A;
        cert.min_psd_eig = chk.min_psd_eig;
        cert.max_diagonal_violation = chk.max_diagonal_violation;
        cert.max_constraint_violation = chk.max_constraint_violation;
        cert.iterations = iterations;
        cert.final_distance = dist;
        result.outcome = CertifyOutcome::Certified;
        result.certificate = std::move(cert);
        return true;
    };

    auto finish_refutation = [&](const std::vector<Matrix>& g, const char* source, int iterations, double dist) {
        Refutation ref;
        ref.iterations = iterations;
        ref.final_distance = dist;
        detail::extract_refutation(sf, g, source, tol, ref);
        const bool found = ref.status == RefutationStatus::Infeasible;
        result.outcome = found ? CertifyOutcome::Infeasible : CertifyOutcome::Inconclusive;
        result.refutation = std::move(ref);
        return found;
    };

    // Barrier polish from the exactly affine iterate: a certificate, or a dual separating tuple.
    auto try_polish = [&](int it, double dist) {
        auto ph = detail::polish(sf, x, tol);
        if (ph.certificate && finish_certificate(*ph.certificate, it, dist)) return true;
        return ph.dual && finish_refutation(*ph.dual, "dual", it, dist);
    };

    if (detail::tuple_min_eig(x, tol) >= -tol.tol_psd && finish_certificate(x, 0, 0.0)) return result;

    constexpr int stall_window = 100;
    constexpr int polish_every = 250;
    for (int it = 1; it <= tol.max_iter; ++it) {
        for (int r = 0; r < d; ++r) {
            const auto k = static_cast<std::size_t>(r);
            const Matrix z = x[k] + p[k];
            y[k] = project_psd(z, tol);
            p[k] = z - y[k];
        }
        x = y;
        detail::project_affine(sf, x);
        const double dist = detail::tuple_distance(y, x);
        result.distances.push_back(dist);

        // the exactly affine iterate, once PSD within tolerance, is a certificate
        if (dist <= tol.tol_residual && detail::tuple_min_eig(x, tol) >= -tol.tol_psd && finish_certificate(x, it, dist)) {
            return result;
        }
        if (it % polish_every == 0 && try_polish(it, dist)) return result;

        const bool stalled = it > stall_window && dist > tol.tol_residual &&
                             std::abs(result.distances[static_cast<std::size_t>(it - 1 - stall_window)] - dist) < 1e-10 * dist;
        if (stalled || it == tol.max_iter) {
            if (try_polish(it, dist)) return result;
            std::vector<Matrix> gap;
            for (int r = 0; r < d; ++r) gap.push_back(hermitian_part(y[static_cast<std::size_t>(r)] - x[static_cast<std::size_t>(r)]));
            finish_refutation(gap, "gap", it, dist);
            return result;
        }
    }
    return result;
}

} // namespace loewner
