#pragma once

// Dense complex Hermitian linear algebra shared by every other header:
// a cyclic Jacobi eigensolver, PSD and Loewner-order tests, Schur products,
// the graded sum S (.) I on H (x) M, and the matrix exponential.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace loewner {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx I_unit{0.0, 1.0};

struct Tolerances {
    double tol_herm = 1e-10;
    double tol_psd = 1e-9;
    double tol_commute = 1e-8;
    double tol_residual = 1e-7;
    int max_iter = 10000;

    void validate() const
    {
        for (double t : {tol_herm, tol_psd, tol_commute, tol_residual}) {
            if (!std::isfinite(t) || t < 0.0) {
                fail(ErrorKind::InvalidArgument, "tolerances must be finite and nonnegative");
            }
        }
        if (max_iter <= 0) {
            fail(ErrorKind::InvalidArgument, "max_iter must be positive");
        }
    }
};

/// Orthogonal decomposition M = M^1 (+) ... (+) M^d, stored as block sizes.
class GradedSpace {
public:
    GradedSpace() = default;
    explicit GradedSpace(std::vector<int> dims) : dims_(std::move(dims))
    {
        if (dims_.empty()) {
            fail(ErrorKind::InvalidArgument, "graded space needs at least one block");
        }
        for (int m : dims_) {
            if (m < 1) {
                fail(ErrorKind::InvalidArgument, "graded block sizes must be positive");
            }
        }
    }

    int d() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    Index total() const { return std::accumulate(dims_.begin(), dims_.end(), Index{0}); }

    Index offset(int r) const
    {
        return std::accumulate(dims_.begin(), dims_.begin() + r, Index{0});
    }

    /// Block index r that owns coordinate k.
    int block_of(Index k) const
    {
        Index acc = 0;
        for (int r = 0; r < d(); ++r) {
            acc += dims_[static_cast<std::size_t>(r)];
            if (k < acc) return r;
        }
        fail(ErrorKind::ShapeMismatch, "coordinate outside graded space");
    }

    Matrix projection(int r) const
    {
        Matrix P = Matrix::Zero(total(), total());
        const Index off = offset(r);
        for (Index k = 0; k < dims_[static_cast<std::size_t>(r)]; ++k) P(off + k, off + k) = 1.0;
        return P;
    }

    bool operator==(const GradedSpace&) const = default;

private:
    std::vector<int> dims_;
};

// ---------------------------------------------------------------------------
// Shape and structure helpers

inline void require_square(const Matrix& A, const char* what)
{
    if (A.rows() != A.cols() || A.rows() == 0) {
        fail(ErrorKind::ShapeMismatch, std::string(what) + " must be a nonempty square matrix");
    }
}

inline double hermitian_defect(const Matrix& H) { return (H - H.adjoint()).norm(); }

inline bool is_hermitian(const Matrix& H, double tol_herm)
{
    return H.rows() == H.cols() && hermitian_defect(H) <= tol_herm * (1.0 + H.norm());
}

inline void require_hermitian(const Matrix& H, double tol_herm, const char* what = "matrix")
{
    require_square(H, what);
    if (!is_hermitian(H, tol_herm)) {
        fail(ErrorKind::NonHermitian, std::string(what) + " is not Hermitian (defect " +
                                          std::to_string(hermitian_defect(H)) + ")");
    }
}

inline Matrix hermitian_part(const Matrix& A) { return 0.5 * (A + A.adjoint()); }

inline bool is_real(const Matrix& A) { return (A.imag().array() == 0.0).all(); }

inline double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// Eigensolver

struct EigenDecomposition {
    RealVector values; // ascending
    Matrix vectors;    // columns are orthonormal eigenvectors
    int sweeps = 0;
};

namespace detail {

inline double off_diagonal_norm(const Matrix& A)
{
    double s = 0.0;
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = 0; i < A.rows(); ++i)
            if (i != j) s += std::norm(A(i, j));
    return std::sqrt(s);
}

/// Rotate columns p, q of A by the 2x2 block G (A <- A G on those columns).
inline void rotate_columns(Matrix& A, Index p, Index q, cplx g00, cplx g01, cplx g10, cplx g11)
{
    for (Index k = 0; k < A.rows(); ++k) {
        const cplx akp = A(k, p);
        const cplx akq = A(k, q);
        A(k, p) = akp * g00 + akq * g10;
        A(k, q) = akp * g01 + akq * g11;
    }
}

/// A <- G^H A on rows p, q.
inline void rotate_rows(Matrix& A, Index p, Index q, cplx g00, cplx g01, cplx g10, cplx g11)
{
    for (Index k = 0; k < A.cols(); ++k) {
        const cplx apk = A(p, k);
        const cplx aqk = A(q, k);
        A(p, k) = std::conj(g00) * apk + std::conj(g10) * aqk;
        A(q, k) = std::conj(g01) * apk + std::conj(g11) * aqk;
    }
}

/// Multiply each column by a unimodular scalar so that its first component with
/// modulus above `floor` is real and positive.
inline void normalize_column_phases(Matrix& Q, double floor = 1e-10)
{
    for (Index j = 0; j < Q.cols(); ++j) {
        for (Index k = 0; k < Q.rows(); ++k) {
            const double mag = std::abs(Q(k, j));
            if (mag > floor) {
                const cplx phase = std::conj(Q(k, j)) / mag;
                Q.col(j) *= phase;
                Q(k, j) = cplx(mag, 0.0);
                break;
            }
        }
    }
}

} // namespace detail

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Eigenvalues are returned ascending; each eigenvector's first non-negligible
/// component is real positive. Real input produces exactly real eigenvectors.
inline EigenDecomposition eig_hermitian(const Matrix& H, const Tolerances& tol = {})
{
    require_hermitian(H, tol.tol_herm, "eig_hermitian input");
    const Index n = H.rows();
    const bool real_input = is_real(H);

    Matrix A = hermitian_part(H);
    for (Index i = 0; i < n; ++i) A(i, i) = A(i, i).real();
    Matrix V = Matrix::Identity(n, n);

    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr int max_sweeps = 100;
    const double scale = A.norm();

    EigenDecomposition out;
    bool converged = (n == 1) || scale == 0.0;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        const double off = detail::off_diagonal_norm(A);
        if (off <= eps * scale) {
            converged = true;
            break;
        }
        // Threshold strategy: large rotations first during the early sweeps.
        const double threshold = sweep < 3 ? 0.2 * off / static_cast<double>(n * n) : 0.0;
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const cplx b = A(p, q);
                const double ab = std::abs(b);
                const double app = A(p, p).real();
                const double aqq = A(q, q).real();
                if (sweep > 3 && std::abs(app) + 100.0 * ab == std::abs(app) &&
                    std::abs(aqq) + 100.0 * ab == std::abs(aqq)) {
                    A(p, q) = A(q, p) = 0.0;
                    continue;
                }
                if (ab <= threshold || ab == 0.0) continue;

                const cplx phase = b.imag() == 0.0 ? cplx(b.real() >= 0.0 ? 1.0 : -1.0, 0.0) : b / ab;
                const double theta = (aqq - app) / (2.0 * ab);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;
                // G = diag(1, conj(phase)) * [[cs, sn], [-sn, cs]]
                const cplx g00 = cs;
                const cplx g01 = sn;
                const cplx g10 = -std::conj(phase) * sn;
                const cplx g11 = std::conj(phase) * cs;

                detail::rotate_columns(A, p, q, g00, g01, g10, g11);
                detail::rotate_rows(A, p, q, g00, g01, g10, g11);
                A(p, q) = A(q, p) = 0.0;
                A(p, p) = app - t * ab;
                A(q, q) = aqq + t * ab;
                detail::rotate_columns(V, p, q, g00, g01, g10, g11);
            }
        }
        out.sweeps = sweep + 1;
    }
    if (!converged && detail::off_diagonal_norm(A) > 1e3 * eps * scale) {
        fail(ErrorKind::DiagonalizationFailed, "Jacobi sweeps did not converge");
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return A(a, a).real() < A(b, b).real(); });

    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index j = 0; j < n; ++j) {
        const Index src = order[static_cast<std::size_t>(j)];
        out.values(j) = A(src, src).real();
        out.vectors.col(j) = V.col(src);
    }
    detail::normalize_column_phases(out.vectors);
    if (real_input) out.vectors = out.vectors.real().cast<cplx>();
    return out;
}

inline double min_eigenvalue(const Matrix& H, const Tolerances& tol = {})
{
    return eig_hermitian(H, tol).values(0);
}

inline double max_eigenvalue(const Matrix& H, const Tolerances& tol = {})
{
    const auto e = eig_hermitian(H, tol);
    return e.values(e.values.size() - 1);
}

inline bool is_psd(const Matrix& H, double tol, const Tolerances& tols = {})
{
    return min_eigenvalue(H, tols) >= -tol;
}

/// Nearest PSD matrix in Frobenius norm (eigenvalue clipping).
inline Matrix project_psd(const Matrix& H, const Tolerances& tol = {})
{
    const auto e = eig_hermitian(hermitian_part(H), tol);
    const RealVector clipped = e.values.cwiseMax(0.0);
    Matrix out = e.vectors * clipped.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    return hermitian_part(out);
}

/// Q f(diag) Q^H for a Hermitian matrix and a scalar function on its spectrum.
template <class Fn>
Matrix hermitian_function(const Matrix& H, Fn&& fn, const Tolerances& tol = {})
{
    const auto e = eig_hermitian(H, tol);
    Vector mapped(e.values.size());
    for (Index i = 0; i < e.values.size(); ++i) mapped(i) = fn(e.values(i));
    return hermitian_part(e.vectors * mapped.asDiagonal() * e.vectors.adjoint());
}

// ---------------------------------------------------------------------------
// Norms (singular values come from Eigen's one-sided Jacobi SVD)

inline RealVector singular_values(const Matrix& A)
{
    return Eigen::JacobiSVD<Matrix>(A).singularValues();
}

inline double spectral_norm(const Matrix& A)
{
    if (A.size() == 0) return 0.0;
    return singular_values(A)(0);
}

inline double smallest_singular_value(const Matrix& A)
{
    const RealVector s = singular_values(A);
    return s(s.size() - 1);
}

/// ||S|| = max_r ||S^r|| for tuples.
inline double tuple_norm(std::span<const Matrix> S)
{
    double m = 0.0;
    for (const auto& A : S) m = std::max(m, spectral_norm(A));
    return m;
}

// ---------------------------------------------------------------------------
// Order and products

inline void require_same_shape(const Matrix& A, const Matrix& B, const char* what)
{
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        fail(ErrorKind::ShapeMismatch, std::string(what) + ": operand shapes differ");
    }
}

inline void require_tuple_shape(std::span<const Matrix> S, std::span<const Matrix> T, const char* what)
{
    if (S.size() != T.size() || S.empty()) {
        fail(ErrorKind::ShapeMismatch, std::string(what) + ": tuple lengths differ or are zero");
    }
    for (std::size_t r = 0; r < S.size(); ++r) require_same_shape(S[r], T[r], what);
}

/// S <= T componentwise in the Loewner order.
inline bool loewner_leq(std::span<const Matrix> S, std::span<const Matrix> T, double tol,
                        const Tolerances& tols = {})
{
    require_tuple_shape(S, T, "loewner_leq");
    for (std::size_t r = 0; r < S.size(); ++r) {
        if (min_eigenvalue(hermitian_part(T[r] - S[r]), tols) < -tol) return false;
    }
    return true;
}

inline Matrix schur_product(const Matrix& A, const Matrix& B)
{
    require_same_shape(A, B, "schur_product");
    return A.cwiseProduct(B);
}

inline Matrix kron(const Matrix& A, const Matrix& B)
{
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

/// sum_r S^r (x) P^r on H (x) M, index (h, k) -> h * m + k.
inline Matrix graded_sum(std::span<const Matrix> S, const GradedSpace& G)
{
    if (static_cast<int>(S.size()) != G.d()) {
        fail(ErrorKind::ShapeMismatch, "graded_sum: tuple length differs from number of blocks");
    }
    const Index n = S[0].rows();
    for (const auto& A : S) {
        if (A.rows() != n || A.cols() != n) fail(ErrorKind::ShapeMismatch, "graded_sum: tuple shapes differ");
    }
    const Index m = G.total();
    Matrix out = Matrix::Zero(n * m, n * m);
    for (int r = 0; r < G.d(); ++r) {
        const Index off = G.offset(r);
        const Index len = G.dims()[static_cast<std::size_t>(r)];
        for (Index h = 0; h < n; ++h)
            for (Index g = 0; g < n; ++g) {
                const cplx s = S[static_cast<std::size_t>(r)](h, g);
                if (s == cplx(0.0)) continue;
                for (Index k = off; k < off + len; ++k) out(h * m + k, g * m + k) = s;
            }
    }
    return out;
}

/// The point z in C^d acting on M blockwise: z^1 P^1 + ... + z^d P^d.
inline Matrix graded_diag(const Vector& z, const GradedSpace& G)
{
    if (z.size() != G.d()) fail(ErrorKind::ShapeMismatch, "graded_diag: point dimension differs from grading");
    Vector diag(G.total());
    for (int r = 0; r < G.d(); ++r) diag.segment(G.offset(r), G.dims()[static_cast<std::size_t>(r)]).setConstant(z(r));
    return diag.asDiagonal();
}

/// z acting on a graded vector: (z eta)^r = z^r eta^r.
inline Vector graded_apply(const Vector& z, const GradedSpace& G, const Vector& eta)
{
    if (z.size() != G.d() || eta.size() != G.total()) {
        fail(ErrorKind::ShapeMismatch, "graded_apply: shapes differ");
    }
    Vector out = eta;
    for (int r = 0; r < G.d(); ++r) out.segment(G.offset(r), G.dims()[static_cast<std::size_t>(r)]) *= z(r);
    return out;
}

/// <x, y> linear in the first argument.
inline cplx inner(const Vector& x, const Vector& y) { return y.dot(x); }

// ---------------------------------------------------------------------------
// Matrix exponential: scaling and squaring with the diagonal Pade(6) approximant.

inline Matrix expm(const Matrix& A)
{
    require_square(A, "expm input");
    const Index n = A.rows();
    constexpr double theta6 = 0.5371920351148152;
    constexpr double c[] = {1.0, 1.0 / 2.0, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};

    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > theta6) s = static_cast<int>(std::ceil(std::log2(norm1 / theta6)));
    const Matrix B = A / std::ldexp(1.0, s);

    const Matrix Id = Matrix::Identity(n, n);
    Matrix power = Id;
    Matrix num = Matrix::Zero(n, n);
    Matrix den = Matrix::Zero(n, n);
    for (int k = 0; k <= 6; ++k) {
        num += c[k] * power;
        den += ((k % 2) ? -c[k] : c[k]) * power;
        power = power * B;
    }
    Matrix R = den.partialPivLu().solve(num);
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

/// exp(Y) for skew-Hermitian Y, followed by one Newton step toward the unitary polar factor.
inline Matrix expm_unitary(const Matrix& Y)
{
    Matrix U = expm(Y);
    const Matrix inv_adj = U.adjoint().partialPivLu().inverse();
    return 0.5 * (U + inv_adj);
}

} // namespace loewner
