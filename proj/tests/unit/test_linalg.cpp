#include <catch_amalgamated.hpp>

#include <loewner/linalg.hpp>
#include <loewner/random.hpp>

#include <Eigen/Eigenvalues>

using namespace loewner;
using Catch::Matchers::WithinAbs;

namespace {

Matrix mat2(cplx a, cplx b, cplx c, cplx d)
{
    Matrix M(2, 2);
    M << a, b, c, d;
    return M;
}

double reconstruction_residual(const Matrix& H, const EigenDecomposition& e)
{
    return (H - e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint()).norm();
}

} // namespace

TEST_CASE("eig_hermitian on small closed-form cases", "[linalg]")
{
    const auto id = eig_hermitian(Matrix::Identity(2, 2));
    CHECK(id.values(0) == 1.0);
    CHECK(id.values(1) == 1.0);
    CHECK((id.vectors - Matrix::Identity(2, 2)).norm() == 0.0);

    const auto swap = eig_hermitian(mat2(0, 1, 1, 0));
    CHECK_THAT(swap.values(0), WithinAbs(-1.0, 1e-15));
    CHECK_THAT(swap.values(1), WithinAbs(1.0, 1e-15));
    CHECK(is_real(swap.vectors));
}

TEST_CASE("eig_hermitian agrees with an independent eigensolver", "[linalg]")
{
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = 1 + trial % 12;
        const Matrix H = random_hermitian(n, rng, 3.0);
        const auto e = eig_hermitian(H);
        const Eigen::SelfAdjointEigenSolver<Matrix> oracle(H);
        CHECK((e.values - oracle.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + H.norm()));
        CHECK(reconstruction_residual(H, e) <= 1e-10 * static_cast<double>(n) * (1.0 + H.norm()));
        CHECK((e.vectors.adjoint() * e.vectors - Matrix::Identity(n, n)).norm() <= 1e-12 * static_cast<double>(n));
        for (Index i = 1; i < n; ++i) CHECK(e.values(i - 1) <= e.values(i));
        for (Index j = 0; j < n; ++j) {
            for (Index k = 0; k < n; ++k) {
                if (std::abs(e.vectors(k, j)) > 1e-10) {
                    CHECK(e.vectors(k, j).imag() == 0.0);
                    CHECK(e.vectors(k, j).real() > 0.0);
                    break;
                }
            }
        }
    }
}

TEST_CASE("eig_hermitian is deterministic and handles degeneracy", "[linalg]")
{
    Rng rng(5);
    const Matrix U = random_unitary(5, rng);
    RealVector d(5);
    d << -1, 2, 2, 2, 7;
    const Matrix H = hermitian_part(U * d.cast<cplx>().asDiagonal() * U.adjoint());
    const auto a = eig_hermitian(H);
    const auto b = eig_hermitian(H);
    CHECK((a.vectors - b.vectors).norm() == 0.0);
    CHECK((a.values - d).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(reconstruction_residual(H, a) <= 1e-12 * 5 * (1 + H.norm()));
}

TEST_CASE("eig_hermitian rejects non-Hermitian input", "[linalg]")
{
    try {
        (void)eig_hermitian(mat2(0, 1, 2, 0));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonHermitian);
    }
}

TEST_CASE("min_eigenvalue and is_psd", "[linalg]")
{
    CHECK(min_eigenvalue(Matrix::Zero(3, 3)) == 0.0);
    CHECK(is_psd(Matrix::Zero(3, 3), 1e-9));
    CHECK_THAT(min_eigenvalue(mat2(2, 3, 3, 4)), WithinAbs(3.0 - std::sqrt(10.0), 1e-14));
    CHECK_FALSE(is_psd(mat2(2, 3, 3, 4), 1e-9));
    CHECK_THAT(min_eigenvalue(mat2(1, 0.5, 0.5, 0.25)), WithinAbs(0.0, 1e-15));
    CHECK(is_psd(mat2(1, 0.5, 0.5, 0.25), 1e-9));

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + trial % 5;
        const Matrix G = random_complex_gaussian(n, n, rng);
        Matrix H = G * G.adjoint();
        if (trial % 2) H -= 0.3 * Matrix::Identity(n, n) * H.trace().real() / static_cast<double>(n);
        H = hermitian_part(H);
        const Matrix U = random_unitary(n, rng);
        CHECK(is_psd(H, 1e-9) == is_psd(hermitian_part(U.adjoint() * H * U), 1e-9));
    }
}

TEST_CASE("loewner_leq is a partial order", "[linalg]")
{
    const std::vector<Matrix> S{mat2(0, 0, 0, 5), mat2(1, 0, 0, 0)};
    const std::vector<Matrix> T{mat2(4, 2, 2, 6), mat2(2, 2, 2, 4)};
    CHECK(loewner_leq(S, S, 1e-9));
    CHECK(loewner_leq(S, T, 1e-9));
    CHECK_FALSE(loewner_leq(T, S, 1e-9));
    const std::vector<Matrix> a{Matrix::Zero(1, 1)}, b{Matrix::Ones(1, 1)};
    CHECK(loewner_leq(a, b, 1e-9));

    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 3;
        std::vector<Matrix> X{random_hermitian(n, rng)}, Y{X[0]}, Z{X[0]};
        const Matrix G1 = random_complex_gaussian(n, n, rng), G2 = random_complex_gaussian(n, n, rng);
        Y[0] += G1 * G1.adjoint();
        Z[0] = Y[0] + G2 * G2.adjoint();
        CHECK(loewner_leq(X, Y, 1e-9));
        CHECK(loewner_leq(Y, Z, 1e-9));
        CHECK(loewner_leq(X, Z, 2e-9));
    }

    const std::vector<Matrix> bad{Matrix::Zero(3, 3)};
    CHECK_THROWS_AS(loewner_leq(a, bad, 1e-9), Error);
}

TEST_CASE("schur_product", "[linalg]")
{
    const Matrix A = mat2(1, 2, 3, 4);
    CHECK(schur_product(A, Matrix::Ones(2, 2)) == A);
    CHECK(schur_product(A, mat2(0, 1, 1, 0)) == mat2(0, 2, 3, 0));
    CHECK_THROWS_AS(schur_product(A, Matrix::Ones(3, 3)), Error);

    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix G = random_complex_gaussian(4, 3, rng), K = random_complex_gaussian(4, 2, rng);
        CHECK(is_psd(hermitian_part(schur_product(G * G.adjoint(), K * K.adjoint())), 1e-10));
    }
}

TEST_CASE("graded_sum follows the tensor ordering", "[linalg]")
{
    Rng rng(4);
    const Matrix S1 = random_hermitian(3, rng);
    const std::vector<Matrix> one{S1};
    CHECK((graded_sum(one, GradedSpace({2})) - kron(S1, Matrix::Identity(2, 2))).norm() == 0.0);

    std::vector<Matrix> scalars;
    for (int r = 0; r < 3; ++r) scalars.push_back(Matrix::Constant(1, 1, cplx(r + 1.0, 0.5 * r)));
    Matrix expect = Matrix::Zero(3, 3);
    for (int r = 0; r < 3; ++r) expect(r, r) = scalars[static_cast<std::size_t>(r)](0, 0);
    CHECK(graded_sum(scalars, GradedSpace({1, 1, 1})) == expect);

    // d = 2, n = 2, dims (1,1): entry ((h,k),(g,l)) = S^k(h,g) if k == l.
    const std::vector<Matrix> pair{mat2(1, 2, 2, 3), mat2(5, 6, 6, 7)};
    const Matrix M = graded_sum(pair, GradedSpace({1, 1}));
    for (Index h = 0; h < 2; ++h)
        for (Index k = 0; k < 2; ++k)
            for (Index g = 0; g < 2; ++g)
                for (Index l = 0; l < 2; ++l)
                    CHECK(M(h * 2 + k, g * 2 + l) == (k == l ? pair[static_cast<std::size_t>(k)](h, g) : cplx(0.0)));

    // scalar tuple acting on a graded vector reproduces the blockwise product
    const GradedSpace G({2, 1, 3});
    Vector z(3), eta(6);
    z << cplx(1, 1), cplx(-2, 0), cplx(0, 3);
    for (Index i = 0; i < 6; ++i) eta(i) = cplx(static_cast<double>(i), 1.0);
    std::vector<Matrix> zs;
    for (int r = 0; r < 3; ++r) zs.push_back(Matrix::Constant(1, 1, z(r)));
    CHECK((graded_sum(zs, G) * eta - graded_apply(z, G, eta)).norm() <= 1e-15);
    CHECK((graded_diag(z, G) * eta - graded_apply(z, G, eta)).norm() <= 1e-15);
    CHECK_THROWS_AS(graded_sum(pair, G), Error);
}

TEST_CASE("matrix exponential", "[linalg]")
{
    Matrix Y(2, 2);
    Y << 0, 1, -1, 0;
    const Matrix E = expm_unitary(0.7 * Y);
    Matrix rot(2, 2);
    rot << std::cos(0.7), std::sin(0.7), -std::sin(0.7), std::cos(0.7);
    CHECK((E - rot).norm() <= 1e-14);

    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix H = random_hermitian(5, rng, 4.0);
        const Matrix Ys = I_unit * H;
        const Matrix U = expm_unitary(Ys);
        const auto e = eig_hermitian(H);
        Vector ph(5);
        for (Index i = 0; i < 5; ++i) ph(i) = std::exp(I_unit * e.values(i));
        const Matrix oracle = e.vectors * ph.asDiagonal() * e.vectors.adjoint();
        CHECK((U - oracle).norm() <= 1e-11);
        CHECK((U.adjoint() * U - Matrix::Identity(5, 5)).norm() <= 1e-13);
    }
}

TEST_CASE("tolerance validation", "[linalg]")
{
    Tolerances t;
    CHECK_NOTHROW(t.validate());
    t.tol_psd = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(t.validate(), Error);
}
