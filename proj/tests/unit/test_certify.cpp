#include <catch_amalgamated.hpp>

#include <loewner/certify.hpp>

#include <cmath>
#include <numeric>

using namespace loewner;
using Catch::Matchers::WithinAbs;

namespace {

SampledFunction sample_1d(double (*f)(double), double (*df)(double), std::initializer_list<double> xs)
{
    std::vector<SampleNode> nodes;
    for (double x : xs) nodes.push_back({RealVector::Constant(1, x), f(x), RealVector::Constant(1, df(x))});
    return SampledFunction(1, std::move(nodes));
}

SmoothFunction product_fn()
{
    return SmoothFunction(2, [](const RealVector& x) { return x(0) * x(1); },
                          [](const RealVector& x) {
                              RealVector g(2);
                              g << x(1), x(0);
                              return g;
                          });
}

SmoothFunction sqrt_product_fn()
{
    return SmoothFunction(2, [](const RealVector& x) { return std::sqrt(x(0) * x(1)); },
                          [](const RealVector& x) {
                              const double s = std::sqrt(x(0) * x(1));
                              RealVector g(2);
                              g << 0.5 * x(1) / s, 0.5 * x(0) / s;
                              return g;
                          });
}

SmoothFunction affine_fn(double a, double b)
{
    return SmoothFunction(2, [a, b](const RealVector& x) { return a * x(0) + b * x(1); },
                          [a, b](const RealVector&) {
                              RealVector g(2);
                              g << a, b;
                              return g;
                          });
}

RealMatrix random_points(Index n, int d, Rng& rng, double lo, double hi)
{
    RealMatrix P(n, d);
    for (Index i = 0; i < n; ++i)
        for (int r = 0; r < d; ++r) P(i, r) = rng.uniform(lo, hi);
    return P;
}

RealMatrix pts(std::initializer_list<std::initializer_list<double>> rows)
{
    RealMatrix P(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& row : rows) {
        Index j = 0;
        for (double v : row) P(i, j++) = v;
        ++i;
    }
    return P;
}

} // namespace

TEST_CASE("loewner_matrix_1d divided differences", "[certify]")
{
    const auto id = sample_1d([](double x) { return x; }, [](double) { return 1.0; }, {1, 2});
    CHECK((loewner_matrix_1d(id) - Matrix::Ones(2, 2)).norm() == 0.0);

    const auto sq = sample_1d([](double x) { return x * x; }, [](double x) { return 2 * x; }, {1, 2});
    Matrix expect(2, 2);
    expect << 2, 3, 3, 4;
    CHECK((loewner_matrix_1d(sq) - expect).norm() < 1e-15);
    CHECK_THAT(min_eigenvalue(loewner_matrix_1d(sq)), WithinAbs(3.0 - std::sqrt(10.0), 1e-12));

    const auto inv = sample_1d([](double x) { return -1.0 / x; }, [](double x) { return 1.0 / (x * x); }, {1, 2});
    expect << 1, 0.5, 0.5, 0.25;
    CHECK((loewner_matrix_1d(inv) - expect).norm() < 1e-15);
    CHECK_THAT(min_eigenvalue(loewner_matrix_1d(inv)), WithinAbs(0.0, 1e-12));

    const auto two = SampledFunction::from_function(product_fn(), pts({{1, 1}}));
    CHECK_THROWS_AS(loewner_matrix_1d(two), Error);
}

TEST_CASE("sampled functions reject duplicate nodes", "[certify]")
{
    try {
        SampledFunction::from_function(product_fn(), pts({{1, 2}, {1, 2}}));
        FAIL("expected DegenerateNodes");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateNodes);
    }
}

TEST_CASE("affine functions certify with all-ones kernels at symmetric nodes", "[certify]")
{
    const auto sf = SampledFunction::from_function(affine_fn(1, 1), pts({{0.5, 1}, {1.5, 2}, {2, 2.5}, {-1, -0.5}}));
    const auto res = certify(sf);
    REQUIRE(res.outcome == CertifyOutcome::Certified);
    for (const auto& A : res.certificate->A) CHECK((A - Matrix::Ones(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(verify_certificate(sf, *res.certificate).passed());
}

TEST_CASE("affine functions with unequal weights certify", "[certify]")
{
    Rng rng(11);
    const auto sf = SampledFunction::from_function(affine_fn(2.0, 0.5), random_points(5, 2, rng, -1, 1));
    const auto res = certify(sf);
    REQUIRE(res.outcome == CertifyOutcome::Certified);
    CHECK(verify_certificate(sf, *res.certificate).passed());
}

TEST_CASE("x1 x2 at {(1,1),(2,2)} is refuted", "[certify]")
{
    // PSD diagonals (1,2) bound |A^r(1,2)| by sqrt 2, so the pair sum is at most 2 sqrt 2 < 3.
    const auto sf = SampledFunction::from_function(product_fn(), pts({{1, 1}, {2, 2}}));
    const auto res = certify(sf);
    REQUIRE(res.outcome == CertifyOutcome::Infeasible);
    const auto& ref = *res.refutation;
    REQUIRE(ref.K);
    CHECK_THAT(ref.raw_min_eig, WithinAbs(-3.0, 1e-9));
    REQUIRE(ref.witness);
    const auto chk = verify_refutation(sf, *ref.witness);
    CHECK(chk.passed());
    CHECK(chk.min_eig < -0.1);
    CHECK_THAT(chk.min_eig, WithinAbs(ref.witness_min_eig, 1e-12));
}

TEST_CASE("sqrt(x1 x2) certifies at random nodes", "[certify]")
{
    const auto f = sqrt_product_fn();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng = Rng::stream(seed, 3);
        const auto sf = SampledFunction::from_function(f, random_points(4, 2, rng, 0.5, 2.0));
        const auto res = certify(sf);
        REQUIRE(res.outcome == CertifyOutcome::Certified);
        const auto chk = verify_certificate(sf, *res.certificate);
        CHECK(chk.passed());
        CHECK(chk.max_constraint_violation <= 1e-6);
        CHECK(chk.max_diagonal_violation <= 1e-6);
        CHECK(chk.min_psd_eig.minCoeff() >= -1e-9);
        CHECK(res.certificate->iterations <= 10000);
    }
}

TEST_CASE("verify_certificate flags each violated condition", "[certify]")
{
    const auto sf = SampledFunction::from_function(affine_fn(1, 1), pts({{0, 0}, {1, 2}}));
    std::vector<Matrix> A(2, Matrix::Ones(2, 2));
    CHECK(verify_certificate(sf, A).passed());

    auto bad_diag = A;
    bad_diag[0](1, 1) += 1.0;
    const auto c1 = verify_certificate(sf, bad_diag);
    CHECK_FALSE(c1.passed());
    CHECK_FALSE(c1.diagonal_ok);

    auto bad_off = A;
    bad_off[1](0, 1) = bad_off[1](1, 0) = 0.5;
    const auto c2 = verify_certificate(sf, bad_off);
    CHECK_FALSE(c2.constraint_ok);

    auto not_psd = A;
    not_psd[0](0, 1) = not_psd[0](1, 0) = 3.0;
    not_psd[1](0, 1) = not_psd[1](1, 0) = 0.0;
    // constraint: 1 * 3 + 2 * 0 = 3 = f_1 - f_0
    const auto c3 = verify_certificate(sf, not_psd);
    CHECK(c3.constraint_ok);
    CHECK_FALSE(c3.psd_ok);

    CHECK_FALSE(verify_certificate(sf, std::vector<Matrix>(1, Matrix::Ones(2, 2))).passed());
}

TEST_CASE("derivative_from_certificate equals the directional derivative", "[certify]")
{
    const auto f = sqrt_product_fn();
    Rng rng(20);
    const auto sf = SampledFunction::from_function(f, random_points(4, 2, rng, 0.5, 2.0));
    const auto res = certify(sf);
    REQUIRE(res.certificate);
    const auto js = sf.spectrum();

    CHECK(derivative_from_certificate(*res.certificate, Direction::zero(2, 4), js).norm() == 0.0);

    for (int k = 0; k < 50; ++k) {
        const auto Delta = random_first_order_direction(js, rng, true);
        const Matrix viaA = derivative_from_certificate(*res.certificate, Delta, js);
        const Matrix direct = directional_derivative(f, js, Delta);
        CHECK((viaA - direct).norm() <= 1e-8);
        CHECK(min_eigenvalue(direct) >= -1e-8);
    }

    const auto aff = SampledFunction::from_function(affine_fn(1, 1), pts({{0, 1}, {1, 3}, {2, 0}}));
    const auto ares = certify(aff);
    REQUIRE(ares.certificate);
    const auto ajs = aff.spectrum();
    for (int k = 0; k < 10; ++k) {
        const auto Delta = random_first_order_direction(ajs, rng, true);
        const Matrix D = derivative_from_certificate(*ares.certificate, Delta, ajs);
        CHECK((D - (Delta[0] + Delta[1])).norm() < 1e-10);
        CHECK(is_psd(D, 1e-10));
    }
}

TEST_CASE("refutation_witness closed form", "[certify]")
{
    const auto sf = SampledFunction::from_function(product_fn(), pts({{1, 1}, {2, 2}}));

    const auto zero = refutation_witness(sf, RealMatrix::Zero(2, 2));
    CHECK(zero.Delta[0].norm() == 0.0);
    CHECK(zero.min_eig == 0.0);

    RealMatrix K(2, 2);
    K << 0, -1, 1, 0;
    const auto w = refutation_witness(sf, K);
    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    CHECK((w.Delta[0] - swap).norm() < 1e-15);
    CHECK((w.Delta[1] - swap).norm() < 1e-15);
    CHECK_FALSE(w.psd);
    CHECK_THAT(w.min_eig, WithinAbs(-3.0, 1e-12));

    const auto w3 = refutation_witness(sf, 2.5 * K);
    CHECK((w3.Delta[0] - 2.5 * swap).norm() < 1e-14);
    CHECK_THAT(w3.min_eig, WithinAbs(-7.5, 1e-12));

    RealMatrix notskew(2, 2);
    notskew << 0, 1, 1, 0;
    try {
        refutation_witness(sf, notskew);
        FAIL("expected NotSkewSymmetric");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotSkewSymmetric);
    }
}

TEST_CASE("certificates are sound against random PSD directions", "[certify]")
{
    const auto f = sqrt_product_fn();
    const Tolerances tol;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        Rng rng = Rng::stream(seed, 9);
        const auto sf = SampledFunction::from_function(f, random_points(5, 2, rng, 0.5, 2.0));
        const auto res = certify(sf, tol);
        REQUIRE(res.certificate);
        const auto js = sf.spectrum();
        for (int k = 0; k < 50; ++k) {
            const auto Delta = random_first_order_direction(js, rng, true);
            CHECK(witness_value(sf, Delta) >= -10 * tol.tol_psd);
        }
    }
}

TEST_CASE("refutations verify from scratch", "[certify]")
{
    const auto f = product_fn();
    int refuted = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = Rng::stream(seed, 1);
        const auto sf = SampledFunction::from_function(f, random_points(4, 2, rng, 0.1, 3.0));
        const auto res = certify(sf);
        CHECK(res.outcome != CertifyOutcome::Inconclusive);
        if (res.outcome == CertifyOutcome::Infeasible) {
            ++refuted;
            const auto chk = verify_refutation(sf, *res.refutation->witness);
            CHECK(chk.passed());
        }
        if (res.outcome == CertifyOutcome::Certified) CHECK(verify_certificate(sf, *res.certificate).passed());
    }
    CHECK(refuted > 0);
}

TEST_CASE("one-variable certification matches the Loewner matrix", "[certify]")
{
    const Tolerances tol;
    Rng rng(5);
    struct Case {
        double (*f)(double);
        double (*df)(double);
    };
    const Case cases[] = {
        {[](double x) { return -1.0 / x; }, [](double x) { return 1.0 / (x * x); }},
        {[](double x) { return std::log(x); }, [](double x) { return 1.0 / x; }},
        {[](double x) { return std::sqrt(x); }, [](double x) { return 0.5 / std::sqrt(x); }},
        {[](double x) { return x * x; }, [](double x) { return 2 * x; }},
        {[](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }},
        {[](double x) { return x * x * x; }, [](double x) { return 3 * x * x; }},
    };
    for (const auto& c : cases) {
        for (int trial = 0; trial < 4; ++trial) {
            const Index n = 2 + trial;
            std::vector<SampleNode> nodes;
            for (Index i = 0; i < n; ++i) {
                const double x = 0.2 + 0.9 * static_cast<double>(i) + rng.uniform(0.0, 0.5);
                nodes.push_back({RealVector::Constant(1, x), c.f(x), RealVector::Constant(1, c.df(x))});
            }
            const SampledFunction sf(1, nodes);
            const Matrix L = loewner_matrix_1d(sf);
            const bool psd = is_psd(L, tol.tol_psd);
            const auto res = certify(sf, tol);
            CHECK((res.outcome == CertifyOutcome::Certified) == psd);
            if (res.certificate) CHECK((res.certificate->A[0] - L).cwiseAbs().maxCoeff() <= tol.tol_residual);
            if (!psd) CHECK(res.outcome == CertifyOutcome::Infeasible);
        }
    }
}

TEST_CASE("Dykstra distances are non-increasing", "[certify]")
{
    const auto f = sqrt_product_fn();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng = Rng::stream(seed, 4);
        const auto sf = SampledFunction::from_function(f, random_points(5, 2, rng, 0.5, 2.0));
        const auto res = certify(sf);
        const auto& dist = res.distances;
        const std::size_t burn = dist.size() / 10;
        for (std::size_t k = burn + 1; k < dist.size(); ++k) CHECK(dist[k] <= dist[k - 1] + 1e-12);
    }
}

TEST_CASE("certificates are permutation equivariant", "[certify]")
{
    const auto f = sqrt_product_fn();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng = Rng::stream(seed, 5);
        const Index n = 4;
        const auto sf = SampledFunction::from_function(f, random_points(n, 2, rng, 0.5, 2.0));
        std::vector<Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Index{0});
        for (Index i = n - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)))]);
        const auto sp = sf.permuted(perm);
        const auto a = certify(sf);
        const auto b = certify(sp);
        REQUIRE(a.certificate);
        REQUIRE(b.certificate);
        CHECK(verify_certificate(sp, *b.certificate).passed());

        // permuting a's kernels gives a valid certificate for the permuted data
        std::vector<Matrix> moved;
        for (const auto& A : a.certificate->A) {
            Matrix M(n, n);
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) M(i, j) = A(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
            moved.push_back(M);
        }
        CHECK(verify_certificate(sp, moved).passed());
    }
}
