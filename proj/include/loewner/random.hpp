#pragma once

// Counter-based random streams keyed by (seed, index). Draws are produced by
// explicit formulas so a seed reproduces the same bits on every platform.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "linalg.hpp"

namespace loewner {

class Rng {
public:
    explicit Rng(std::uint64_t state) : state_(state) {}

    /// Independent stream for trial `index` of a run keyed by `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t index)
    {
        return Rng(mix(seed ^ mix(index + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next_u64()
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) // inclusive
    {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(next_u64() % span);
    }

    /// Standard normal via Box-Muller (no cached second draw, so streams stay stateless).
    double normal()
    {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    cplx complex_normal() { return cplx(normal(), normal()) / std::sqrt(2.0); }

private:
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

inline Matrix random_complex_gaussian(Index rows, Index cols, Rng& rng)
{
    Matrix G(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) G(i, j) = rng.complex_normal();
    return G;
}

/// Haar-distributed unitary: Gram-Schmidt QR of a complex Gaussian matrix,
/// with R's diagonal made positive (the phase fix).
inline Matrix random_unitary(Index n, Rng& rng)
{
    Matrix Q = random_complex_gaussian(n, n, rng);
    for (Index j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Index k = 0; k < j; ++k) Q.col(j) -= Q.col(k).dot(Q.col(j)) * Q.col(k);
        }
        Q.col(j) /= Q.col(j).norm();
    }
    return Q;
}

inline Matrix random_hermitian(Index n, Rng& rng, double scale = 1.0)
{
    const Matrix G = random_complex_gaussian(n, n, rng);
    return scale * hermitian_part(G);
}

} // namespace loewner
