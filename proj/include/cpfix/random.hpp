#pragma once

// Random instance generators. Every generator is a pure function of its
// seed (or of the engine state handed in).

#include "cpfix/channel.hpp"
#include "cpfix/matcore.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace cpfix {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(mix_seed(seed, stream)); }

inline CMatrix random_ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(i, j) = Complex(re, im) / std::sqrt(2.0);
        }
    return g;
}

/// Haar-distributed unitary: Q from the QR factorization of a complex
/// Gaussian matrix, with the phases of diag(R) moved into Q.
inline CMatrix random_unitary(Eigen::Index d, Rng& rng) {
    const CMatrix g = random_ginibre(d, d, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix& r = qr.matrixQR();
    for (Eigen::Index k = 0; k < d; ++k) {
        const double mag = std::abs(r(k, k));
        if (mag > 0.0)
            q.col(k) *= r(k, k) / mag;
    }
    return q;
}

inline HermMatrix random_hermitian(Eigen::Index d, Rng& rng) {
    const CMatrix g = random_ginibre(d, d, rng);
    return HermMatrix::symmetrize(g + g.adjoint());
}

/// Positive semidefinite matrix with a random spectrum in [0, scale]; a
/// random rank deficiency is planted with probability 1/4.
inline HermMatrix random_psd(Eigen::Index d, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const CMatrix u = random_unitary(d, rng);
    Eigen::VectorXd spectrum(d);
    for (Eigen::Index i = 0; i < d; ++i)
        spectrum(i) = scale * unit(rng);
    if (d > 1 && unit(rng) < 0.25)
        spectrum(0) = 0.0;
    return HermMatrix::symmetrize(u * spectrum.cast<Complex>().asDiagonal() * u.adjoint());
}

inline std::vector<CMatrix> random_ginibre_family(Eigen::Index d, std::size_t n, Rng& rng) {
    std::vector<CMatrix> xs;
    for (std::size_t k = 0; k < n; ++k)
        xs.push_back(random_ginibre(d, d, rng));
    return xs;
}

/// x_k <- x_k (sum_j x_j^* x_j)^{-1/2}, giving sum x^* x = 1.
inline KrausFamily column_normalize(std::vector<CMatrix> xs) {
    CMatrix s = CMatrix::Zero(xs.front().rows(), xs.front().rows());
    for (const auto& x : xs)
        s += x.adjoint() * x;
    const CMatrix inv = psd_inv_sqrt(HermMatrix::symmetrize(s)).matrix();
    for (auto& x : xs)
        x = x * inv;
    return KrausFamily::from_operators(xs);
}

/// x_k <- x_k / sqrt(||sum_j x_j x_j^*||), giving e = sum x x^* <= 1.
inline KrausFamily row_scale(std::vector<CMatrix> xs) {
    CMatrix e = CMatrix::Zero(xs.front().rows(), xs.front().rows());
    for (const auto& x : xs)
        e += x * x.adjoint();
    const double c = 1.0 / std::sqrt(herm_norm(HermMatrix::symmetrize(e)));
    for (auto& x : xs)
        x *= c;
    return KrausFamily::from_operators(xs);
}

/// Unital family: column-normalized complex Gaussian operators.
inline KrausFamily random_unital_family(Eigen::Index d, std::size_t n, Rng& rng) {
    return column_normalize(random_ginibre_family(d, n, rng));
}

/// Family with sum x^* x <= 1: a unital family scaled by a factor in (0, 1].
inline KrausFamily random_contractive_family(Eigen::Index d, std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto ops = random_unital_family(d, n, rng).operators();
    const double c = std::sqrt(1.0 - unit(rng));  // in (0, 1]
    for (auto& x : ops)
        x *= c;
    return KrausFamily::from_operators(ops);
}

/// Family with e = sum x x^* <= 1 (usually not unital).
inline KrausFamily random_subunital_dual_family(Eigen::Index d, std::size_t n, Rng& rng) {
    return row_scale(random_ginibre_family(d, n, rng));
}

/// Mixture of n Haar unitaries with weights 1/n: unital and trace preserving.
inline KrausFamily random_bistochastic(Eigen::Index d, std::size_t n, std::uint64_t seed) {
    if (d < 1 || n < 1)
        throw PreconditionError("random_bistochastic: d and n must be positive");
    Rng rng = make_rng(seed);
    std::vector<KrausTerm> terms;
    for (std::size_t k = 0; k < n; ++k)
        terms.push_back({1.0, random_unitary(d, rng) / std::sqrt(static_cast<double>(n))});
    return KrausFamily(std::move(terms));
}

enum class SelfAdjointStrategy {
    /// Orthogonal projections p_k = u P_k u^* over a random partition of the
    /// basis; the projections commute with each other.
    Projective,
    /// Hermitian unitaries r_k = u_k diag(+-1) u_k^* with weights summing to
    /// one; exactly unital and generically non-commuting.
    Reflections,
};

/// Self-adjoint family with sum mu x^2 = 1, hence also e = 1.
inline KrausFamily random_selfadjoint_family(Eigen::Index d, std::size_t n, std::uint64_t seed,
                                             SelfAdjointStrategy strategy = SelfAdjointStrategy::Projective) {
    if (d < 1 || n < 1)
        throw PreconditionError("random_selfadjoint_family: d and n must be positive");
    Rng rng = make_rng(seed);
    std::vector<KrausTerm> terms;
    if (strategy == SelfAdjointStrategy::Projective) {
        const CMatrix u = random_unitary(d, rng);
        // every basis vector lands in some part; the first min(n, d) parts are non-empty
        std::vector<std::size_t> part(static_cast<std::size_t>(d));
        std::iota(part.begin(), part.end(), std::size_t{0});
        for (auto& p : part)
            p = p < n ? p : std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        std::shuffle(part.begin(), part.end(), rng);
        for (std::size_t k = 0; k < n; ++k) {
            Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
            for (Eigen::Index i = 0; i < d; ++i)
                if (part[static_cast<std::size_t>(i)] == k)
                    diag(i) = 1.0;
            const CMatrix p = u * diag.cast<Complex>().asDiagonal() * u.adjoint();
            terms.push_back({1.0, HermMatrix::symmetrize(p).matrix()});
        }
    } else {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> w(n);
        for (auto& x : w)
            x = 0.1 + unit(rng);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const CMatrix u = random_unitary(d, rng);
            Eigen::VectorXd signs(d);
            for (Eigen::Index i = 0; i < d; ++i)
                signs(i) = unit(rng) < 0.5 ? 1.0 : -1.0;
            const CMatrix r = u * signs.cast<Complex>().asDiagonal() * u.adjoint();
            terms.push_back({w[k] / total, HermMatrix::symmetrize(r).matrix()});
        }
    }
    return KrausFamily(std::move(terms));
}

/// x_k = h_k (sum_j h_j^2)^{-1/2}, symmetrized. Exact (Hermitian and unital)
/// only when the h_k commute with sum h_j^2, e.g. for orthogonal idempotents.
inline KrausFamily normalize_hermitian_family(const std::vector<HermMatrix>& hs) {
    if (hs.empty())
        throw PreconditionError("normalize_hermitian_family: empty family");
    CMatrix s = CMatrix::Zero(hs.front().dim(), hs.front().dim());
    for (const auto& h : hs)
        s += h.matrix() * h.matrix();
    const CMatrix inv = psd_inv_sqrt(HermMatrix::symmetrize(s)).matrix();
    std::vector<CMatrix> xs;
    for (const auto& h : hs)
        xs.push_back(HermMatrix::symmetrize(h.matrix() * inv).matrix());
    return KrausFamily::from_operators(xs);
}

}  // namespace cpfix
