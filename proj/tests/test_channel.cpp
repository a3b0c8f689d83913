#include "cpfix/algebra.hpp"
#include "cpfix/channel.hpp"
#include "cpfix/random.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace cpfix;
using namespace cpfix::test;

namespace {

std::vector<std::pair<double, oracle::Dense>> oracle_family(const KrausFamily& k) {
    std::vector<std::pair<double, oracle::Dense>> out;
    for (const auto& t : k.terms())
        out.emplace_back(t.weight, oracle::from(t.op));
    return out;
}

KrausFamily random_weighted_family(Eigen::Index d, std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> w(0.1, 2.0);
    std::vector<KrausTerm> terms;
    for (std::size_t t = 0; t < n; ++t)
        terms.push_back({w(rng), random_ginibre(d, d, rng)});
    return KrausFamily(std::move(terms));
}

}  // namespace

TEST(KrausFamily, Validation) {
    EXPECT_THROW(KrausFamily(std::vector<KrausTerm>{}), PreconditionError);
    EXPECT_THROW(KrausFamily({{-1.0, e11()}}), PreconditionError);
    EXPECT_THROW(KrausFamily({{0.0, e11()}}), PreconditionError);
    EXPECT_THROW(KrausFamily({{1.0, e11()}, {1.0, CMatrix::Identity(3, 3)}}), DimensionError);
    const KrausFamily k({{4.0, e11()}});
    EXPECT_LT(dist(k.scaled()[0], 2.0 * e11()), 1e-15);
}

TEST(ApplyMap, Examples) {
    Rng rng = make_rng(1);
    const CMatrix a = random_ginibre(3, 3, rng);
    EXPECT_LT(dist(apply_map(identity_channel(3), a), a), 1e-14);
    EXPECT_LT(dist(apply_map(lueders_qubit(), mat2(1, 2, 2, 3)), diag({1, 3})), 1e-15);
    const KrausFamily shift({{1.0, e12()}});
    const CMatrix out = apply_map(shift, e11());
    EXPECT_LT(oracle::max_abs_diff(oracle::from(out), oracle::apply_map(oracle_family(shift), oracle::from(e11()))),
              1e-15);
    EXPECT_LT(dist(out, e22()), 1e-15);
    EXPECT_THROW(apply_map(shift, CMatrix::Identity(3, 3)), DimensionError);
}

TEST(ApplyMap, MatchesLoopOracleOnWeightedFamilies) {
    Rng rng = make_rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const auto d = static_cast<Eigen::Index>(1 + trial % 5);
        const auto k = random_weighted_family(d, 1 + static_cast<std::size_t>(trial % 3), rng);
        const CMatrix a = random_ginibre(d, d, rng);
        const auto expected = oracle::apply_map(oracle_family(k), oracle::from(a));
        EXPECT_LT(oracle::max_abs_diff(oracle::from(apply_map(k, a)), expected), 1e-12);
    }
}

TEST(DualApply, Examples) {
    Rng rng = make_rng(3);
    const CMatrix a = random_ginibre(2, 2, rng);
    EXPECT_LT(dist(dual_apply(identity_channel(2), a), a), 1e-14);
    EXPECT_LT(dist(dual_apply(KrausFamily({{1.0, e12()}}), CMatrix::Identity(2, 2)), e11()), 1e-15);
    for (int trial = 0; trial < 20; ++trial) {
        const auto k = random_weighted_family(3, 2, rng);
        EXPECT_LT(op_norm(dual_apply(k, CMatrix::Identity(3, 3)) - normalization_report(k).rowSum.matrix()), 1e-12);
    }
}

TEST(ChannelProperties, AdjointCovarianceAndTraceDuality) {
    Rng rng = make_rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = static_cast<Eigen::Index>(1 + trial % 4);
        const auto k = random_unital_family(d, 2, rng);
        const CMatrix a = random_ginibre(d, d, rng), b = random_ginibre(d, d, rng);
        EXPECT_LE(op_norm(apply_map(k, CMatrix(a.adjoint())) - apply_map(k, a).adjoint()), 1e-12);
        const Complex lhs = (apply_map(k, a) * b).trace();
        const Complex rhs = (a * dual_apply(k, b)).trace();
        EXPECT_LE(std::abs(lhs - rhs), 1e-10);
    }
}

TEST(NormalizationReport, LuedersQubit) {
    const auto r = normalization_report(lueders_qubit());
    EXPECT_TRUE(r.isUnital);
    EXPECT_TRUE(r.isSubunitalDual);
    EXPECT_TRUE(r.isTracePreserving);
    EXPECT_TRUE(r.selfAdjointFamily);
    EXPECT_TRUE(r.rigidityHolds);
}

TEST(NormalizationReport, ScaledIdentityIsNotUnital) {
    const auto r = normalization_report(KrausFamily({{1.0, CMatrix::Identity(2, 2) / std::sqrt(2.0)}}));
    EXPECT_LT(dist(r.columnSum.matrix(), CMatrix::Identity(2, 2) / 2.0), 1e-15);
    EXPECT_FALSE(r.isUnital);
}

TEST(NormalizationReport, UnitalButDualNotSubunital) {
    const KrausFamily k({{1.0, e12()}, {1.0, e11()}});
    const auto r = normalization_report(k);
    // e12^* e12 + e11^* e11 = e22 + e11; e12 e12^* + e11 e11^* = 2 e11
    const auto fam = oracle_family(k);
    oracle::Dense col = oracle::zeros(2, 2), row = oracle::zeros(2, 2);
    for (const auto& [w, x] : fam) {
        col = oracle::add(col, oracle::mul(oracle::adjoint(x), x), w);
        row = oracle::add(row, oracle::mul(x, oracle::adjoint(x)), w);
    }
    EXPECT_LT(oracle::max_abs_diff(oracle::from(r.columnSum.matrix()), col), 1e-15);
    EXPECT_LT(oracle::max_abs_diff(oracle::from(r.rowSum.matrix()), row), 1e-15);
    EXPECT_LT(dist(r.rowSum.matrix(), 2.0 * e11()), 1e-15);
    EXPECT_TRUE(r.isUnital);
    EXPECT_FALSE(r.isSubunitalDual);
    EXPECT_FALSE(r.isTracePreserving);
    EXPECT_TRUE(r.rigidityHolds);
}

TEST(NormalizationReport, RigidityOnBistochasticFamilies) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto k = random_bistochastic(2 + static_cast<Eigen::Index>(seed % 3), 1 + seed % 4, seed);
        const auto r = normalization_report(k);
        ASSERT_TRUE(r.isUnital && r.isSubunitalDual);
        EXPECT_TRUE(r.rigidityHolds);
        EXPECT_LE(r.rowResidual, 10 * ToleranceConfig{}.eqTol);
    }
}

TEST(Superoperator, Examples) {
    EXPECT_LT(dist(superoperator_matrix(identity_channel(3)).matrix, CMatrix::Identity(9, 9)), 1e-15);
    const CMatrix expected = diag({1, 0, 0, 1});  // e11 kron e11 + e22 kron e22
    EXPECT_LT(dist(superoperator_matrix(lueders_qubit()).matrix, expected), 1e-15);
    EXPECT_LT(dist(kron(e11(), e11()) + kron(e22(), e22()), expected), 1e-15);
}

TEST(Superoperator, AgreesWithApplyMap) {
    Rng rng = make_rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = static_cast<Eigen::Index>(1 + trial % 5);
        const auto k = random_weighted_family(d, 3, rng);
        const CMatrix a = random_ginibre(d, d, rng);
        EXPECT_LE((vec(apply_map(k, a)) - superoperator_matrix(k).matrix * vec(a)).norm(), 1e-10);
    }
}

TEST(Superoperator, RejectsBadShape) {
    EXPECT_THROW(Superoperator(2, CMatrix::Zero(3, 3)), PreconditionError);
}

TEST(Choi, KrausFamiliesAreCompletelyPositive) {
    Rng rng = make_rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const auto k = random_weighted_family(1 + trial % 4, 2, rng);
        const auto c = choi_psd_check(superoperator_matrix(k));
        EXPECT_TRUE(c.completelyPositive);
        EXPECT_GE(c.minEig, -1e-10);
    }
}

TEST(Choi, TransposeIsNotCompletelyPositive) {
    // vec(a^T) = swap * vec(a) on M_2
    CMatrix swap = CMatrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            swap(j + 2 * i, i + 2 * j) = 1.0;
    const Superoperator s(2, swap);
    Rng rng = make_rng(1);
    const CMatrix a = random_ginibre(2, 2, rng);
    ASSERT_LT(dist(s.apply(a), a.transpose()), 1e-15);
    const auto c = choi_psd_check(s);
    EXPECT_FALSE(c.completelyPositive);
    EXPECT_NEAR(c.minEig, -1.0, 1e-14);
}

TEST(Choi, IdentityChannelHasRankOne) {
    const auto c = choi_psd_check(superoperator_matrix(identity_channel(2)));
    EXPECT_TRUE(c.completelyPositive);
    EXPECT_EQ(oracle::rank(oracle::from(c.choi)), 1u);
}

TEST(FixedSpace, IdentityChannel) {
    const auto f = fixed_space_basis(identity_channel(2));
    EXPECT_EQ(f.dimension, 4);
    EXPECT_FALSE(f.nonUnitalWarning);
}

TEST(FixedSpace, LuedersQubit) {
    const auto f = fixed_space_basis(lueders_qubit());
    ASSERT_EQ(f.dimension, 2);
    const auto basis = f.matrices();
    EXPECT_LT(span_residual(e11(), basis), 1e-12);
    EXPECT_LT(span_residual(e22(), basis), 1e-12);
}

TEST(FixedSpace, SigmaXMixture) {
    const auto f = fixed_space_basis(sigma_x_mixture());
    ASSERT_EQ(f.dimension, 2);
    const auto basis = f.matrices();
    EXPECT_LT(span_residual(CMatrix::Identity(2, 2) / std::sqrt(2.0), basis), 1e-12);
    EXPECT_LT(span_residual(sigma_x() / std::sqrt(2.0), basis), 1e-12);
}

TEST(FixedSpace, BasisIsHermitianOrthonormalAndFixed) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto k = random_selfadjoint_family(4, 2, seed);
        const auto f = fixed_space_basis(k);
        EXPECT_FALSE(f.dimensionMismatch);
        for (std::size_t i = 0; i < f.hermBasis.size(); ++i) {
            const CMatrix& b = f.hermBasis[i].matrix();
            EXPECT_LE(f.residuals[i], 1e-9);
            EXPECT_NEAR(b.norm(), 1.0, 1e-10);
            for (std::size_t j = 0; j < i; ++j)
                EXPECT_LE(std::abs(hs_inner(b, f.hermBasis[j].matrix())), 1e-10);
        }
    }
}

TEST(FixedSpace, WarnsForNonUnitalChannel) {
    const auto f = fixed_space_basis(KrausFamily({{1.0, CMatrix::Identity(2, 2) / std::sqrt(2.0)}}));
    EXPECT_TRUE(f.nonUnitalWarning);
    EXPECT_EQ(f.dimension, 0);
}

TEST(FixedSpace, ContainsCommutantForUnitalFamilies) {
    Rng rng = make_rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto k = random_unital_family(3, 2, rng);
        for (const auto& b : commutant_basis(k).elements)
            EXPECT_LE(op_norm(apply_map(k, b) - b), 1e-9);
    }
}
