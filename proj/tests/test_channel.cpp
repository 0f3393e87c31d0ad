// SPDX-License-Identifier: Apache-2.0

#include "hpl/channel.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace hpl;

TEST(ArrayResponse, BroadsideIsAllOnes) {
    const CVector a = array_response(0.0, {4, 0.5});
    for (Index n = 0; n < 4; ++n)
        EXPECT_EQ(a(n), cplx(1.0, 0.0));
}

TEST(ArrayResponse, EndfireHalfWavelengthAlternates) {
    const CVector a = array_response(kPi / 2, {2, 0.5});
    EXPECT_NEAR(std::abs(a(0) - cplx(1.0, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1) - cplx(-1.0, 0.0)), 0.0, 1e-15);
}

TEST(ArrayResponse, ThirtyDegreesQuarterTurnPerElement) {
    // sin(pi/6) = 1/2, so element n is exp(j pi n / 2)
    const CVector a = array_response(kPi / 6, {8, 0.5});
    const cplx expected[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (Index n = 0; n < 8; ++n)
        EXPECT_NEAR(std::abs(a(n) - expected[n]), 0.0, 1e-14) << "n=" << n;
}

TEST(ArrayResponse, UnitModulusEverywhere) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-kPi, kPi), sp(0.1, 2.0);
    for (int i = 0; i < 200; ++i) {
        const CVector a = array_response(ang(rng), {64, sp(rng)});
        EXPECT_EQ(a(0), cplx(1.0, 0.0));
        EXPECT_LT((a.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-14);
    }
}

TEST(ArrayResponse, RejectsBadInput) {
    EXPECT_THROW(array_response(std::nan(""), {4, 0.5}), InvalidInput);
    EXPECT_THROW(array_response(INFINITY, {4, 0.5}), InvalidInput);
    EXPECT_THROW(array_response(0.0, {0, 0.5}), InvalidInput);
    EXPECT_THROW(array_response(0.0, {4, 0.0}), InvalidInput);
}

TEST(GenerateChannel, SingleUnitBroadsidePathIsAllOnes) {
    const ChannelRealization ch = assemble_channel({PathSet{{1.0}, {0.0}}}, {6, 0.5});
    EXPECT_LT((ch.matrix - CMatrix::Ones(6, 1)).norm(), 1e-15);
}

TEST(GenerateChannel, ColumnsMatchPathSum) {
    RandomStream rng(11);
    const ArrayGeometry geom{16, 0.5};
    const ChannelRealization ch = generate_channel(geom, 3, 5, rng);
    ASSERT_EQ(ch.per_user_paths.size(), 3u);
    for (Index k = 0; k < 3; ++k) {
        const PathSet& p = ch.per_user_paths[static_cast<std::size_t>(k)];
        ASSERT_EQ(p.size(), 5u);
        for (Index n = 0; n < 16; ++n) {
            cplx acc = 0.0;
            for (std::size_t l = 0; l < p.size(); ++l) {
                EXPECT_GE(p.angles[l], -kPi);
                EXPECT_LE(p.angles[l], kPi);
                acc += p.gains[l] * std::exp(cplx(0.0, 2.0 * kPi * 0.5 * n * std::sin(p.angles[l])));
            }
            EXPECT_NEAR(std::abs(ch.matrix(n, k) - acc / std::sqrt(5.0)), 0.0, 1e-12);
        }
    }
}

TEST(GenerateChannel, MeanColumnEnergyEqualsAntennaCount) {
    RandomStream rng(2024);
    const ArrayGeometry geom{32, 0.5};
    double total = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t)
        total += generate_channel(geom, 4, 4, rng).matrix.colwise().squaredNorm().mean();
    EXPECT_NEAR(total / trials, 32.0, 0.05 * 32.0);
}

TEST(GenerateChannel, SameSeedSameChannel) {
    RandomStream a = trial_stream(77, 5), b = trial_stream(77, 5), c = trial_stream(77, 6);
    const ArrayGeometry geom{32, 0.5};
    const CMatrix ha = generate_channel(geom, 4, 4, a).matrix;
    EXPECT_EQ(ha, generate_channel(geom, 4, 4, b).matrix);
    EXPECT_NE(ha, generate_channel(geom, 4, 4, c).matrix);
}

TEST(GenerateChannel, LinearInGains) {
    RandomStream rng(5);
    const ArrayGeometry geom{12, 0.5};
    const ChannelRealization ch = generate_channel(geom, 2, 3, rng);
    const cplx scale(0.3, -1.7);
    std::vector<PathSet> scaled = ch.per_user_paths;
    for (auto& p : scaled)
        for (auto& g : p.gains)
            g *= scale;
    const ChannelRealization ch2 = assemble_channel(scaled, geom);
    EXPECT_LT((ch2.matrix - scale * ch.matrix).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GenerateChannel, RankBoundedByDimensions) {
    RandomStream rng(8);
    for (auto [n, k, l] : {std::tuple{32, 4, 1}, {2, 4, 3}, {16, 6, 2}, {8, 3, 1}}) {
        const CMatrix h = generate_channel({n, 0.5}, k, l, rng).matrix;
        const RVector sv = oracle::singular_values(h);
        const Index rank = (sv.array() > 1e-10 * sv(0)).count();
        EXPECT_LE(rank, std::min({Index(n), Index(k), Index(l) * k}));
    }
}

TEST(GenerateChannel, RejectsBadDimensions) {
    RandomStream rng(1);
    EXPECT_THROW(generate_channel({4, 0.5}, 0, 1, rng), InvalidInput);
    EXPECT_THROW(generate_channel({4, 0.5}, 1, 0, rng), InvalidInput);
}

TEST(SampleCovariance, BasisVectorOuterProducts) {
    ChannelRealization e1, e2;
    e1.matrix = CMatrix::Zero(2, 1);
    e1.matrix(0, 0) = 1.0;
    e2.matrix = CMatrix::Zero(2, 1);
    e2.matrix(1, 0) = 1.0;

    const std::vector<ChannelRealization> one{e1};
    CMatrix expected = CMatrix::Zero(2, 2);
    expected(0, 0) = 1.0;
    EXPECT_LT((sample_covariance(one).matrix - expected).norm(), 1e-15);

    const std::vector<ChannelRealization> two{e1, e2};
    const CovarianceEstimate r = sample_covariance(two);
    EXPECT_EQ(r.sample_count, 2);
    EXPECT_LT((r.matrix - 0.5 * CMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(SampleCovariance, CopiesOfOneChannelGiveOuterProduct) {
    RandomStream rng(9);
    const ChannelRealization ch = generate_channel({10, 0.5}, 3, 2, rng);
    const std::vector<ChannelRealization> copies(7, ch);
    const CMatrix expected = oracle::product(ch.matrix, oracle::adjoint(ch.matrix));
    EXPECT_LT((sample_covariance(copies).matrix - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SampleCovariance, HermitianPsdAndRankBounded) {
    RandomStream rng(10);
    const ArrayGeometry geom{24, 0.5};
    std::vector<ChannelRealization> samples;
    for (int i = 0; i < 3; ++i)
        samples.push_back(generate_channel(geom, 2, 6, rng));
    const CovarianceEstimate r = sample_covariance(samples);
    EXPECT_LE((r.matrix - r.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(r.matrix);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    const RVector& ev = eig.eigenvalues();
    EXPECT_LE((ev.array() > 1e-10 * ev.maxCoeff()).count(), std::min<Index>(24, 3 * 2));
}

TEST(SampleCovariance, ConvergesToAnalyticCovariance) {
    // fixed angles, fresh gains: error against A diag(1/L) A^H should shrink with T_s
    const ArrayGeometry geom{16, 0.5};
    RandomStream rng(12);
    const auto angles = draw_angles(3, 2, rng);
    const CMatrix truth = analytic_covariance(angles, geom).matrix;

    std::vector<double> errors;
    for (int ts : {10, 100, 1000, 10000}) {
        std::vector<double> per_rep;
        for (int rep = 0; rep < 9; ++rep) {
            RandomStream s = trial_stream(static_cast<std::uint64_t>(ts), static_cast<std::uint64_t>(rep));
            std::vector<ChannelRealization> samples;
            for (int i = 0; i < ts; ++i)
                samples.push_back(channel_with_angles(angles, geom, s));
            per_rep.push_back((sample_covariance(samples).matrix - truth).norm() / truth.norm());
        }
        errors.push_back(oracle::median(per_rep));
    }
    for (std::size_t i = 1; i < errors.size(); ++i)
        EXPECT_LT(errors[i], errors[i - 1]);
    EXPECT_LT(errors.back(), 0.05);
}

TEST(SampleCovariance, RejectsEmptyAndMismatched) {
    EXPECT_THROW(sample_covariance(std::span<const ChannelRealization>{}), InvalidInput);
    RandomStream rng(1);
    const std::vector<ChannelRealization> mixed{generate_channel({4, 0.5}, 1, 1, rng),
                                                generate_channel({5, 0.5}, 1, 1, rng)};
    EXPECT_THROW(sample_covariance(mixed), InvalidInput);
}

TEST(PathSet, RejectsMalformedPaths) {
    EXPECT_THROW((PathSet{{1.0, 2.0}, {0.0}}.validate()), InvalidInput);
    EXPECT_THROW((PathSet{{}, {}}.validate()), InvalidInput);
    EXPECT_THROW((PathSet{{1.0}, {4.0}}.validate()), InvalidInput);
}
