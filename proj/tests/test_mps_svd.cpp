#include <gtest/gtest.h>

#include <random>

#include "waveqed/mps.hpp"

using namespace waveqed;
using namespace waveqed::mps;

namespace {

MatrixXcd random_unitary(int n, std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cd{g(rng), g(rng)};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    return q;
}

}  // namespace

TEST(SvdTruncate, IdentityKeepsFullRank) {
    MatrixXcd I = MatrixXcd::Identity(3, 3);
    const auto r = svd_truncate(I, TruncationPolicy{0.0, 8});
    EXPECT_EQ(r.s.size(), 3);
    EXPECT_NEAR(r.discarded_weight, 0.0, 1e-15);
    MatrixXcd back = r.U * r.s.asDiagonal() * r.Vh;
    EXPECT_NEAR((back - I).norm(), 0.0, 1e-13);
}

TEST(SvdTruncate, RankOneOuterProduct) {
    Eigen::VectorXcd u(4), v(3);
    u << cd{1, 0}, cd{0, 2}, cd{-1, 1}, cd{0.5, 0};
    v << cd{2, 1}, cd{0, -1}, cd{1, 0};
    MatrixXcd A = u * v.adjoint();
    const auto r = svd_truncate(A, TruncationPolicy{1e-12, 8});
    EXPECT_EQ(r.s.size(), 1);
    EXPECT_NEAR((r.U * r.s.asDiagonal() * r.Vh - A).norm(), 0.0, 1e-12);
}

TEST(SvdTruncate, RecoversPlantedSpectrum) {
    std::mt19937 rng(42);
    Eigen::VectorXd planted(8);
    planted << 3.0, 1.5, 0.7, 0.3, 0.1, 0.05, 0.01, 0.001;
    MatrixXcd A = random_unitary(8, rng) * planted.asDiagonal() *
                  random_unitary(8, rng).adjoint();
    const auto r = svd_truncate(A, TruncationPolicy{0.0, 8});
    ASSERT_EQ(r.s.size(), 8);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(r.s(i), planted(i), 1e-10);

    // truncate to four values; discarded weight is the dropped tail
    const auto t = svd_truncate(A, TruncationPolicy{0.0, 4});
    ASSERT_EQ(t.s.size(), 4);
    double tail = 0.0;
    for (int i = 4; i < 8; ++i) tail += planted(i) * planted(i);
    EXPECT_NEAR(t.discarded_weight, tail, 1e-12);
    EXPECT_NEAR((A - t.U * t.s.asDiagonal() * t.Vh).squaredNorm(), t.discarded_weight,
                1e-12);
}

TEST(SvdTruncate, RelativeCutoff) {
    std::mt19937 rng(7);
    Eigen::VectorXd planted(6);
    planted << 1.0, 0.5, 1e-4, 1e-9, 1e-13, 1e-16;
    MatrixXcd A = random_unitary(6, rng) * planted.asDiagonal() *
                  random_unitary(6, rng).adjoint();
    const auto r = svd_truncate(A, TruncationPolicy{1e-6, 64});
    EXPECT_EQ(r.s.size(), 3);
    EXPECT_EQ(r.rank_by_cutoff, 3);
}

TEST(SvdTruncate, RejectsNonFinite) {
    MatrixXcd A = MatrixXcd::Zero(2, 2);
    A(0, 0) = cd{std::nan(""), 0.0};
    EXPECT_THROW(svd_truncate(A, TruncationPolicy{}), std::invalid_argument);
}

TEST(TruncationPolicy, Validation) {
    EXPECT_THROW((TruncationPolicy{-0.1, 8}.validate(1)), std::invalid_argument);
    EXPECT_THROW((TruncationPolicy{1.0, 8}.validate(1)), std::invalid_argument);
    EXPECT_THROW((TruncationPolicy{1e-12, 2}.validate(2)), std::invalid_argument);
    EXPECT_NO_THROW((TruncationPolicy{1e-12, 3}.validate(2)));
}
