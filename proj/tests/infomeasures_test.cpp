#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "structuration/infomeasures.hpp"

using namespace structuration;

namespace {

JointDistribution3 xor_joint() {
    std::vector<double> w(8, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) w[static_cast<std::size_t>((x * 2 + y) * 2 + (x ^ y))] = 1;
    return JointDistribution3::from_weights({2, 2, 2}, w);
}

JointDistribution3 copy_joint() {
    std::vector<double> w(8, 0.0);
    w[0] = w[7] = 1;
    return JointDistribution3::from_weights({2, 2, 2}, w);
}

// p(x,y) p(z) for random factors
JointDistribution3 factorized_joint(std::mt19937_64& rng, std::size_t nx, std::size_t ny, std::size_t nz) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> pxy(nx * ny), pz(nz), w;
    for (double& v : pxy) v = u(rng);
    for (double& v : pz) v = u(rng);
    for (double a : pxy)
        for (double c : pz) w.push_back(a * c);
    return JointDistribution3::from_weights({nx, ny, nz}, w);
}

// Marginal entropy over an axis subset computed with a std::map keyed by
// the kept coordinates.
double subset_entropy_oracle(const DistributionN& p, unsigned mask) {
    std::map<std::vector<std::size_t>, double> acc;
    std::vector<std::size_t> idx(p.shape.size(), 0);
    for (double v : p.probabilities) {
        std::vector<std::size_t> key;
        for (std::size_t a = 0; a < p.shape.size(); ++a)
            if (mask & (1u << a)) key.push_back(idx[a]);
        acc[key] += v;
        for (std::size_t a = p.shape.size(); a-- > 0;) {
            if (++idx[a] < p.shape[a]) break;
            idx[a] = 0;
        }
    }
    std::vector<double> vals;
    for (const auto& [k, v] : acc) vals.push_back(v);
    return oracle::plogp_sum(vals);
}

}  // namespace

TEST(Entropy, KnownValuesAndValidation) {
    const std::vector<double> uniform4(4, 0.25), point{0.0, 1.0, 0.0};
    EXPECT_DOUBLE_EQ(entropy(uniform4), 2.0);
    EXPECT_EQ(entropy(point), 0.0);
    EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5, 1e-15);
    EXPECT_THROW(entropy(std::vector<double>{}), InputError);
    EXPECT_THROW(entropy(std::vector<double>{0.5, 0.6}), InputError);
    EXPECT_THROW(entropy(std::vector<double>{1.5, -0.5}), InputError);
    EXPECT_THROW(entropy(std::vector<double>{NAN, 1.0}), InputError);
}

TEST(Transmission, MatchesDefinitionalFormula) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        RealMatrix p(2 + rng() % 5, 2 + rng() % 5);
        double total = 0;
        for (double& v : p.data()) total += (v = u(rng) < 0.3 ? 0.0 : u(rng));
        if (total == 0) continue;
        for (double& v : p.data()) v /= total;
        const double t = transmission2(p);
        EXPECT_NEAR(t, oracle::transmission_definitional(p), 1e-12);
        EXPECT_GE(t, 0.0);
    }
}

TEST(Transmission, IndependentTableHasZeroAndCopyHasFull) {
    RealMatrix ind(2, 3);
    const double px[2] = {0.3, 0.7}, py[3] = {0.2, 0.5, 0.3};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) ind(i, j) = px[i] * py[j];
    EXPECT_NEAR(transmission2(ind), 0.0, 1e-15);
    EXPECT_GE(transmission2(ind), 0.0);
    RealMatrix copy(2, 2);
    copy(0, 0) = copy(1, 1) = 0.5;
    EXPECT_DOUBLE_EQ(transmission2(copy), 1.0);
}

TEST(MuStar, AnalyticSignCases) {
    EXPECT_NEAR(mu_star3(xor_joint()), -1.0, 1e-12);
    EXPECT_NEAR(q_config(xor_joint()), 1.0, 1e-12);
    EXPECT_NEAR(mu_star3(copy_joint()), 1.0, 1e-12);
    EXPECT_NEAR(q_config(copy_joint()), -1.0, 1e-12);
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) EXPECT_NEAR(mu_star3(factorized_joint(rng, 3, 4, 5)), 0.0, 1e-12);
}

TEST(MuStar, EqualsTransmissionMinusConditionalTransmission) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = oracle::random_positive_joint(rng, 2 + rng() % 6, 2 + rng() % 6, 2 + rng() % 6);
        EXPECT_NEAR(mu_star3(p), oracle::interaction_via_conditioning(p), 1e-10);
    }
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = oracle::random_sparse_joint(rng, 6, 0.6);
        EXPECT_NEAR(mu_star3(p), oracle::interaction_via_conditioning(p), 1e-10);
    }
}

TEST(MuStar, IsSymmetricUnderAxisPermutation) {
    std::mt19937_64 rng(8);
    const auto p = oracle::random_positive_joint(rng, 3, 4, 5);
    std::vector<double> w(p.size());
    // reorder axes to (z, x, y)
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t k = 0; k < 5; ++k) w[(k * 3 + i) * 4 + j] = p(i, j, k);
    const auto q = JointDistribution3::from_weights({5, 3, 4}, w);
    EXPECT_NEAR(mu_star3(p), mu_star3(q), 1e-12);
}

TEST(Entropies, SevenTermsMatchOracleMarginals) {
    std::mt19937_64 rng(9);
    const auto p = oracle::random_positive_joint(rng, 3, 4, 2);
    const auto h = entropies3(p);
    const DistributionN n{{3, 4, 2}, p.probabilities};
    EXPECT_NEAR(h.h_x, subset_entropy_oracle(n, 0b001), 1e-13);
    EXPECT_NEAR(h.h_y, subset_entropy_oracle(n, 0b010), 1e-13);
    EXPECT_NEAR(h.h_z, subset_entropy_oracle(n, 0b100), 1e-13);
    EXPECT_NEAR(h.h_xy, subset_entropy_oracle(n, 0b011), 1e-13);
    EXPECT_NEAR(h.h_xz, subset_entropy_oracle(n, 0b101), 1e-13);
    EXPECT_NEAR(h.h_yz, subset_entropy_oracle(n, 0b110), 1e-13);
    EXPECT_NEAR(h.h_xyz, subset_entropy_oracle(n, 0b111), 1e-13);
}

TEST(MuMulti, AgreesWithLowerOrderMeasures) {
    std::mt19937_64 rng(10);
    const auto p = oracle::random_positive_joint(rng, 3, 4, 5);
    EXPECT_NEAR(mu_multi({{3, 4, 5}, p.probabilities}), mu_star3(p), 1e-12);
    RealMatrix two(3, 4);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double total = 0;
    for (double& v : two.data()) total += (v = u(rng));
    for (double& v : two.data()) v /= total;
    EXPECT_NEAR(mu_multi({{3, 4}, {two.data().begin(), two.data().end()}}), transmission2(two), 1e-12);
}

TEST(MuMulti, MatchesSubsetEnumerationOnFourAndFiveAxes) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::vector<std::size_t> shape : {std::vector<std::size_t>{2, 3, 2, 3}, {2, 2, 2, 2, 3}}) {
        std::size_t cells = 1;
        for (auto s : shape) cells *= s;
        DistributionN p{shape, std::vector<double>(cells)};
        double total = 0;
        for (double& v : p.probabilities) total += (v = u(rng));
        for (double& v : p.probabilities) v /= total;
        double expected = 0;
        for (unsigned mask = 1; mask < (1u << shape.size()); ++mask) {
            const double h = subset_entropy_oracle(p, mask);
            expected += (std::popcount(mask) % 2) ? h : -h;
        }
        EXPECT_NEAR(mu_multi(p), expected, 1e-12);
        for (unsigned mask = 1; mask < (1u << shape.size()); ++mask)
            EXPECT_NEAR(subset_entropy(p, mask), subset_entropy_oracle(p, mask), 1e-12);
    }
}

TEST(MuMulti, CopiesOfOneBitGiveOneBit) {
    for (std::size_t n = 2; n <= 6; ++n) {
        DistributionN p{std::vector<std::size_t>(n, 2), std::vector<double>(std::size_t{1} << n, 0.0)};
        p.probabilities.front() = p.probabilities.back() = 0.5;
        EXPECT_NEAR(mu_multi(p), 1.0, 1e-12) << n << " copies";
    }
}

TEST(MuMulti, RejectsBadShapes) {
    EXPECT_THROW(mu_multi({{4}, {0.25, 0.25, 0.25, 0.25}}), InputError);
    EXPECT_THROW(mu_multi({{2, 2}, {0.5, 0.5}}), InputError);
    EXPECT_THROW(mu_multi({std::vector<std::size_t>(9, 1), {1.0}}), InputError);
}

TEST(Millibits, RoundsHalfAwayFromZero) {
    EXPECT_EQ(to_millibits(0.0625), 63);
    EXPECT_EQ(to_millibits(-0.0625), -63);
    EXPECT_EQ(to_millibits(0.0004), 0);
    EXPECT_EQ(to_millibits(-1.0), -1000);
}

TEST(InfoReportText, CarriesConventionAndRegime) {
    InfoReport r;
    r.mu_star = -0.2;
    r.q = 0.2;
    r.i_ternary = 0.1;
    r.r = 0.3;
    r.n = 12;
    r.year = 2000;
    const auto text = serialize_info_report(r);
    EXPECT_NE(text.find("year=2000\n"), std::string::npos);
    EXPECT_NE(text.find("Q_mb=200\nI_mb=100\nR_mb=300\n"), std::string::npos);
    EXPECT_NE(text.find("regime=redundancy-dominated\n"), std::string::npos);
    EXPECT_NE(text.find("convention=Q = -mu*, R = I + Q\n"), std::string::npos);
    r.mu_star = 0.2;
    EXPECT_NE(serialize_info_report(r).find("regime=information-dominated"), std::string::npos);
}
