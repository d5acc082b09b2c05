#include <smartwalk/oracle.hpp>
#include <smartwalk/teleport.hpp>

#include <random_graphs.hpp>

#include <gtest/gtest.h>

namespace sw = smartwalk;
namespace oracle = smartwalk::oracle;
using namespace sw::testing;

namespace {

sw::TeleportConfig config(sw::Target t, sw::Recording r, double alpha) {
    sw::TeleportConfig c;
    c.alpha = alpha;
    c.target = t;
    c.recording = r;
    return c;
}

TEST(Dense, SingleLink) {
    const std::vector<double> v{0.5, 0.5};
    const auto pi = oracle::dense_stationary(single_link(), v, 0.85);
    EXPECT_NEAR(pi[0], 0.350877, 1e-6);
    EXPECT_NEAR(pi[1], 0.649123, 1e-6);
}

TEST(Dense, AlphaZeroReturnsPreference) {
    const sw::Graph g = random_graph(15, 0.2, 9);
    const auto v = sw::preference_vector(g, sw::Preference::out_strength);
    EXPECT_LT(l1_distance(oracle::dense_stationary(g, v, 0.0), v), 1e-14);
}

TEST(Dense, TwoCycle) {
    const std::vector<double> v{0.5, 0.5};
    const auto pi = oracle::dense_stationary(two_cycle(), v, 0.85);
    EXPECT_NEAR(pi[0], 0.5, 1e-14);
}

TEST(Dense, ColumnsAreStochastic) {
    const sw::Graph g = random_graph(25, 0.15, 2);
    const auto v = sw::preference_vector(g, sw::Preference::uniform);
    const auto sys = oracle::build_dense_system(g, v, 0.5);
    for (Eigen::Index j = 0; j < sys.t_prime.cols(); ++j) EXPECT_NEAR(sys.t_prime.col(j).sum(), 1.0, 1e-12);
}

TEST(Dense, SizeCap) {
    const sw::Graph g = random_graph(20, 0.1, 1);
    const auto v = sw::preference_vector(g, sw::Preference::uniform);
    EXPECT_THROW(oracle::dense_stationary(g, v, 0.5, 10), std::length_error);
}

TEST(Taylor, OrderZeroIsPreference) {
    const sw::Graph g = random_graph(15, 0.2, 4);
    const auto v = sw::preference_vector(g, sw::Preference::uniform);
    const auto t = oracle::taylor_stationary(g, v, 0.85, 0);
    EXPECT_EQ(t.pi, v);
    EXPECT_DOUBLE_EQ(t.error_bound, 2 * 0.85 / 0.15);
}

TEST(Taylor, EulerianLinkTermsVanish) {
    const sw::Graph g = eulerian(20, 5, 3);
    const auto v = sw::preference_vector(g, sw::Preference::in_strength);
    for (std::size_t k : {1, 2, 5, 20}) {
        EXPECT_LT(l1_distance(oracle::taylor_stationary(g, v, 0.85, k).pi, v), 1e-12);
    }
}

TEST(Taylor, ConvergesToDense) {
    const sw::Graph g = strongly_connected(10, 0.2, 11);
    const auto v = sw::preference_vector(g, sw::Preference::uniform);
    const auto t = oracle::taylor_stationary(g, v, 0.85, 200);
    EXPECT_LT(l1_distance(t.pi, oracle::dense_stationary(g, v, 0.85)), 1e-10);
}

class TaylorBound : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(TaylorBound, ActualErrorWithinBound) {
    const sw::Graph g = random_graph(30, 0.1, GetParam());
    for (sw::Preference p : {sw::Preference::uniform, sw::Preference::in_strength, sw::Preference::out_strength}) {
        const auto v = sw::preference_vector(g, p);
        for (double a : {0.05, 0.5, 0.85, 0.99}) {
            const auto exact = oracle::dense_stationary(g, v, a);
            for (std::size_t k : {0, 1, 3, 10, 50}) {
                const auto t = oracle::taylor_stationary(g, v, a, k);
                EXPECT_LE(l1_distance(t.pi, exact), t.error_bound + 1e-12);
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, TaylorBound, ::testing::Range<std::uint64_t>(1, 6));

TEST(Walker, TwoCycle) {
    const auto est = oracle::simulate_walker(two_cycle(), config(sw::Target::node, sw::Recording::recorded, 0.85),
                                             1'000'000, 5);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_LE(std::abs(est.frequency[i] - 0.5), 3 * est.standard_error[i] + 1e-12);
    }
    EXPECT_EQ(est.counted_steps, est.steps);
}

TEST(Walker, LeafNeverVisitedUnderLinkTeleportation) {
    const auto est = oracle::simulate_walker(single_link(), config(sw::Target::link, sw::Recording::recorded, 0.85),
                                             1'000'000, 6);
    EXPECT_EQ(est.frequency[0], 0.0);
    EXPECT_EQ(est.frequency[1], 1.0);
}

TEST(Walker, UnrecordedLinkMatchesClosedForm) {
    const sw::Graph g = random_graph(20, 0.2, 21);
    const auto cfg = config(sw::Target::link, sw::Recording::unrecorded, 0.85);
    const auto exact = sw::stationary(g, cfg);
    const auto est = oracle::simulate_walker(g, cfg, 10'000'000, 7);
    EXPECT_LT(est.counted_steps, est.steps);
    std::size_t within = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        within += std::abs(est.frequency[i] - exact[i]) <= 3 * est.standard_error[i] + 1e-12;
    }
    EXPECT_GE(within, 19u);
}

TEST(Walker, DeterministicGivenSeed) {
    const sw::Graph g = random_graph(10, 0.3, 8);
    const auto cfg = config(sw::Target::node, sw::Recording::unrecorded, 0.5);
    const auto a = oracle::simulate_walker(g, cfg, 10'000, 3);
    const auto b = oracle::simulate_walker(g, cfg, 10'000, 3);
    EXPECT_EQ(a.frequency, b.frequency);
    EXPECT_THROW(oracle::simulate_walker(g, cfg, 10, 3, 100), std::invalid_argument);
}

}  // namespace
