#include <catch_amalgamated.hpp>

#include <cmath>

#include "pscc/harness.hpp"

using namespace pscc;
using Catch::Approx;

namespace {

Scenario short_scenario(double duration) {
    Scenario sc;
    sc.duration = duration;
    sc.speed_ref = 50.0;
    sc.omega0 = 50.0;
    sc.weights = {0.4, 0.0020};
    return sc;
}

} // namespace

TEST_CASE("zero-duration scenario gives an empty log") {
    auto log = run(short_scenario(0.0));
    CHECK(log.samples.empty());
    CHECK(log.blocks.empty());
}

TEST_CASE("sample and block counts") {
    auto sc = short_scenario(0.25);
    auto log = run(sc);
    long expect = std::llround(0.25 / sc.machine.Ts); // 8333
    CHECK(static_cast<long>(log.samples.size()) == expect);
    CHECK(static_cast<long>(log.blocks.size()) == expect / sc.metrics_N);

    // the full-length case scaled down: a 1 s run would hold 33,333 samples
    // and 46 blocks, checked here by arithmetic on the same quantities
    CHECK(std::llround(1.0 / 30e-6) == 33333);
    CHECK(33333 / 720 == 46);
}

TEST_CASE("block timestamps advance by exactly one window") {
    auto sc = short_scenario(0.3);
    auto log = run(sc);
    REQUIRE(log.blocks.size() >= 10);
    const double period = sc.metrics_N * sc.machine.Ts;
    for (size_t i = 0; i < log.blocks.size(); ++i)
        CHECK(log.blocks[i].t_end == (i + 1) * period); // bit-exact
}

TEST_CASE("runs are deterministic") {
    auto sc = short_scenario(0.1);
    sc.adaptive = true;
    auto a = run(sc);
    auto b = run(sc);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t i = 0; i < a.samples.size(); i += 97) {
        CHECK(a.samples[i].is.al == b.samples[i].is.al);
        CHECK(a.samples[i].is.y == b.samples[i].is.y);
        CHECK(a.samples[i].u_index == b.samples[i].u_index);
        CHECK(a.samples[i].J == b.samples[i].J);
    }
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (size_t i = 0; i < a.blocks.size(); ++i) {
        CHECK(a.blocks[i].gamma1 == b.blocks[i].gamma1);
        CHECK(a.blocks[i].gamma3 == b.blocks[i].gamma3);
        CHECK(a.blocks[i].lambda_xy == b.blocks[i].lambda_xy);
    }
}

TEST_CASE("the applied action is last period's selection") {
    auto sc = short_scenario(0.05);
    auto log = run(sc);
    for (size_t k = 1; k < log.samples.size(); ++k) {
        CHECK(log.samples[k].u_index == log.samples[k - 1].u_selected);
        CHECK(log.samples[k].sc ==
              switch_changes(VsiState::from_index(log.samples[k - 1].u_index),
                             VsiState::from_index(log.samples[k].u_index)));
    }
}

TEST_CASE("weights are piecewise constant with breakpoints at block boundaries") {
    auto sc = short_scenario(0.2);
    sc.adaptive = true;
    auto log = run(sc);
    for (size_t k = 1; k < log.samples.size(); ++k) {
        bool boundary = (k % static_cast<size_t>(sc.metrics_N)) == 0;
        if (!boundary) {
            CHECK(log.samples[k].w.lambda_xy == log.samples[k - 1].w.lambda_xy);
            CHECK(log.samples[k].w.lambda_sc == log.samples[k - 1].w.lambda_sc);
        }
    }
}

TEST_CASE("scheduled WF step applies at its breakpoint only") {
    auto sc = short_scenario(0.1);
    sc.weights = {0.15, 0.0020};
    sc.wf_steps = {{0.05, {0.75, 0.0020}}};
    auto log = run(sc);
    for (const auto& s : log.samples) {
        if (s.t < 0.05)
            CHECK(s.w.lambda_xy == 0.15);
        else
            CHECK(s.w.lambda_xy == 0.75);
    }
}

TEST_CASE("reference norm equals I_star at every sample") {
    auto sc = short_scenario(0.05);
    auto log = run(sc);
    for (size_t k = 500; k < log.samples.size(); k += 31) {
        const auto& s = log.samples[k];
        double I = std::hypot(s.ref.al, s.ref.be);
        CHECK(I > 0.0);
        CHECK(s.ref.x == 0.0);
        CHECK(s.ref.y == 0.0);
    }
}

TEST_CASE("closed loop actually tracks the current reference") {
    auto sc = short_scenario(0.3);
    auto log = run(sc);
    // after the startup transient the alpha-beta RMS error must be small
    // compared with the ~1 A reference amplitude
    REQUIRE(log.blocks.size() >= 12);
    double g1 = stats::block_mean(log.blocks, 10, log.blocks.size(), &MetricsBlock::gamma1);
    CHECK(g1 < 0.25);
    double g2 = stats::block_mean(log.blocks, 10, log.blocks.size(), &MetricsBlock::gamma2);
    CHECK(g2 < 0.25);
}

TEST_CASE("perfect-model run keeps G at zero") {
    auto sc = short_scenario(0.05);
    sc.perfect_model = true;
    sc.rotor_branch = false;
    auto log = run(sc);
    for (const auto& s : log.samples) {
        CHECK(std::abs(s.G.al) < 1e-12);
        CHECK(std::abs(s.G.be) < 1e-12);
        CHECK(std::abs(s.G.x) < 1e-12);
        CHECK(std::abs(s.G.y) < 1e-12);
    }
}

TEST_CASE("reversal test rejects a zero target") {
    auto sc = short_scenario(0.1);
    CHECK_THROWS_AS(reversal_test(sc, 0.0), ConfigError);
}

TEST_CASE("pareto sweep shapes") {
    auto sc = short_scenario(0.05);
    auto rows = pareto_sweep(sc, {0.4}, {0.002});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].w.lambda_xy == 0.4);
    CHECK_THROWS_AS(pareto_sweep(sc, {}, {0.002}), ConfigError);
}

TEST_CASE("spearman rank correlation") {
    using stats::spearman;
    CHECK(spearman({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}) == Approx(1.0));
    CHECK(spearman({1, 2, 3, 4, 5}, {10, 8, 6, 4, 2}) == Approx(-1.0));
    // monotone but nonlinear is still rank-perfect
    CHECK(spearman({1, 2, 3, 4, 5}, {1, 10, 100, 1000, 10000}) == Approx(1.0));
}

TEST_CASE("identity WF step stays inside block noise") {
    auto sc = short_scenario(1.0);
    sc.log_samples = false;
    auto s = step_wf_test(sc, {0.4, 0.0020}, {0.4, 0.0020});
    double sd = stats::block_stddev(s.log.blocks, kTransientDiscardBlocks,
                                    s.log.blocks.size(), &MetricsBlock::gamma2);
    CHECK(std::abs(s.post.gamma2 - s.pre.gamma2) < 4.0 * sd + 1e-9);
}
