#include <catch_amalgamated.hpp>

#include <random>

#include "pscc/cost_selector.hpp"

using namespace pscc;
using Catch::Approx;

namespace {

struct Instance {
    Currents ref;
    Currents is;
    VsiState u_applied;
    CorrectionTerm corr;
    DiscreteModel model;
};

Instance random_instance(std::mt19937& rng, const MachineParams& p) {
    std::uniform_real_distribution<double> d(-2, 2);
    Instance in;
    in.ref = {d(rng), d(rng), 0.1 * d(rng), 0.1 * d(rng)};
    in.is = {d(rng), d(rng), 0.1 * d(rng), 0.1 * d(rng)};
    in.u_applied = VsiState::from_index(std::uniform_int_distribution<int>(0, 31)(rng));
    in.corr = {{0.01 * d(rng), 0.01 * d(rng), 0.01 * d(rng), 0.01 * d(rng)}};
    in.model = build_discrete_model(50.0 * d(rng), p);
    return in;
}

// Second, independent exhaustive pass.
SelectionResult select_oracle(const Instance& in, const WeightVector& w) {
    SelectionResult best{};
    double best_J = 1e300;
    for (int i = 0; i < 32; ++i) {
        VsiState cand = VsiState::from_index(i);
        Currents pred = predict_two_step(in.is, in.u_applied, cand, in.model, in.corr);
        double e_ab = (in.ref.al - pred.al) * (in.ref.al - pred.al) +
                      (in.ref.be - pred.be) * (in.ref.be - pred.be);
        double e_xy = (in.ref.x - pred.x) * (in.ref.x - pred.x) +
                      (in.ref.y - pred.y) * (in.ref.y - pred.y);
        int sc = switch_changes(in.u_applied, cand);
        double J = e_ab + w.lambda_xy * e_xy + w.lambda_sc * sc;
        if (J < best_J) {
            best_J = J;
            best = {cand, J, sc};
        }
    }
    return best;
}

} // namespace

TEST_CASE("cost arithmetic") {
    CHECK(cost({0, 0}, {0, 0}, 0, {0.5, 0.001}) == 0.0);
    CHECK(cost({3, 4}, {0, 0}, 0, {7.0, 0.3}) == Approx(25.0));
    CHECK(cost({0, 0}, {1, 1}, 5, {0.75, 0.0020}) == Approx(1.51));
}

TEST_CASE("huge switching weight freezes the inverter") {
    MachineParams p;
    std::mt19937 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        auto in = random_instance(rng, p);
        auto r = select(in.ref, in.is, in.u_applied, in.model, in.corr, {0.5, 1e9});
        CHECK(r.u_opt == in.u_applied);
        CHECK(r.sc == 0);
    }
}

TEST_CASE("select matches an independent exhaustive pass") {
    MachineParams p;
    std::mt19937 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto in = random_instance(rng, p);
        WeightVector w{0.5 * (trial % 10), 0.0005 * (trial % 7)};
        auto got = select(in.ref, in.is, in.u_applied, in.model, in.corr, w);
        auto want = select_oracle(in, w);
        CHECK(got.u_opt == want.u_opt);
        CHECK(got.J_opt == Approx(want.J_opt).margin(1e-12));
        CHECK(got.sc == want.sc);
    }
}

TEST_CASE("an exactly reachable reference wins") {
    MachineParams p;
    auto model = build_discrete_model(30.0, p);
    Currents is{0.5, -0.3, 0.05, 0.0};
    VsiState u_applied = VsiState::from_index(6);
    CorrectionTerm corr{};
    // Invert the predictor on a chosen candidate: set the reference to that
    // candidate's exact two-step prediction.
    VsiState winner = VsiState::from_index(19);
    Currents ref = predict_two_step(is, u_applied, winner, model, corr);
    auto r = select(ref, is, u_applied, model, corr, {0.5, 1e-9});
    CHECK(r.u_opt == winner);
    CHECK(r.J_opt < 1e-6);
}

TEST_CASE("argmin is invariant to uniform cost scaling") {
    MachineParams p;
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto in = random_instance(rng, p);
        WeightVector w{0.4, 0.002};
        auto base = select(in.ref, in.is, in.u_applied, in.model, in.corr, w);
        for (double c : {0.5, 3.0, 100.0}) {
            // scaling all three terms by c: equivalent instance has the same
            // argmin; realized by scaling lambda terms and comparing indices
            // on the unscaled quadratic term (errors can't be scaled through
            // the predictor, so check via the oracle on scaled costs).
            SelectionResult best{};
            double best_J = 1e300;
            for (int i = 0; i < 32; ++i) {
                VsiState cand = VsiState::from_index(i);
                Currents pred = predict_two_step(in.is, in.u_applied, cand, in.model, in.corr);
                Currents e = in.ref - pred;
                double J = c * (e.al * e.al + e.be * e.be) +
                           c * w.lambda_xy * (e.x * e.x + e.y * e.y) +
                           c * w.lambda_sc * switch_changes(in.u_applied, cand);
                if (J < best_J) {
                    best_J = J;
                    best = {cand, J, switch_changes(in.u_applied, cand)};
                }
            }
            CHECK(best.u_opt == base.u_opt);
        }
    }
}

TEST_CASE("ties resolve to the lower state index") {
    MachineParams p;
    auto model = build_discrete_model(0.0, p);
    // Zero state, zero reference, zero weights: both null vectors (0 and 31)
    // give identical zero-error predictions; with lambda_sc = 0 every cost of
    // a null transition ties and index 0 must win.
    auto r = select({}, {}, VsiState::from_index(31), model, {}, {0.0, 0.0});
    CHECK(r.u_opt.index() == 0);
}

TEST_CASE("raising lambda_sc never raises the selected switching count") {
    MachineParams p;
    std::mt19937 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        auto in = random_instance(rng, p);
        int prev_sc = 6;
        for (double lsc : {0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
            auto r = select(in.ref, in.is, in.u_applied, in.model, in.corr, {0.4, lsc});
            CHECK(r.sc <= prev_sc);
            prev_sc = r.sc;
        }
    }
}
