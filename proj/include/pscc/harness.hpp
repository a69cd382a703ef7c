#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <vector>

#include "pscc/autotuner.hpp"
#include "pscc/cost_selector.hpp"
#include "pscc/machine.hpp"
#include "pscc/metrics.hpp"
#include "pscc/outer_loop.hpp"
#include "pscc/predictor.hpp"
#include "pscc/scenario.hpp"
#include "pscc/vsi.hpp"

namespace pscc {

struct SampleRecord {
    double t{0.0};
    Currents ref{};
    Currents is{};
    int u_index{0};
    int u_selected{0}; // action committed for the next period
    int sc{0};         // commutations at the boundary entering this period
    double J{0.0};
    double omega{0.0};
    double omega_ref{0.0};
    WeightVector w{};
    Currents G{};
};

struct RunLog {
    std::vector<SampleRecord> samples;
    std::vector<MetricsBlock> blocks;
    bool fault{false};
    double fault_time{0.0};
};

/// Execute one scenario. Fixed per-period order: measure, correct, reference,
/// select, apply, log; tuner runs at block boundaries when adaptive.
inline RunLog run(const Scenario& sc) {
    sc.validate();
    const auto& p = sc.machine;
    const long n_samples = std::llround(sc.duration / p.Ts);
    const double block_period = sc.metrics_N * p.Ts;

    RunLog log;
    if (sc.log_samples) log.samples.reserve(static_cast<size_t>(n_samples));

    PlantState plant;
    plant.omega = sc.omega0;
    OuterLoop outer(sc.outer, p);
    MetricsAccumulator acc(sc.metrics_N, p.Ts);
    Autotuner tuner(sc.tuner, sc.weights);

    WeightVector w = sc.weights;
    double speed_ref = sc.speed_ref;
    double T_load = sc.T_load;
    VsiState u_applied{}; // null vector at start
    Currents is_pred{};   // one-step prediction made last period
    bool have_pred = false;
    Currents G_filt{};
    int sc_incoming = 0;
    long block_idx = 0;

    size_t i_wf = 0, i_speed = 0, i_load = 0, i_ref = 0;

    for (long k = 0; k < n_samples; ++k) {
        const double t = k * p.Ts;

        while (i_wf < sc.wf_steps.size() && t >= sc.wf_steps[i_wf].t)
            w = sc.wf_steps[i_wf++].w;
        while (i_speed < sc.speed_steps.size() && t >= sc.speed_steps[i_speed].t)
            speed_ref = sc.speed_steps[i_speed++].value;
        while (i_load < sc.load_steps.size() && t >= sc.load_steps[i_load].t)
            T_load = sc.load_steps[i_load++].value;
        while (i_ref < sc.ref_steps.size() && t >= sc.ref_steps[i_ref].t) {
            tuner.set_references(sc.ref_steps[i_ref].gamma2_ref, sc.ref_steps[i_ref].gamma3_ref);
            ++i_ref;
        }

        // Measure.
        Currents is_meas = plant.stator();

        // Backtracked correction.
        Currents G_raw = have_pred ? (is_meas - is_pred) : Currents{};
        if (sc.g_filter > 0.0)
            G_filt = sc.g_filter * G_filt + (1.0 - sc.g_filter) * G_raw;
        else
            G_filt = G_raw;
        CorrectionTerm corr{G_filt};

        // Outer loop references.
        const ReferenceFrame& frame = outer.step(speed_ref, plant.omega);
        plant.theta_a = outer.flux_angle();
        Currents ref_now = current_references(frame);
        ReferenceFrame frame_k2 = frame;
        frame_k2.theta_a = wrap_angle(frame.theta_a + 2.0 * frame.ref_phase_rate * p.Ts);
        Currents ref_k2 = current_references(frame_k2);

        // Inner loop: select the action for the next period.
        DiscreteModel model = build_discrete_model(plant.omega, p);
        SelectionResult sel = select(ref_k2, is_meas, u_applied, model, corr, w);

        // Metrics for this period.
        Currents e = ref_now - is_meas;
        acc.accumulate({e.al, e.be}, {e.x, e.y}, sc_incoming, frame.omega_e);

        if (sc.log_samples) {
            log.samples.push_back({t, ref_now, is_meas, u_applied.index(), sel.u_opt.index(),
                                   sc_incoming, sel.J_opt, plant.omega, speed_ref, w, G_filt});
        }

        // One-step prediction for the next period's G, then apply the
        // committed action over this period.
        is_pred = predict_one_step(is_meas, u_applied, model);
        have_pred = true;
        if (sc.perfect_model) {
            plant.is_ab = {is_pred.al, is_pred.be};
            plant.is_xy = {is_pred.x, is_pred.y};
            plant.ir_ab = {};
            plant.t = t + p.Ts;
        } else {
            auto v = state_voltages(u_applied, p.Vdc);
            try {
                plant = plant_step(plant, v.ab, v.xy, p, T_load, p.Ts, sc.plant_substeps,
                                   sc.rotor_branch);
            } catch (const std::runtime_error&) {
                log.fault = true;
                log.fault_time = t;
                return log;
            }
        }

        sc_incoming = sel.sc;
        u_applied = sel.u_opt;

        if (acc.full()) {
            MetricsBlock b = acc.finalize();
            ++block_idx;
            b.t_end = block_idx * block_period;
            b.omega = plant.omega;
            b.lambda_xy = w.lambda_xy;
            b.lambda_sc = w.lambda_sc;
            log.blocks.push_back(b);
            if (sc.adaptive) w = tuner.step(b);
        }
    }
    return log;
}

namespace stats {

/// Mean of one Gamma component over blocks [first, last).
inline double block_mean(const std::vector<MetricsBlock>& blocks, size_t first, size_t last,
                         double MetricsBlock::* field) {
    double s = 0.0;
    size_t n = 0;
    for (size_t i = first; i < last && i < blocks.size(); ++i, ++n) s += blocks[i].*field;
    return n ? s / n : 0.0;
}

inline double block_stddev(const std::vector<MetricsBlock>& blocks, size_t first, size_t last,
                           double MetricsBlock::* field) {
    double m = block_mean(blocks, first, last, field);
    double s = 0.0;
    size_t n = 0;
    for (size_t i = first; i < last && i < blocks.size(); ++i, ++n) {
        double d = blocks[i].*field - m;
        s += d * d;
    }
    return n > 1 ? std::sqrt(s / (n - 1)) : 0.0;
}

/// Spearman rank correlation (average ranks for ties).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), size_t{0});
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        size_t i = 0;
        while (i < idx.size()) {
            size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            double avg = 0.5 * (i + j) + 1.0;
            for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    double den = std::sqrt(dx * dy);
    return den > 0.0 ? num / den : 0.0;
}

} // namespace stats

struct GammaTriple {
    double gamma1{0.0};
    double gamma2{0.0};
    double gamma3{0.0};
};

struct StepWfSummary {
    GammaTriple pre{};
    GammaTriple post{};
    RunLog log{};
};

/// Number of leading blocks dropped when averaging steady-state Gammas.
inline constexpr size_t kTransientDiscardBlocks = 10;

/// Fixed-WF run with one mid-time Lambda step; block-averaged Gammas on both
/// sides of the step (transient blocks discarded on each side).
inline StepWfSummary step_wf_test(const Scenario& base, const WeightVector& pre,
                                  const WeightVector& post) {
    Scenario sc = base;
    sc.adaptive = false;
    sc.weights = pre;
    sc.wf_steps = {{sc.duration / 2.0, post}};
    RunLog log = run(sc);

    const double block_period = sc.metrics_N * sc.machine.Ts;
    size_t step_block = static_cast<size_t>((sc.duration / 2.0) / block_period);
    StepWfSummary s;
    using stats::block_mean;
    s.pre = {block_mean(log.blocks, kTransientDiscardBlocks, step_block, &MetricsBlock::gamma1),
             block_mean(log.blocks, kTransientDiscardBlocks, step_block, &MetricsBlock::gamma2),
             block_mean(log.blocks, kTransientDiscardBlocks, step_block, &MetricsBlock::gamma3)};
    size_t post_first = step_block + kTransientDiscardBlocks;
    s.post = {block_mean(log.blocks, post_first, log.blocks.size(), &MetricsBlock::gamma1),
              block_mean(log.blocks, post_first, log.blocks.size(), &MetricsBlock::gamma2),
              block_mean(log.blocks, post_first, log.blocks.size(), &MetricsBlock::gamma3)};
    s.log = std::move(log);
    return s;
}

struct ReversalSummary {
    RunLog adaptive{};
    RunLog fixed{};
    double rms_adaptive{0.0};
    double rms_fixed{0.0};
};

inline double speed_tracking_rms(const RunLog& log) {
    double s = 0.0;
    for (const auto& r : log.samples) {
        double e = r.omega_ref - r.omega;
        s += e * e;
    }
    return log.samples.empty() ? 0.0 : std::sqrt(s / log.samples.size());
}

/// Speed reversal (+omega -> -omega at mid-run), once adaptive and once with
/// fixed weights; speed PI settings identical in both runs.
inline ReversalSummary reversal_test(const Scenario& base, double omega_target) {
    if (omega_target == 0.0)
        throw ConfigError("reversal: omega_target must be nonzero");
    Scenario sc = base;
    sc.speed_ref = omega_target;
    sc.omega0 = omega_target;
    sc.speed_steps = {{sc.duration / 2.0, -omega_target}};
    sc.log_samples = true;

    ReversalSummary r;
    sc.adaptive = true;
    r.adaptive = run(sc);
    sc.adaptive = false;
    r.fixed = run(sc);
    r.rms_adaptive = speed_tracking_rms(r.adaptive);
    r.rms_fixed = speed_tracking_rms(r.fixed);
    return r;
}

struct ParetoRow {
    WeightVector w{};
    GammaTriple gamma{};
};

/// One fixed-WF steady-state run per grid point; Gammas block-averaged after
/// the transient discard. Grid points share nothing, so jobs > 1 runs them
/// concurrently; the result order is grid order either way.
inline std::vector<ParetoRow> pareto_sweep(const Scenario& base,
                                           const std::vector<double>& lambda_xy_grid,
                                           const std::vector<double>& lambda_sc_grid,
                                           int jobs = 1) {
    if (lambda_xy_grid.empty() || lambda_sc_grid.empty())
        throw ConfigError("pareto: grid must be non-empty");
    std::vector<WeightVector> points;
    for (double lsc : lambda_sc_grid)
        for (double lxy : lambda_xy_grid) points.push_back({lxy, lsc});

    auto run_point = [&base](WeightVector w) {
        Scenario sc = base;
        sc.adaptive = false;
        sc.weights = w;
        sc.wf_steps.clear();
        sc.log_samples = false;
        RunLog log = run(sc);
        using stats::block_mean;
        ParetoRow row;
        row.w = w;
        row.gamma = {
            block_mean(log.blocks, kTransientDiscardBlocks, log.blocks.size(), &MetricsBlock::gamma1),
            block_mean(log.blocks, kTransientDiscardBlocks, log.blocks.size(), &MetricsBlock::gamma2),
            block_mean(log.blocks, kTransientDiscardBlocks, log.blocks.size(), &MetricsBlock::gamma3)};
        return row;
    };

    std::vector<ParetoRow> rows(points.size());
    if (jobs <= 1) {
        for (size_t i = 0; i < points.size(); ++i) rows[i] = run_point(points[i]);
    } else {
        std::vector<std::future<ParetoRow>> futs;
        futs.reserve(points.size());
        for (auto w : points)
            futs.push_back(std::async(std::launch::async, run_point, w));
        for (size_t i = 0; i < futs.size(); ++i) rows[i] = futs[i].get();
    }
    return rows;
}

} // namespace pscc
