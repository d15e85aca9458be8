#include "cardiobif/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "cardiobif/analysis.hpp"
#include "cardiobif/continuation.hpp"
#include "cardiobif/cycles.hpp"
#include "cardiobif/errors.hpp"
#include "cardiobif/newton.hpp"
#include "cardiobif/parameters.hpp"
#include "cardiobif/presets.hpp"
#include "cardiobif/tissue.hpp"
#include "cardiobif/trace_io.hpp"

namespace cardiobif {

namespace {

namespace fs = std::filesystem;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CellParameters make_params(Variant variant,
                           const std::vector<ParamOverride>& overrides) {
    CellParameters p;
    p.variant = variant;
    for (const auto& ov : overrides) set_parameter(p, ov.name, ov.value);
    return p;
}

Trace run_cell(const CellRunConfig& rc, double t_end,
               const IntegratorConfig& ic) {
    const CellParameters p = make_params(rc.variant, rc.overrides);
    StimulusProtocol protocol;
    protocol.pulses.push_back(rc.stim);
    protocol.validate(t_end);
    return simulate(p, initial_state(rc.variant), protocol, t_end, ic);
}

std::string feature_note(const std::string& id, const APFeatures& f) {
    std::ostringstream s;
    s << id << ": ap_detected=" << (f.ap_detected ? 1 : 0)
      << " ead_count=" << f.ead_count << " apd90=" << f.apd90
      << " v_peak=" << f.v_peak
      << (f.repol_failure ? " repolarisation-failure" : "");
    return s.str();
}

void run_single_cell(const ExperimentConfig& config, RunResult& result) {
    const SingleCellConfig& s = config.cell;
    const std::string dir = config.out_dir;

    const Trace a = run_cell(s.a, s.t_end, s.integrator);
    const std::string a_path =
        dir + (s.compare ? "/trace_a.csv" : "/trace.csv");
    write_trace_csv(a, a_path);
    result.artifacts.push_back(a_path);

    std::vector<std::pair<std::string, APFeatures>> rows;
    rows.emplace_back("a", ap_features(a, s.analysis));
    result.notes.push_back(feature_note("a", rows.back().second));

    if (s.compare) {
        const Trace b = run_cell(s.b, s.t_end, s.integrator);
        write_trace_csv(b, dir + "/trace_b.csv");
        result.artifacts.push_back(dir + "/trace_b.csv");
        rows.emplace_back("b", ap_features(b, s.analysis));
        result.notes.push_back(feature_note("b", rows.back().second));

        const double from = std::max(s.a.stim.start + s.a.stim.duration,
                                     s.b.stim.start + s.b.stim.duration) +
                            3.0;
        const TraceComparison cmp = compare_traces(a, b, from, 1e300, s.analysis);
        std::ofstream out(dir + "/comparison.csv");
        out << "sup_dv_mv,rms_dv_mv,d_apd90_ms,window_t0,window_t1\n"
            << fmt(cmp.sup_dV) << "," << fmt(cmp.rms_dV) << ","
            << fmt(cmp.d_apd90) << "," << fmt(cmp.t0) << "," << fmt(cmp.t1)
            << "\n";
        result.artifacts.push_back(dir + "/comparison.csv");
        result.notes.push_back("comparison: sup|dV| = " + fmt(cmp.sup_dV) +
                               " mV, d_apd90 = " + fmt(cmp.d_apd90) + " ms");
    }

    write_features_csv(rows, dir + "/features.csv");
    result.artifacts.push_back(dir + "/features.csv");
}

void run_continuation(const ExperimentConfig& config, RunResult& result) {
    const ContinuationConfig& k = config.cont;
    const std::string dir = config.out_dir;
    const CellParameters base = make_params(k.variant, k.overrides);
    const CellSystem sys(base, k.parameter);

    const auto seed_branch = [&](double seed, int direction) {
        CellParameters ps = base;
        set_parameter(ps, k.parameter, seed);
        const EquilibrateResult relaxed =
            equilibrate(ps, initial_state(k.variant), k.relax_ms);
        const std::string where = "seeding at " + k.parameter + " = " + fmt(seed);
        try {
            const EquilibriumPoint start =
                newton_equilibrium(sys, relaxed.state, seed, k.eq.newton);
            return continue_equilibria(sys, start, k.lambda_min, k.lambda_max,
                                       direction, k.eq);
        } catch (const NewtonFailure& e) {
            throw NewtonFailure(where + ": " + e.what(), e.residual, e.iters);
        } catch (const SingularJacobian& e) {
            throw SingularJacobian(where + ": " + std::string(e.what()));
        }
    };

    const auto emit_eq = [&](const EquilibriumBranch& branch,
                             const std::string& stem) {
        write_branch_csv(branch, k.variant, dir + "/" + stem + ".csv");
        write_events_csv(branch.events, dir + "/events_" + stem.substr(7) + ".csv");
        result.artifacts.push_back(dir + "/" + stem + ".csv");
        result.artifacts.push_back(dir + "/events_" + stem.substr(7) + ".csv");
        std::ostringstream note;
        note << stem << ": " << branch.points.size() << " points, "
             << branch.events.size() << " events, termination: "
             << branch.termination;
        for (const auto& ev : branch.events)
            note << "; " << ev.kind << " at " << k.parameter << " = "
                 << fmt(ev.lambda);
        result.notes.push_back(note.str());
    };

    const EquilibriumBranch branch_a = seed_branch(k.seed, k.direction);
    emit_eq(branch_a, "branch_eq");

    EquilibriumBranch branch_b;
    if (k.seed_b) {
        branch_b = seed_branch(*k.seed_b, -k.direction);
        emit_eq(branch_b, "branch_eq_b");
    }

    if (!k.cycles) return;

    const BranchEvent* hopf = nullptr;
    for (const auto& ev : branch_a.events)
        if (ev.kind == "hopf") {
            hopf = &ev;
            break;
        }
    if (!hopf)
        for (const auto& ev : branch_b.events)
            if (ev.kind == "hopf") {
                hopf = &ev;
                break;
            }
    if (!hopf) {
        result.notes.push_back(
            "no Hopf event on the equilibrium branches; cycle continuation skipped");
        return;
    }

    const auto emit_cycles = [&](const CycleBranch& branch,
                                 const std::string& stem) {
        write_cycle_branch_csv(branch, k.variant, dir + "/" + stem + ".csv");
        write_events_csv(branch.events, dir + "/events_" + stem.substr(7) + ".csv");
        result.artifacts.push_back(dir + "/" + stem + ".csv");
        result.artifacts.push_back(dir + "/events_" + stem.substr(7) + ".csv");
        std::ostringstream note;
        note << stem << ": " << branch.points.size() << " points, "
             << branch.events.size() << " events, termination: "
             << branch.termination;
        for (const auto& ev : branch.events)
            note << "; " << ev.kind << " at " << k.parameter << " = "
                 << fmt(ev.lambda);
        result.notes.push_back(note.str());
    };

    const CyclePoint first = cycle_from_hopf(sys, *hopf, k.cycle);
    CycleBranch cycle_branch = continue_cycles(sys, first, nullptr, k.lambda_min,
                                               k.lambda_max, k.cycle);
    emit_cycles(cycle_branch, "branch_cycle");

    const CycleBranch* prev = &cycle_branch;
    std::vector<CycleBranch> restarts;
    restarts.reserve(static_cast<std::size_t>(std::max(k.pd_restarts, 0)));
    for (int r = 1; r <= k.pd_restarts; ++r) {
        const CyclePoint* pd_point = nullptr;
        for (std::size_t i = 0; i < prev->events.size(); ++i)
            if (prev->events[i].kind == "period-doubling") {
                pd_point = &prev->event_points[i];
                break;
            }
        if (!pd_point) {
            result.notes.push_back("pd restart " + std::to_string(r) +
                                   ": no period-doubling event on the previous "
                                   "branch; stopping");
            break;
        }
        try {
            const CyclePoint doubled = start_doubled_cycle(sys, *pd_point, k.cycle);
            restarts.push_back(continue_cycles(sys, doubled, nullptr,
                                               k.lambda_min, k.lambda_max,
                                               k.cycle));
        } catch (const NewtonFailure& err) {
            result.notes.push_back("pd restart " + std::to_string(r) +
                                   ": branch switching failed (" + err.what() +
                                   "); known limitation of the doubled-cycle "
                                   "restart");
            break;
        }
        emit_cycles(restarts.back(), "branch_cycle_pd" + std::to_string(r));
        prev = &restarts.back();
    }
}

void run_tissue_experiment(const ExperimentConfig& config, RunResult& result) {
    const TissueConfig& t = config.tissue;
    const std::string dir = config.out_dir;
    const CellParameters p = make_params(t.variant, t.overrides);

    TissueField field(t.nx, t.ny, t.dx, t.D, p, t.dt);
    field.threads = t.threads_auto
                        ? std::max(1u, std::thread::hardware_concurrency())
                        : t.threads;

    TissueProtocol protocol;
    protocol.s1.push_back(t.s1);
    if (t.s2_enabled) protocol.s2 = t.s2;
    if (t.switch_enabled) {
        CellParameters switched = p;
        for (const auto& ov : t.switch_overrides)
            set_parameter(switched, ov.name, ov.value);
        protocol.param_switch = ParameterSwitch{t.switch_t, switched};
    }

    SnapshotOptions snaps;
    snaps.interval = t.snapshot_dt;
    snaps.pgm = t.pgm;
    if (t.snapshot_dt > 0.0) snaps.directory = dir + "/snapshots";

    const TissueSummary summary = run_tissue(field, protocol, t.t_end, snaps);
    if (!snaps.directory.empty())
        result.artifacts.push_back(snaps.directory + "/index.csv");

    long activated = 0, reexcited = 0;
    int max_crossings = 0;
    double first_act = 1e300, last_act = -1.0;
    for (std::size_t i = 0; i < summary.activation_time.size(); ++i) {
        if (summary.activation_time[i] >= 0.0) {
            ++activated;
            first_act = std::min(first_act, summary.activation_time[i]);
            last_act = std::max(last_act, summary.activation_time[i]);
        }
        reexcited += summary.zero_crossings[i] >= 2 ? 1 : 0;
        max_crossings = std::max(max_crossings, summary.zero_crossings[i]);
    }
    if (activated == 0) first_act = -1.0;

    const auto& V = field.voltage();
    const double v_max = *std::max_element(V.begin(), V.end());
    const double v_min = *std::min_element(V.begin(), V.end());

    std::ofstream out(dir + "/summary.csv");
    out << "cells,activated_cells,reexcited_cells,max_crossings,"
           "first_activation_ms,last_activation_ms,final_v_max,final_v_min\n"
        << summary.activation_time.size() << "," << activated << ","
        << reexcited << "," << max_crossings << "," << fmt(first_act) << ","
        << fmt(last_act) << "," << fmt(v_max) << "," << fmt(v_min) << "\n";
    result.artifacts.push_back(dir + "/summary.csv");

    write_snapshot(dir + "/activation.bin", field.nx(), field.ny(), field.t(),
                   summary.activation_time);
    result.artifacts.push_back(dir + "/activation.bin");

    std::ostringstream note;
    note << "tissue: " << activated << "/" << summary.activation_time.size()
         << " cells activated, " << reexcited << " re-excited, final V in ["
         << fmt(v_min) << ", " << fmt(v_max) << "] mV";
    result.notes.push_back(note.str());
}

} // namespace

RunResult run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    fs::create_directories(config.out_dir);

    RunResult result;
    const std::string manifest_path = config.out_dir + "/manifest.txt";
    {
        std::ofstream manifest(manifest_path, std::ios::binary);
        if (!manifest)
            throw DomainError("cannot write manifest '" + manifest_path + "'");
        manifest << serialize_config(config);
    }
    result.artifacts.push_back(manifest_path);

    switch (config.kind) {
    case ExperimentConfig::Kind::single_cell:
        run_single_cell(config, result);
        break;
    case ExperimentConfig::Kind::continuation:
        run_continuation(config, result);
        break;
    case ExperimentConfig::Kind::tissue:
        run_tissue_experiment(config, result);
        break;
    }
    return result;
}

} // namespace cardiobif
