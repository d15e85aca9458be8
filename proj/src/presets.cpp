#include "cardiobif/presets.hpp"

#include "cardiobif/errors.hpp"

namespace cardiobif {

namespace {

ExperimentConfig base_config(ExperimentConfig::Kind kind, const std::string& name) {
    ExperimentConfig c;
    c.kind = kind;
    c.preset = name;
    c.out_dir = "out/" + name;
    return c;
}

ExperimentConfig comparison(const std::string& name, double g_ks, double g_kr,
                            double stim_a, double stim_b, double t_end,
                            bool override_k) {
    ExperimentConfig c = base_config(ExperimentConfig::Kind::single_cell, name);
    c.cell.compare = true;
    c.cell.t_end = t_end;
    c.cell.a.variant = Variant::modified;
    c.cell.a.stim = Pulse{100.0, 2.0, stim_a, 0.0};
    c.cell.b.variant = Variant::original;
    c.cell.b.stim = Pulse{100.0, 2.0, stim_b, 0.0};
    if (override_k) {
        c.cell.a.overrides = {{"G_Ks", g_ks}, {"G_Kr", g_kr}};
        c.cell.b.overrides = {{"G_Ks", g_ks}, {"G_Kr", g_kr}};
    }
    return c;
}

ExperimentConfig tissue_base(const std::string& name) {
    ExperimentConfig c = base_config(ExperimentConfig::Kind::tissue, name);
    TissueConfig& t = c.tissue;
    t.variant = Variant::original;
    t.nx = 200;
    t.ny = 200;
    t.s1 = StimulusRect{0, 0, 6, 200, 0.0, 2.0, 26.2};
    t.snapshot_dt = 50.0;
    t.pgm = true;
    c.full_overrides = {
        {"nx", "1000"}, {"ny", "1000"}, {"s1.ny", "1000"}, {"snapshot_dt", "100"}};
    return c;
}

ExperimentConfig make_preset(const std::string& name) {
    if (name == "fig2a")
        return comparison(name, 0, 0, 71.5, 52.0, 700.0, false);
    if (name == "fig2b")
        return comparison(name, 0.098, 0.0, 73.5, 52.0, 1500.0, true);
    if (name == "fig3")
        return comparison(name, 0, 0, 52.0, 52.0, 700.0, false);
    if (name == "fig5a")
        return comparison(name, 0.02505, 0.153, 73.5, 52.0, 1500.0, true);
    if (name == "fig5b")
        return comparison(name, 0.02505, 0.153, 71.5, 52.0, 1500.0, true);
    if (name == "fig5c")
        return comparison(name, 0.028, 0.153, 71.5, 52.0, 1500.0, true);
    if (name == "fig5d")
        return comparison(name, 0.04, 0.153, 71.5, 52.0, 1000.0, true);

    if (name == "fig4") {
        ExperimentConfig c = base_config(ExperimentConfig::Kind::continuation, name);
        ContinuationConfig& k = c.cont;
        k.parameter = "K_i";
        k.variant = Variant::modified;
        k.seed = 138.0;
        k.seed_b = 10.0;
        k.lambda_min = 2.0;
        k.lambda_max = 150.0;
        k.direction = -1;
        return c;
    }
    if (name == "fig6") {
        ExperimentConfig c = base_config(ExperimentConfig::Kind::continuation, name);
        ContinuationConfig& k = c.cont;
        k.parameter = "G_Kr";
        k.variant = Variant::modified;
        k.overrides = {{"G_Ks", 0.098}};
        k.seed = 0.153;
        k.lambda_min = -0.2;
        k.lambda_max = 0.25;
        k.direction = -1;
        k.cycles = true;
        k.pd_restarts = 2;
        return c;
    }
    if (name == "fig7") {
        ExperimentConfig c = base_config(ExperimentConfig::Kind::continuation, name);
        ContinuationConfig& k = c.cont;
        k.parameter = "eta";
        k.variant = Variant::modified;
        k.seed = 1.0;
        k.lambda_min = -0.05;
        k.lambda_max = 1.0;
        k.direction = -1;
        k.cycles = true;
        k.pd_restarts = 1;
        return c;
    }

    if (name == "fig8-left") {
        ExperimentConfig c = tissue_base(name);
        c.tissue.t_end = 1000.0;
        return c;
    }
    if (name == "fig8-right") {
        ExperimentConfig c = tissue_base(name);
        c.tissue.overrides = {{"G_Ks", 0.098}, {"G_Kr", 0.0}};
        c.tissue.t_end = 2000.0;
        return c;
    }
    if (name == "fig9") {
        ExperimentConfig c = tissue_base(name);
        TissueConfig& t = c.tissue;
        t.t_end = 6000.0;
        t.snapshot_dt = 100.0;
        t.s2_enabled = true;
        t.s2 = StimulusRect{0, 0, 100, 100, 340.0, 2.0, 26.2};
        t.switch_enabled = true;
        t.switch_t = 4000.0;
        t.switch_overrides = {{"G_Ks", 0.098}, {"G_Kr", 0.0}};
        c.full_overrides.emplace_back("s2.nx", "500");
        c.full_overrides.emplace_back("s2.ny", "500");
        return c;
    }
    throw DomainError("unknown preset '" + name + "'");
}

} // namespace

const std::vector<PresetInfo>& list_presets() {
    static const std::vector<PresetInfo> presets = {
        {"fig2a", "Normal action potential: modified cell at 71.5 pA/pF against "
                  "the original at 52 pA/pF."},
        {"fig2b", "Early afterdepolarisation: 75% G_Ks block with G_Kr = 0, "
                  "modified cell at 73.5 pA/pF against the original at 52."},
        {"fig3", "Uncalibrated comparison: both variants stimulated at 52 pA/pF, "
                 "showing the stimulus mismatch."},
        {"fig4", "Equilibrium continuation in the fixed potassium concentration "
                 "K_i with Hopf detection; branches seeded at 138 and 10 mM."},
        {"fig5a", "EAD trace at G_Ks = 0.02505 nS/pF, stimulus 73.5 pA/pF, "
                  "against the original model at 52."},
        {"fig5b", "Trace at G_Ks = 0.02505 nS/pF, stimulus 71.5 pA/pF, against "
                  "the original model at 52."},
        {"fig5c", "Trace at G_Ks = 0.028 nS/pF, stimulus 71.5 pA/pF, against the "
                  "original model at 52."},
        {"fig5d", "Normal AP at G_Ks = 0.04 nS/pF, stimulus 71.5 pA/pF, against "
                  "the original model at 52."},
        {"fig6", "Continuation in G_Kr with 75% G_Ks block: Hopf near -0.112 "
                 "nS/pF, then the cycle branch with torus and period-doubling "
                 "cascade."},
        {"fig7", "Continuation in the joint potassium block factor eta: Hopf "
                 "near 0.1628 with torus and period-doubling cycle events."},
        {"fig8-left", "Plane wave on the tissue grid with normal parameters: a "
                      "single passage across the domain."},
        {"fig8-right", "Plane wave with the EAD parameter set (75% G_Ks block, "
                       "G_Kr = 0): the medium re-excites behind the first wave."},
        {"fig9", "S1-S2 spiral wave with normal parameters; the parameter "
                 "settings switch to the EAD set at t = 4 s, ending in wave "
                 "death."},
    };
    return presets;
}

ExperimentConfig preset_config(const std::string& name) {
    for (const auto& info : list_presets())
        if (info.name == name) return make_preset(name);
    throw DomainError("unknown preset '" + name + "'");
}

} // namespace cardiobif
