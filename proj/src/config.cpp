#include "cardiobif/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cardiobif/errors.hpp"
#include "cardiobif/parameters.hpp"

namespace cardiobif {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + value + "'");
    }
}

int to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int x = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

Variant to_variant(const std::string& key, const std::string& value) {
    if (value == "original") return Variant::original;
    if (value == "modified") return Variant::modified;
    throw ConfigError(key + ": expected original or modified, got '" + value + "'");
}

bool starts_with(const std::string& s, const char* prefix) {
    return s.rfind(prefix, 0) == 0;
}

void require_kind(const std::string& key, ExperimentConfig::Kind want,
                  ExperimentConfig::Kind have) {
    if (want == have) return;
    const char* name = want == ExperimentConfig::Kind::single_cell ? "single-cell"
                       : want == ExperimentConfig::Kind::continuation
                           ? "continuation"
                           : "tissue";
    throw ConfigError(key + ": only valid for kind = " + name);
}

void apply_stim(const std::string& key, const std::string& field,
                const std::string& value, Pulse& stim) {
    if (field == "start")
        stim.start = to_double(key, value);
    else if (field == "duration")
        stim.duration = to_double(key, value);
    else if (field == "amplitude")
        stim.amplitude = to_double(key, value);
    else if (field == "period")
        stim.period = to_double(key, value);
    else
        throw ConfigError(key + ": unknown key");
}

void apply_rect(const std::string& key, const std::string& field,
                const std::string& value, StimulusRect& rect) {
    if (field == "x0")
        rect.x0 = to_int(key, value);
    else if (field == "y0")
        rect.y0 = to_int(key, value);
    else if (field == "nx")
        rect.nx = to_int(key, value);
    else if (field == "ny")
        rect.ny = to_int(key, value);
    else if (field == "start")
        rect.t_start = to_double(key, value);
    else if (field == "duration")
        rect.duration = to_double(key, value);
    else if (field == "amplitude")
        rect.amplitude = to_double(key, value);
    else
        throw ConfigError(key + ": unknown key");
}

void apply_tissue_key(ExperimentConfig& c, const std::string& key,
                      const std::string& sub, const std::string& value) {
    TissueConfig& t = c.tissue;
    if (sub == "scale") {
        if (value != "desk" && value != "full")
            throw ConfigError(key + ": expected desk or full, got '" + value + "'");
        c.scale = value;
    } else if (sub == "nx")
        t.nx = to_int(key, value);
    else if (sub == "ny")
        t.ny = to_int(key, value);
    else if (sub == "dx")
        t.dx = to_double(key, value);
    else if (sub == "D")
        t.D = to_double(key, value);
    else if (sub == "dt")
        t.dt = to_double(key, value);
    else if (sub == "t_end")
        t.t_end = to_double(key, value);
    else if (sub == "threads") {
        if (value == "auto") {
            t.threads_auto = true;
            t.threads = 0;
        } else {
            t.threads_auto = false;
            t.threads = to_int(key, value);
        }
    } else if (sub == "snapshot_dt")
        t.snapshot_dt = to_double(key, value);
    else if (sub == "pgm")
        t.pgm = to_bool(key, value);
    else if (starts_with(sub, "s1."))
        apply_rect(key, sub.substr(3), value, t.s1);
    else if (sub == "s2.enabled")
        t.s2_enabled = to_bool(key, value);
    else if (starts_with(sub, "s2."))
        apply_rect(key, sub.substr(3), value, t.s2);
    else if (sub == "switch.enabled")
        t.switch_enabled = to_bool(key, value);
    else if (sub == "switch.t")
        t.switch_t = to_double(key, value);
    else if (starts_with(sub, "switch.param."))
        t.switch_overrides.push_back({sub.substr(13), to_double(key, value)});
    else
        throw ConfigError(key + ": unknown key");
}

void apply_key(ExperimentConfig& c, const std::string& key,
               const std::string& value) {
    using Kind = ExperimentConfig::Kind;
    if (key == "kind") return; // handled by the pre-scan
    if (key == "preset") {
        c.preset = value;
        return;
    }
    if (key == "out") {
        c.out_dir = value;
        return;
    }

    if (key == "variant") {
        const Variant v = to_variant(key, value);
        if (c.kind == Kind::single_cell)
            c.cell.a.variant = v;
        else if (c.kind == Kind::continuation)
            c.cont.variant = v;
        else
            c.tissue.variant = v;
        return;
    }
    if (starts_with(key, "param.")) {
        const ParamOverride ov{key.substr(6), to_double(key, value)};
        if (c.kind == Kind::single_cell)
            c.cell.a.overrides.push_back(ov);
        else if (c.kind == Kind::continuation)
            c.cont.overrides.push_back(ov);
        else
            c.tissue.overrides.push_back(ov);
        return;
    }

    if (starts_with(key, "stim.")) {
        require_kind(key, Kind::single_cell, c.kind);
        apply_stim(key, key.substr(5), value, c.cell.a.stim);
        return;
    }
    if (key == "compare") {
        require_kind(key, Kind::single_cell, c.kind);
        c.cell.compare = to_bool(key, value);
        return;
    }
    if (key == "b.variant") {
        require_kind(key, Kind::single_cell, c.kind);
        c.cell.b.variant = to_variant(key, value);
        return;
    }
    if (starts_with(key, "b.param.")) {
        require_kind(key, Kind::single_cell, c.kind);
        c.cell.b.overrides.push_back({key.substr(8), to_double(key, value)});
        return;
    }
    if (starts_with(key, "b.stim.")) {
        require_kind(key, Kind::single_cell, c.kind);
        apply_stim(key, key.substr(7), value, c.cell.b.stim);
        return;
    }
    if (starts_with(key, "cell.")) {
        require_kind(key, Kind::single_cell, c.kind);
        const std::string sub = key.substr(5);
        IntegratorConfig& ic = c.cell.integrator;
        if (sub == "t_end")
            c.cell.t_end = to_double(key, value);
        else if (sub == "method") {
            if (value == "rl")
                ic.method = Method::rush_larsen_euler;
            else if (value == "rk45")
                ic.method = Method::adaptive_rk;
            else
                throw ConfigError(key + ": expected rl or rk45, got '" + value + "'");
        } else if (sub == "dt")
            ic.dt = to_double(key, value);
        else if (sub == "output_stride")
            ic.output_stride = to_int(key, value);
        else if (sub == "sample_dt")
            ic.sample_dt = to_double(key, value);
        else if (sub == "abs_tol")
            ic.abs_tol = to_double(key, value);
        else if (sub == "rel_tol")
            ic.rel_tol = to_double(key, value);
        else if (sub == "max_dt")
            ic.max_dt = to_double(key, value);
        else
            throw ConfigError(key + ": unknown key");
        return;
    }
    if (starts_with(key, "ead.")) {
        require_kind(key, Kind::single_cell, c.kind);
        const std::string sub = key.substr(4);
        if (sub == "prominence")
            c.cell.analysis.ead_prominence = to_double(key, value);
        else if (sub == "plateau_floor")
            c.cell.analysis.plateau_floor = to_double(key, value);
        else if (sub == "repol_floor")
            c.cell.analysis.repol_floor = to_double(key, value);
        else
            throw ConfigError(key + ": unknown key");
        return;
    }

    if (starts_with(key, "cont.")) {
        require_kind(key, Kind::continuation, c.kind);
        const std::string sub = key.substr(5);
        ContinuationConfig& k = c.cont;
        if (sub == "parameter")
            k.parameter = value;
        else if (sub == "seed")
            k.seed = to_double(key, value);
        else if (sub == "seed_b")
            k.seed_b = to_double(key, value);
        else if (sub == "relax_ms")
            k.relax_ms = to_double(key, value);
        else if (sub == "min")
            k.lambda_min = to_double(key, value);
        else if (sub == "max")
            k.lambda_max = to_double(key, value);
        else if (sub == "direction")
            k.direction = to_int(key, value);
        else if (sub == "step")
            k.eq.step.initial = to_double(key, value);
        else if (sub == "step_min")
            k.eq.step.min = to_double(key, value);
        else if (sub == "step_max")
            k.eq.step.max = to_double(key, value);
        else if (sub == "max_points")
            k.eq.step.max_points = to_int(key, value);
        else if (sub == "cycles")
            k.cycles = to_bool(key, value);
        else if (sub == "pd_restarts")
            k.pd_restarts = to_int(key, value);
        else if (sub == "cycle_step")
            k.cycle.step.initial = to_double(key, value);
        else if (sub == "cycle_step_max")
            k.cycle.step.max = to_double(key, value);
        else if (sub == "cycle_max_points")
            k.cycle.step.max_points = to_int(key, value);
        else if (sub == "m")
            k.cycle.m = to_int(key, value);
        else if (sub == "dt_flow")
            k.cycle.dt_flow = to_double(key, value);
        else if (sub == "max_period")
            k.cycle.max_period = to_double(key, value);
        else
            throw ConfigError(key + ": unknown key");
        return;
    }

    if (starts_with(key, "tissue.full.")) {
        require_kind(key, Kind::tissue, c.kind);
        c.full_overrides.emplace_back(key.substr(12), value);
        return;
    }
    if (starts_with(key, "tissue.")) {
        require_kind(key, Kind::tissue, c.kind);
        apply_tissue_key(c, key, key.substr(7), value);
        return;
    }

    throw ConfigError(key + ": unknown key");
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void emit_overrides(std::ostringstream& out, const std::string& prefix,
                    const std::vector<ParamOverride>& overrides) {
    for (const auto& ov : overrides)
        out << prefix << ov.name << " = " << fmt(ov.value) << "\n";
}

void check_overrides(const std::string& prefix,
                     const std::vector<ParamOverride>& overrides) {
    for (const auto& ov : overrides) {
        if (!has_parameter(ov.name))
            throw ConfigError(prefix + ov.name + ": unknown parameter");
        if (!std::isfinite(ov.value))
            throw ConfigError(prefix + ov.name + ": non-finite value");
    }
}

void check_pulse(const std::string& prefix, const Pulse& stim) {
    if (!(stim.duration > 0.0))
        throw ConfigError(prefix + ".duration: must be positive");
    if (stim.period != 0.0 && !(stim.period > stim.duration))
        throw ConfigError(prefix + ".period: must be 0 or exceed the duration");
    if (!std::isfinite(stim.amplitude) || !std::isfinite(stim.start))
        throw ConfigError(prefix + ": non-finite fields");
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        for (const auto& [k, v] : entries)
            if (k == key) throw ConfigError(key + ": duplicate key");
        entries.emplace_back(key, value);
    }

    ExperimentConfig c;
    bool kind_seen = false;
    for (const auto& [key, value] : entries) {
        if (key != "kind") continue;
        kind_seen = true;
        if (value == "single-cell")
            c.kind = ExperimentConfig::Kind::single_cell;
        else if (value == "continuation")
            c.kind = ExperimentConfig::Kind::continuation;
        else if (value == "tissue")
            c.kind = ExperimentConfig::Kind::tissue;
        else
            throw ConfigError(
                "kind: expected single-cell, continuation or tissue, got '" +
                value + "'");
    }
    if (!kind_seen) throw ConfigError("kind: missing");

    for (const auto& [key, value] : entries) apply_key(c, key, value);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void resolve_full_scale(ExperimentConfig& config) {
    if (config.kind != ExperimentConfig::Kind::tissue)
        throw ConfigError("--full-scale: only valid for kind = tissue");
    if (config.full_overrides.empty())
        throw ConfigError("--full-scale: config has no tissue.full.* overrides");
    for (const auto& [sub, value] : config.full_overrides) {
        if (sub == "scale" || starts_with(sub, "full."))
            throw ConfigError("tissue.full." + sub + ": unknown key");
        apply_tissue_key(config, "tissue.full." + sub, sub, value);
    }
    config.full_overrides.clear();
    config.scale = "full";
}

void validate_config(const ExperimentConfig& c) {
    using Kind = ExperimentConfig::Kind;
    if (c.out_dir.empty()) throw ConfigError("out: must not be empty");

    if (c.kind == Kind::single_cell) {
        const SingleCellConfig& s = c.cell;
        check_overrides("param.", s.a.overrides);
        check_pulse("stim", s.a.stim);
        if (s.compare) {
            check_overrides("b.param.", s.b.overrides);
            check_pulse("b.stim", s.b.stim);
        }
        if (!(s.t_end > 0.0)) throw ConfigError("cell.t_end: must be positive");
        if (!(s.integrator.dt > 0.0)) throw ConfigError("cell.dt: must be positive");
        if (s.integrator.output_stride < 1)
            throw ConfigError("cell.output_stride: must be >= 1");
        if (!(s.integrator.sample_dt > 0.0))
            throw ConfigError("cell.sample_dt: must be positive");
        if (!(s.integrator.abs_tol > 0.0) || !(s.integrator.rel_tol > 0.0))
            throw ConfigError("cell.abs_tol/cell.rel_tol: must be positive");
        if (!(s.integrator.max_dt > 0.0))
            throw ConfigError("cell.max_dt: must be positive");
        if (!(s.analysis.ead_prominence > 0.0))
            throw ConfigError("ead.prominence: must be positive");
    } else if (c.kind == Kind::continuation) {
        const ContinuationConfig& k = c.cont;
        check_overrides("param.", k.overrides);
        if (!has_parameter(k.parameter))
            throw ConfigError("cont.parameter: unknown parameter '" + k.parameter + "'");
        if (!(k.lambda_min < k.lambda_max))
            throw ConfigError("cont.min: must be below cont.max");
        if (k.seed < k.lambda_min || k.seed > k.lambda_max)
            throw ConfigError("cont.seed: outside [cont.min, cont.max]");
        if (k.seed_b && (*k.seed_b < k.lambda_min || *k.seed_b > k.lambda_max))
            throw ConfigError("cont.seed_b: outside [cont.min, cont.max]");
        if (k.direction != 1 && k.direction != -1)
            throw ConfigError("cont.direction: must be 1 or -1");
        if (!(k.relax_ms >= 0.0))
            throw ConfigError("cont.relax_ms: must be non-negative");
        if (!(k.eq.step.initial > 0.0))
            throw ConfigError("cont.step: must be positive");
        if (!(k.eq.step.max >= k.eq.step.initial))
            throw ConfigError("cont.step_max: must be >= cont.step");
        if (k.eq.step.max_points < 2)
            throw ConfigError("cont.max_points: must be >= 2");
        if (k.pd_restarts < 0)
            throw ConfigError("cont.pd_restarts: must be non-negative");
        if (k.cycle.m < 2 || (k.pd_restarts > 0 && k.cycle.m % 2 != 0))
            throw ConfigError("cont.m: must be >= 2 (and even for pd_restarts)");
        if (!(k.cycle.dt_flow > 0.0))
            throw ConfigError("cont.dt_flow: must be positive");
        if (!(k.cycle.max_period > 0.0))
            throw ConfigError("cont.max_period: must be positive");
    } else {
        const TissueConfig& t = c.tissue;
        check_overrides("param.", t.overrides);
        check_overrides("tissue.switch.param.", t.switch_overrides);
        if (t.nx < 3 || t.ny < 3)
            throw ConfigError("tissue.nx/tissue.ny: grid must be at least 3x3");
        if (!(t.dx > 0.0)) throw ConfigError("tissue.dx: must be positive");
        if (t.D < 0.0) throw ConfigError("tissue.D: must be non-negative");
        if (!(t.dt > 0.0)) throw ConfigError("tissue.dt: must be positive");
        if (t.D > 0.0 && t.dt > t.dx * t.dx / (4.0 * t.D))
            throw ConfigError("tissue.dt: violates the diffusion stability bound "
                              "dx^2/(4 D) = " + fmt(t.dx * t.dx / (4.0 * t.D)) + " ms");
        if (!(t.t_end > 0.0)) throw ConfigError("tissue.t_end: must be positive");
        if (!t.threads_auto && t.threads < 1)
            throw ConfigError("tissue.threads: must be >= 1 or auto");
        if (t.snapshot_dt < 0.0)
            throw ConfigError("tissue.snapshot_dt: must be non-negative");
        TissueProtocol proto;
        proto.s1.push_back(t.s1);
        if (t.s2_enabled) proto.s2 = t.s2;
        proto.validate(t.nx, t.ny);
        if (t.switch_enabled && !(t.switch_t >= 0.0))
            throw ConfigError("tissue.switch.t: must be non-negative");
        for (const auto& [sub, value] : c.full_overrides) {
            if (sub == "scale" || starts_with(sub, "full."))
                throw ConfigError("tissue.full." + sub + ": unknown key");
            ExperimentConfig probe = c;
            probe.full_overrides.clear();
            apply_tissue_key(probe, "tissue.full." + sub, sub, value);
        }
    }
}

std::string serialize_config(const ExperimentConfig& c) {
    using Kind = ExperimentConfig::Kind;
    std::ostringstream out;
    out << "kind = "
        << (c.kind == Kind::single_cell
                ? "single-cell"
                : c.kind == Kind::continuation ? "continuation" : "tissue")
        << "\n";
    if (!c.preset.empty()) out << "preset = " << c.preset << "\n";
    out << "out = " << c.out_dir << "\n";

    if (c.kind == Kind::single_cell) {
        const SingleCellConfig& s = c.cell;
        out << "variant = " << variant_name(s.a.variant) << "\n";
        emit_overrides(out, "param.", s.a.overrides);
        out << "stim.start = " << fmt(s.a.stim.start) << "\n";
        out << "stim.duration = " << fmt(s.a.stim.duration) << "\n";
        out << "stim.amplitude = " << fmt(s.a.stim.amplitude) << "\n";
        out << "stim.period = " << fmt(s.a.stim.period) << "\n";
        out << "compare = " << (s.compare ? "true" : "false") << "\n";
        if (s.compare) {
            out << "b.variant = " << variant_name(s.b.variant) << "\n";
            emit_overrides(out, "b.param.", s.b.overrides);
            out << "b.stim.start = " << fmt(s.b.stim.start) << "\n";
            out << "b.stim.duration = " << fmt(s.b.stim.duration) << "\n";
            out << "b.stim.amplitude = " << fmt(s.b.stim.amplitude) << "\n";
            out << "b.stim.period = " << fmt(s.b.stim.period) << "\n";
        }
        out << "cell.t_end = " << fmt(s.t_end) << "\n";
        out << "cell.method = "
            << (s.integrator.method == Method::rush_larsen_euler ? "rl" : "rk45")
            << "\n";
        out << "cell.dt = " << fmt(s.integrator.dt) << "\n";
        out << "cell.output_stride = " << s.integrator.output_stride << "\n";
        out << "cell.sample_dt = " << fmt(s.integrator.sample_dt) << "\n";
        out << "cell.abs_tol = " << fmt(s.integrator.abs_tol) << "\n";
        out << "cell.rel_tol = " << fmt(s.integrator.rel_tol) << "\n";
        out << "cell.max_dt = " << fmt(s.integrator.max_dt) << "\n";
        out << "ead.prominence = " << fmt(s.analysis.ead_prominence) << "\n";
        out << "ead.plateau_floor = " << fmt(s.analysis.plateau_floor) << "\n";
        out << "ead.repol_floor = " << fmt(s.analysis.repol_floor) << "\n";
    } else if (c.kind == Kind::continuation) {
        const ContinuationConfig& k = c.cont;
        out << "variant = " << variant_name(k.variant) << "\n";
        emit_overrides(out, "param.", k.overrides);
        out << "cont.parameter = " << k.parameter << "\n";
        out << "cont.seed = " << fmt(k.seed) << "\n";
        if (k.seed_b) out << "cont.seed_b = " << fmt(*k.seed_b) << "\n";
        out << "cont.relax_ms = " << fmt(k.relax_ms) << "\n";
        out << "cont.min = " << fmt(k.lambda_min) << "\n";
        out << "cont.max = " << fmt(k.lambda_max) << "\n";
        out << "cont.direction = " << k.direction << "\n";
        out << "cont.step = " << fmt(k.eq.step.initial) << "\n";
        out << "cont.step_min = " << fmt(k.eq.step.min) << "\n";
        out << "cont.step_max = " << fmt(k.eq.step.max) << "\n";
        out << "cont.max_points = " << k.eq.step.max_points << "\n";
        out << "cont.cycles = " << (k.cycles ? "true" : "false") << "\n";
        out << "cont.pd_restarts = " << k.pd_restarts << "\n";
        out << "cont.cycle_step = " << fmt(k.cycle.step.initial) << "\n";
        out << "cont.cycle_step_max = " << fmt(k.cycle.step.max) << "\n";
        out << "cont.cycle_max_points = " << k.cycle.step.max_points << "\n";
        out << "cont.m = " << k.cycle.m << "\n";
        out << "cont.dt_flow = " << fmt(k.cycle.dt_flow) << "\n";
        out << "cont.max_period = " << fmt(k.cycle.max_period) << "\n";
    } else {
        const TissueConfig& t = c.tissue;
        out << "variant = " << variant_name(t.variant) << "\n";
        emit_overrides(out, "param.", t.overrides);
        out << "tissue.scale = " << c.scale << "\n";
        out << "tissue.nx = " << t.nx << "\n";
        out << "tissue.ny = " << t.ny << "\n";
        out << "tissue.dx = " << fmt(t.dx) << "\n";
        out << "tissue.D = " << fmt(t.D) << "\n";
        out << "tissue.dt = " << fmt(t.dt) << "\n";
        out << "tissue.t_end = " << fmt(t.t_end) << "\n";
        if (t.threads_auto)
            out << "tissue.threads = auto\n";
        else
            out << "tissue.threads = " << t.threads << "\n";
        out << "tissue.snapshot_dt = " << fmt(t.snapshot_dt) << "\n";
        out << "tissue.pgm = " << (t.pgm ? "true" : "false") << "\n";
        const auto rect = [&](const char* prefix, const StimulusRect& r) {
            out << prefix << ".x0 = " << r.x0 << "\n";
            out << prefix << ".y0 = " << r.y0 << "\n";
            out << prefix << ".nx = " << r.nx << "\n";
            out << prefix << ".ny = " << r.ny << "\n";
            out << prefix << ".start = " << fmt(r.t_start) << "\n";
            out << prefix << ".duration = " << fmt(r.duration) << "\n";
            out << prefix << ".amplitude = " << fmt(r.amplitude) << "\n";
        };
        rect("tissue.s1", t.s1);
        out << "tissue.s2.enabled = " << (t.s2_enabled ? "true" : "false") << "\n";
        if (t.s2_enabled) rect("tissue.s2", t.s2);
        out << "tissue.switch.enabled = " << (t.switch_enabled ? "true" : "false")
            << "\n";
        if (t.switch_enabled) {
            out << "tissue.switch.t = " << fmt(t.switch_t) << "\n";
            emit_overrides(out, "tissue.switch.param.", t.switch_overrides);
        }
        for (const auto& [sub, value] : c.full_overrides)
            out << "tissue.full." << sub << " = " << value << "\n";
    }
    return out.str();
}

} // namespace cardiobif
