#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cardiobif/integrate.hpp"

namespace cardiobif {

struct StimulusRect {
    int x0 = 0, y0 = 0, nx = 0, ny = 0; // cell rectangle
    double t_start = 0.0;
    double duration = 2.0;  // ms
    double amplitude = 0.0; // pA/pF, positive depolarises
};

struct ParameterSwitch {
    double t = 0.0;
    CellParameters params;
};

struct TissueProtocol {
    std::vector<StimulusRect> s1;
    std::optional<StimulusRect> s2; // premature second stimulus
    std::optional<ParameterSwitch> param_switch;

    void validate(int nx, int ny) const; // throws ConfigError
    // sum of active rectangle amplitudes at cell (ix, iy) at time t
    double stimulus_at(int ix, int iy, double t) const;
};

// Mirror-ghost (zero-flux) 5-point stencil; out[iy*nx+ix].
void laplacian_5pt(const std::vector<double>& V, int nx, int ny, double dx,
                   std::vector<double>& out);

// Monodomain grid: structure-of-arrays planes (one contiguous nx*ny array
// per state component, V first), uniform cell parameters, fixed time step.
class TissueField {
public:
    // throws ConfigError on bad dimensions or a CFL violation
    // (dt must satisfy dt <= dx^2 / (4 D) when D > 0)
    TissueField(int nx, int ny, double dx, double D,
                const CellParameters& params, double dt);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int components() const { return ncomp_; }
    double dx() const { return dx_; }
    double diffusion() const { return D_; }
    double dt() const { return dt_; }
    double t() const { return static_cast<double>(step_count_) * dt_; }
    const CellParameters& params() const { return params_; }

    const std::vector<double>& plane(int component) const;
    std::vector<double>& plane(int component);
    const std::vector<double>& voltage() const { return plane(0); }

    void set_uniform(const State& x);
    void set_cell(int ix, int iy, const State& x);
    State cell(int ix, int iy) const;

    // one Rush-Larsen/Euler step of every cell with diffusion and stimulus;
    // throws IntegrationDiverged (with t and cell index) on non-finite V
    void step(const TissueProtocol& protocol);

    const std::vector<double>& activation_time() const { return activation_; }
    const std::vector<int>& zero_crossings() const { return crossings_; }

    int threads = 1;              // row-block parallel update
    bool reaction_enabled = true; // false: pure diffusion of V (test hook)

private:
    int nx_, ny_, ncomp_;
    double dx_, D_, dt_;
    CellParameters params_;
    long step_count_ = 0;
    bool switch_applied_ = false;
    std::vector<std::vector<double>> planes_; // [component][iy*nx+ix]
    std::vector<double> v_new_, lap_;
    std::vector<double> activation_; // first time V > 0 mV; -1 = never
    std::vector<int> crossings_;     // upward crossings of 0 mV

    void update_rows(int y0, int y1, const TissueProtocol& protocol, double t,
                     long& bad_idx);
};

struct SnapshotStat {
    double t;
    double v_max, v_min;
    std::string file; // empty when not written to disk
};

struct TissueSummary {
    std::vector<double> activation_time;
    std::vector<int> zero_crossings;
    std::vector<SnapshotStat> snapshots;
};

struct SnapshotOptions {
    double interval = 0.0;  // ms between V-field snapshots; <= 0 disables
    std::string directory;  // empty: stats only, no files
    bool pgm = false;       // also write 8-bit PGM previews
};

TissueSummary run_tissue(TissueField& field, const TissueProtocol& protocol,
                         double t_end, const SnapshotOptions& snaps = {});

// binary V-field snapshot: 32-byte header ("CBIFSNAP", u64 nx, u64 ny,
// f64 t, little-endian) + row-major f64 field
void write_snapshot(const std::string& path, int nx, int ny, double t,
                    const std::vector<double>& V);
void read_snapshot(const std::string& path, int& nx, int& ny, double& t,
                   std::vector<double>& V);
// V mapped linearly from [-90, +40] mV to [0, 255]
void write_pgm(const std::string& path, int nx, int ny,
               const std::vector<double>& V);

} // namespace cardiobif
