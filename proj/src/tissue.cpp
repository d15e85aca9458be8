#include "cardiobif/tissue.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "cardiobif/errors.hpp"

namespace cardiobif {

namespace {

void validate_rect(const StimulusRect& r, int nx, int ny, const char* what) {
    const std::string w(what);
    if (r.nx <= 0 || r.ny <= 0)
        throw ConfigError(w + ": rectangle must have positive extent");
    if (r.x0 < 0 || r.y0 < 0 || r.x0 + r.nx > nx || r.y0 + r.ny > ny)
        throw ConfigError(w + ": rectangle leaves the grid");
    if (!(r.duration > 0.0))
        throw ConfigError(w + ": duration must be positive");
    if (!std::isfinite(r.amplitude) || !std::isfinite(r.t_start))
        throw ConfigError(w + ": non-finite fields");
}

} // namespace

void TissueProtocol::validate(int nx, int ny) const {
    for (const auto& r : s1) validate_rect(r, nx, ny, "tissue.s1");
    if (s2) validate_rect(*s2, nx, ny, "tissue.s2");
    if (param_switch && !(param_switch->t >= 0.0))
        throw ConfigError("tissue.switch: time must be non-negative");
}

double TissueProtocol::stimulus_at(int ix, int iy, double t) const {
    double total = 0.0;
    const auto add = [&](const StimulusRect& r) {
        if (ix < r.x0 || ix >= r.x0 + r.nx || iy < r.y0 || iy >= r.y0 + r.ny)
            return;
        const double local = t - r.t_start;
        if (local >= 0.0 && local < r.duration) total += r.amplitude;
    };
    for (const auto& r : s1) add(r);
    if (s2) add(*s2);
    return total;
}

void laplacian_5pt(const std::vector<double>& V, int nx, int ny, double dx,
                   std::vector<double>& out) {
    if (nx < 3 || ny < 3) throw DomainError("laplacian_5pt: grid must be >= 3x3");
    if (static_cast<int>(V.size()) != nx * ny)
        throw DomainError("laplacian_5pt: field size mismatch");
    out.resize(V.size());
    const double inv_dx2 = 1.0 / (dx * dx);
    for (int iy = 0; iy < ny; ++iy) {
        const int row = iy * nx;
        const int up = (iy + 1 < ny ? iy + 1 : iy) * nx;
        const int dn = (iy > 0 ? iy - 1 : iy) * nx;
        for (int ix = 0; ix < nx; ++ix) {
            const double v = V[row + ix];
            const double left = V[row + (ix > 0 ? ix - 1 : ix)];
            const double right = V[row + (ix + 1 < nx ? ix + 1 : ix)];
            const double down = V[dn + ix];
            const double upv = V[up + ix];
            out[row + ix] = ((left + right) + (down + upv) - 4.0 * v) * inv_dx2;
        }
    }
}

TissueField::TissueField(int nx, int ny, double dx, double D,
                         const CellParameters& params, double dt)
    : nx_(nx), ny_(ny), ncomp_(static_cast<int>(dim(params.variant))), dx_(dx),
      D_(D), dt_(dt), params_(params) {
    if (nx_ < 3 || ny_ < 3)
        throw ConfigError("tissue.nx/tissue.ny: grid must be at least 3x3");
    if (!(dx_ > 0.0)) throw ConfigError("tissue.dx: must be positive");
    if (D_ < 0.0) throw ConfigError("tissue.D: must be non-negative");
    if (!(dt_ > 0.0)) throw ConfigError("tissue.dt: must be positive");
    if (D_ > 0.0) {
        const double bound = dx_ * dx_ / (4.0 * D_);
        if (dt_ > bound)
            throw ConfigError("tissue.dt: " + std::to_string(dt_) +
                              " ms violates the diffusion stability bound dx^2/(4 D) = " +
                              std::to_string(bound) + " ms");
    }
    const std::size_t cells = static_cast<std::size_t>(nx_) * ny_;
    planes_.assign(ncomp_, std::vector<double>(cells, 0.0));
    v_new_.assign(cells, 0.0);
    lap_.assign(cells, 0.0);
    activation_.assign(cells, -1.0);
    crossings_.assign(cells, 0);
    set_uniform(initial_state(params_.variant));
}

const std::vector<double>& TissueField::plane(int component) const {
    if (component < 0 || component >= ncomp_)
        throw DomainError("tissue: component index out of range");
    return planes_[component];
}

std::vector<double>& TissueField::plane(int component) {
    if (component < 0 || component >= ncomp_)
        throw DomainError("tissue: component index out of range");
    return planes_[component];
}

void TissueField::set_uniform(const State& x) {
    validate_state(params_.variant, x);
    for (int c = 0; c < ncomp_; ++c)
        std::fill(planes_[c].begin(), planes_[c].end(), x[c]);
}

void TissueField::set_cell(int ix, int iy, const State& x) {
    validate_state(params_.variant, x);
    const std::size_t idx = static_cast<std::size_t>(iy) * nx_ + ix;
    for (int c = 0; c < ncomp_; ++c) planes_[c][idx] = x[c];
}

State TissueField::cell(int ix, int iy) const {
    const std::size_t idx = static_cast<std::size_t>(iy) * nx_ + ix;
    State x(ncomp_);
    for (int c = 0; c < ncomp_; ++c) x[c] = planes_[c][idx];
    return x;
}

void TissueField::update_rows(int y0, int y1, const TissueProtocol& protocol,
                              double t, long& bad_idx) {
    double x[32];
    bad_idx = -1;
    for (int iy = y0; iy < y1; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
            const std::size_t idx = static_cast<std::size_t>(iy) * nx_ + ix;
            for (int c = 0; c < ncomp_; ++c) x[c] = planes_[c][idx];
            const double stim = protocol.stimulus_at(ix, iy, t);
            kernel::advance_rl(params_, x, stim, dt_, D_ * lap_[idx]);
            v_new_[idx] = x[0];
            for (int c = 1; c < ncomp_; ++c) planes_[c][idx] = x[c];
            if (!std::isfinite(x[0]) && bad_idx < 0)
                bad_idx = static_cast<long>(idx);
        }
    }
}

void TissueField::step(const TissueProtocol& protocol) {
    const double t = static_cast<double>(step_count_) * dt_;
    if (protocol.param_switch && !switch_applied_ &&
        t >= protocol.param_switch->t) {
        if (protocol.param_switch->params.variant != params_.variant)
            throw ConfigError("tissue.switch: cannot change the model variant");
        params_ = protocol.param_switch->params;
        switch_applied_ = true;
    }

    laplacian_5pt(planes_[0], nx_, ny_, dx_, lap_);

    long bad = -1;
    if (reaction_enabled) {
        if (threads <= 1) {
            update_rows(0, ny_, protocol, t, bad);
        } else {
            const int nt = std::min(threads, ny_);
            std::vector<std::thread> pool;
            std::vector<long> bads(nt, -1);
            for (int k = 0; k < nt; ++k) {
                const int y0 = ny_ * k / nt, y1 = ny_ * (k + 1) / nt;
                pool.emplace_back([this, y0, y1, &protocol, t, &bads, k] {
                    update_rows(y0, y1, protocol, t, bads[k]);
                });
            }
            for (auto& th : pool) th.join();
            for (long b : bads)
                if (b >= 0 && (bad < 0 || b < bad)) bad = b;
        }
    } else {
        // pure diffusion of V (conservation test hook)
        for (std::size_t idx = 0; idx < v_new_.size(); ++idx)
            v_new_[idx] = planes_[0][idx] + dt_ * D_ * lap_[idx];
    }

    ++step_count_;
    const double t_new = static_cast<double>(step_count_) * dt_;
    if (bad >= 0)
        throw IntegrationDiverged("tissue state non-finite at t=" +
                                      std::to_string(t_new) + " ms, cell " +
                                      std::to_string(bad),
                                  t_new, bad);

    // activation map and upward 0 mV crossings against the previous V plane
    for (std::size_t idx = 0; idx < v_new_.size(); ++idx) {
        if (planes_[0][idx] <= 0.0 && v_new_[idx] > 0.0) {
            ++crossings_[idx];
            if (activation_[idx] < 0.0) activation_[idx] = t_new;
        }
    }
    planes_[0].swap(v_new_);
}

TissueSummary run_tissue(TissueField& field, const TissueProtocol& protocol,
                         double t_end, const SnapshotOptions& snaps) {
    protocol.validate(field.nx(), field.ny());
    if (!(t_end > 0.0)) throw ConfigError("tissue.t_end: must be positive");

    TissueSummary summary;
    std::ofstream index;
    if (snaps.interval > 0.0 && !snaps.directory.empty()) {
        std::filesystem::create_directories(snaps.directory);
        index.open(snaps.directory + "/index.csv");
        if (!index)
            throw DomainError("cannot write snapshot index in '" + snaps.directory + "'");
        index << "file,t\n";
    }

    int snap_id = 0;
    const auto take_snapshot = [&](double t) {
        const auto& V = field.voltage();
        SnapshotStat st;
        st.t = t;
        st.v_max = *std::max_element(V.begin(), V.end());
        st.v_min = *std::min_element(V.begin(), V.end());
        if (snaps.interval > 0.0 && !snaps.directory.empty()) {
            char name[32];
            std::snprintf(name, sizeof name, "snap_%06d.bin", snap_id);
            const std::string path = snaps.directory + "/" + name;
            write_snapshot(path, field.nx(), field.ny(), t, V);
            if (snaps.pgm) {
                char pname[32];
                std::snprintf(pname, sizeof pname, "snap_%06d.pgm", snap_id);
                write_pgm(snaps.directory + "/" + pname, field.nx(), field.ny(), V);
            }
            st.file = path;
            char trow[64];
            std::snprintf(trow, sizeof trow, "%.17g", t);
            index << name << "," << trow << "\n";
        }
        summary.snapshots.push_back(st);
        ++snap_id;
    };

    if (snaps.interval > 0.0) take_snapshot(field.t());
    double next_snap = snaps.interval > 0.0 ? field.t() + snaps.interval : 1e300;

    const long n_steps =
        static_cast<long>(std::ceil((t_end - field.t()) / field.dt() - 1e-9));
    for (long k = 0; k < n_steps; ++k) {
        field.step(protocol);
        if (field.t() >= next_snap - 1e-9) {
            take_snapshot(field.t());
            next_snap += snaps.interval;
        }
    }
    summary.activation_time = field.activation_time();
    summary.zero_crossings = field.zero_crossings();
    return summary;
}

void write_snapshot(const std::string& path, int nx, int ny, double t,
                    const std::vector<double>& V) {
    static_assert(sizeof(double) == 8);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write snapshot '" + path + "'");
    char header[32] = {};
    std::memcpy(header, "CBIFSNAP", 8);
    const std::uint64_t unx = nx, uny = ny;
    std::memcpy(header + 8, &unx, 8);
    std::memcpy(header + 16, &uny, 8);
    std::memcpy(header + 24, &t, 8);
    out.write(header, 32);
    out.write(reinterpret_cast<const char*>(V.data()),
              static_cast<std::streamsize>(V.size() * 8));
    if (!out) throw DomainError("short write on snapshot '" + path + "'");
}

void read_snapshot(const std::string& path, int& nx, int& ny, double& t,
                   std::vector<double>& V) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read snapshot '" + path + "'");
    char header[32];
    in.read(header, 32);
    if (!in || std::memcmp(header, "CBIFSNAP", 8) != 0)
        throw DomainError("snapshot '" + path + "': bad header");
    std::uint64_t unx, uny;
    std::memcpy(&unx, header + 8, 8);
    std::memcpy(&uny, header + 16, 8);
    std::memcpy(&t, header + 24, 8);
    nx = static_cast<int>(unx);
    ny = static_cast<int>(uny);
    V.resize(static_cast<std::size_t>(nx) * ny);
    in.read(reinterpret_cast<char*>(V.data()),
            static_cast<std::streamsize>(V.size() * 8));
    if (!in) throw DomainError("snapshot '" + path + "': truncated field");
}

void write_pgm(const std::string& path, int nx, int ny,
               const std::vector<double>& V) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write pgm '" + path + "'");
    out << "P5\n" << nx << " " << ny << "\n255\n";
    std::vector<unsigned char> row(nx);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double v = V[static_cast<std::size_t>(iy) * nx + ix];
            const double u = std::clamp((v + 90.0) / 130.0, 0.0, 1.0);
            row[ix] = static_cast<unsigned char>(std::lround(u * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), nx);
    }
}

} // namespace cardiobif
