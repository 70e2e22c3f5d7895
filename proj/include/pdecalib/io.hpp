#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pdecalib/experiments.hpp"
#include "pdecalib/field_net.hpp"
#include "pdecalib/forward.hpp"
#include "pdecalib/lbfgs.hpp"
#include "pdecalib/sensitivity.hpp"

namespace pdecalib {

// All floating-point values in text artifacts use 17 significant digits so
// round-tripping reproduces the exact double.
std::string format_double(double v);

void write_trace_csv(const std::filesystem::path& file, const OptimizationTrace& trace);

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj,
                          const Grid1D& grid, double t_start, double dt);

void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows);

// Columns x, f_exact, f_theta plus optional f_baseline.
void write_curve_csv(const std::filesystem::path& file, const std::vector<double>& xs,
                     const std::vector<double>& f_exact, const std::vector<double>& f_theta,
                     const std::vector<double>* f_baseline = nullptr);

// Columns x, f_theta (the alpha = 0 curve), env_min, env_max plus optional
// f_exact. The region must have been built with an odd alpha count.
void write_region_csv(const std::filesystem::path& file, const SensitivityRegion& region,
                      const std::vector<double>* f_exact = nullptr);

// Network checkpoint: JSON with the architecture descriptor and the flat
// parameter array.
void save_network(const std::filesystem::path& file, const NetworkArchitecture& arch,
                  const NetworkParams& params);
struct LoadedNetwork {
    NetworkArchitecture arch;
    NetworkParams params;
};
LoadedNetwork load_network(const std::filesystem::path& file);

// Binary snapshot-pair checkpoint (the final two states of a simulation).
void save_snapshot_pair(const std::filesystem::path& file, const Grid1D& grid, double t,
                        double dt, const std::vector<double>& u0, const std::vector<double>& u1);
struct SnapshotPair {
    Grid1D grid;
    double t = 0.0;
    double dt = 0.0;
    std::vector<double> u0;
    std::vector<double> u1;
};
SnapshotPair load_snapshot_pair(const std::filesystem::path& file);

}  // namespace pdecalib
