#include "pdecalib/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "pdecalib/errors.hpp"

namespace pdecalib {

namespace {

std::ofstream open_text(const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw NumericError("cannot open " + file.string() + " for writing");
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trace_csv(const std::filesystem::path& file, const OptimizationTrace& trace) {
    std::ofstream out = open_text(file);
    out << "iteration,loss,grad_norm\n";
    for (std::size_t i = 0; i < trace.losses.size(); ++i)
        out << i << ',' << format_double(trace.losses[i]) << ','
            << format_double(trace.grad_norms[i]) << '\n';
}

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj,
                          const Grid1D& grid, double t_start, double dt) {
    std::ofstream out = open_text(file);
    out << "t,x,u\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = t_start + static_cast<double>(k) * dt;
        for (int i = 0; i < grid.n; ++i)
            out << format_double(t) << ',' << format_double(grid.x(i)) << ','
                << format_double(traj[k][i]) << '\n';
    }
}

void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows) {
    std::ofstream out = open_text(file);
    out << "dt,h,n,seed,linf,l2,stop_reason,iters,final_loss\n";
    for (const SweepRow& r : rows)
        out << format_double(r.dt) << ',' << format_double(r.h) << ',' << r.n << ',' << r.seed
            << ',' << format_double(r.linf) << ',' << format_double(r.l2) << ',' << r.stop_reason
            << ',' << r.iters << ',' << format_double(r.final_loss) << '\n';
}

void write_curve_csv(const std::filesystem::path& file, const std::vector<double>& xs,
                     const std::vector<double>& f_exact, const std::vector<double>& f_theta,
                     const std::vector<double>* f_baseline) {
    std::ofstream out = open_text(file);
    out << "x,f_exact,f_theta";
    if (f_baseline) out << ",f_baseline";
    out << '\n';
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out << format_double(xs[i]) << ',' << format_double(f_exact[i]) << ','
            << format_double(f_theta[i]);
        if (f_baseline) out << ',' << format_double((*f_baseline)[i]);
        out << '\n';
    }
}

void write_region_csv(const std::filesystem::path& file, const SensitivityRegion& region,
                      const std::vector<double>* f_exact) {
    if (region.curves.empty() || region.alphas.size() % 2 == 0)
        throw ConfigError("region CSV needs an odd number of alpha curves");
    const std::vector<double>& base = region.curves[(region.alphas.size() - 1) / 2];
    std::ofstream out = open_text(file);
    out << "x,f_theta,env_min,env_max";
    if (f_exact) out << ",f_exact";
    out << '\n';
    for (std::size_t i = 0; i < region.xs.size(); ++i) {
        out << format_double(region.xs[i]) << ',' << format_double(base[i]) << ','
            << format_double(region.env_min[i]) << ',' << format_double(region.env_max[i]);
        if (f_exact) out << ',' << format_double((*f_exact)[i]);
        out << '\n';
    }
}

void save_network(const std::filesystem::path& file, const NetworkArchitecture& arch,
                  const NetworkParams& params) {
    params.validate_against(arch);
    nlohmann::json j;
    j["input_dim"] = arch.input_dim;
    j["hidden_widths"] = arch.hidden_widths;
    j["output"] = (arch.output.kind == OutputTransform::Kind::bounded) ? "bounded" : "identity";
    if (arch.output.kind == OutputTransform::Kind::bounded) {
        j["output_lo"] = arch.output.lo;
        j["output_hi"] = arch.output.hi;
    }
    j["params"] = flatten(params);
    std::ofstream out = open_text(file);
    out << j.dump(2) << '\n';
}

LoadedNetwork load_network(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open network file " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed network file " + file.string() + ": " + e.what());
    }
    LoadedNetwork net;
    try {
        net.arch.input_dim = j.at("input_dim").get<int>();
        net.arch.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
        const std::string kind = j.at("output").get<std::string>();
        if (kind == "bounded") {
            net.arch.output = OutputTransform::bounded(j.at("output_lo").get<double>(),
                                                       j.at("output_hi").get<double>());
        } else if (kind == "identity") {
            net.arch.output = OutputTransform::identity();
        } else {
            throw ConfigError("unknown output transform '" + kind + "' in " + file.string());
        }
        net.arch.validate();
        const auto flat = j.at("params").get<std::vector<double>>();
        net.params = unflatten(net.arch, flat);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid network file " + file.string() + ": " + e.what());
    }
    return net;
}

namespace {

constexpr char kSnapshotMagic[8] = {'p', 'd', 'e', 's', 'n', 'a', 'p', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_snapshot_pair(const std::filesystem::path& file, const Grid1D& grid, double t,
                        double dt, const std::vector<double>& u0,
                        const std::vector<double>& u1) {
    if (static_cast<int>(u0.size()) != grid.n || static_cast<int>(u1.size()) != grid.n)
        throw ConfigError("snapshot length does not match the grid");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw NumericError("cannot open " + file.string() + " for writing");
    out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
    const std::int64_t n = grid.n;
    put(out, n);
    put(out, grid.x_min);
    put(out, grid.x_max);
    put(out, t);
    put(out, dt);
    out.write(reinterpret_cast<const char*>(u0.data()), grid.n * sizeof(double));
    out.write(reinterpret_cast<const char*>(u1.data()), grid.n * sizeof(double));
}

SnapshotPair load_snapshot_pair(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open snapshot file " + file.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0)
        throw ConfigError("not a snapshot-pair file: " + file.string());
    SnapshotPair pair;
    std::int64_t n = 0;
    get(in, n);
    get(in, pair.grid.x_min);
    get(in, pair.grid.x_max);
    get(in, pair.t);
    get(in, pair.dt);
    if (!in || n < 3 || n > (std::int64_t{1} << 32))
        throw ConfigError("corrupt snapshot-pair file: " + file.string());
    pair.grid.n = static_cast<int>(n);
    pair.u0.resize(pair.grid.n);
    pair.u1.resize(pair.grid.n);
    in.read(reinterpret_cast<char*>(pair.u0.data()), pair.grid.n * sizeof(double));
    in.read(reinterpret_cast<char*>(pair.u1.data()), pair.grid.n * sizeof(double));
    if (!in) throw ConfigError("truncated snapshot-pair file: " + file.string());
    return pair;
}

}  // namespace pdecalib
