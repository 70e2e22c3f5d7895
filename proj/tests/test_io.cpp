#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "pdecalib/errors.hpp"
#include "pdecalib/io.hpp"

using namespace pdecalib;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pdecalib-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("format_double round trips doubles exactly") {
    for (double v : {1.0 / 3.0, 0.1, 2.0, -0.0, 1e-17, 6.02214076e23, -123.4567890123456789}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(0.0) == "0");
}

TEST_CASE("trace CSV bytes") {
    TempDir tmp;
    OptimizationTrace trace;
    trace.losses = {1.5, 0.25};
    trace.grad_norms = {2.0, 0.125};
    const fs::path file = tmp.file("trace.csv");
    write_trace_csv(file, trace);

    const std::string expected = std::string("iteration,loss,grad_norm\n") +
                                 "0," + format_double(1.5) + "," + format_double(2.0) + "\n" +
                                 "1," + format_double(0.25) + "," + format_double(0.125) + "\n";
    CHECK(slurp(file) == expected);
}

TEST_CASE("curve CSV bytes with and without the baseline column") {
    TempDir tmp;
    const std::vector<double> xs = {-1.0, 0.0};
    const std::vector<double> exact = {2.0, 0.1};
    const std::vector<double> theta = {1.9, 1.0 / 3.0};
    const std::vector<double> base = {2.5, -0.5};

    const fs::path two = tmp.file("curve.csv");
    write_curve_csv(two, xs, exact, theta);
    std::string expected = "x,f_exact,f_theta\n";
    for (int i = 0; i < 2; ++i) {
        expected += format_double(xs[i]) + "," + format_double(exact[i]) + "," +
                    format_double(theta[i]) + "\n";
    }
    CHECK(slurp(two) == expected);

    const fs::path three = tmp.file("curve3.csv");
    write_curve_csv(three, xs, exact, theta, &base);
    std::string expected3 = "x,f_exact,f_theta,f_baseline\n";
    for (int i = 0; i < 2; ++i) {
        expected3 += format_double(xs[i]) + "," + format_double(exact[i]) + "," +
                     format_double(theta[i]) + "," + format_double(base[i]) + "\n";
    }
    CHECK(slurp(three) == expected3);
}

TEST_CASE("region CSV: base column, optional exact, odd-count guard") {
    TempDir tmp;
    SensitivityRegion reg;
    reg.alphas = {-0.1, 0.0, 0.1};
    reg.xs = {0.0, 0.5};
    reg.curves = {{1.0, 2.0}, {1.5, 2.5}, {2.0, 3.0}};
    reg.env_min = {1.0, 2.0};
    reg.env_max = {2.0, 3.0};

    const fs::path file = tmp.file("region.csv");
    write_region_csv(file, reg);
    std::string expected = "x,f_theta,env_min,env_max\n";
    expected += format_double(0.0) + "," + format_double(1.5) + "," + format_double(1.0) + "," +
                format_double(2.0) + "\n";
    expected += format_double(0.5) + "," + format_double(2.5) + "," + format_double(2.0) + "," +
                format_double(3.0) + "\n";
    CHECK(slurp(file) == expected);

    const std::vector<double> exact = {1.25, 2.75};
    write_region_csv(file, reg, &exact);
    const std::string with_exact = slurp(file);
    CHECK(with_exact.find("x,f_theta,env_min,env_max,f_exact\n") == 0);
    CHECK(with_exact.find(format_double(2.75)) != std::string::npos);

    SensitivityRegion even = reg;
    even.alphas = {-0.1, 0.1};
    even.curves = {{1.0, 2.0}, {2.0, 3.0}};
    CHECK_THROWS_AS(write_region_csv(tmp.file("bad.csv"), even), ConfigError);
}

TEST_CASE("trajectory and sweep CSV shapes") {
    TempDir tmp;
    const Grid1D grid{3, -1.0, 1.0};
    Trajectory traj = {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
    const fs::path tf = tmp.file("trajectory.csv");
    write_trajectory_csv(tf, traj, grid, 0.5, 0.25);
    std::istringstream lines(slurp(tf));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "t,x,u");
    int rows = 0;
    std::string first_row;
    while (std::getline(lines, line)) {
        if (rows == 0) first_row = line;
        ++rows;
    }
    CHECK(rows == 6);  // 2 states x 3 nodes
    CHECK(first_row ==
          format_double(0.5) + "," + format_double(-1.0) + "," + format_double(1.0));

    SweepRow row;
    row.dt = 0.01;
    row.h = 0.125;
    row.n = 17;
    row.seed = 3;
    row.linf = 0.5;
    row.l2 = 0.25;
    row.stop_reason = "max_iters";
    row.iters = 12;
    row.final_loss = 1e-9;
    const fs::path sf = tmp.file("sweep.csv");
    write_sweep_csv(sf, {row});
    const std::string sweep = slurp(sf);
    CHECK(sweep.find("dt,h,n,seed,linf,l2,stop_reason,iters,final_loss\n") == 0);
    CHECK(sweep.find("max_iters") != std::string::npos);
    CHECK(sweep.find(",17,") != std::string::npos);
    CHECK(sweep.find(format_double(1e-9)) != std::string::npos);
}

TEST_CASE("network checkpoints round trip exactly") {
    TempDir tmp;
    NetworkArchitecture arch;
    arch.hidden_widths = {6, 4};
    arch.output = OutputTransform::bounded(0.0, 2.0);
    const NetworkParams params = init_params(arch, 123);

    const fs::path file = tmp.file("network.json");
    save_network(file, arch, params);
    const LoadedNetwork loaded = load_network(file);
    CHECK(loaded.arch.input_dim == 1);
    CHECK(loaded.arch.hidden_widths == arch.hidden_widths);
    CHECK(loaded.arch.output.kind == OutputTransform::Kind::bounded);
    CHECK(loaded.arch.output.lo == 0.0);
    CHECK(loaded.arch.output.hi == 2.0);
    CHECK(flatten(loaded.params) == flatten(params));

    // Identity-output checkpoints restore the identity transform.
    NetworkArchitecture plain;
    plain.hidden_widths = {5};
    save_network(file, plain, init_params(plain, 7));
    CHECK(load_network(file).arch.output.kind == OutputTransform::Kind::identity);

    std::ofstream(tmp.file("garbage.json")) << "{]";
    CHECK_THROWS_AS(load_network(tmp.file("garbage.json")), ConfigError);
    std::ofstream(tmp.file("empty.json")) << "{}";
    CHECK_THROWS_AS(load_network(tmp.file("empty.json")), ConfigError);
    CHECK_THROWS_AS(load_network(tmp.file("missing.json")), ConfigError);

    // Parameter array inconsistent with the declared shape.
    std::ofstream(tmp.file("short.json"))
        << R"({"input_dim":1,"hidden_widths":[5],"output":"identity","params":[1.0,2.0]})";
    CHECK_THROWS_AS(load_network(tmp.file("short.json")), ConfigError);
}

TEST_CASE("snapshot-pair checkpoints round trip and reject corruption") {
    TempDir tmp;
    const Grid1D grid{5, -1.0, 1.0};
    const std::vector<double> u0 = {1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> u1 = {0.1, 0.2, 0.3, 0.4, 1.0 / 7.0};

    const fs::path file = tmp.file("pair.bin");
    save_snapshot_pair(file, grid, 0.75, 0.01, u0, u1);
    const SnapshotPair pair = load_snapshot_pair(file);
    CHECK(pair.grid.n == 5);
    CHECK(pair.grid.x_min == -1.0);
    CHECK(pair.grid.x_max == 1.0);
    CHECK(pair.t == 0.75);
    CHECK(pair.dt == 0.01);
    CHECK(pair.u0 == u0);
    CHECK(pair.u1 == u1);

    // Wrong magic bytes
    std::string bytes = slurp(file);
    bytes[0] = 'X';
    std::ofstream(file, std::ios::binary) << bytes;
    CHECK_THROWS_AS(load_snapshot_pair(file), ConfigError);

    // Truncated payload
    save_snapshot_pair(file, grid, 0.75, 0.01, u0, u1);
    bytes = slurp(file);
    std::ofstream(file, std::ios::binary) << bytes.substr(0, bytes.size() - 8);
    CHECK_THROWS_AS(load_snapshot_pair(file), ConfigError);

    CHECK_THROWS_AS(load_snapshot_pair(tmp.file("nope.bin")), ConfigError);

    // Length mismatch is rejected at save time.
    std::vector<double> short_u1 = {1.0, 2.0};
    CHECK_THROWS_AS(save_snapshot_pair(file, grid, 0.0, 0.01, u0, short_u1), ConfigError);
}
