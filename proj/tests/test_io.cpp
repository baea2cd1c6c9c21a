#include "doctest.h"

#include "haptofem/io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

using namespace haptofem;
namespace fs = std::filesystem;

namespace {

// minimal legacy-VTK reader: points, triangle cells, named scalars, one vector
struct VtkData {
    int num_points = 0;
    int num_cells = 0;
    std::vector<std::array<double, 3>> points;
    std::map<std::string, std::vector<double>> scalars;
    std::vector<std::array<double, 3>> vectors;
};

VtkData read_vtk(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    VtkData d;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "POINTS") {
            ss >> d.num_points;
            d.points.resize(d.num_points);
            for (auto& p : d.points) in >> p[0] >> p[1] >> p[2];
        } else if (tok == "CELLS") {
            ss >> d.num_cells;
            for (int e = 0; e < d.num_cells; ++e) {
                int k, a, b, c;
                in >> k >> a >> b >> c;
                REQUIRE(k == 3);
            }
        } else if (tok == "SCALARS") {
            std::string name;
            ss >> name;
            std::getline(in, line);  // LOOKUP_TABLE default
            auto& vals = d.scalars[name];
            vals.resize(d.num_points);
            for (double& v : vals) in >> v;
        } else if (tok == "VECTORS") {
            d.vectors.resize(d.num_points);
            for (auto& v : d.vectors) in >> v[0] >> v[1] >> v[2];
        }
    }
    return d;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("io_test_out") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("parse_config: defaults, overrides and rejections") {
    const RunConfig def = parse_config({});
    CHECK(def.scheme == "uvmsigma");
    CHECK(def.problem == "test1");
    CHECK(def.mu_u == 0.0);
    CHECK(def.n == 50);
    CHECK(def.dt == 0.01);
    CHECK(def.t_end == 15.0);
    CHECK(def.snapshots == std::vector<double>{1.0, 5.0, 10.0, 15.0});
    CHECK(def.tol == 1e-10);
    CHECK(def.out_dir == "out");
    CHECK(def.mesh_file.empty());

    const RunConfig ov = parse_config({"--scheme", "uvms", "--mu-u", "2"});
    CHECK(ov.scheme == "uvms");
    CHECK(ov.mu_u == 2.0);

    CHECK_THROWS_WITH_AS(parse_config({"--dt", "0"}), doctest::Contains("dt"),
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_config({"--scheme", "leapfrog"}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config({"--frobnicate", "1"}), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config({"--t-end", "1", "--snapshots", "2"}),
                         doctest::Contains("snapshots"), std::invalid_argument);
}

TEST_CASE("config file keys load and flags override them") {
    const std::string path = "io_test_config.cfg";
    {
        std::ofstream out(path);
        out << "scheme = uvms\nn = 12\ndt = 0.02\nt-end = 0.1\nsnapshots = 0.1\n";
    }
    const RunConfig cfg = parse_config({"--config", path});
    CHECK(cfg.scheme == "uvms");
    CHECK(cfg.n == 12);
    CHECK(cfg.dt == 0.02);

    const RunConfig over = parse_config({"--config", path, "--n", "24"});
    CHECK(over.n == 24);

    {
        std::ofstream out(path);
        out << "volume = 11\n";
    }
    CHECK_THROWS_AS(parse_config({"--config", path}), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("snapshot times snap to the nearest grid step") {
    RunConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    cfg.snapshots = {0.0, 0.504, 1.0};
    const auto snaps = snapshot_steps(cfg);
    REQUIRE(snaps.size() == 3);
    CHECK(snaps[0].second == 0);
    CHECK(snaps[1].second == 50);
    CHECK(snaps[2].second == 100);
}

TEST_CASE("vtk writer emits a parsable file that round-trips bit-exactly") {
    const TriMesh mesh = generate_unit_square_mesh(1);
    const FeScalarField ones(mesh, 1.0);
    const std::string path = "io_test_unit.vtk";
    write_vtk(mesh, {{"u", &ones}}, nullptr, "sigma", path);
    const VtkData d = read_vtk(path);
    CHECK(d.num_points == 4);
    CHECK(d.num_cells == 2);
    REQUIRE(d.scalars.count("u") == 1);
    for (double v : d.scalars.at("u")) CHECK(v == 1.0);
    for (const auto& p : d.points) CHECK(p[2] == 0.0);
    std::remove(path.c_str());

    // random fields survive the ASCII round trip exactly (17 significant digits)
    const TriMesh m2 = generate_unit_square_mesh(4);
    std::mt19937 rng(33u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    FeScalarField f(m2);
    for (double& v : f.values) v = dist(rng);
    FeVectorField sigma(m2);
    for (double& v : sigma.values) v = dist(rng);
    const std::string path2 = "io_test_rand.vtk";
    write_vtk(m2, {{"u", &f}}, &sigma, "sigma", path2);
    const VtkData d2 = read_vtk(path2);
    REQUIRE(d2.num_points == m2.num_vertices());
    for (int j = 0; j < m2.num_vertices(); ++j) {
        CHECK(d2.scalars.at("u")[j] == f[j]);
        CHECK(d2.vectors[j][0] == sigma.comp(j, 0));
        CHECK(d2.vectors[j][1] == sigma.comp(j, 1));
        CHECK(d2.vectors[j][2] == 0.0);
    }
    std::remove(path2.c_str());
}

TEST_CASE("csv writers: headers, shapes and empty tables") {
    const std::string path = "io_test_table.csv";
    write_errors_csv(ErrorTable{}, path);
    CHECK(slurp(path) ==
          "level,n,h,dt,e_u_L2,e_v_L2,e_m_L2,e_sigma_L2,e_u_H1,e_m_H1,"
          "order_u,order_v,order_m,order_sigma\n");

    MinimaSeries series;
    series.has_s = true;
    series.rows.push_back({0, 0.0, 0.5, 0.25, 0.125, 0.0625});
    write_minima_csv(series, path);
    CHECK(slurp(path) == "step,time,min_u,min_v,min_m,min_s\n0,0,0.5,0.25,0.125,0.0625\n");
    std::remove(path.c_str());
}

TEST_CASE("run_simulation writes zero snapshots for the zero problem") {
    TempDir dir("zero");
    RunConfig cfg;
    cfg.problem = "zero";
    cfg.n = 4;
    cfg.dt = 0.05;
    cfg.t_end = 0.2;
    cfg.snapshots = {0.0, 0.2};
    cfg.out_dir = dir.str();
    REQUIRE(run_simulation(cfg) == 0);
    const VtkData d = read_vtk((dir.path / "snapshot_4.vtk").string());
    CHECK(d.num_points == 25);
    for (const auto& [name, vals] : d.scalars)
        for (double v : vals) CHECK(v == 0.0);
    CHECK(fs::exists(dir.path / "run.json"));
    CHECK(fs::exists(dir.path / "minima.csv"));
    CHECK(fs::exists(dir.path / "diagnostics.csv"));
}

TEST_CASE("run_simulation: uvms stays nonnegative in every minima row") {
    TempDir dir("uvms");
    RunConfig cfg;
    cfg.scheme = "uvms";
    cfg.n = 8;
    cfg.dt = 0.01;
    cfg.t_end = 0.5;
    cfg.snapshots = {0.5};
    cfg.tol = 1e-12;
    cfg.out_dir = dir.str();
    REQUIRE(run_simulation(cfg) == 0);
    std::ifstream in(dir.path / "minima.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,time,min_u,min_v,min_m,min_s");
    int rows = 0;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int step;
        double t, mu, mv, mm, ms;
        ss >> step >> t >> mu >> mv >> mm >> ms;
        CHECK(mu >= -1e-12);
        CHECK(mv >= -1e-12);
        CHECK(mm >= -1e-12);
        CHECK(ms >= -1e-12);
        ++rows;
    }
    CHECK(rows == 51);
}

TEST_CASE("identical runs produce byte-identical csv outputs") {
    TempDir dir1("det1"), dir2("det2");
    RunConfig cfg;
    cfg.n = 8;
    cfg.dt = 0.01;
    cfg.t_end = 0.1;
    cfg.snapshots = {};
    cfg.out_dir = dir1.str();
    REQUIRE(run_simulation(cfg) == 0);
    cfg.out_dir = dir2.str();
    REQUIRE(run_simulation(cfg) == 0);
    CHECK(slurp((dir1.path / "minima.csv").string()) ==
          slurp((dir2.path / "minima.csv").string()));
    CHECK(slurp((dir1.path / "diagnostics.csv").string()) ==
          slurp((dir2.path / "diagnostics.csv").string()));
}

TEST_CASE("run_simulation accepts a mesh file in place of the generator") {
    TempDir dir("meshfile");
    const std::string mesh_path = (dir.path / "square.mesh").string();
    write_mesh(generate_unit_square_mesh(6), mesh_path);
    RunConfig cfg;
    cfg.mesh_file = mesh_path;
    cfg.dt = 0.05;
    cfg.t_end = 0.1;
    cfg.snapshots = {0.1};
    cfg.out_dir = (dir.path / "out").string();
    REQUIRE(run_simulation(cfg) == 0);
    const VtkData d = read_vtk((dir.path / "out" / "snapshot_2.vtk").string());
    CHECK(d.num_points == 49);
    CHECK(d.num_cells == 72);
}

TEST_CASE("run_simulation reports failures with a nonzero status") {
    RunConfig cfg;
    cfg.mesh_file = "does_not_exist.mesh";
    cfg.snapshots = {};
    cfg.t_end = 0.1;
    cfg.out_dir = "io_test_out/fail";
    CHECK(run_simulation(cfg) == 1);
    fs::remove_all("io_test_out");
}

TEST_CASE("HAPTOFEM_THREADS parsing") {
    unsetenv("HAPTOFEM_THREADS");
    CHECK(env_thread_cap() == 0);
    setenv("HAPTOFEM_THREADS", "3", 1);
    CHECK(env_thread_cap() == 3);
    setenv("HAPTOFEM_THREADS", "many", 1);
    CHECK_THROWS_AS(env_thread_cap(), std::runtime_error);
    unsetenv("HAPTOFEM_THREADS");
}
