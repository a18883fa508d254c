#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "levelstats/ensemble.hpp"

using namespace levelstats;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / "levelstats_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentPlan small_plan(const std::string& dir) {
    ExperimentPlan p;
    p.model = ModelKind::Anderson;
    p.L = 5;
    p.W = 10.0;
    p.n_realizations = 6;
    p.base_seed = 77;
    p.window_lo = -6.0;
    p.window_hi = 6.0;
    p.margin = 0.05;
    p.trim = 0.02;
    p.signal_length = 32;
    p.fit_min = 2;
    p.fit_max = 10;
    p.output_dir = dir;
    return p;
}

const std::vector<std::string> report_files = {
    "report/summary.txt", "report/power_spectrum.csv", "report/spacing_histogram.csv",
    "report/increment_histogram.csv", "report/level_signal.csv"};

}  // namespace

TEST_CASE("single w=0 cube realization report") {
    auto dir = fresh_dir("cube");
    ExperimentPlan p;
    p.L = 2;
    p.W = 0.0;
    p.n_realizations = 1;
    p.window_lo = -4.0;
    p.window_hi = 4.0;
    p.margin = 0.0;
    p.trim = 0.0;
    p.signal_length = 64;  // unreachable with 8 levels; spacing stats only
    p.output_dir = dir.string();
    auto rep = run_experiment(p);
    REQUIRE(rep.n_used == 1);
    REQUIRE(rep.n_levels == 8);

    auto cached = Spectrum::load((dir / "spectra" / "realization_00000.txt").string());
    const std::vector<double> cube{-3, -1, -1, -1, 1, 1, 1, 3};
    REQUIRE(cached.values.size() == cube.size());
    for (std::size_t i = 0; i < cube.size(); ++i)
        REQUIRE_THAT(cached.values[i], Catch::Matchers::WithinAbs(cube[i], 1e-10));
}

TEST_CASE("plan hash ignores realization ranges but not physics") {
    auto a = small_plan("x");
    auto b = small_plan("y");
    b.n_realizations = 99;
    b.realization_offset = 5;
    REQUIRE(a.hash() == b.hash());
    b.W = 11.0;
    REQUIRE(a.hash() != b.hash());
}

TEST_CASE("warm cache rerun is byte identical and reuses spectra") {
    auto dir = fresh_dir("warm");
    auto plan = small_plan(dir.string());
    run_experiment(plan);
    std::map<std::string, std::string> first;
    for (const auto& f : report_files) first[f] = slurp(dir / f);
    auto t0 = fs::last_write_time(dir / "spectra" / "realization_00000.txt");

    run_experiment(plan);
    for (const auto& f : report_files) REQUIRE(slurp(dir / f) == first[f]);
    REQUIRE(fs::last_write_time(dir / "spectra" / "realization_00000.txt") == t0);
}

TEST_CASE("cold reruns are deterministic") {
    auto d1 = fresh_dir("cold1");
    auto d2 = fresh_dir("cold2");
    auto p1 = small_plan(d1.string());
    auto p2 = small_plan(d2.string());
    run_experiment(p1);
    run_experiment(p2);
    for (const auto& f : report_files) REQUIRE(slurp(d1 / f) == slurp(d2 / f));
}

TEST_CASE("stale cache entries are recomputed, not reused") {
    auto dir = fresh_dir("stale");
    auto plan = small_plan(dir.string());
    run_experiment(plan);
    const auto file = dir / "spectra" / "realization_00002.txt";
    {
        std::ofstream out(file);
        out << "# solve=0000000000000000\n# realization=2\n1.0\n2.0\n";
    }
    run_experiment(plan);
    auto recomputed = Spectrum::load(file.string());
    REQUIRE(recomputed.meta.at("solve") == plan.solve_hash());
    REQUIRE(recomputed.values.size() > 2);
}

TEST_CASE("merge of disjoint partial runs equals the monolithic run") {
    auto da = fresh_dir("part_a");
    auto db = fresh_dir("part_b");
    auto dm = fresh_dir("merged");
    auto dfull = fresh_dir("full");

    auto pa = small_plan(da.string());
    pa.n_realizations = 3;
    auto pb = small_plan(db.string());
    pb.realization_offset = 3;
    pb.n_realizations = 3;
    run_experiment(pa);
    run_experiment(pb);
    merge_experiments({da.string(), db.string()}, dm.string());

    auto pf = small_plan(dfull.string());
    run_experiment(pf);

    for (const auto& f : report_files) {
        // summary echoes output_dir-free plan fields only; compare everything
        REQUIRE(slurp(dm / f) == slurp(dfull / f));
    }
}

TEST_CASE("merge rejects overlaps, gaps and mismatched plans") {
    auto da = fresh_dir("m_a");
    auto db = fresh_dir("m_b");
    auto pa = small_plan(da.string());
    pa.n_realizations = 3;
    run_experiment(pa);

    auto pb = small_plan(db.string());
    pb.realization_offset = 2;  // overlaps 0..2
    pb.n_realizations = 3;
    run_experiment(pb);
    REQUIRE_THROWS_AS(merge_experiments({da.string(), db.string()}, fresh_dir("m_o").string()),
                      ConfigError);

    auto dc = fresh_dir("m_c");
    auto pc = small_plan(dc.string());
    pc.realization_offset = 5;  // leaves a gap 3..4
    pc.n_realizations = 2;
    run_experiment(pc);
    REQUIRE_THROWS_AS(merge_experiments({da.string(), dc.string()}, fresh_dir("m_g").string()),
                      ConfigError);

    auto dd = fresh_dir("m_d");
    auto pd = small_plan(dd.string());
    pd.realization_offset = 3;
    pd.n_realizations = 2;
    pd.W = 12.0;  // different physics
    run_experiment(pd);
    REQUIRE_THROWS_AS(merge_experiments({da.string(), dd.string()}, fresh_dir("m_p").string()),
                      ConfigError);
}

TEST_CASE("merge of singles equals one multi-realization run") {
    std::vector<std::string> parts;
    for (int i = 0; i < 3; ++i) {
        auto d = fresh_dir("s" + std::to_string(i));
        auto p = small_plan(d.string());
        p.realization_offset = static_cast<std::size_t>(i);
        p.n_realizations = 1;
        run_experiment(p);
        parts.push_back(d.string());
    }
    auto dm = fresh_dir("s_merged");
    merge_experiments(parts, dm.string());

    auto dfull = fresh_dir("s_full");
    auto pf = small_plan(dfull.string());
    pf.n_realizations = 3;
    run_experiment(pf);
    REQUIRE(slurp(dm / "report/summary.txt") == slurp(dfull / "report/summary.txt"));
}

TEST_CASE("total failure aborts with failures recorded") {
    auto dir = fresh_dir("fail");
    ExperimentPlan p;
    p.model = ModelKind::Anderson;
    p.L = 2;
    p.W = 1.0;
    p.boundary = Boundary::Periodic;  // rejected by the builder
    p.n_realizations = 2;
    p.output_dir = dir.string();
    REQUIRE_THROWS_AS(run_experiment(p), SolverError);
    REQUIRE(fs::exists(dir / "failures.txt"));
}

TEST_CASE("staircase unfolding on a single realization falls back to pooled") {
    auto dir = fresh_dir("single_stair");
    ExperimentPlan p = small_plan(dir.string());
    p.n_realizations = 1;
    auto rep = run_experiment(p);  // must not throw
    REQUIRE(rep.n_used == 1);
}

TEST_CASE("harper plan runs the tridiagonal path") {
    auto dir = fresh_dir("harper");
    ExperimentPlan p;
    p.model = ModelKind::Harper;
    p.sites = 512;
    p.n_realizations = 2;  // second realization gets a derived phase
    p.window_lo = -2.8;
    p.window_hi = 2.8;
    p.margin = 0.0;
    p.unfolding = {.kind = IdosKind::Polynomial, .degree = 3};
    p.signal_length = 128;
    p.fit_min = 2;
    p.fit_max = 16;
    p.output_dir = dir.string();
    auto rep = run_experiment(p);
    REQUIRE(rep.n_used == 2);
    REQUIRE(rep.analysis.n_signals == 2);
    REQUIRE(rep.analysis.alpha_fit.has_value());
}

TEST_CASE("analysis parameter changes reuse the solve cache") {
    auto dir = fresh_dir("reuse_a");
    auto plan = small_plan(dir.string());
    run_experiment(plan);
    auto t0 = fs::last_write_time(dir / "spectra" / "realization_00003.txt");

    auto dir2 = fresh_dir("reuse_b");
    auto plan2 = small_plan(dir2.string());
    plan2.signal_length = 16;
    plan2.unfolding = {.kind = IdosKind::Polynomial, .degree = 3};
    REQUIRE(plan2.hash() != plan.hash());
    REQUIRE(plan2.solve_hash() == plan.solve_hash());
    fs::create_directories(dir2 / "spectra");
    for (const auto& e : fs::directory_iterator(dir / "spectra"))
        fs::copy_file(e.path(), dir2 / "spectra" / e.path().filename());
    auto t1 = fs::last_write_time(dir2 / "spectra" / "realization_00003.txt");
    run_experiment(plan2);
    // borrowed cache entries were accepted as-is, not recomputed
    REQUIRE(fs::last_write_time(dir2 / "spectra" / "realization_00003.txt") == t1);
    REQUIRE(fs::last_write_time(dir / "spectra" / "realization_00003.txt") == t0);
}

TEST_CASE("plan round trip through serialization") {
    auto p = small_plan("dir");
    p.unfolding = {.kind = IdosKind::GaussianBroadened, .width = 1.5};
    p.solver = SolverChoice::Lanczos;
    auto kv = p.to_map();
    kv["output_dir"] = "dir";
    auto q = plan_io::from_map(kv);
    REQUIRE(q.hash() == p.hash());
    REQUIRE(q.n_realizations == p.n_realizations);
    REQUIRE(q.solver == SolverChoice::Lanczos);
}
