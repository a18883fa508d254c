#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "levelstats/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    auto out_file = fs::temp_directory_path() / "levelstats_cli_out.txt";
    std::string cmd = std::string(LEVELSTATS_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    std::ifstream in(out_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

fs::path fresh_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / "levelstats_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("version and help") {
    auto v = run_cli("--version");
    REQUIRE(v.exit_code == 0);
    REQUIRE(v.output.find("levelstats 0.1.0") != std::string::npos);

    for (const std::string sub : {"", "run", "zeros", "figures", "merge"}) {
        auto h = run_cli(sub + " --help");
        REQUIRE(h.exit_code == 0);
    }
}

TEST_CASE("run smoke on a tiny anderson ensemble") {
    auto dir = fresh_dir("run_smoke");
    auto r = run_cli("run --model anderson --L 3 --W 10 --realizations 3 --seed 5 "
                     "--window -8,8 --margin 0.05 --signal-N 16 --fit-range 2,8 --trim 0 --out " +
                     dir.string());
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(dir / "report" / "summary.txt"));
    REQUIRE(fs::exists(dir / "plan.txt"));
    auto plan = levelstats::read_key_value_file((dir / "plan.txt").string());
    REQUIRE(plan.at("L") == "3");
}

TEST_CASE("missing required key exits 2 and names the key") {
    auto r = run_cli("run --L 3");
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.output.find("model") != std::string::npos);
}

TEST_CASE("config file with command line override") {
    auto dir = fresh_dir("cfg");
    auto cfg = dir / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "model=anderson\nL=3\nW=10\nn_realizations=2\nwindow_lo=-8\nwindow_hi=8\n"
            << "signal_length=16\nfit_min=2\nfit_max=8\ntrim=0\n";
    }
    auto out_dir = dir / "exp";
    auto r = run_cli("run --config " + cfg.string() + " --W 12 --out " + out_dir.string());
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    auto plan = levelstats::read_key_value_file((out_dir / "plan.txt").string());
    REQUIRE(plan.at("W") == "12");  // command line beats file
    REQUIRE(plan.at("L") == "3");
}

TEST_CASE("zeros command error paths") {
    auto missing = run_cli("zeros --file /nonexistent/zeros.txt");
    REQUIRE(missing.exit_code == 1);
    REQUIRE(missing.output.find("/nonexistent/zeros.txt") != std::string::npos);

    auto usage = run_cli("zeros");
    REQUIRE(usage.exit_code == 2);
}

TEST_CASE("zeros smoke and offset contract") {
    auto dir = fresh_dir("zeros_smoke");
    auto zfile = dir / "z.txt";
    {
        std::ofstream out(zfile);
        // enough synthetic "zeros" with realistic density to unfold: use
        // heights of the form matching increasing counting function
        double t = 14.13;
        for (int i = 0; i < 200; ++i) {
            out << t << "\n";
            t += 9.0 / std::log(t);  // roughly unit mean spacing after unfolding
        }
    }
    auto out_dir = dir / "out";
    auto r = run_cli("zeros --file " + zfile.string() + " --signal-N 64 --fit-range 2,16 --out " +
                     out_dir.string());
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out_dir / "report" / "summary.txt"));
    auto summary = levelstats::read_key_value_file((out_dir / "report" / "summary.txt").string());
    REQUIRE(summary.at("n_zeros") == "200");

    auto r2 = run_cli("zeros --file " + zfile.string() + " --offset 50 --signal-N 64 --fit-range 2,16 --out " +
                      (dir / "out2").string());
    REQUIRE(r2.exit_code == 0);
    auto s2 = levelstats::read_key_value_file((dir / "out2" / "report" / "summary.txt").string());
    REQUIRE(s2.at("n_zeros") == "150");
}

TEST_CASE("figures requires completed inputs and names the missing one") {
    auto r = run_cli("figures --chaotic /nope --integrable /nope --quasi /nope --zeros /nope --out " +
                     fresh_dir("figs_fail").string());
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.output.find("chaotic") != std::string::npos);

    auto r2 = run_cli("figures --integrable /nope --quasi /nope --zeros /nope --out " +
                      fresh_dir("figs_fail2").string());
    REQUIRE(r2.exit_code == 2);  // missing directory option entirely
}

TEST_CASE("figures produces the four datasets from completed runs") {
    auto base = fresh_dir("figs");
    auto make_run = [&](const std::string& name, const std::string& extra) {
        auto d = base / name;
        auto r = run_cli("run --model anderson --L 3 --W " + extra +
                         " --realizations 3 --window -20,20 --signal-N 16 --fit-range 2,8 --trim 0 --out " +
                         d.string());
        REQUIRE(r.exit_code == 0);
        return d.string();
    };
    auto chaotic = make_run("c", "6");
    auto integrable = make_run("i", "30");
    auto quasi = make_run("q", "16.5");

    auto zdir = base / "z";
    {
        auto zfile = base / "z.txt";
        {
            std::ofstream out(zfile);
            double t = 14.13;
            for (int i = 0; i < 300; ++i) {
                out << t << "\n";
                t += 9.0 / std::log(t);
            }
        }
        auto r = run_cli("zeros --file " + zfile.string() + " --signal-N 64 --fit-range 2,16 --out " +
                         zdir.string());
        INFO(r.output);
        REQUIRE(r.exit_code == 0);
    }

    auto out = base / "figures";
    auto r = run_cli("figures --chaotic " + chaotic + " --integrable " + integrable + " --quasi " + quasi +
                     " --zeros " + zdir.string() + " --out " + out.string());
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    for (const std::string f :
         {"fig1_signals.csv", "fig2_powerspectra.csv", "fig3_spacings.csv", "fig4_increments.csv"})
        REQUIRE(fs::exists(out / f));

    // fig3 reference curves integrate to one on the emitted grid
    std::ifstream fig3(out / "fig3_spacings.csv");
    std::string line;
    double integral_wigner = 0.0, integral_poisson = 0.0;
    while (std::getline(fig3, line)) {
        if (line.rfind("ref_wigner_goe,", 0) == 0) {
            auto c2 = line.rfind(',');
            integral_wigner += std::stod(line.substr(c2 + 1)) * 0.05;
        }
        if (line.rfind("ref_poisson,", 0) == 0) {
            auto c2 = line.rfind(',');
            integral_poisson += std::stod(line.substr(c2 + 1)) * 0.05;
        }
    }
    REQUIRE_THAT(integral_wigner, Catch::Matchers::WithinAbs(1.0, 1e-3));
    REQUIRE_THAT(integral_poisson, Catch::Matchers::WithinAbs(1.0, 1e-3));

    // fig4 gauss reference uses the fitted variance from the chaotic summary
    auto summary = levelstats::read_key_value_file(
        (fs::path(chaotic) / "report" / "summary.txt").string());
    const double s2 = std::stod(summary.at("sigma2"));
    std::ifstream fig4(out / "fig4_increments.csv");
    double peak = 0.0;
    while (std::getline(fig4, line)) {
        if (line.rfind("ref_gauss_chaotic,0,", 0) == 0 || line.rfind("ref_gauss_chaotic,-0,", 0) == 0) {
            auto c2 = line.rfind(',');
            peak = std::stod(line.substr(c2 + 1));
        }
    }
    REQUIRE(peak > 0.0);
    const double expected_peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * s2);
    REQUIRE_THAT(peak, Catch::Matchers::WithinRel(expected_peak, 0.05));  // grid point near mu
}

TEST_CASE("idempotent rerun through the cli") {
    auto dir = fresh_dir("idem");
    const std::string cmd = "run --model anderson --L 3 --W 8 --realizations 2 --window -8,8 "
                            "--signal-N 16 --fit-range 2,8 --trim 0 --out " + dir.string();
    REQUIRE(run_cli(cmd).exit_code == 0);
    auto first = [&] {
        std::ifstream in(dir / "report" / "summary.txt");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }();
    REQUIRE(run_cli(cmd).exit_code == 0);
    std::ifstream in(dir / "report" / "summary.txt");
    std::ostringstream ss;
    ss << in.rdbuf();
    REQUIRE(ss.str() == first);
}
