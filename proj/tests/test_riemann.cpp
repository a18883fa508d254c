#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "levelstats/riemann.hpp"
#include "levelstats/series_stats.hpp"
#include "levelstats/unfolding.hpp"

using namespace levelstats;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << body;
    return path;
}

std::filesystem::path fixture_path() {
    return std::filesystem::path(LEVELSTATS_SOURCE_DIR) / "data" / "zeta_zeros_first_10000.txt";
}

}  // namespace

TEST_CASE("load zeros parses a small table") {
    auto p = write_temp("zeros_ok.txt", "# first three zeros\n14.134725\n21.022040\n25.010858\n");
    auto t = load_zeros(p.string());
    REQUIRE(t.size() == 3);
    REQUIRE_THAT(t.heights[0], Catch::Matchers::WithinAbs(14.134725, 1e-9));
}

TEST_CASE("load zeros rejects bad input") {
    auto empty = write_temp("zeros_empty.txt", "# nothing\n");
    REQUIRE_THROWS_AS(load_zeros(empty.string()), DataError);

    auto unordered = write_temp("zeros_unordered.txt", "14.1\n25.0\n21.0\n");
    try {
        load_zeros(unordered.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        REQUIRE(std::string(e.what()).find(":3") != std::string::npos);  // line named
    }

    auto garbage = write_temp("zeros_garbage.txt", "14.1\nnot-a-number\n");
    try {
        load_zeros(garbage.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        REQUIRE(std::string(e.what()).find(":2") != std::string::npos);
    }

    REQUIRE_THROWS_AS(load_zeros("/nonexistent/zeros.txt"), DataError);
}

TEST_CASE("smooth counting function at the first zero") {
    // direct evaluation: (t/2pi) ln(t/(2pi e)) + 7/8 at t1 = 14.134725...
    const double t1 = 14.134725141734695;
    REQUIRE_THAT(smooth_zero_count(t1), Catch::Matchers::WithinAbs(0.449277872743, 1e-8));
    // the first zero sits near count 1, within the O(1) fluctuation band
    REQUIRE(std::abs(smooth_zero_count(t1) - 1.0) < 1.0);
}

TEST_CASE("unfold zeros on the small table") {
    auto p = write_temp("zeros3.txt", "14.134725\n21.022040\n25.010858\n");
    auto t = load_zeros(p.string());
    auto u = unfold_zeros(t);
    REQUIRE(u.levels.size() == 3);
    REQUIRE(std::is_sorted(u.levels.begin(), u.levels.end()));
    REQUIRE(u.levels[0] < u.levels[1]);

    auto low = write_temp("zeros_low.txt", "5.0\n14.1\n");
    REQUIRE_THROWS_AS(unfold_zeros(load_zeros(low.string())), DomainError);
}

TEST_CASE("bundled fixture: counting function stays pinned to the index") {
    if (!std::filesystem::exists(fixture_path())) SKIP("fixture not generated yet");
    auto t = load_zeros(fixture_path().string());
    REQUIRE(t.size() == 10000);
    auto u = unfold_zeros(t);
    double max_drift = 0.0;
    for (std::size_t i = 0; i < u.levels.size(); ++i)
        max_drift = std::max(max_drift, std::abs(u.levels[i] - static_cast<double>(i + 1)));
    REQUIRE(max_drift < 3.0);  // fluctuating part is O(log t), no linear drift

    auto s = spacings(u);
    REQUIRE_THAT(s.mean_spacing, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("bundled fixture: GUE signatures") {
    if (!std::filesystem::exists(fixture_path())) SKIP("fixture not generated yet");
    auto t = load_zeros(fixture_path().string());
    auto u = unfold_zeros(t, 0, 0, /*rescale=*/true);
    auto s = spacings(u);

    // beta = 2 level repulsion near S -> 0, clearly away from beta = 1
    const double beta = small_s_exponent(s.spacings);
    REQUIRE_THAT(beta, Catch::Matchers::WithinAbs(2.0, 0.3));

    // offset parameter drops the leading zeros
    auto off = unfold_zeros(t, 5000);
    REQUIRE(off.levels.size() == t.size() - 5000);
    REQUIRE(off.levels.front() > 4990.0);
}
