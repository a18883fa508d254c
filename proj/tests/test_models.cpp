#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "levelstats/models.hpp"
#include "levelstats/series_stats.hpp"

using namespace levelstats;

TEST_CASE("anderson single site") {
    auto m = build_anderson({.L = 1, .W = 10.0, .seed = 7});
    REQUIRE(m.dim() == 1);
    REQUIRE(m.off_diagonal().empty());
    REQUIRE(m.diagonal()[0] >= -5.0);
    REQUIRE(m.diagonal()[0] <= 5.0);
}

TEST_CASE("anderson open boundary edge count") {
    // open cubic lattice: 3 * L^2 * (L-1) bonds
    auto m = build_anderson({.L = 3, .W = 1.0, .seed = 1});
    REQUIRE(m.dim() == 27);
    REQUIRE(m.off_diagonal().size() == 54);
    for (const auto& e : m.off_diagonal()) {
        REQUIRE(e.value == 1.0);
        REQUIRE(e.row < e.col);
    }
}

TEST_CASE("anderson periodic boundary edge count") {
    auto m = build_anderson({.L = 4, .W = 1.0, .seed = 1, .boundary = Boundary::Periodic});
    REQUIRE(m.off_diagonal().size() == 3u * 4 * 4 * 4);  // 3 bonds per site on a torus
    REQUIRE_THROWS_AS(build_anderson({.L = 2, .W = 1.0, .seed = 1, .boundary = Boundary::Periodic}),
                      DataError);
}

TEST_CASE("anderson determinism and disorder statistics") {
    AndersonParams p{.L = 10, .W = 16.5, .seed = 424242};
    auto a = build_anderson(p);
    auto b = build_anderson(p);
    REQUIRE(std::equal(a.diagonal().begin(), a.diagonal().end(), b.diagonal().begin()));

    auto c = build_anderson({.L = 10, .W = 16.5, .seed = 424243});
    bool differs = !std::equal(a.diagonal().begin(), a.diagonal().end(), c.diagonal().begin());
    REQUIRE(differs);

    double mean = 0.0;
    for (double d : a.diagonal()) {
        REQUIRE(std::abs(d) <= p.W / 2);
        mean += d;
    }
    mean /= static_cast<double>(a.dim());
    const double bound = 4.0 * (p.W / std::sqrt(12.0)) / std::sqrt(static_cast<double>(a.dim()));
    REQUIRE(std::abs(mean) <= bound);
}

TEST_CASE("anderson size guard") {
    REQUIRE_THROWS_AS(build_anderson({.L = 2000, .W = 1.0, .seed = 0}), SizeError);
}

TEST_CASE("harper structure") {
    auto m1 = build_harper({.N = 1});
    REQUIRE(m1.dim() == 1);
    const double sigma = (std::sqrt(5.0) - 1.0) / 2.0;
    REQUIRE_THAT(m1.diagonal()[0],
                 Catch::Matchers::WithinAbs(2.0 * std::cos(2.0 * std::numbers::pi * sigma), 1e-12));
    REQUIRE_THAT(m1.diagonal()[0], Catch::Matchers::WithinAbs(-1.4747377562, 1e-9));

    auto m2 = build_harper({.N = 2});
    REQUIRE(m2.off_diagonal().size() == 1);
    REQUIRE(m2.off_diagonal()[0].row == 0);
    REQUIRE(m2.off_diagonal()[0].col == 1);
    REQUIRE(m2.off_diagonal()[0].value == 1.0);

    auto m = build_harper({.N = 4096, .phase = std::numbers::pi / 2});
    for (double d : m.diagonal()) REQUIRE(std::abs(d) <= 2.0);
    REQUIRE(m.is_tridiagonal());
}

TEST_CASE("matrix dump format") {
    auto m = build_harper({.N = 2});
    std::ostringstream os;
    m.dump(os);
    std::string text = os.str();
    REQUIRE(text.find("0 1 1\n") != std::string::npos);
}

TEST_CASE("reference spacing samplers") {
    const std::size_t n = 100000;

    auto stats = [](const SpacingSeries& s) {
        double mean = 0.0, var = 0.0;
        for (double v : s.spacings) mean += v;
        mean /= static_cast<double>(s.size());
        for (double v : s.spacings) var += (v - mean) * (v - mean);
        var /= static_cast<double>(s.size() - 1);
        return std::pair{mean, var};
    };

    auto [mp, vp] = stats(sample_reference_spacings(SpacingKind::Poisson, n, 11));
    REQUIRE_THAT(mp, Catch::Matchers::WithinAbs(1.0, 0.02));
    REQUIRE_THAT(vp, Catch::Matchers::WithinAbs(1.0, 0.05));

    auto [mw, vw] = stats(sample_reference_spacings(SpacingKind::WignerGOE, n, 12));
    REQUIRE_THAT(mw, Catch::Matchers::WithinAbs(1.0, 0.02));
    REQUIRE_THAT(vw, Catch::Matchers::WithinAbs(4.0 / std::numbers::pi - 1.0, 0.02));

    auto [ms, vs] = stats(sample_reference_spacings(SpacingKind::SemiPoisson, n, 13));
    REQUIRE_THAT(ms, Catch::Matchers::WithinAbs(1.0, 0.02));
    REQUIRE_THAT(vs, Catch::Matchers::WithinAbs(0.5, 0.02));
}

TEST_CASE("reference sampler CDF agreement") {
    const std::size_t n = 100000;
    auto check = [n](SpacingKind kind, const ReferenceCurve& ref, std::uint64_t seed) {
        auto s = sample_reference_spacings(kind, n, seed);
        REQUIRE(ks_distance(s.spacings, ref.cdf) < 0.02);
    };
    check(SpacingKind::Poisson, reference::poisson(), 21);
    check(SpacingKind::WignerGOE, reference::wigner_goe(), 22);
    check(SpacingKind::SemiPoisson, reference::semi_poisson(), 23);
}

TEST_CASE("sampler determinism per seed") {
    auto a = sample_reference_spacings(SpacingKind::Poisson, 100, 5);
    auto b = sample_reference_spacings(SpacingKind::Poisson, 100, 5);
    REQUIRE(a.spacings == b.spacings);
}
