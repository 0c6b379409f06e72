#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "agn/distributions.hpp"
#include "agn/error.hpp"
#include "agn/harness/oracle.hpp"
#include "agn/matrix.hpp"
#include "agn/normal.hpp"
#include "agn/rng.hpp"

using namespace agn;

namespace {

DistributionSpec two_gaussian(double margin, double boundary, double p) {
    DistributionSpec s;
    s.margin = margin;
    s.boundary = boundary;
    s.rcn_rate = p;
    return s;
}

DistributionSpec absolute(double b) {
    DistributionSpec s;
    s.kind = DistributionKind::absolute_boundary;
    s.boundary = b;
    return s;
}

}  // namespace

TEST_CASE("two-Gaussian samples avoid the removed slab") {
    Rng rng(1);
    const Dataset d = sample(two_gaussian(0.5, 2.04, 0.1), rng, 100000);
    for (std::size_t i = 0; i < d.size(); ++i) REQUIRE(std::abs(d.x(i)[0]) > 0.5);
}

TEST_CASE("sampling is deterministic in the seed") {
    Rng a(77), b(77);
    CHECK(sample(two_gaussian(0.5, 2.04, 0.1), a, 5000) == sample(two_gaussian(0.5, 2.04, 0.1), b, 5000));
    Rng c(78);
    Rng d(77);
    CHECK_FALSE(sample(absolute(2.0), c, 100) == sample(absolute(2.0), d, 100));
}

TEST_CASE("two-Gaussian class balance and mirror symmetry") {
    Rng rng(2);
    const std::size_t n = 400000;
    const Dataset d = sample(two_gaussian(0.5, 2.04, 0.1), rng, n);
    double pos = 0, right = 0, right_pos = 0, left_neg = 0, left = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pos += d.y(i) > 0;
        if (d.x(i)[0] > 0) {
            ++right;
            right_pos += d.y(i) > 0;
        } else {
            ++left;
            left_neg += d.y(i) < 0;
        }
    }
    const double se = std::sqrt(0.25 / n);
    CHECK(std::abs(pos / n - 0.5) <= 3 * se);
    CHECK(std::abs(right / n - 0.5) <= 3 * se);
    // Under x1 -> -x1 with a label flip the joint law is unchanged.
    const double pr = right_pos / right, pl = left_neg / left;
    CHECK(std::abs(pr - pl) <= 3 * std::sqrt(pr * (1 - pr) * (1 / right + 1 / left)));
}

TEST_CASE("rejection cap signals impossible parameters") {
    Rng rng(3);
    std::vector<double> x(2);
    CHECK_THROWS_AS(draw(two_gaussian(40.0, 45.0, 0.1), rng, x), InfeasibleSpec);
}

TEST_CASE("closed-form OPT_lin for the two-Gaussian family") {
    CHECK(opt_lin_two_gaussian(0.5, 0.5, 0.1) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(opt_lin_two_gaussian(0.7, 0.7, 0.23) == doctest::Approx(0.23).epsilon(1e-14));
    // Rounded boundary: within 0.005 of the quoted 0.25.
    CHECK(std::abs(opt_lin_two_gaussian(0.5, 2.04, 0.1) - 0.25) <= 0.005);
    CHECK(opt_lin_two_gaussian(0.5, 2.04, 0.1) == doctest::Approx(0.2469989622859879).epsilon(1e-12));
    CHECK_THROWS_AS(opt_lin_two_gaussian(0.5, 0.4, 0.1), InvalidArgument);
    CHECK_THROWS_AS(opt_lin_two_gaussian(0.5, 1.0, 0.5), InvalidArgument);
}

TEST_CASE("Bayes risk closed form") {
    CHECK(bayes_risk_two_gaussian(0.5, 2.04, 0.0) == 0.0);
    CHECK(bayes_risk_two_gaussian(0.5, 40.0, 0.1) < 1e-300);
    CHECK(bayes_risk_two_gaussian(0.5, 2.04, 0.1) == doctest::Approx(0.08366678196822358).epsilon(1e-12));
    for (double g : {0.0, 0.25, 0.5, 1.0}) {
        for (double b = g; b < g + 4.0; b += 0.37) {
            for (double p : {0.0, 0.1, 0.3, 0.49}) {
                // The closed form is the error of e1; -e1 achieves one minus it.
                const double e1 = opt_lin_two_gaussian(g, b, p);
                CHECK(bayes_risk_two_gaussian(g, b, p) <= std::min(e1, 1.0 - e1) + 1e-15);
            }
        }
    }
}

TEST_CASE("boundary_from_opt") {
    const double b = boundary_from_opt(0.5, 0.1, 0.25);
    CHECK(b == doctest::Approx(2.053086337801493).epsilon(1e-12));
    CHECK(std::abs(b - 2.04) <= 0.02);
    for (double opt = 0.12; opt <= 0.4501; opt += 0.03) {
        CHECK(opt_lin_two_gaussian(0.5, boundary_from_opt(0.5, 0.1, opt), 0.1) == doctest::Approx(opt).epsilon(1e-10));
    }
    // opt equal to the value at b = margin gives b = margin.
    CHECK(boundary_from_opt(0.5, 0.1, 0.1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_THROWS_AS(boundary_from_opt(0.5, 0.1, 0.05), InfeasibleSpec);
    CHECK_THROWS_AS(boundary_from_opt(0.5, 0.1, 1.5), InfeasibleSpec);
    CHECK_THROWS_AS(boundary_from_opt(0.5, 0.1, 0.5), InfeasibleSpec);
}

TEST_CASE("absolute-boundary OPT_lin") {
    CHECK(opt_lin_absolute(1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(opt_lin_absolute(2.0) == doctest::Approx(0.35241638234956674).epsilon(1e-14));
    CHECK(opt_lin_absolute(1e9) == doctest::Approx(0.5).epsilon(1e-9));
    double prev = 0.0;
    for (double b = 0.01; b < 50.0; b *= 1.3) {
        const double v = opt_lin_absolute(b);
        CHECK(v > prev);
        prev = v;
        CHECK(absolute_boundary_from_opt(v) == doctest::Approx(b).epsilon(1e-9));
    }
    CHECK(absolute_boundary_from_opt(0.08) == doctest::Approx(0.2567563603677268).epsilon(1e-12));
    CHECK_THROWS_AS(opt_lin_absolute(0.0), InvalidArgument);
    CHECK_THROWS_AS(opt_lin_absolute(-1.0), InvalidArgument);
}

TEST_CASE("Monte-Carlo oracles agree with the closed forms") {
    SUBCASE("two-Gaussian at the exact OPT_lin = 0.25 boundary") {
        const auto est = mc_oracle_opt_lin(two_gaussian(0.5, boundary_from_opt(0.5, 0.1, 0.25), 0.1), 1000000, 11);
        CHECK(std::abs(est.estimate - 0.25) <= 3 * est.standard_error);
    }
    SUBCASE("two-Gaussian at the rounded boundary 2.04") {
        const auto est = mc_oracle_opt_lin(two_gaussian(0.5, 2.04, 0.1), 1000000, 12);
        CHECK(std::abs(est.estimate - opt_lin_two_gaussian(0.5, 2.04, 0.1)) <= 3 * est.standard_error);
        CHECK(std::abs(est.estimate - 0.25) <= 0.005);
    }
    SUBCASE("two-Gaussian b = 3.5 with 1e7 samples") {
        const auto est = mc_oracle_opt_lin(two_gaussian(0.5, 3.5, 0.1), 10000000, 13);
        CHECK(std::abs(est.estimate - opt_lin_two_gaussian(0.5, 3.5, 0.1)) <= 3 * est.standard_error);
    }
    SUBCASE("Bayes rule at b = 2.04 with 1e7 samples") {
        const auto est = mc_oracle_bayes(two_gaussian(0.5, 2.04, 0.1), 10000000, 14);
        CHECK(std::abs(est.estimate - bayes_risk_two_gaussian(0.5, 2.04, 0.1)) <= 3 * est.standard_error);
    }
    SUBCASE("absolute boundary b = 1 and b = 0.3") {
        const auto e1 = mc_oracle_opt_lin(absolute(1.0), 1000000, 15);
        CHECK(std::abs(e1.estimate - 0.25) <= 3 * e1.standard_error);
        const auto e2 = mc_oracle_opt_lin(absolute(0.3), 10000000, 16);
        CHECK(std::abs(e2.estimate - opt_lin_absolute(0.3)) <= 3 * e2.standard_error);
        // Every tilt within atan(b) of (0, -1) is optimal.
        CHECK(e2.direction[1] <= -std::cos(std::atan(0.3)) + 2e-3);
    }
    SUBCASE("absolute boundary b -> 0") {
        const auto est = mc_oracle_opt_lin(absolute(1e-3), 100000, 17);
        CHECK(est.estimate < 0.002);
    }
    CHECK_THROWS_AS(mc_oracle_opt_lin(absolute(1.0), 100, 1), InvalidArgument);
}

TEST_CASE("Bayes rule and optimal halfspace") {
    const DistributionSpec s = two_gaussian(0.5, 2.0, 0.1);
    CHECK(bayes_predict(s, std::vector<double>{1.0, 0.0}) == -1);
    CHECK(bayes_predict(s, std::vector<double>{3.0, 0.0}) == 1);
    CHECK(bayes_predict(s, std::vector<double>{-3.0, 0.0}) == -1);
    CHECK(bayes_predict(absolute(1.0), std::vector<double>{1.0, 0.5}) == 1);
    for (const auto& spec : {s, absolute(2.0)}) {
        const auto v = optimal_halfspace(spec);
        CHECK(std::sqrt(dot(v, v)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const AnalyticProfile prof = analytic_profile(absolute(2.0));
    CHECK(prof.bayes_risk == 0.0);
    CHECK(prof.anticoncentration.value() == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
    CHECK_FALSE(prof.subexp_norm_estimated);
}

TEST_CASE("soft-margin estimates") {
    Rng rng(21);
    const Dataset hard = sample(two_gaussian(0.5, 2.04, 0.1), rng, 50000);
    const std::vector<double> v = {1.0, 0.0};
    const std::vector<double> grid = {0.0, 0.1, 0.3, 0.49, 0.6, 1.0};
    const auto est = estimate_soft_margin(hard, v, grid);
    for (std::size_t i = 0; i < 4; ++i) CHECK(est[i].second == 0.0);
    CHECK(est[4].second > 0.0);
    for (std::size_t i = 1; i < est.size(); ++i) CHECK(est[i].second >= est[i - 1].second);

    const Dataset gauss = sample(absolute(1.0), rng, 100000);
    std::vector<double> u(2);
    for (int trial = 0; trial < 5; ++trial) {
        rng.unit_vector(u);
        const auto g = estimate_soft_margin(gauss, u, grid);
        CHECK(g[0].second == 0.0);
        for (const auto& [gamma, phi] : g) CHECK(phi <= 2.0 * gamma + 0.01);
    }
    CHECK_THROWS_AS(estimate_soft_margin(Dataset(2), v, grid), InvalidArgument);
}

TEST_CASE("sub-exponential norm estimates") {
    Rng rng(31);
    SUBCASE("bounded support") {
        Dataset d(2);
        std::vector<double> x(2);
        for (int i = 0; i < 20000; ++i) {
            x[0] = 2.0 * rng.uniform() - 1.0;
            x[1] = 2.0 * rng.uniform() - 1.0;
            d.push_back(x, 1);
        }
        const auto e = estimate_subexp_norm(d);
        CHECK(std::isfinite(e.c));
        CHECK(e.c <= 2.0);
        CHECK_FALSE(e.heavy_tail);
    }
    SUBCASE("standard Gaussian in one dimension") {
        Dataset d(1);
        std::vector<double> x(1);
        for (int i = 0; i < 1000000; ++i) {
            x[0] = rng.normal();
            d.push_back(x, 1);
        }
        const auto e = estimate_subexp_norm(d);
        CHECK(e.c >= 0.5);
        CHECK(e.c <= 2.0);
    }
    SUBCASE("Student t with 2 degrees of freedom is flagged") {
        Dataset d(1);
        std::vector<double> x(1);
        for (int i = 0; i < 100000; ++i) {
            const double a = rng.normal(), b = rng.normal();
            x[0] = rng.normal() / std::sqrt((a * a + b * b) / 2.0);
            d.push_back(x, 1);
        }
        const auto e = estimate_subexp_norm(d);
        CHECK((e.heavy_tail || !std::isfinite(e.c) || e.c > 5.0));
    }
    CHECK_THROWS_AS(estimate_subexp_norm(Dataset(2)), InvalidArgument);
}

TEST_CASE("sample export round trips") {
    Rng rng(41);
    const Dataset d = sample(two_gaussian(0.5, 2.04, 0.1), rng, 1000);
    const auto dir = std::filesystem::temp_directory_path();
    write_samples_csv(d, dir / "agn_samples.csv", "agn version=test seed=41");
    write_samples_binary(d, dir / "agn_samples.bin");
    CHECK(read_samples_csv(dir / "agn_samples.csv") == d);
    CHECK(read_samples_binary(dir / "agn_samples.bin") == d);
    {
        std::ofstream out(dir / "agn_bad_samples.csv");
        out << "x1,x2,y\n1,2,1\n1,oops,1\n";
    }
    try {
        read_samples_csv(dir / "agn_bad_samples.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
}

TEST_CASE("distribution parameter validation") {
    CHECK_THROWS_AS(two_gaussian(0.5, 0.4, 0.1).validate(), InvalidArgument);
    CHECK_THROWS_AS(two_gaussian(-0.1, 1.0, 0.1).validate(), InvalidArgument);
    CHECK_THROWS_AS(two_gaussian(0.5, 1.0, 0.5).validate(), InvalidArgument);
    CHECK_THROWS_AS(absolute(0.0).validate(), InvalidArgument);
    DistributionSpec s = absolute(1.0);
    s.dimension = 1;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    CHECK_NOTHROW(two_gaussian(0.5, 0.5, 0.1).validate());
}
