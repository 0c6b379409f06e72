#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "agn/csv.hpp"
#include "agn/error.hpp"
#include "agn/normal.hpp"
#include "agn/rng.hpp"

using namespace agn;

TEST_CASE("rng is deterministic in its seed") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        (void)c();
    }
    CHECK(Rng(42)() != Rng(43)());
}

TEST_CASE("derived seeds differ across streams and parents") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 50; ++s) {
        for (std::uint64_t k = 0; k < 10; ++k) seen.insert(derive_seed(s, k));
    }
    CHECK(seen.size() == 500);
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("uniform, normal and below have the right moments") {
    Rng rng(1);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    std::vector<int> counts(5, 0);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        ++counts[rng.below(5)];
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
    for (int c : counts) CHECK(std::abs(c - n / 5) < 1500);
}

TEST_CASE("unit vectors have unit norm") {
    Rng rng(3);
    std::vector<double> v(7);
    for (int i = 0; i < 100; ++i) {
        rng.unit_vector(v);
        const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("random_permutation is a permutation") {
    Rng rng(5);
    for (std::size_t n : {0u, 1u, 2u, 17u, 1000u}) {
        auto p = random_permutation(n, rng);
        std::sort(p.begin(), p.end());
        std::vector<std::size_t> id(n);
        std::iota(id.begin(), id.end(), 0);
        CHECK(p == id);
    }
}

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-15));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.220960574271784e-16).epsilon(1e-12));
    CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-15));
}

TEST_CASE("normal quantile reference values and round trip") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845400543).epsilon(1e-14));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404057).epsilon(1e-13));
    for (double p = 0.001; p < 1.0; p += 0.00731) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
        // Symmetry.
        CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), InvalidArgument);
    CHECK_THROWS_AS(normal_quantile(1.0), InvalidArgument);
    CHECK_THROWS_AS(normal_quantile(std::nan("")), InvalidArgument);
}

TEST_CASE("format_number round-trips doubles") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(std::nan("")).empty());
}

TEST_CASE("csv writer quotes per RFC 4180 and the reader inverts it") {
    const auto path = std::filesystem::temp_directory_path() / "agn_test_quotes.csv";
    {
        CsvWriter w(path, {"a", "b,c"}, "agn version=test seed=1");
        w.field("plain").field("has \"quotes\", comma");
        w.end_row();
        w.field("multi\nline").field(1.5);
        w.end_row();
        w.close();
    }
    {
        CsvWriter w(std::filesystem::temp_directory_path() / "agn_test_extra.csv", {"a", "b"}, "");
        CHECK_THROWS(w.field("x").field("y").field("z"));
        CHECK_THROWS(CsvWriter(std::filesystem::temp_directory_path() / "agn_test_short.csv", {"a", "b"}, "")
                         .field("x")
                         .end_row());
    }
    const CsvTable t = read_csv(path);
    REQUIRE(t.header == std::vector<std::string>{"a", "b,c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "has \"quotes\", comma");
    CHECK(t.rows[1][0] == "multi\nline");
    CHECK(parse_number(t, 1, 1, "f") == 1.5);
    CHECK_THROWS_AS(parse_number(t, 0, 0, "f"), ParseError);
    CHECK_THROWS_AS(t.column("missing"), ParseError);
    std::filesystem::remove(path);
}

TEST_CASE("csv reader names the offending line") {
    const auto path = std::filesystem::temp_directory_path() / "agn_test_bad.csv";
    {
        std::ofstream out(path);
        out << "# comment\nx,y\n1,2\n3\n";
    }
    try {
        read_csv(path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_csv(path), IoError);
}
