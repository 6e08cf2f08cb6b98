#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/rng.hpp"

using namespace mfg;

TEST_CASE("grid invariants") {
    CHECK_THROWS(Grid1D(1.0, 0.0, 100));
    CHECK_THROWS(Grid1D(0.0, 1.0, 4));
    const Grid1D g(0.0, 1.0, 101);
    CHECK(g.h == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("pair: mass of the uniform density") {
    const Grid1D g(0.0, 1.0, 101);
    const GridMeasure m(g, std::vector<double>(101, 1.0));
    const std::vector<double> one(101, 1.0);
    CHECK(pair(one, m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pair: odd integrand against a symmetric measure") {
    const Grid1D g(-1.0, 1.0, 201);
    std::vector<double> d(201), phi(201);
    for (int j = 0; j < 201; ++j) {
        const double x = g.x(j);
        d[static_cast<size_t>(j)] = std::exp(-x * x);
        phi[static_cast<size_t>(j)] = x;
    }
    CHECK(std::fabs(pair(phi, GridMeasure(g, d))) < 1e-12);
}

TEST_CASE("pair: second moment of a mollified delta") {
    const Grid1D g(0.0, 1.0, 101);
    const double bw = 0.05;
    const GridMeasure m = mollified_delta(g, 0.5, bw);
    std::vector<double> phi(101);
    for (int j = 0; j < 101; ++j) phi[static_cast<size_t>(j)] = g.x(j) * g.x(j);
    // Gaussian second moment: center^2 + bandwidth^2.
    CHECK(pair(phi, m) == doctest::Approx(0.25 + bw * bw).epsilon(1e-3));
}

TEST_CASE("pair rejects length mismatch") {
    const Grid1D g(0.0, 1.0, 101);
    const GridMeasure m(g, std::vector<double>(101, 1.0));
    CHECK_THROWS(pair(std::vector<double>(100, 1.0), m));
}

TEST_CASE("pair is bilinear") {
    const Grid1D g(-2.0, 2.0, 101);
    std::vector<double> phi(101), psi(101), d(101);
    for (int j = 0; j < 101; ++j) {
        phi[static_cast<size_t>(j)] = philox_uniform({0u, 1u, static_cast<uint32_t>(j), 0u}, {5u, 0u});
        psi[static_cast<size_t>(j)] = philox_uniform({0u, 2u, static_cast<uint32_t>(j), 0u}, {5u, 0u});
        d[static_cast<size_t>(j)] = philox_uniform({0u, 3u, static_cast<uint32_t>(j), 0u}, {5u, 0u});
    }
    const GridMeasure m(g, d);
    const double a = 1.7, b = -0.4;
    std::vector<double> combo(101);
    for (int j = 0; j < 101; ++j)
        combo[static_cast<size_t>(j)] = a * phi[static_cast<size_t>(j)] + b * psi[static_cast<size_t>(j)];
    CHECK(pair(combo, m) ==
          doctest::Approx(a * pair(phi, m) + b * pair(psi, m)).epsilon(1e-12));
}

TEST_CASE("mollified delta: exact unit mass, centered, boundary guard") {
    const Grid1D g(-5.0, 5.0, 501);
    const GridMeasure m = mollified_delta(g, 0.0, 0.1);
    CHECK(m.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(m.moment(1)) < 1e-10);
    CHECK_THROWS_AS(mollified_delta(g, 4.99, 0.1), std::domain_error);
    CHECK_THROWS_AS(mollified_delta(g, 0.0, 0.5 * g.h), std::domain_error);
}

TEST_CASE("finite differences annihilate constants and are exact on linears") {
    const Grid1D g(0.0, 2.0, 101);
    const GridMeasure c(g, std::vector<double>(101, 3.5));
    const GridMeasure d1c = diff1(c);
    const GridMeasure d2c = diff2(c);
    for (int j = 0; j < 101; ++j) {
        CHECK(std::fabs(d1c.density[static_cast<size_t>(j)]) < 1e-12);
        CHECK(std::fabs(d2c.density[static_cast<size_t>(j)]) < 1e-11);
    }
    std::vector<double> lin(101);
    for (int j = 0; j < 101; ++j) lin[static_cast<size_t>(j)] = g.x(j);
    const GridMeasure d1l = diff1(GridMeasure(g, lin));
    for (int j = 1; j < 100; ++j)
        CHECK(d1l.density[static_cast<size_t>(j)] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("diff2 of sin against the analytic derivative") {
    const Grid1D g(0.0, 3.141592653589793, 401);
    std::vector<double> f(401);
    for (int j = 0; j < 401; ++j) f[static_cast<size_t>(j)] = std::sin(g.x(j));
    const GridMeasure d2 = diff2(GridMeasure(g, f));
    double max_err = 0.0;
    for (int j = 1; j < 400; ++j)
        max_err = std::max(max_err,
                           std::fabs(d2.density[static_cast<size_t>(j)] + std::sin(g.x(j))));
    CHECK(max_err <= 0.2 * g.h * g.h);
}

TEST_CASE("empirical_to_grid reduces to mollified_delta for one particle") {
    const Grid1D g(-5.0, 5.0, 501);
    const std::vector<double> pos = {0.0};
    const GridMeasure kde = empirical_to_grid(pos, g, 0.1);
    const GridMeasure ref = mollified_delta(g, 0.0, 0.1);
    for (int j = 0; j < 501; ++j)
        CHECK(kde.density[static_cast<size_t>(j)] ==
              doctest::Approx(ref.density[static_cast<size_t>(j)]).epsilon(1e-12));
}

TEST_CASE("empirical_to_grid: symmetric positions center the measure") {
    const Grid1D g(-4.0, 4.0, 401);
    const std::vector<double> pos = {-1.0, 1.0};
    const GridMeasure kde = empirical_to_grid(pos, g, 0.1);
    CHECK(kde.mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::fabs(kde.moment(1)) < 1e-8);
}

TEST_CASE("empirical_to_grid second moment against the sampling law") {
    const Grid1D g(-6.0, 6.0, 601);
    const int n = 10000;
    std::vector<double> pos(static_cast<size_t>(n));
    double sample_m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        pos[static_cast<size_t>(i)] = philox_normal({8u, 0u, static_cast<uint32_t>(i), 0u}, {11u, 0u});
        sample_m2 += pos[static_cast<size_t>(i)] * pos[static_cast<size_t>(i)];
    }
    sample_m2 /= n;
    const double bw = 0.1;
    const GridMeasure kde = empirical_to_grid(pos, g, bw);
    // Smoothing adds bw^2 to the sample second moment.
    CHECK(kde.moment(2) == doctest::Approx(sample_m2 + bw * bw).epsilon(5e-3));
    CHECK(std::fabs(kde.moment(2) - 1.0) < 0.05);
    CHECK_THROWS(empirical_to_grid(std::vector<double>{}, g, bw));
}

TEST_CASE("clamp counter reports positions pushed inside the margin") {
    const Grid1D g(-2.0, 2.0, 201);
    const std::vector<double> pos = {0.0, 5.0, -7.0};
    std::size_t clamped = 0;
    const GridMeasure kde = empirical_to_grid(pos, g, 0.1, &clamped);
    CHECK(clamped == 2);
    CHECK(kde.mass() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("csv round trip") {
    const Grid1D g(-1.0, 1.0, 33);
    const GridMeasure m = gaussian_measure(g, 0.2, 0.3);
    const std::string path = "/tmp/mfg_test_measure.csv";
    m.write_csv(path);
    const GridMeasure back = GridMeasure::read_csv(path);
    REQUIRE(back.grid.n_points == 33);
    for (int j = 0; j < 33; ++j)
        CHECK(back.density[static_cast<size_t>(j)] == m.density[static_cast<size_t>(j)]);
    std::remove(path.c_str());
}

TEST_CASE("probability check flags negative density and mass drift") {
    const Grid1D g(0.0, 1.0, 16);
    std::vector<double> d(16, 1.0);
    CHECK_NOTHROW(GridMeasure(g, d).check_probability());
    d[3] = -0.1;
    CHECK_THROWS(GridMeasure(g, d).check_probability());
    std::vector<double> heavy(16, 1.5);
    CHECK_THROWS(GridMeasure(g, heavy).check_probability());
}
