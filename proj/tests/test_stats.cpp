// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "rough/diskwall.hpp"
#include "rough/error.hpp"
#include "rough/rng.hpp"
#include "rough/stats.hpp"

using namespace rough;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

ErrorKind error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Empty;
}

// O(n m) two-sample KS: evaluate both CDFs at every sample point.
double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
    const auto cdf = [](const std::vector<double>& s, double x) {
        double c = 0;
        for (double v : s) c += v <= x ? 1.0 : 0.0;
        return c / static_cast<double>(s.size());
    };
    double d = 0.0;
    for (const auto* s : {&a, &b}) {
        for (double x : *s) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
    }
    return d;
}

double kolmogorov_series(double x) {
    double s = 0.0;
    for (int k = 1; k < 200; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
    return s;
}

std::vector<double> sine_samples(std::uint64_t seed, std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        Stream rng(seed, i);
        s[i] = rng.sine_angle();
    }
    return s;
}

Kernel halving() { return Kernel::halving(); }

}  // namespace

TEST_CASE("ks distance: basics") {
    const EmpiricalDist a({0.1, 0.5, 0.2});
    CHECK(ks_distance(a, a) == 0.0);
    const EmpiricalDist b({2.1, 2.5, 2.9});
    CHECK(ks_distance(a, b) == 1.0);
    CHECK(ks_distance(b, a) == 1.0);
    CHECK(error_of([&] { ks_distance(EmpiricalDist{}, a); }) == ErrorKind::Empty);
    CHECK(error_of([&] { ks_distance(EmpiricalDist{}, sine_cdf); }) == ErrorKind::Empty);
}

TEST_CASE("ks distance matches a brute-force evaluation") {
    for (int t = 0; t < 50; ++t) {
        Stream rng(100, t);
        std::vector<double> a(1 + t * 3);
        std::vector<double> b(2 + t * 2);
        // Coarse values produce ties.
        for (double& v : a) v = std::floor(rng.uniform() * 20) / 20;
        for (double& v : b) v = std::floor(rng.uniform() * 20 + 2 * rng.uniform()) / 20;
        CHECK(ks_distance(EmpiricalDist(a), EmpiricalDist(b)) == Approx(brute_ks(a, b)).epsilon(1e-15));
    }
}

TEST_CASE("one-sample ks distance against a CDF") {
    // A single sample at the median of the uniform law: sup is 1/2.
    CHECK(ks_distance(EmpiricalDist({0.5}), [](double x) { return std::clamp(x, 0.0, 1.0); }) == Approx(0.5));
    // Evenly spaced points: sup is 1/n at the top of each step.
    std::vector<double> s;
    for (int i = 1; i <= 10; ++i) s.push_back(i / 10.0);
    CHECK(ks_distance(EmpiricalDist(s), [](double x) { return std::clamp(x, 0.0, 1.0); }) == Approx(0.1));
    // The Lambertian sampler.
    const std::size_t n = 100'000;
    const EmpiricalDist d(sine_samples(5, n));
    CHECK(ks_distance(d, sine_cdf) < ks_band(n));
    CHECK(sine_cdf(pi / 2) == Approx(0.5));
}

TEST_CASE("ks distance at fixed points") {
    const EmpiricalDist a({0.1, 0.2, 0.3, 0.4});
    const EmpiricalDist b({0.15, 0.25, 0.35, 0.45});
    const std::vector<double> at{0.0, 1.0};
    CHECK(ks_distance_at(a, b, at) == 0.0);
    const std::vector<double> mid{0.12};
    CHECK(ks_distance_at(a, b, mid) == Approx(0.25));
    CHECK(ks_distance_at(a, b, mid) <= ks_distance(a, b));
}

TEST_CASE("kolmogorov distribution") {
    for (double x : {0.3, 0.5, 0.8, 1.0, 1.36, 1.8, 2.5}) {
        CHECK(kolmogorov_tail(x) == Approx(kolmogorov_series(x)).epsilon(1e-12));
    }
    // Small arguments use the dual series; both must agree where they overlap.
    CHECK(kolmogorov_tail(0.19) == Approx(kolmogorov_series(0.19)).epsilon(1e-9));
    CHECK(kolmogorov_tail(0.05) == Approx(1.0));
    CHECK(kolmogorov_quantile_upper(0.05) == Approx(1.3581).epsilon(1e-4));
    CHECK(kolmogorov_quantile_upper(0.01) == Approx(1.6276).epsilon(1e-4));
    CHECK(three_sigma_tail == Approx(std::erfc(3.0 / std::sqrt(2.0))).epsilon(1e-15));
    const double c = kolmogorov_quantile_upper(three_sigma_tail);
    CHECK(c == Approx(1.82).epsilon(3e-3));
    CHECK(kolmogorov_tail(c) == Approx(three_sigma_tail).epsilon(1e-9));
}

TEST_CASE("bands") {
    const double c = kolmogorov_quantile_upper(three_sigma_tail);
    CHECK(ks_band(10'000) == Approx(c / 100.0));
    CHECK(ks_band(100, 100) == Approx(c / std::sqrt(50.0)));
    CHECK(ks_band(400, 100) == Approx(c / std::sqrt(80.0)));
    CHECK(error_of([] { ks_band(0); }) == ErrorKind::Empty);
    // Standard deviation of the Kolmogorov law.
    CHECK(ks_sigma(1) == Approx(std::sqrt(pi * pi / 12 - pi / 2 * std::log(2.0) * std::log(2.0))).epsilon(1e-2));
    CHECK(binomial_band(0.5, 100) == Approx(0.15));
    CHECK(binomial_band(0.0, 100) == Approx(3 * std::sqrt(0.01 * 0.99 / 100)));
    CHECK(binomial_band(1.0, 100) == Approx(binomial_band(0.0, 100)));
}

TEST_CASE("ks band calibration") {
    // Two independent sine samples of size 1e5, 100 times.
    const std::size_t n = 100'000;
    int passed = 0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const EmpiricalDist a(sine_samples(2 * r + 1000, n));
        const EmpiricalDist b(sine_samples(2 * r + 1001, n));
        if (ks_distance(a, b) < ks_band(n, n)) ++passed;
    }
    CHECK(passed >= 99);
}

TEST_CASE("quantile") {
    std::vector<double> v;
    for (int i = 0; i < 101; ++i) v.push_back(100 - i);
    CHECK(quantile(v, 0.5).value == 50.0);
    CHECK(quantile(v, 0.95).value == 95.0);
    CHECK(quantile(v, 0.0).value == 0.0);
    CHECK(quantile(v, 1.0).value == 100.0);
    CHECK(error_of([] { quantile({}, 0.5); }) == ErrorKind::Empty);
    // Order-statistic standard error of the median of U(0,1) is 1/(2 sqrt n).
    std::vector<double> u(40'000);
    for (std::size_t i = 0; i < u.size(); ++i) {
        Stream rng(7, i);
        u[i] = rng.uniform();
    }
    const QuantileEstimate m = quantile(u, 0.5);
    CHECK(m.value == Approx(0.5).epsilon(0.01));
    CHECK(m.sigma == Approx(0.5 / std::sqrt(40'000.0)).epsilon(0.1));
}

TEST_CASE("reports") {
    Report r;
    r.statistic = 0.5;
    r.threshold = 1.0;
    r.decide();
    CHECK(r.pass);
    r.statistic = 1.5;
    r.decide();
    CHECK_FALSE(r.pass);
    r.statistic = 0.5;
    r.excluded_fraction = 0.011;
    r.decide();
    CHECK_FALSE(r.pass);
    r.excluded_fraction = 0.01;
    r.decide();
    CHECK(r.pass);
    r.name = "x";
    r.sizes = {3, 4};
    r.seed = 9;
    const nlohmann::json j = to_json(r);
    CHECK(j.at("verdict") == "pass");
    CHECK(j.at("sizes") == nlohmann::json::array({3, 4}));
    CHECK(j.at("seed") == 9);
    for (const char* key : {"name", "statistic", "threshold", "excluded_fraction"}) CHECK(j.contains(key));
}

TEST_CASE("monotone report") {
    const std::vector<double> down{0.3, 0.2, 0.1};
    const std::vector<double> sig{0.01, 0.01, 0.01};
    CHECK(monotone_report("m", down, sig, 1, 10).pass);
    const std::vector<double> noisy{0.3, 0.31, 0.1};
    CHECK(monotone_report("m", noisy, sig, 1, 10).pass);
    const std::vector<double> up{0.1, 0.2, 0.3};
    const Report r = monotone_report("m", up, sig, 1, 10);
    CHECK_FALSE(r.pass);
    CHECK(r.statistic == Approx(0.1 / std::hypot(0.01, 0.01)));
    const std::vector<double> flat{0.0, 0.0};
    const std::vector<double> zero{0.0, 0.0};
    CHECK(monotone_report("m", flat, zero, 1, 10).pass);
    const std::vector<double> rise{0.0, 1e-9};
    CHECK_FALSE(monotone_report("m", rise, zero, 1, 10).pass);
}

TEST_CASE("invariance reports") {
    CHECK(invariance_report(Kernel::specular(), 100'000, 1).pass);
    CHECK(invariance_report(Kernel::rect(0.3), 100'000, 2).pass);
    CHECK(invariance_report(Kernel::tri(1.0), 100'000, 3).pass);
    CHECK(invariance_report(Kernel::circ(pi / 3), 100'000, 4).pass);
    CHECK(invariance_report(Kernel::lambertian(), 100'000, 5).pass);
    const Report bad = invariance_report(halving(), 100'000, 6);
    CHECK_FALSE(bad.pass);
    CHECK(bad.statistic > 10 * bad.threshold);
    WallSpec s;
    s.family = Family::tri_teeth;
    s.psi = 2.0;
    CHECK(macro_invariance_report(s, 100'000, 7).pass);
}

TEST_CASE("angle bin edges") {
    const auto e = angle_bin_edges(4);
    REQUIRE(e.size() == 3);
    CHECK(e[0] == Approx(pi / 4));
    CHECK(e[2] == Approx(3 * pi / 4));
}

TEST_CASE("convergence study: flat wall") {
    StudyConfig cfg;
    cfg.spec.family = Family::flat;
    cfg.eps_list = {1e-1, 1e-2};
    cfg.n = 500;
    cfg.seed = 3;
    const StudyResult res = convergence_study(cfg);
    REQUIRE(res.rows.size() == 2);
    for (const StudyRow& row : res.rows) {
        // The lowest satellite sits up to rho/2 from the bottom, tilting the
        // contact normal by that angle.
        CHECK(row.median_psi_err < 2 * pi / row.satellites / 2);
        CHECK(row.singular_frac == 0.0);
        CHECK_FALSE(row.clusters);
    }
    CHECK(res.rows[1].median_psi_err < res.rows[0].median_psi_err);
    CHECK(res.pass());

    // Starting with a satellite at the bottom, the collision is exactly smooth.
    const DiskParams p = DiskParams::from_rule(1, 1, 0.01);
    WallSpec ws = cfg.spec;
    ws.scale = 0.01;
    ws.datum = Datum::disk_wall;
    const Wall w = build_wall(ws);
    for (int i = 0; i < 200; ++i) {
        Stream rng(8, i);
        ConfigState in = random_incoming(w, p, 1.0 + rng.uniform(), 0.3 + 2 * rng.uniform(), rng);
        in.y.z() = 0.0;
        const CollisionResult r = collide(w, p, in);
        REQUIRE(r.status == Status::returned);
        CHECK(std::abs(to_tilted(r.out, p).psi - (pi - to_tilted(in, p).psi)) < 1e-10);
    }
}

TEST_CASE("convergence study: tri teeth") {
    StudyConfig cfg;
    cfg.spec.family = Family::tri_teeth;
    cfg.spec.psi = pi / 3;
    cfg.eps_list = {1e-1, 1e-2, 1e-3};
    cfg.n = 2000;
    cfg.seed = 5;
    const StudyResult res = convergence_study(cfg);
    for (const Report& r : res.reports) {
        INFO(r.name);
        CHECK(r.pass);
    }
    CHECK(res.rows[2].ks_theta < res.rows[0].ks_theta);
}

TEST_CASE("convergence study is reproducible") {
    StudyConfig cfg;
    cfg.spec.family = Family::rect_teeth;
    cfg.spec.r = 1.0;
    cfg.eps_list = {1e-1, 1e-2};
    cfg.n = 500;
    cfg.seed = 17;
    const std::string a = to_json(convergence_study(cfg)).dump();
    const std::string b = to_json(convergence_study(cfg)).dump();
    CHECK(a == b);
    cfg.seed = 18;
    CHECK(to_json(convergence_study(cfg)).dump() != a);

    cfg.eps_list = {1e-2, 1e-1};
    CHECK(error_of([&] { convergence_study(cfg); }) == ErrorKind::InvalidParam);
}
