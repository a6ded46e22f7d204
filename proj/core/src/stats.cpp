// SPDX-License-Identifier: Apache-2.0
#include "rough/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "rough/diskwall.hpp"
#include "rough/error.hpp"
#include "rough/parallel.hpp"

namespace rough {

namespace {

constexpr double pi = std::numbers::pi;

void require_samples(const EmpiricalDist& d) {
    if (d.samples.empty()) throw Error(ErrorKind::Empty, "empirical distribution has no samples");
}

double fraction_le(const std::vector<double>& s, double x) {
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    return static_cast<double>(it - s.begin()) / static_cast<double>(s.size());
}

}  // namespace

void Report::decide() { pass = statistic <= threshold && excluded_fraction <= max_excluded_fraction; }

nlohmann::json to_json(const Report& r) {
    return {{"name", r.name},
            {"statistic", r.statistic},
            {"threshold", r.threshold},
            {"verdict", r.pass ? "pass" : "fail"},
            {"sizes", r.sizes},
            {"seed", r.seed},
            {"excluded_fraction", r.excluded_fraction}};
}

double ks_distance(const EmpiricalDist& a, const EmpiricalDist& b) {
    require_samples(a);
    require_samples(b);
    const auto& x = a.samples;
    const auto& y = b.samples;
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_distance(const EmpiricalDist& a, const std::function<double(double)>& cdf) {
    require_samples(a);
    const auto& x = a.samples;
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < x.size()) {
        const double v = x[i];
        const double below = static_cast<double>(i) / n;
        while (i < x.size() && x[i] == v) ++i;
        const double f = cdf(v);
        d = std::max({d, std::abs(f - below), std::abs(static_cast<double>(i) / n - f)});
    }
    return d;
}

double ks_distance_at(const EmpiricalDist& a, const EmpiricalDist& b, std::span<const double> points) {
    require_samples(a);
    require_samples(b);
    double d = 0.0;
    for (double p : points) d = std::max(d, std::abs(fraction_le(a.samples, p) - fraction_le(b.samples, p)));
    return d;
}

double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) {
        // Dual series, accurate for small x.
        double s = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double t = (2 * k - 1) * pi / x;
            s += std::exp(-t * t / 8.0);
        }
        return 1.0 - std::sqrt(2.0 * pi) / x * s;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double kolmogorov_quantile_upper(double tail) {
    if (!(tail > 0.0 && tail < 1.0)) throw Error(ErrorKind::InvalidParam, "tail probability must lie in (0, 1)");
    double lo = 0.0;
    double hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_tail(mid) > tail) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ks_band(std::size_t n) {
    static const double c = kolmogorov_quantile_upper(three_sigma_tail);
    if (n == 0) throw Error(ErrorKind::Empty, "no samples");
    return c / std::sqrt(static_cast<double>(n));
}

double ks_band(std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw Error(ErrorKind::Empty, "no samples");
    const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
    return ks_band(1) / std::sqrt(ne);
}

double ks_sigma(std::size_t n_eff) {
    // Standard deviation of the Kolmogorov distribution.
    return 0.26 / std::sqrt(static_cast<double>(std::max<std::size_t>(n_eff, 1)));
}

double binomial_band(double p, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::Empty, "no samples");
    const double nn = static_cast<double>(n);
    const double q = std::clamp(p, 1.0 / nn, 1.0 - 1.0 / nn);
    return 3.0 * std::sqrt(q * (1.0 - q) / nn);
}

double sine_cdf(double theta) { return 0.5 * (1.0 - std::cos(std::clamp(theta, 0.0, pi))); }

QuantileEstimate quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorKind::Empty, "no values");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    const auto at = [&](double pos) {
        const auto k = static_cast<std::size_t>(std::clamp(pos, 0.0, n - 1.0));
        return values[k];
    };
    const double spread = std::sqrt(n * q * (1.0 - q));
    QuantileEstimate e;
    e.value = at(std::floor(q * (n - 1.0) + 0.5));
    e.sigma = 0.5 * (at(std::ceil(q * n + spread)) - at(std::floor(q * n - spread)));
    return e;
}

Report invariance_report(const Kernel& kernel, std::size_t n, std::uint64_t seed) {
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        Stream rng(seed, i);
        const double theta = rng.sine_angle();
        out[i] = kernel.sample(theta, rng);
    });
    const EmpiricalDist d(std::move(out), 0, seed);
    Report r;
    r.name = "invariance " + kernel.name();
    r.statistic = ks_distance(d, sine_cdf);
    r.threshold = ks_band(n);
    r.sizes = {n};
    r.seed = seed;
    r.decide();
    return r;
}

Report macro_invariance_report(const WallSpec& spec, std::size_t n, std::uint64_t seed, const Limits& limits) {
    WallSpec s = spec;
    s.datum = Datum::half_plane;
    const Wall wall = build_wall(s);
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    parallel_for(n, [&](std::size_t i) {
        Stream rng(seed, i);
        const double theta = rng.sine_angle();
        const double x = rng.uniform() * wall.period();
        const MacroResult m = macro_reflection(wall, {x, theta}, limits);
        if (m.status == Status::returned) out[i] = m.out.theta;
    });
    std::vector<double> kept;
    kept.reserve(n);
    for (double v : out) {
        if (!std::isnan(v)) kept.push_back(v);
    }
    const std::size_t excluded = n - kept.size();
    const EmpiricalDist d(std::move(kept), excluded, seed);
    Report r;
    r.name = "invariance macro " + family_name(spec.family);
    r.statistic = d.size() ? ks_distance(d, sine_cdf) : 1.0;
    r.threshold = ks_band(std::max<std::size_t>(d.size(), 1));
    r.sizes = {n};
    r.seed = seed;
    r.excluded_fraction = d.excluded_fraction();
    r.decide();
    return r;
}

std::vector<double> angle_bin_edges(int bins) {
    std::vector<double> e;
    for (int k = 1; k < bins; ++k) e.push_back(pi * k / bins);
    return e;
}

Report monotone_report(const std::string& name, std::span<const double> values, std::span<const double> sigmas,
                       std::uint64_t seed, std::size_t n) {
    Report r;
    r.name = name;
    r.threshold = 2.0;
    r.seed = seed;
    r.sizes = {n};
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double excess = values[i + 1] - values[i];
        const double s = std::hypot(sigmas[i], sigmas[i + 1]);
        double z = 0.0;
        if (s > 0.0) {
            z = excess / s;
        } else if (excess > 0.0) {
            z = std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, z);
    }
    r.statistic = values.size() < 2 ? 0.0 : worst;
    r.decide();
    return r;
}

bool StudyResult::pass() const {
    return std::all_of(reports.begin(), reports.end(), [](const Report& r) { return r.pass; });
}

nlohmann::json to_json(const StudyRow& r) {
    nlohmann::json j = {{"eps", r.eps},
                        {"satellites", r.satellites},
                        {"n", r.n},
                        {"excluded", r.excluded},
                        {"singular_frac", r.singular_frac},
                        {"ks_theta", r.ks_theta},
                        {"ks_sigma", r.ks_sigma},
                        {"median_psi_err", r.median_psi_err},
                        {"psi_err_sigma", r.psi_err_sigma}};
    if (r.clusters) {
        j["cluster_radius"] = r.cluster_radius;
        j["cluster_sigma"] = r.cluster_sigma;
        j["smooth_freq"] = r.smooth_freq;
        j["expected_p"] = r.expected_p;
        j["freq_err"] = r.freq_err;
        j["freq_sigma"] = r.freq_sigma;
    }
    return j;
}

nlohmann::json to_json(const StudyResult& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& rep : r.reports) reports.push_back(to_json(rep));
    return {{"rows", rows}, {"reports", reports}};
}

namespace {

struct CollideSample {
    bool ok = false;
    double theta_out = 0.0;
    double psi_err = 0.0;
    double d_smooth = 0.0;
    double d_noslip = 0.0;
};

}  // namespace

StudyResult convergence_study(const StudyConfig& cfg) {
    if (cfg.eps_list.empty()) throw Error(ErrorKind::InvalidParam, "eps list is empty");
    for (std::size_t i = 0; i + 1 < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i + 1] < cfg.eps_list[i])) throw Error(ErrorKind::InvalidParam, "eps list must be strictly decreasing");
    }
    if (cfg.n == 0) throw Error(ErrorKind::Empty, "no samples");

    WallSpec unit = cfg.spec;
    unit.scale = 1.0;
    unit.datum = Datum::half_plane;
    const WallSpec tilde = foreshorten(unit, cfg.m, cfg.J);
    const std::uint64_t oracle_seed = splitmix64(cfg.seed ^ 0x6a09e667f3bcc909ULL);
    const EmpiricalDist oracle = averaged_kernel(tilde, cfg.theta, cfg.n, oracle_seed, cfg.limits);
    const bool clusters = cfg.spec.family == Family::rect_teeth;
    const double expected_p = clusters ? rect_specular_prob(cfg.theta, tilde.r) : 0.0;
    const std::vector<double> edges = angle_bin_edges(cfg.ks_bins);

    StudyResult res;
    for (std::size_t e = 0; e < cfg.eps_list.size(); ++e) {
        const double eps = cfg.eps_list[e];
        WallSpec ws = cfg.spec;
        ws.scale = eps;
        ws.datum = Datum::disk_wall;
        const Wall wall = build_wall(ws);
        const DiskParams params = DiskParams::from_rule(cfg.m, cfg.J, eps);
        const std::uint64_t seed = splitmix64(cfg.seed + e);

        std::vector<CollideSample> samples(cfg.n);
        parallel_for(cfg.n, [&](std::size_t i) {
            Stream rng(seed, i);
            const ConfigState in = random_incoming(wall, params, cfg.theta, cfg.psi, rng);
            const CollisionResult c = collide(wall, params, in, cfg.limits);
            if (c.status != Status::returned) return;
            CollideSample& s = samples[i];
            try {
                const TiltedState t = to_tilted(c.out, params);
                s.theta_out = t.theta;
                s.psi_err = std::abs(t.psi - (pi - cfg.psi));
            } catch (const Error&) {
                return;
            }
            const Vec3 u = -in.w;
            const Mat3 G = ke_metric(params);
            const auto ke = [&](const Vec3& v) { return std::sqrt(v.dot(G * v)); };
            s.d_smooth = ke(c.out.w - apply_collision_matrix(CollisionKind::smooth, u, params));
            s.d_noslip = ke(c.out.w - apply_collision_matrix(CollisionKind::no_slip, u, params));
            s.ok = true;
        });

        std::vector<double> thetas;
        std::vector<double> psi_errs;
        std::vector<double> radii;
        std::size_t smooth = 0;
        for (const auto& s : samples) {
            if (!s.ok) continue;
            thetas.push_back(s.theta_out);
            psi_errs.push_back(s.psi_err);
            radii.push_back(std::min(s.d_smooth, s.d_noslip));
            if (s.d_smooth <= s.d_noslip) ++smooth;
        }

        StudyRow row;
        row.eps = eps;
        row.satellites = params.N;
        row.n = cfg.n;
        row.excluded = cfg.n - thetas.size();
        row.singular_frac = static_cast<double>(row.excluded) / static_cast<double>(cfg.n);
        if (!thetas.empty()) {
            const std::size_t kept = thetas.size();
            const EmpiricalDist got(std::move(thetas), row.excluded, seed);
            row.ks_theta = ks_distance_at(got, oracle, edges);
            const double ne = static_cast<double>(kept) * static_cast<double>(oracle.size()) /
                              static_cast<double>(kept + oracle.size());
            row.ks_sigma = ks_sigma(static_cast<std::size_t>(ne));
            const QuantileEstimate pe = quantile(psi_errs, 0.5);
            row.median_psi_err = pe.value;
            row.psi_err_sigma = pe.sigma;
            if (clusters) {
                const QuantileEstimate ce = quantile(radii, cfg.cluster_quantile);
                row.clusters = true;
                row.cluster_radius = ce.value;
                row.cluster_sigma = ce.sigma;
                row.smooth_freq = static_cast<double>(smooth) / static_cast<double>(kept);
                row.expected_p = expected_p;
                row.freq_err = std::abs(row.smooth_freq - expected_p);
                row.freq_sigma = binomial_band(expected_p, kept) / 3.0;
            }
        } else {
            row.ks_theta = 1.0;
            row.median_psi_err = pi;
        }
        res.rows.push_back(row);

        Report sing;
        sing.name = "singular fraction eps=" + std::to_string(eps);
        sing.statistic = row.singular_frac;
        sing.threshold = max_excluded_fraction;
        sing.sizes = {cfg.n};
        sing.seed = cfg.seed;
        sing.decide();
        res.reports.push_back(sing);
    }

    const auto column = [&](auto get) {
        std::vector<double> v;
        for (const auto& r : res.rows) v.push_back(get(r));
        return v;
    };
    const auto add = [&](const std::string& name, auto value, auto sigma) {
        const auto v = column(value);
        const auto s = column(sigma);
        res.reports.push_back(monotone_report(name, v, s, cfg.seed, cfg.n));
    };
    add("ks_theta non-increasing", [](const StudyRow& r) { return r.ks_theta; },
        [](const StudyRow& r) { return r.ks_sigma; });
    add("median_psi_err non-increasing", [](const StudyRow& r) { return r.median_psi_err; },
        [](const StudyRow& r) { return r.psi_err_sigma; });
    if (clusters) {
        add("cluster_radius non-increasing", [](const StudyRow& r) { return r.cluster_radius; },
            [](const StudyRow& r) { return r.cluster_sigma; });
        add("freq_err non-increasing", [](const StudyRow& r) { return r.freq_err; },
            [](const StudyRow& r) { return r.freq_sigma; });
    }
    return res;
}

}  // namespace rough
