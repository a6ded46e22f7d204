// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>

#include "cli.hpp"
#include "rough/diskwall.hpp"
#include "rough/error.hpp"
#include "rough/parallel.hpp"

namespace rough::cli {

namespace {

constexpr double pi = std::numbers::pi;

Report tolerance_report(const std::string& name, double worst, double tol, std::size_t n, std::uint64_t seed,
                        double excluded = 0.0) {
    Report r;
    r.name = name;
    r.statistic = worst;
    r.threshold = tol;
    r.sizes = {n};
    r.seed = seed;
    r.excluded_fraction = excluded;
    r.decide();
    return r;
}

WallSpec make(Family f, double a, double b = 1.0) {
    WallSpec s;
    s.family = f;
    switch (f) {
        case Family::flat: s.depth = a; break;
        case Family::rect_teeth: s.r = a; break;
        case Family::tri_teeth: s.psi = a; break;
        case Family::circ_arcs: s.xi = a; break;
        case Family::ell_arcs: s.xi = a; s.axis_ratio = b; break;
        case Family::custom: break;
    }
    return s;
}

std::uint64_t sub(std::uint64_t seed, std::uint64_t k) { return splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (k + 1))); }

}  // namespace

std::vector<Report> verify_suite(std::uint64_t seed) {
    std::vector<Report> out;
    std::uint64_t k = 0;

    // Specular fraction of the averaged rect kernel against the closed form.
    {
        const std::size_t n = 20'000;
        double worst = 0.0;
        double excl = 0.0;
        const double r = 0.3;
        const std::uint64_t s = sub(seed, k++);
        for (int i = 0; i < 8; ++i) {
            const double theta = (i + 0.5) * pi / 8.0;
            const double p = rect_specular_prob(theta, r);
            const EmpiricalDist d = averaged_kernel(make(Family::rect_teeth, r), theta, n, s + i);
            const double freq = d.mass_near(pi - theta, 1e-9);
            worst = std::max(worst, std::abs(freq - p) / binomial_band(p, d.size()));
            excl = std::max(excl, d.excluded_fraction());
        }
        out.push_back(tolerance_report("rect specular fraction (in 3-sigma units)", worst, 1.0, n, s, excl));
    }

    // Scale invariance of the averaged kernel.
    for (const WallSpec& base : {make(Family::rect_teeth, 0.3), make(Family::tri_teeth, pi / 3)}) {
        const std::size_t n = 20'000;
        const std::uint64_t s = sub(seed, k++);
        WallSpec small = base;
        small.scale = 0.37;
        const EmpiricalDist a = averaged_kernel(base, 1.1, n, s);
        const EmpiricalDist b = averaged_kernel(small, 1.1, n, s + 1);
        Report r = tolerance_report("scale invariance " + family_name(base.family), ks_distance(a, b),
                                    ks_band(a.size(), b.size()), n, s,
                                    std::max(a.excluded_fraction(), b.excluded_fraction()));
        out.push_back(r);
    }

    // Circular-arc map against the ray tracer.
    {
        const std::size_t n = 200;
        const std::uint64_t s = sub(seed, k++);
        double worst = 0.0;
        std::size_t skipped = 0;
        for (double xi : {pi / 6, pi / 3, pi / 2}) {
            const Wall wall = build_wall(make(Family::circ_arcs, xi));
            for (std::size_t i = 0; i < n; ++i) {
                Stream rng(s, i);
                const double X = rng.uniform_open();
                const double theta = rng.uniform_open() * pi;
                const MacroResult m = macro_reflection(wall, {X, theta});
                double a = 0.0;
                try {
                    a = circ_arc_map(X, theta, xi);
                } catch (const Error&) {
                    ++skipped;
                    continue;
                }
                if (m.status != Status::returned) {
                    ++skipped;
                    continue;
                }
                worst = std::max(worst, std::abs(a - m.out.theta));
            }
        }
        out.push_back(tolerance_report("circ arc map vs trace", worst, 1e-8, 3 * n, s,
                                       static_cast<double>(skipped) / (3.0 * n)));
    }

    // Exact detailed balance of atomic kernels.
    {
        std::vector<double> grid;
        for (int i = 0; i < 64; ++i) grid.push_back((i + 0.5) * pi / 64.0);
        double worst = 0.0;
        for (const Kernel& kern : {Kernel::specular(), Kernel::retro(), Kernel::rect(0.3), Kernel::tri(pi / 3)}) {
            worst = std::max(worst, detailed_balance_defect_exact(kern, grid));
        }
        out.push_back(tolerance_report("detailed balance atomic kernels", worst, 1e-12, grid.size(), 0));
    }

    // Monte Carlo detailed balance of the Lambertian kernel.
    {
        const std::size_t n = 20'000;
        const std::uint64_t s = sub(seed, k++);
        const DefectEstimate d = detailed_balance_defect(
            Kernel::lambertian(), [](double a, double b) { return a * a * b; }, n, s);
        out.push_back(tolerance_report("detailed balance lambertian (in sigma units)", std::abs(d.value) / d.sigma, 3.0,
                                       n, s));
    }

    // Invariance of the sine law.
    for (const Kernel& kern : {Kernel::lambertian(), Kernel::rect(0.3), Kernel::tri(pi / 3), Kernel::circ(pi / 3)}) {
        out.push_back(invariance_report(kern, 20'000, sub(seed, k++)));
    }
    for (const WallSpec& spec : {make(Family::flat, 0.2), make(Family::rect_teeth, 0.7), make(Family::tri_teeth, 1.0),
                                 make(Family::circ_arcs, pi / 2), make(Family::ell_arcs, pi / 3, 0.6)}) {
        out.push_back(macro_invariance_report(spec, 20'000, sub(seed, k++)));
    }

    // Involution of macro_reflection.
    {
        const std::size_t n = 300;
        const std::uint64_t s = sub(seed, k++);
        double worst = 0.0;
        std::size_t skipped = 0;
        for (const WallSpec& spec : {make(Family::rect_teeth, 0.7), make(Family::circ_arcs, 1.2)}) {
            const Wall wall = build_wall(spec);
            for (std::size_t i = 0; i < n; ++i) {
                Stream rng(s, i);
                const ReflState in{rng.uniform() * wall.period(), rng.uniform_open() * pi};
                const MacroResult a = macro_reflection(wall, in);
                if (a.status != Status::returned) {
                    ++skipped;
                    continue;
                }
                const MacroResult b = macro_reflection(wall, a.out);
                if (b.status != Status::returned) {
                    ++skipped;
                    continue;
                }
                worst = std::max({worst, std::abs(b.out.x - in.x), std::abs(b.out.theta - in.theta)});
            }
        }
        out.push_back(tolerance_report("macro reflection involution", worst, 1e-8, 2 * n, s,
                                       static_cast<double>(skipped) / (2.0 * n)));
    }

    // Disk collisions: energy, involution, cylinder invariants.
    {
        const std::size_t n = 300;
        const std::uint64_t s = sub(seed, k++);
        WallSpec spec = make(Family::rect_teeth, 1.0);
        spec.scale = 0.01;
        spec.datum = Datum::disk_wall;
        const Wall wall = build_wall(spec);
        const DiskParams p = DiskParams::from_rule(1.0, 2.0, 0.01);
        double energy = 0.0;
        double inv = 0.0;
        double rolling = 0.0;
        double psi_flip = 0.0;
        std::size_t skipped = 0;
        for (std::size_t i = 0; i < n; ++i) {
            Stream rng(s, i);
            const double theta = rng.uniform_open() * pi;
            const double psi = 0.2 + rng.uniform() * (pi - 0.4);
            const ConfigState in = random_incoming(wall, p, theta, psi, rng);
            const CollisionResult a = collide(wall, p, in);
            const CollisionResult c = collide_cyl(wall, p, in);
            if (a.status != Status::returned || c.status != Status::returned) {
                ++skipped;
                continue;
            }
            energy = std::max(energy, a.max_energy_drift);
            const CollisionResult b = collide(wall, p, a.out);
            if (b.status == Status::returned) {
                inv = std::max({inv, (b.out.y - in.y).cwiseAbs().maxCoeff(), (b.out.w - in.w).cwiseAbs().maxCoeff()});
            } else {
                ++skipped;
            }
            rolling = std::max(rolling, c.rolling_drift);
            psi_flip = std::max(psi_flip, std::abs(to_tilted(c.out, p).psi - (pi - psi)));
        }
        const double ex = static_cast<double>(skipped) / static_cast<double>(n);
        out.push_back(tolerance_report("collide energy drift per reflection", energy, 1e-12, n, s, ex));
        out.push_back(tolerance_report("collide involution", inv, 1e-6, n, s, ex));
        out.push_back(tolerance_report("collide_cyl rolling momentum", rolling, 1e-10, n, s, ex));
        out.push_back(tolerance_report("collide_cyl psi flip", psi_flip, 1e-10, n, s, ex));
    }

    // Collision matrices.
    {
        const std::size_t n = 100;
        const std::uint64_t s = sub(seed, k++);
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Stream rng(s, i);
            DiskParams p;
            p.m = 0.1 + 5.0 * rng.uniform();
            p.J = 0.1 + 5.0 * rng.uniform();
            const Mat3 G = ke_metric(p);
            for (CollisionKind kind : {CollisionKind::smooth, CollisionKind::no_slip}) {
                const Mat3 A = collision_matrix(kind, p);
                worst = std::max(worst, (A * A - Mat3::Identity()).cwiseAbs().maxCoeff());
                worst = std::max(worst, (A.transpose() * G * A - G).cwiseAbs().maxCoeff());
            }
        }
        out.push_back(tolerance_report("collision matrix identities", worst, 1e-12, n, s));
    }

    // Correspondence ladder.
    {
        StudyConfig cfg;
        cfg.spec = make(Family::rect_teeth, 1.0);
        cfg.eps_list = {0.1, 0.01};
        cfg.n = 2'000;
        cfg.seed = sub(seed, k++);
        const StudyResult res = convergence_study(cfg);
        for (Report r : res.reports) {
            r.name = "correspondence " + r.name;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace rough::cli
