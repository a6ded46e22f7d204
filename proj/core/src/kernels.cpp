// SPDX-License-Identifier: Apache-2.0
#include "rough/kernels.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>

#include "rough/error.hpp"
#include "rough/parallel.hpp"

namespace rough {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double boundary_tol = 1e-12;
constexpr double jitter = 1e-12;

std::atomic<std::size_t> jitter_count{0};
std::once_flag jitter_warned;

void note_jitter(const char* what, double theta) {
    jitter_count.fetch_add(1, std::memory_order_relaxed);
    std::call_once(jitter_warned, [&] {
        std::fprintf(stderr, "warning: %s boundary case at theta=%.17g; jittering by %g\n", what, theta, jitter);
    });
}

std::vector<Atom> merged(std::vector<Atom> atoms) {
    std::vector<Atom> out;
    for (const auto& a : atoms) {
        if (a.prob <= 0.0) continue;
        bool joined = false;
        for (auto& b : out) {
            if (std::abs(a.angle - b.angle) <= 1e-12) {
                b.prob += a.prob;
                joined = true;
                break;
            }
        }
        if (!joined) out.push_back(a);
    }
    std::sort(out.begin(), out.end(), [](const Atom& x, const Atom& y) { return x.angle < y.angle; });
    return out;
}

double wrap_two_pi(double a) {
    a = std::fmod(a, 2.0 * pi);
    return a < 0.0 ? a + 2.0 * pi : a;
}

// Triangular teeth for theta <= pi/2, by unfolding the groove around its apex.
// The ray enters the circumcircle at beta (polar angle from the apex, relative
// to the groove axis) and leaves on the covering at gamma; the chord image k
// containing gamma fixes the exit angle. Along the opening, x is affine in
// cos(beta - theta).
std::vector<Atom> tri_atoms_folded(double theta, double psi) {
    const double lo = -psi / 2.0;
    const double hi = std::min(psi / 2.0, 2.0 * theta - psi / 2.0);
    const double denom = 2.0 * std::sin(theta) * std::sin(psi / 2.0);
    std::vector<double> cuts{lo, hi};
    const double split = theta - pi / 2.0;
    if (split > lo && split < hi) cuts.push_back(split);
    for (double shift : {0.0, -2.0 * pi}) {
        const double top = 2.0 * theta + shift + psi / 2.0;
        const long j0 = static_cast<long>(std::floor((top - hi) / psi));
        const long j1 = static_cast<long>(std::ceil((top - lo) / psi));
        for (long j = j0; j <= j1; ++j) {
            const double b = top - static_cast<double>(j) * psi;
            if (b > lo && b < hi) cuts.push_back(b);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b);
        const double gamma = 2.0 * theta - mid - (theta - mid > pi / 2.0 ? 2.0 * pi : 0.0);
        const auto k = static_cast<long>(std::floor((gamma + psi / 2.0) / psi));
        const double kpsi = static_cast<double>(k) * psi;
        const double angle = wrap_two_pi(k % 2 == 0 ? pi + theta - kpsi : kpsi - theta);
        atoms.push_back({angle, (std::cos(b - theta) - std::cos(a - theta)) / denom});
    }
    return merged(atoms);
}

}  // namespace

std::size_t boundary_jitter_count() { return jitter_count.load(); }

double rect_specular_prob(double theta, double r) {
    if (!(theta > 0.0 && theta < pi)) throw Error(ErrorKind::InvalidParam, "theta must lie in (0, pi)");
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidParam, "r must be positive");
    const double d = 2.0 * r * std::abs(std::cos(theta) / std::sin(theta));
    const double nearest = std::round(d);
    if (nearest >= 1.0 && std::abs(d - nearest) <= boundary_tol) {
        throw Error(ErrorKind::BoundaryCase, "2 r |cot theta| is an integer");
    }
    const double whole = std::floor(d);
    const double frac = d - whole;
    const bool even = std::fmod(whole, 2.0) == 0.0;
    return even ? 1.0 - 0.5 * frac : 0.5 + 0.5 * frac;
}

std::vector<Atom> tri_atoms(double theta, double psi) {
    if (!(theta > 0.0 && theta < pi)) throw Error(ErrorKind::InvalidParam, "theta must lie in (0, pi)");
    if (!(psi > 0.0 && psi < pi)) throw Error(ErrorKind::InvalidParam, "psi must lie in (0, pi)");
    if (theta > pi / 2.0) {
        auto atoms = tri_atoms_folded(pi - theta, psi);
        for (auto& a : atoms) a.angle = pi - a.angle;
        return merged(atoms);
    }
    return tri_atoms_folded(theta, psi);
}

double circ_arc_map(double X, double theta, double xi) {
    if (!(theta > 0.0 && theta < pi)) throw Error(ErrorKind::InvalidParam, "theta must lie in (0, pi)");
    if (!(xi > 0.0 && xi <= pi / 2.0)) throw Error(ErrorKind::InvalidParam, "xi must lie in (0, pi/2]");
    if (!(X >= 0.0 && X <= 1.0)) throw Error(ErrorKind::InvalidParam, "X must lie in [0, 1]");
    if (X <= boundary_tol || X >= 1.0 - boundary_tol) throw Error(ErrorKind::Singular, "entry at a cusp");
    const double arg = std::clamp(X * std::cos(theta - xi) + (1.0 - X) * std::cos(theta + xi), -1.0, 1.0);
    const double gamma = theta - std::acos(arg);
    double delta;
    double span;
    if (theta >= pi / 2.0 + gamma) {
        delta = 2.0 * (pi + gamma - theta);
        span = xi - gamma;
    } else {
        delta = 2.0 * (gamma - theta);
        span = xi + gamma;
    }
    if (std::abs(delta) < 1e-9) throw Error(ErrorKind::Singular, "tangential hit");
    const double ratio = span / std::abs(delta);
    const double fl = std::floor(ratio);
    if (ratio - fl <= boundary_tol || fl + 1.0 - ratio <= boundary_tol) {
        throw Error(ErrorKind::Singular, "trajectory meets a cusp");
    }
    const double n = 1.0 + fl;
    const double out = wrap_two_pi(pi + theta + n * delta);
    if (!(out > 0.0 && out < pi)) throw Error(ErrorKind::Singular, "exit angle out of range");
    return out;
}

Kernel Kernel::rect(double r) {
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidParam, "r must be positive");
    return Kernel(Type::rect, r);
}

Kernel Kernel::tri(double psi) {
    if (!(psi > 0.0 && psi < pi)) throw Error(ErrorKind::InvalidParam, "psi must lie in (0, pi)");
    return Kernel(Type::tri, psi);
}

Kernel Kernel::circ(double xi) {
    if (!(xi > 0.0 && xi <= pi / 2.0)) throw Error(ErrorKind::InvalidParam, "xi must lie in (0, pi/2]");
    return Kernel(Type::circ, xi);
}

Kernel Kernel::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    auto value = [&]() -> double {
        if (colon == std::string::npos) throw Error(ErrorKind::InvalidParam, "kernel '" + head + "' needs a parameter");
        try {
            return std::stod(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidParam, "bad kernel parameter in '" + text + "'");
        }
    };
    if (head == "specular") return specular();
    if (head == "retro") return retro();
    if (head == "lambertian") return lambertian();
    if (head == "halving") return halving();
    if (head == "rect") return rect(value());
    if (head == "tri") return tri(value());
    if (head == "circ") return circ(value());
    throw Error(ErrorKind::InvalidParam, "unknown kernel '" + text + "'");
}

std::string Kernel::name() const {
    const auto with_param = [this](const char* head) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, param_);
        return std::string(head) + ':' + std::string(buf, res.ptr);
    };
    switch (type_) {
        case Type::specular: return "specular";
        case Type::retro: return "retro";
        case Type::lambertian: return "lambertian";
        case Type::halving: return "halving";
        case Type::rect: return with_param("rect");
        case Type::tri: return with_param("tri");
        case Type::circ: return with_param("circ");
    }
    return "unknown";
}

std::vector<Atom> Kernel::atoms(double theta) const {
    switch (type_) {
        case Type::specular: return {{pi - theta, 1.0}};
        case Type::retro: return {{theta, 1.0}};
        case Type::halving: return {{theta / 2.0, 1.0}};
        case Type::rect: {
            const double p = rect_specular_prob(theta, param_);
            return merged({{pi - theta, p}, {theta, 1.0 - p}});
        }
        case Type::tri: return tri_atoms(theta, param_);
        case Type::lambertian:
        case Type::circ: break;
    }
    throw Error(ErrorKind::InvalidParam, "kernel '" + name() + "' has no closed-form atoms");
}

double Kernel::sample(double theta, Stream& rng) const {
    switch (type_) {
        case Type::specular: return pi - theta;
        case Type::retro: return theta;
        case Type::halving: return theta / 2.0;
        case Type::lambertian: return rng.sine_angle();
        case Type::circ:
            for (;;) {
                try {
                    return circ_arc_map(rng.uniform_open(), theta, param_);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::Singular) throw;
                }
            }
        case Type::rect:
        case Type::tri: {
            std::vector<Atom> atoms;
            try {
                atoms = this->atoms(theta);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::BoundaryCase) throw;
                note_jitter(type_ == Type::rect ? "rect" : "tri", theta);
                atoms = this->atoms(theta + jitter);
            }
            const double u = rng.uniform();
            double acc = 0.0;
            for (const auto& a : atoms) {
                acc += a.prob;
                if (u < acc) return a.angle;
            }
            return atoms.back().angle;
        }
    }
    return theta;
}

double sample_kernel(const Kernel& kernel, double theta, Stream& rng) { return kernel.sample(theta, rng); }

EmpiricalDist averaged_kernel(const WallSpec& spec, double theta, std::size_t n, std::uint64_t seed,
                              const Limits& limits) {
    if (n == 0) throw Error(ErrorKind::InvalidParam, "averaged_kernel needs n >= 1");
    WallSpec half = spec;
    half.datum = Datum::half_plane;
    const Wall wall = build_wall(half);
    std::vector<double> out(n);
    std::vector<unsigned char> ok(n);
    parallel_for(n, [&](std::size_t i) {
        Stream rng(seed, i);
        const double x = rng.uniform() * wall.period();
        const MacroResult r = macro_reflection(wall, {x, theta}, limits);
        ok[i] = r.status == Status::returned;
        out[i] = r.out.theta;
    });
    std::vector<double> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (ok[i]) kept.push_back(out[i]);
    }
    const std::size_t excluded = n - kept.size();
    EmpiricalDist dist(std::move(kept), excluded, seed);
    if (dist.excluded_fraction() > 0.01) {
        throw Error(ErrorKind::TooManySingular, "more than 1% of macro-reflections were singular or capped");
    }
    return dist;
}

double detailed_balance_defect_exact(const Kernel& kernel, std::span<const double> grid) {
    double worst = 0.0;
    for (double theta : grid) {
        for (const auto& a : kernel.atoms(theta)) {
            if (std::abs(a.angle - theta) <= 1e-12) continue;
            double back = 0.0;
            if (a.angle > 0.0 && a.angle < pi) {
                for (const auto& b : kernel.atoms(a.angle)) {
                    if (std::abs(b.angle - theta) <= 1e-9) back += b.prob;
                }
            }
            worst = std::max(worst, std::abs(a.prob * std::sin(theta) - back * std::sin(a.angle)));
        }
    }
    return worst;
}

DefectEstimate detailed_balance_defect(const Kernel& kernel, const std::function<double(double, double)>& f,
                                       std::size_t n, std::uint64_t seed) {
    if (n < 2) throw Error(ErrorKind::InvalidParam, "detailed_balance_defect needs n >= 2");
    std::vector<double> diff(n);
    parallel_for(n, [&](std::size_t i) {
        Stream rng(seed, i);
        const double theta = rng.sine_angle();
        const double out = kernel.sample(theta, rng);
        diff[i] = f(theta, out) - f(out, theta);
    });
    double mean = 0.0;
    for (double d : diff) mean += d;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double d : diff) var += (d - mean) * (d - mean);
    var /= static_cast<double>(n - 1);
    // The sin(theta) d(theta) measure has total mass 2.
    return {2.0 * mean, 2.0 * std::sqrt(var / static_cast<double>(n))};
}

KnudsenResult knudsen_exit_time(const Kernel& kernel, double L, Stream& rng, double theta0, std::size_t max_bounces) {
    if (!(L >= 0.0)) throw Error(ErrorKind::InvalidParam, "L must be >= 0");
    KnudsenResult res;
    if (L == 0.0) return res;
    double x = 0.0;
    double t = 0.0;
    double side = 1.0;
    double theta = theta0;
    while (res.bounces < max_bounces) {
        const double out = kernel.sample(theta, rng);
        ++res.bounces;
        const double dx = side * std::cos(out) / std::sin(out);
        const double dt = 1.0 / std::sin(out);
        const double next = x + dx;
        if (next < 0.0 || next > L) {
            const double target = next < 0.0 ? 0.0 : L;
            res.time = t + (target - x) / dx * dt;
            res.status = Status::returned;
            return res;
        }
        x = next;
        t += dt;
        theta = out;
        side = -side;
    }
    res.time = t;
    res.status = Status::capped;
    return res;
}

}  // namespace rough
