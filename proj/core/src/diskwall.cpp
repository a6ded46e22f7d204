// SPDX-License-Identifier: Apache-2.0
#include "rough/diskwall.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rough/error.hpp"

namespace rough {

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

int satellite_count_for(double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidParam, "eps must be positive");
    return std::max(8, static_cast<int>(std::lround(2.0 * pi * std::cbrt(1.0 / eps))));
}

DiskParams DiskParams::from_rule(double m, double J, double eps) {
    DiskParams p;
    p.m = m;
    p.J = J;
    p.eps = eps;
    p.N = satellite_count_for(eps);
    p.rho = 2.0 * pi / p.N;
    p.validate();
    return p;
}

void DiskParams::validate() const {
    if (!(m > 0.0 && J > 0.0 && eps > 0.0 && std::isfinite(m) && std::isfinite(J) && std::isfinite(eps))) {
        throw Error(ErrorKind::InvalidParam, "m, J and eps must be positive");
    }
    if (N < 8) throw Error(ErrorKind::InvalidParam, "at least 8 satellites are required");
    if (std::abs(N * rho - 2.0 * pi) > 1e-12) throw Error(ErrorKind::InvalidParam, "N rho must equal 2 pi");
}

double ke_dot(const Vec3& a, const Vec3& b, const DiskParams& p) {
    return p.m * a[0] * b[0] + p.m * a[1] * b[1] + p.J * a[2] * b[2];
}

double ke_norm(const Vec3& a, const DiskParams& p) { return std::sqrt(ke_dot(a, a, p)); }

Mat3 ke_metric(const DiskParams& p) { return Vec3(p.m, p.m, p.J).asDiagonal(); }

Frame tilted_frame(const DiskParams& p) {
    Frame f;
    f.chi = Vec3(-1.0, 0.0, 1.0) / std::sqrt(p.m + p.J);
    f.chi_perp = Vec3(1.0 / p.m, 0.0, 1.0 / p.J) / std::sqrt(1.0 / p.m + 1.0 / p.J);
    f.e2 = Vec3(0.0, 1.0 / std::sqrt(p.m), 0.0);
    return f;
}

std::vector<Vec2> satellite_positions(const Vec3& y, const DiskParams& p) {
    std::vector<Vec2> out(static_cast<std::size_t>(p.N));
    for (int k = 0; k < p.N; ++k) {
        const double b = y[2] + k * p.rho;
        out[static_cast<std::size_t>(k)] = {y[0] + std::sin(b), y[1] - std::cos(b)};
    }
    return out;
}

Vec3 contact_normal(Vec2 k, double beta, const DiskParams& p) {
    Vec3 n(k.x / p.m, k.y / p.m, (k.x * std::cos(beta) + k.y * std::sin(beta)) / p.J);
    return n / ke_norm(n, p);
}

TiltedState to_tilted(const ConfigState& s, const DiskParams& p) {
    const Frame f = tilted_frame(p);
    TiltedState t;
    t.y1 = ke_dot(s.y, f.chi_perp, p);
    t.y3 = ke_dot(s.y, f.chi, p);
    const double a = ke_dot(s.w, f.chi_perp, p);
    const double b = ke_dot(s.w, f.e2, p);
    const double c = ke_dot(s.w, f.chi, p);
    const double sin_psi = std::hypot(a, b);
    t.psi = std::atan2(sin_psi, c);
    if (sin_psi < 1e-12) throw Error(ErrorKind::DegenerateAngle, "velocity is parallel to the rolling axis");
    t.theta = std::atan2(b, a);
    return t;
}

ConfigState from_tilted(const TiltedState& t, const DiskParams& p) {
    const Frame f = tilted_frame(p);
    ConfigState s;
    s.y = t.y1 * f.chi_perp + t.y3 * f.chi;
    s.w = std::cos(t.theta) * std::sin(t.psi) * f.chi_perp + std::sin(t.theta) * std::sin(t.psi) * f.e2 +
          std::cos(t.psi) * f.chi;
    return s;
}

double rolling_momentum(const Vec3& w, const DiskParams& p) { return -p.m * w[0] + p.J * w[2]; }

Mat3 collision_matrix(CollisionKind kind, const DiskParams& p) {
    Mat3 A = Mat3::Zero();
    if (kind == CollisionKind::smooth) {
        A.diagonal() << 1.0, -1.0, 1.0;
        return A;
    }
    const double s = p.m + p.J;
    A << (p.m - p.J) / s, 0.0, -2.0 * p.J / s,  //
        0.0, -1.0, 0.0,                          //
        -2.0 * p.m / s, 0.0, (p.J - p.m) / s;
    return A;
}

Vec3 apply_collision_matrix(CollisionKind kind, const Vec3& u, const DiskParams& p) {
    return collision_matrix(kind, p) * u;
}

CollisionResult collide_cyl(const Wall& wall, const DiskParams& p, const ConfigState& s, const Limits& limits) {
    p.validate();
    if (wall.spec().datum != Datum::disk_wall) throw Error(ErrorKind::InvalidParam, "collide_cyl needs a disk_wall wall");
    const Frame f = tilted_frame(p);
    const Vec3 u = -s.w;
    const double a = ke_dot(u, f.chi_perp, p);
    const double b = ke_dot(u, f.e2, p);
    const double c = ke_dot(u, f.chi, p);
    const double y1 = ke_dot(s.y, f.chi_perp, p);
    const double y3 = ke_dot(s.y, f.chi, p);
    const double speed = std::hypot(a, b);

    CollisionResult res;
    res.out = s;
    if (!(b < 0.0) || speed == 0.0) return res;

    WallSpec fs = foreshorten(wall.spec(), p.m, p.J);
    fs.datum = Datum::half_plane;
    const Wall tilde = build_wall(fs);
    // In units Y = y / sqrt(m) the cross-section is the foreshortened wall.
    const double root_m = std::sqrt(p.m);
    Limits lim = limits;
    lim.max_time = limits.max_time * speed / root_m;
    const TraceExit ex = trace_exit(tilde, {y1 / root_m, 0.0}, {a / speed, b / speed}, lim);
    res.status = ex.status;
    res.bounces = ex.bounces;
    if (ex.status != Status::returned) return res;

    const double t = ex.time * root_m / speed;
    const double y1_out = ex.position.x * root_m;
    const double y3_out = y3 + c * t;
    res.time = t;
    res.out.y = y1_out * f.chi_perp + y3_out * f.chi;
    res.out.w = speed * (ex.direction.x * f.chi_perp + ex.direction.y * f.e2) + c * f.chi;
    res.max_energy_drift = std::abs(ke_norm(res.out.w, p) - ke_norm(u, p));
    res.rolling_drift = std::abs(rolling_momentum(res.out.w, p) - rolling_momentum(u, p));
    return res;
}

namespace {

// Conservative-advancement contact search for the full disk model.
class ContactTracer {
public:
    ContactTracer(const Wall& wall, const DiskParams& p) : wall_(wall), p_(p) {
        eps_ = wall.scale();
        top_ = wall.datum_offset();
        band_ = wall.cell_depth() * eps_;
        margin_ = std::max(4.0 * band_, 0.05);
        const double c = 1.0 - (band_ + 2.0 * margin_);
        window_ = c <= -1.0 ? p.N : static_cast<int>(std::ceil(std::acos(c) / p.rho)) + 1;
        window_ = std::min(window_, p.N);
    }

    struct Probe {
        double g = 0.0;  // signed clearance, physical units
        Vec2 normal;
        bool corner = false;
    };

    Vec2 satellite(const Vec3& y, int k) const {
        const double b = y[2] + k * p_.rho;
        return {y[0] + std::sin(b), y[1] - std::cos(b)};
    }

    Probe probe(const Vec3& y, int k) const {
        const Vec2 s = satellite(y, k);
        const Vec2 q{s.x / eps_, (s.y - top_) / eps_};
        const Wall::Nearest nr = wall_.cell_nearest(q, tol::endpoint);
        return {nr.distance * eps_, nr.normal, nr.at_corner};
    }

    // Satellite indices that can reach the wall band during a step.
    void candidates(const Vec3& y, std::vector<int>& out) const {
        out.clear();
        if (window_ >= p_.N) {
            for (int k = 0; k < p_.N; ++k) out.push_back(k);
            return;
        }
        const long lowest = std::lround(-y[2] / p_.rho);
        for (long j = lowest - window_; j <= lowest + window_; ++j) {
            long k = j % p_.N;
            if (k < 0) k += p_.N;
            out.push_back(static_cast<int>(k));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }

    double margin() const { return margin_; }
    double eps() const { return eps_; }

private:
    const Wall& wall_;
    const DiskParams& p_;
    double eps_ = 1.0;
    double top_ = -1.0;
    double band_ = 0.0;
    double margin_ = 0.05;
    int window_ = 8;
};

}  // namespace

CollisionResult collide(const Wall& wall, const DiskParams& p, const ConfigState& s, const Limits& limits) {
    p.validate();
    if (wall.spec().datum != Datum::disk_wall) throw Error(ErrorKind::InvalidParam, "collide needs a disk_wall wall");
    CollisionResult res;
    res.out = s;
    Vec3 y = s.y;
    Vec3 u = -s.w;
    if (!(u[1] < 0.0)) return res;
    const double rm_in = rolling_momentum(u, p);

    ContactTracer tr(wall, p);
    const double eps = tr.eps();
    const double g_tol = 1e-12 * eps;        // contact residual
    const double multi_tol = tol::endpoint * eps;
    std::vector<int> cand;
    std::vector<double> g_now;
    double total = 0.0;
    std::size_t steps = 0;
    const std::size_t max_steps = 50'000'000;

    for (;;) {
        const double lip = std::hypot(u[0], u[1]) + std::abs(u[2]);
        const double t_exit = u[1] > 0.0 ? -y[1] / u[1] : std::numeric_limits<double>::infinity();
        const double dt_floor = 1e-7 * eps / lip;
        double t = 0.0;
        int hit_k = -1;
        double hit_t = 0.0;

        // Leaving contact: the satellite that just reflected may sit at g ~ 0.
        for (;;) {
            if (++steps > max_steps) {
                res.status = Status::capped;
                return res;
            }
            const Vec3 yt = y + t * u;
            tr.candidates(yt, cand);
            double gmin = tr.margin();
            g_now.assign(cand.size(), 0.0);
            for (std::size_t i = 0; i < cand.size(); ++i) {
                g_now[i] = tr.probe(yt, cand[i]).g;
                gmin = std::min(gmin, g_now[i]);
            }
            if (gmin < -1e-9 * eps) {
                res.status = Status::singular;  // started inside the wall
                return res;
            }
            // Contact at the current time with the satellite moving inward.
            if (gmin <= g_tol) {
                for (std::size_t i = 0; i < cand.size(); ++i) {
                    if (g_now[i] > g_tol) continue;
                    const auto pr = tr.probe(yt, cand[i]);
                    const double b = yt[2] + cand[i] * p.rho;
                    const Vec2 vel{u[0] + std::cos(b) * u[2], u[1] + std::sin(b) * u[2]};
                    if (dot(pr.normal, vel) < 0.0) {
                        hit_k = cand[i];
                        hit_t = t;
                        break;
                    }
                }
                if (hit_k >= 0) break;
            }
            if (t >= t_exit) break;
            const double dt = std::max(std::max(gmin, 0.0) / lip, dt_floor);
            const double t_next = std::min(t + dt, t_exit);
            const Vec3 yn = y + t_next * u;
            // Earliest sign change among candidate satellites.
            double best = std::numeric_limits<double>::infinity();
            for (int k : cand) {
                if (tr.probe(yn, k).g >= 0.0) continue;
                double lo = t;
                double hi = t_next;
                for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (tr.probe(y + mid * u, k).g >= 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                // Newton polish from the outside bracket end, kept in [lo, hi].
                double tc = lo;
                for (int it = 0; it < 3; ++it) {
                    const Vec3 yc = y + tc * u;
                    const auto pr = tr.probe(yc, k);
                    const double b = yc[2] + k * p.rho;
                    const double gp = dot(pr.normal, Vec2{u[0] + std::cos(b) * u[2], u[1] + std::sin(b) * u[2]});
                    if (gp >= 0.0) break;
                    const double tn = tc - pr.g / gp;
                    if (!(tn >= lo && tn <= hi)) break;
                    tc = tn;
                }
                if (tc < best) {
                    best = tc;
                    hit_k = k;
                }
            }
            if (hit_k >= 0) {
                hit_t = best;
                break;
            }
            t = t_next;
        }

        if (hit_k < 0) {
            // No contact before returning to P.
            y = y + t_exit * u;
            y[1] = 0.0;
            total += t_exit;
            res.status = Status::returned;
            res.out.y = y;
            res.out.w = u;
            res.time = total;
            res.rolling_drift = std::abs(rolling_momentum(u, p) - rm_in);
            return res;
        }

        y = y + hit_t * u;
        total += hit_t;
        tr.candidates(y, cand);
        const auto contact = tr.probe(y, hit_k);
        if (contact.corner) {
            res.status = Status::singular;
            return res;
        }
        for (int k : cand) {
            if (k != hit_k && tr.probe(y, k).g < multi_tol) {
                res.status = Status::singular;
                return res;
            }
        }
        const double beta = y[2] + hit_k * p.rho;
        const Vec2 vel{u[0] + std::cos(beta) * u[2], u[1] + std::sin(beta) * u[2]};
        if (std::abs(dot(contact.normal, vel)) < tol::tangency * lip) {
            res.status = Status::singular;
            return res;
        }
        const Vec3 n = contact_normal(contact.normal, beta, p);
        const double before = ke_norm(u, p);
        u = u - 2.0 * ke_dot(u, n, p) * n;
        res.max_energy_drift = std::max(res.max_energy_drift, std::abs(ke_norm(u, p) - before));
        ++res.bounces;
        if (res.bounces >= limits.max_bounces || total > limits.max_time) {
            res.status = Status::capped;
            return res;
        }
    }
}

TiltedState rough_collision_sample(const Kernel& kernel, const TiltedState& t, Stream& rng) {
    TiltedState out = t;
    out.theta = kernel.sample(t.theta, rng);
    out.psi = pi - t.psi;
    return out;
}

ConfigState random_incoming(const Wall& wall, const DiskParams& p, double theta, double psi, Stream& rng) {
    TiltedState t;
    t.theta = theta;
    t.psi = psi;
    ConfigState s = from_tilted(t, p);
    s.y = Vec3(rng.uniform() * wall.period(), 0.0, rng.uniform() * p.rho);
    return s;
}

}  // namespace rough
