// SPDX-License-Identifier: Apache-2.0
#include "rough/billiard2d.hpp"

#include <algorithm>
#include <cmath>

#include "rough/error.hpp"

namespace rough {

const char* status_name(Status s) noexcept {
    switch (s) {
        case Status::returned: return "returned";
        case Status::singular: return "singular";
        case Status::capped: return "capped";
    }
    return "singular";
}

Vec2 reflect(Vec2 dir, Vec2 normal) {
    const double c = dot(dir, normal);
    if (c >= 0.0) throw Error(ErrorKind::NotIncoming, "direction is not incoming with respect to the normal");
    Vec2 out = dir - (2.0 * c) * normal;
    const double n = norm(out);
    return {out.x / n, out.y / n};
}

namespace {

constexpr int max_periods_scanned = 1 << 22;

struct Hit {
    double t = 0.0;
    double param = 0.0;
    int seg = -1;
    int period = 0;
    bool tangential = false;
};

// Smallest admissible ray parameter hitting seg (translated by shift).
bool intersect(const Segment& seg, Vec2 shift, Vec2 p, Vec2 d, double tmin, bool same_seg, Hit& hit) {
    if (seg.kind == Segment::Kind::line) {
        if (same_seg) return false;
        const Vec2 a = seg.p0 + shift;
        const Vec2 e = seg.p1 - seg.p0;
        const double denom = cross(d, e);
        const Vec2 ap = a - p;
        if (denom == 0.0) {
            // Parallel: only colinear overlap matters, and it is grazing.
            if (std::abs(cross(ap, d)) > 1e-15) return false;
            const double ta = dot(ap, d);
            const double tb = dot(ap + e, d);
            const double t = std::max(std::min(ta, tb), 0.0);
            if (std::max(ta, tb) < tmin) return false;
            hit.t = t;
            hit.param = 0.5;
            hit.tangential = true;
            return true;
        }
        const double t = cross(ap, e) / denom;
        const double s = cross(ap, d) / denom;
        if (t < tmin || s < -1e-12 || s > 1.0 + 1e-12) return false;
        hit.t = t;
        hit.param = std::clamp(s, 0.0, 1.0);
        hit.tangential = false;
        return true;
    }
    // Arc: map the ellipse to the unit circle.
    const Vec2 c = seg.center + shift;
    const Vec2 q{(p.x - c.x) / seg.rx, (p.y - c.y) / seg.ry};
    const Vec2 e{d.x / seg.rx, d.y / seg.ry};
    const double A = dot(e, e);
    const double B = dot(q, e);
    const double C = dot(q, q) - 1.0;
    const double disc = B * B - A * C;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    // Stable pair of roots.
    const double qq = -(B + std::copysign(sq, B));
    double r1 = qq / A;
    double r2 = qq != 0.0 ? C / qq : r1;
    if (r1 > r2) std::swap(r1, r2);
    const double lo = same_seg ? std::max(tmin, 1e-9) : tmin;
    for (double t : {r1, r2}) {
        if (!(t >= lo)) continue;
        // One Newton step on |q + t e|^2 - 1.
        Vec2 u = q + t * e;
        const double f = dot(u, u) - 1.0;
        const double fp = 2.0 * dot(u, e);
        if (fp != 0.0) {
            const double tn = t - f / fp;
            if (std::abs(tn - t) < 1e-9) t = tn;
        }
        u = q + t * e;
        const double param = std::atan2(u.y, u.x);
        if (!seg.param_in_range(param, 1e-12)) continue;
        hit.t = t;
        hit.param = param;
        hit.tangential = disc <= 0.0;
        return true;
    }
    return false;
}

// Leaving through a corner that lies on the top line.
bool exits_at_corner(const Wall& wall, double x) {
    const auto& cell = wall.cell();
    const double P = wall.cell_period();
    double u = std::fmod(x, P);
    if (u < 0.0) u += P;
    for (std::size_t i = 0; i < cell.size(); ++i) {
        if (!wall.corner(i)) continue;
        const Vec2 c = cell[i].kind == Segment::Kind::line ? cell[i].p0 : cell[i].point_at(cell[i].t0);
        if (std::abs(c.y) > tol::endpoint) continue;
        const double gap = std::abs(u - c.x);
        if (std::min(gap, P - gap) <= tol::endpoint) return true;
    }
    return false;
}

// Normalized-coordinate tracer shared by trace and trace_exit.
template <class Record>
Status run(const Wall& wall, Vec2& p, Vec2& d, const Limits& limits, double& time, std::size_t& bounces,
           Record&& record) {
    const auto& cell = wall.cell();
    const double P = wall.cell_period();
    const double h = wall.cell_depth();
    int last_seg = -1;
    int last_period = 0;
    bool first = true;
    for (;;) {
        double t_end;
        if (d.y > 0.0) {
            t_end = std::max(0.0, -p.y / d.y);
        } else if (d.y < 0.0) {
            t_end = (p.y + h) / (-d.y) + 1e-9;
        } else {
            t_end = std::numeric_limits<double>::infinity();
        }
        const double tmin = first ? -1e-12 : 1e-12;
        const int k0 = static_cast<int>(std::floor(p.x / P));
        const int step = d.x > 0.0 ? 1 : (d.x < 0.0 ? -1 : 0);
        const double x_end = p.x + t_end * d.x;

        Hit best;
        best.t = std::numeric_limits<double>::infinity();
        bool found = false;
        auto scan = [&](int k) {
            const Vec2 shift{k * P, 0.0};
            for (std::size_t i = 0; i < cell.size(); ++i) {
                Hit hit;
                const bool same = static_cast<int>(i) == last_seg && k == last_period;
                if (!intersect(cell[i], shift, p, d, tmin, same, hit)) continue;
                if (hit.t > t_end) continue;
                if (hit.t < best.t) {
                    best = hit;
                    best.seg = static_cast<int>(i);
                    best.period = k;
                    found = true;
                }
            }
        };
        scan(k0 - 1);
        scan(k0);
        scan(k0 + 1);
        if (!found && step != 0) {
            for (int n = 2; n < max_periods_scanned; ++n) {
                const int k = k0 + step * n;
                const double x_near = step > 0 ? k * P : (k + 1) * P;
                if (std::isfinite(x_end) && (step > 0 ? x_near > x_end : x_near < x_end)) break;
                scan(k);
                if (found) {
                    scan(k + step);
                    break;
                }
            }
        }

        if (!found) {
            if (d.y > 0.0) {
                const double t = t_end;
                p = p + t * d;
                p.y = 0.0;
                time += t;
                return exits_at_corner(wall, p.x) ? Status::singular : Status::returned;
            }
            return Status::singular;
        }

        const Segment& seg = cell[best.seg];
        const Vec2 shift{best.period * P, 0.0};
        Vec2 q = p + best.t * d;
        if (best.tangential) return Status::singular;
        Vec2 n = seg.normal_at(best.param);
        double c = dot(d, n);
        if (c > 0.0) {
            n = -n;
            c = -c;
        }
        if (-c < tol::tangency) return Status::singular;
        // Corner proximity, measured along the boundary.
        if (seg.kind == Segment::Kind::line) {
            const double len = norm(seg.p1 - seg.p0);
            if ((best.param * len <= tol::endpoint && wall.corner(best.seg)) ||
                ((1.0 - best.param) * len <= tol::endpoint && wall.corner_at_end(best.seg))) {
                return Status::singular;
            }
        } else {
            if ((norm(q - (seg.p0 + shift)) <= tol::endpoint && wall.corner(best.seg)) ||
                (norm(q - (seg.p1 + shift)) <= tol::endpoint && wall.corner_at_end(best.seg))) {
                return Status::singular;
            }
        }
        const Vec2 out = reflect(d, n);
        record(q, d, out, best.seg, best.period, best.t);
        time += best.t;
        p = q;
        d = out;
        ++bounces;
        last_seg = best.seg;
        last_period = best.period;
        first = false;
        if (bounces >= limits.max_bounces || time > limits.max_time) return Status::capped;
    }
}

}  // namespace

TraceExit trace_exit(const Wall& wall, Vec2 pos, Vec2 dir, const Limits& limits) {
    const double eps = wall.scale();
    Vec2 p{pos.x / eps, (pos.y - wall.datum_offset()) / eps};
    Vec2 d = dir;
    double time = 0.0;
    TraceExit out;
    Limits scaled = limits;
    scaled.max_time = limits.max_time / eps;
    out.status = run(wall, p, d, scaled, time, out.bounces, [](Vec2, Vec2, Vec2, int, int, double) {});
    out.position = {p.x * eps, p.y * eps + wall.datum_offset()};
    out.direction = d;
    out.time = time * eps;
    return out;
}

TrajectoryLog trace(const Wall& wall, Vec2 pos, Vec2 dir, const Limits& limits) {
    const double eps = wall.scale();
    const double off = wall.datum_offset();
    Vec2 p{pos.x / eps, (pos.y - off) / eps};
    Vec2 d = dir;
    double time = 0.0;
    std::size_t bounces = 0;
    TrajectoryLog log;
    Limits scaled = limits;
    scaled.max_time = limits.max_time / eps;
    log.terminal = run(wall, p, d, scaled, time, bounces, [&](Vec2 q, Vec2 in, Vec2 out, int seg, int k, double t) {
        log.events.push_back({{q.x * eps, q.y * eps + off}, in, out, seg, k, t * eps});
    });
    log.exit_position = {p.x * eps, p.y * eps + off};
    log.exit_direction = d;
    log.total_time = time * eps;
    return log;
}

MacroResult macro_reflection(const Wall& wall, ReflState s, const Limits& limits) {
    const Vec2 dir{-std::cos(s.theta), -std::sin(s.theta)};
    const TraceExit ex = trace_exit(wall, {s.x, wall.datum_offset()}, dir, limits);
    MacroResult r;
    r.status = ex.status;
    r.bounces = ex.bounces;
    r.time = ex.time;
    r.out.x = ex.position.x;
    r.out.theta = std::atan2(ex.direction.y, ex.direction.x);
    if (r.status == Status::returned && !(r.out.theta > 0.0 && r.out.theta < 3.14159265358979323846)) {
        r.status = Status::singular;
    }
    return r;
}

}  // namespace rough
