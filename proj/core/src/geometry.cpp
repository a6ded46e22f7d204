// SPDX-License-Identifier: Apache-2.0
#include "rough/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "rough/error.hpp"

namespace rough {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double chain_tol = 1e-12;

Vec2 unit(Vec2 v) {
    const double n = norm(v);
    return {v.x / n, v.y / n};
}

// Eberly's robust point-to-ellipse distance for e0 >= e1 > 0 and a query
// point in the first quadrant. Returns the nearest point in (x0, x1).
double ellipse_root(double r0, double z0, double z1, double g) {
    const double n0 = r0 * z0;
    double s0 = z1 - 1.0;
    double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
    double s = 0.0;
    for (int i = 0; i < 1100; ++i) {
        s = 0.5 * (s0 + s1);
        if (s == s0 || s == s1) break;
        const double a = n0 / (s + r0);
        const double b = z1 / (s + 1.0);
        const double gs = a * a + b * b - 1.0;
        if (gs > 0.0) {
            s0 = s;
        } else if (gs < 0.0) {
            s1 = s;
        } else {
            break;
        }
    }
    return s;
}

double ellipse_distance_quadrant(double e0, double e1, double y0, double y1, double& x0, double& x1) {
    if (y1 > 0.0) {
        if (y0 > 0.0) {
            const double z0 = y0 / e0;
            const double z1 = y1 / e1;
            const double g = z0 * z0 + z1 * z1 - 1.0;
            if (g != 0.0) {
                const double r0 = (e0 / e1) * (e0 / e1);
                const double s = ellipse_root(r0, z0, z1, g);
                x0 = r0 * y0 / (s + r0);
                x1 = y1 / (s + 1.0);
                return std::hypot(x0 - y0, x1 - y1);
            }
            x0 = y0;
            x1 = y1;
            return 0.0;
        }
        x0 = 0.0;
        x1 = e1;
        return std::abs(y1 - e1);
    }
    const double numer = e0 * y0;
    const double denom = e0 * e0 - e1 * e1;
    if (numer < denom) {
        const double xde = numer / denom;
        x0 = e0 * xde;
        x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde * xde));
        return std::hypot(x0 - y0, x1);
    }
    x0 = e0;
    x1 = 0.0;
    return std::abs(y0 - e0);
}

// Nearest point on a full axis-aligned ellipse centered at the origin.
Vec2 ellipse_nearest(double rx, double ry, Vec2 v) {
    const bool swap = rx < ry;
    const double e0 = swap ? ry : rx;
    const double e1 = swap ? rx : ry;
    const double y0 = std::abs(swap ? v.y : v.x);
    const double y1 = std::abs(swap ? v.x : v.y);
    double x0 = 0.0;
    double x1 = 0.0;
    ellipse_distance_quadrant(e0, e1, y0, y1, x0, x1);
    if (swap) std::swap(x0, x1);
    return {std::copysign(x0, v.x), std::copysign(x1, v.y)};
}

double wrap_from(double t, double lo) {
    double d = std::fmod(t - lo, two_pi);
    if (d < 0.0) d += two_pi;
    return lo + d;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::InvalidParam, what);
}

void require_custom(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::MalformedCustom, what);
}

double segment_min_y(const Segment& s) {
    double y = std::min(s.p0.y, s.p1.y);
    if (s.kind == Segment::Kind::arc && s.param_in_range(-pi / 2.0, 0.0)) y = std::min(y, s.center.y - s.ry);
    return y;
}

double segment_max_y(const Segment& s) {
    double y = std::max(s.p0.y, s.p1.y);
    if (s.kind == Segment::Kind::arc && s.param_in_range(pi / 2.0, 0.0)) y = std::max(y, s.center.y + s.ry);
    return y;
}

}  // namespace

Segment Segment::line(Vec2 a, Vec2 b) {
    Segment s;
    s.kind = Kind::line;
    s.p0 = a;
    s.p1 = b;
    return s;
}

Segment Segment::arc(Vec2 c, double rx_, double ry_, double t0_, double t1_) {
    Segment s;
    s.kind = Kind::arc;
    s.center = c;
    s.rx = rx_;
    s.ry = ry_;
    s.t0 = t0_;
    s.t1 = t1_;
    s.p0 = s.point_at(t0_);
    s.p1 = s.point_at(t1_);
    return s;
}

bool Segment::concave() const { return kind == Kind::arc && t1 > t0; }

Vec2 Segment::point_at(double t) const {
    if (kind == Kind::line) return p0 + t * (p1 - p0);
    return {center.x + rx * std::cos(t), center.y + ry * std::sin(t)};
}

Vec2 Segment::tangent_at(double t) const {
    if (kind == Kind::line) return unit(p1 - p0);
    const double s = t1 > t0 ? 1.0 : -1.0;
    return unit({-s * rx * std::sin(t), s * ry * std::cos(t)});
}

Vec2 Segment::normal_at(double t) const { return perp(tangent_at(t)); }

double Segment::curvature_at(double t) const {
    if (kind == Kind::line) return 0.0;
    const double a = rx * std::sin(t);
    const double b = ry * std::cos(t);
    return rx * ry / std::pow(a * a + b * b, 1.5);
}

double Segment::param_of(Vec2 p) const {
    if (kind == Kind::line) {
        const Vec2 d = p1 - p0;
        return dot(p - p0, d) / dot(d, d);
    }
    return std::atan2((p.y - center.y) / ry, (p.x - center.x) / rx);
}

bool Segment::param_in_range(double t, double slack) const {
    if (kind == Kind::line) return t >= -slack && t <= 1.0 + slack;
    const double lo = std::min(t0, t1);
    const double hi = std::max(t0, t1);
    const double w = wrap_from(t, lo);
    return w <= hi + slack || w >= lo + two_pi - slack;
}

Segment Segment::translated(Vec2 d) const {
    Segment s = *this;
    s.p0 = p0 + d;
    s.p1 = p1 + d;
    s.center = center + d;
    return s;
}

Segment Segment::scaled(double sx, double sy) const {
    Segment s = *this;
    s.p0 = {p0.x * sx, p0.y * sy};
    s.p1 = {p1.x * sx, p1.y * sy};
    s.center = {center.x * sx, center.y * sy};
    s.rx = rx * sx;
    s.ry = ry * sy;
    return s;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::flat: return "flat";
        case Family::rect_teeth: return "rect_teeth";
        case Family::tri_teeth: return "tri_teeth";
        case Family::circ_arcs: return "circ_arcs";
        case Family::ell_arcs: return "ell_arcs";
        case Family::custom: return "custom";
    }
    return "flat";
}

std::string datum_name(Datum d) { return d == Datum::disk_wall ? "disk_wall" : "half_plane"; }

Family parse_family(const std::string& s) {
    if (s == "flat") return Family::flat;
    if (s == "rect_teeth" || s == "rect") return Family::rect_teeth;
    if (s == "tri_teeth" || s == "tri") return Family::tri_teeth;
    if (s == "circ_arcs" || s == "circ") return Family::circ_arcs;
    if (s == "ell_arcs" || s == "ell") return Family::ell_arcs;
    if (s == "custom") return Family::custom;
    throw Error(ErrorKind::InvalidParam, "unknown wall family '" + s + "'");
}

Datum parse_datum(const std::string& s) {
    if (s == "half_plane") return Datum::half_plane;
    if (s == "disk_wall") return Datum::disk_wall;
    throw Error(ErrorKind::InvalidParam, "unknown datum '" + s + "'");
}

namespace {

Vec2 vec_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Segment segment_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "line") return Segment::line(vec_from_json(j.at("p0")), vec_from_json(j.at("p1")));
    if (kind == "arc") {
        const double rx = j.contains("radius") ? j.at("radius").get<double>() : j.at("rx").get<double>();
        const double ry = j.contains("radius") ? rx : j.at("ry").get<double>();
        return Segment::arc(vec_from_json(j.at("center")), rx, ry, j.at("t0").get<double>(), j.at("t1").get<double>());
    }
    throw Error(ErrorKind::MalformedCustom, "unknown segment kind '" + kind + "'");
}

}  // namespace

nlohmann::json to_json(const Segment& s) {
    nlohmann::json j;
    if (s.kind == Segment::Kind::line) {
        j["kind"] = "line";
        j["p0"] = {s.p0.x, s.p0.y};
        j["p1"] = {s.p1.x, s.p1.y};
    } else {
        j["kind"] = "arc";
        j["center"] = {s.center.x, s.center.y};
        j["rx"] = s.rx;
        j["ry"] = s.ry;
        j["t0"] = s.t0;
        j["t1"] = s.t1;
        j["p0"] = {s.p0.x, s.p0.y};
        j["p1"] = {s.p1.x, s.p1.y};
        j["concave"] = s.concave();
    }
    j["period_index"] = s.period_index;
    return j;
}

WallSpec wall_spec_from_json(const nlohmann::json& j) {
    WallSpec spec;
    try {
        spec.family = parse_family(j.at("family").get<std::string>());
        const nlohmann::json params = j.value("params", nlohmann::json::object());
        spec.scale = j.value("scale", 1.0);
        spec.datum = parse_datum(j.value("datum", std::string("half_plane")));
        spec.depth = params.value("depth", 0.0);
        spec.r = params.value("r", 1.0);
        spec.psi = params.value("psi", 1.0);
        spec.xi = params.value("xi", 1.0);
        spec.axis_ratio = params.value("axis_ratio", 1.0);
        spec.period = params.value("period", 1.0);
        if (params.contains("segments")) {
            for (const auto& s : params.at("segments")) spec.segments.push_back(segment_from_json(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidParam, std::string("wall spec: ") + e.what());
    }
    return spec;
}

nlohmann::json to_json(const WallSpec& spec) {
    nlohmann::json params = nlohmann::json::object();
    switch (spec.family) {
        case Family::flat: params["depth"] = spec.depth; break;
        case Family::rect_teeth: params["r"] = spec.r; break;
        case Family::tri_teeth: params["psi"] = spec.psi; break;
        case Family::circ_arcs: params["xi"] = spec.xi; break;
        case Family::ell_arcs:
            params["xi"] = spec.xi;
            params["axis_ratio"] = spec.axis_ratio;
            break;
        case Family::custom: {
            params["period"] = spec.period;
            auto segs = nlohmann::json::array();
            for (const auto& s : spec.segments) segs.push_back(to_json(s));
            params["segments"] = segs;
            break;
        }
    }
    return {{"family", family_name(spec.family)},
            {"params", params},
            {"scale", spec.scale},
            {"datum", datum_name(spec.datum)}};
}

std::vector<Segment> family_cell(const WallSpec& spec) {
    switch (spec.family) {
        case Family::flat:
            return {Segment::line({0.0, -spec.depth}, {1.0, -spec.depth})};
        case Family::rect_teeth: {
            const double r = spec.r;
            return {Segment::line({0.0, 0.0}, {1.0, 0.0}), Segment::line({1.0, 0.0}, {1.0, -r}),
                    Segment::line({1.0, -r}, {2.0, -r}), Segment::line({2.0, -r}, {2.0, 0.0})};
        }
        case Family::tri_teeth: {
            const double h = 0.5 / std::tan(spec.psi / 2.0);
            return {Segment::line({0.0, 0.0}, {0.5, -h}), Segment::line({0.5, -h}, {1.0, 0.0})};
        }
        case Family::circ_arcs:
        case Family::ell_arcs: {
            const double a = spec.family == Family::ell_arcs ? spec.axis_ratio : 1.0;
            const double R = 0.5 / std::sin(spec.xi);
            const double cy = 0.5 * std::cos(spec.xi) / std::sin(spec.xi) / a;
            Segment s = Segment::arc({0.5, cy}, R, R / a, -pi / 2.0 - spec.xi, -pi / 2.0 + spec.xi);
            // Pin the endpoints to the exact cusp points.
            s.p0 = {0.0, 0.0};
            s.p1 = {1.0, 0.0};
            return {s};
        }
        case Family::custom:
            return spec.segments;
    }
    return {};
}

Wall::Wall(WallSpec spec) : spec_(std::move(spec)) {
    const WallSpec& s = spec_;
    require(std::isfinite(s.scale) && s.scale > 0.0, "scale must be positive");
    switch (s.family) {
        case Family::flat: require(std::isfinite(s.depth) && s.depth >= 0.0, "flat depth must be >= 0"); break;
        case Family::rect_teeth: require(std::isfinite(s.r) && s.r > 0.0, "rect_teeth requires r > 0"); break;
        case Family::tri_teeth: require(s.psi > 0.0 && s.psi < pi, "tri_teeth requires psi in (0, pi)"); break;
        case Family::ell_arcs:
            require(std::isfinite(s.axis_ratio) && s.axis_ratio > 0.0, "ell_arcs requires axis_ratio > 0");
            [[fallthrough]];
        case Family::circ_arcs:
            require(s.xi > 0.0 && s.xi <= pi / 2.0, "arcs require xi in (0, pi/2]");
            break;
        case Family::custom:
            require_custom(std::isfinite(s.period) && s.period > 0.0, "custom period must be positive");
            require_custom(!s.segments.empty(), "custom wall has no segments");
            break;
    }

    cell_ = family_cell(s);
    period_ = s.family == Family::rect_teeth ? 2.0 : (s.family == Family::custom ? s.period : 1.0);

    if (s.family == Family::custom) {
        const Segment& first = cell_.front();
        const Segment& last = cell_.back();
        require_custom(norm(first.p0) <= chain_tol, "custom boundary must start at (0, 0)");
        require_custom(norm(last.p1 - Vec2{period_, 0.0}) <= chain_tol, "custom boundary must end at (period, 0)");
        for (std::size_t i = 0; i < cell_.size(); ++i) {
            const Segment& seg = cell_[i];
            if (i + 1 < cell_.size()) {
                require_custom(norm(seg.p1 - cell_[i + 1].p0) <= chain_tol, "custom segments must join end to start");
            }
            require_custom(seg.p1.x >= seg.p0.x - chain_tol, "custom segments must advance left to right");
            if (seg.kind == Segment::Kind::arc) {
                require_custom(seg.rx > 0.0 && seg.ry > 0.0, "arc radii must be positive");
                require_custom(std::abs(seg.t1 - seg.t0) < two_pi, "arc spans more than a full turn");
                const double lo = std::min(seg.t0, seg.t1);
                const double hi = std::max(seg.t0, seg.t1);
                for (double turn : {0.0, pi, two_pi, -pi}) {
                    require_custom(!(turn > lo + 1e-12 && turn < hi - 1e-12), "custom arcs must be x-monotone");
                }
            }
            require_custom(segment_max_y(seg) <= chain_tol, "custom boundary rises above the datum line");
            require_custom(seg.p0.x >= -chain_tol && seg.p1.x <= period_ + chain_tol,
                           "custom segment leaves its period");
        }
    }

    depth_ = 0.0;
    for (auto& seg : cell_) depth_ = std::max(depth_, -segment_min_y(seg));

    corner_.assign(cell_.size(), false);
    for (std::size_t i = 0; i < cell_.size(); ++i) {
        const Segment& prev = cell_[(i + cell_.size() - 1) % cell_.size()];
        const Vec2 ta = prev.tangent_at(prev.kind == Segment::Kind::line ? 1.0 : prev.t1);
        const Vec2 tb = cell_[i].tangent_at(cell_[i].kind == Segment::Kind::line ? 0.0 : cell_[i].t0);
        corner_[i] = std::abs(cross(ta, tb)) > 1e-12 || dot(ta, tb) < 0.0;
    }
}

std::vector<Segment> Wall::segments(int k) const {
    std::vector<Segment> out;
    out.reserve(cell_.size());
    for (const auto& seg : cell_) {
        Segment s = seg.translated({k * period_, 0.0}).scaled(spec_.scale, spec_.scale).translated({0.0, datum_offset()});
        s.period_index = k;
        out.push_back(s);
    }
    return out;
}

double Wall::cell_height(double x) const {
    double u = std::fmod(x, period_);
    if (u < 0.0) u += period_;
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (const auto& seg : cell_) {
        const double xa = std::min(seg.p0.x, seg.p1.x);
        const double xb = std::max(seg.p0.x, seg.p1.x);
        if (xb - xa <= 0.0) continue;
        if (u < xa || u > xb) continue;
        double y = 0.0;
        if (seg.kind == Segment::Kind::line) {
            y = seg.p0.y + (seg.p1.y - seg.p0.y) * (u - seg.p0.x) / (seg.p1.x - seg.p0.x);
        } else {
            const double c = std::clamp((u - seg.center.x) / seg.rx, -1.0, 1.0);
            const double a = std::acos(c);
            const double t = seg.param_in_range(-a, 1e-12) ? -a : a;
            y = seg.center.y + seg.ry * std::sin(t);
        }
        // At a shared x (vertical drop) keep the top so the inside test is
        // half-open in the same way for every family.
        best = found ? std::max(best, y) : y;
        found = true;
    }
    return found ? best : 0.0;
}

Wall::Nearest Wall::cell_nearest(Vec2 p, double corner_tol) const {
    Nearest out;
    if (p.y > 0.0) {
        out.distance = p.y;
        out.normal = {0.0, 1.0};
        out.exact = false;
        return out;
    }
    const int k = static_cast<int>(std::floor(p.x / period_));
    double best = std::numeric_limits<double>::infinity();
    for (int j = k - 1; j <= k + 1; ++j) {
        const Vec2 shift{j * period_, 0.0};
        for (std::size_t i = 0; i < cell_.size(); ++i) {
            const Segment& seg = cell_[i];
            const Vec2 q = p - shift;
            double d = 0.0;
            Vec2 n;
            bool corner = false;
            bool exact = true;
            if (seg.kind == Segment::Kind::line) {
                const Vec2 e = seg.p1 - seg.p0;
                const double len2 = dot(e, e);
                const double s = std::clamp(dot(q - seg.p0, e) / len2, 0.0, 1.0);
                const Vec2 foot = seg.p0 + s * e;
                d = norm(q - foot);
                n = seg.normal_at(0.0);
                const double len = std::sqrt(len2);
                corner = (s * len <= corner_tol && corner_[i]) || ((1.0 - s) * len <= corner_tol && corner_at_end(i));
            } else {
                const Vec2 v = q - seg.center;
                Vec2 foot;
                if (seg.is_circle()) {
                    const double r = norm(v);
                    foot = r > 0.0 ? seg.center + (seg.rx / r) * v : seg.center + Vec2{0.0, -seg.rx};
                } else {
                    foot = seg.center + ellipse_nearest(seg.rx, seg.ry, v);
                }
                const double t = seg.param_of(foot);
                if (seg.param_in_range(t, 0.0)) {
                    d = norm(q - foot);
                    n = seg.normal_at(t);
                    const double arc0 = std::abs(t - seg.t0) * std::max(seg.rx, seg.ry);
                    const double arc1 = std::abs(seg.t1 - t) * std::max(seg.rx, seg.ry);
                    corner = (arc0 <= corner_tol && corner_[i]) || (arc1 <= corner_tol && corner_at_end(i));
                } else {
                    const double d0 = norm(q - seg.p0);
                    const double d1 = norm(q - seg.p1);
                    if (seg.is_circle()) {
                        d = std::min(d0, d1);
                    } else {
                        d = norm(q - foot);
                        exact = false;
                    }
                    const bool near0 = d0 <= d1;
                    n = seg.normal_at(near0 ? seg.t0 : seg.t1);
                    corner = near0 ? corner_[i] : corner_at_end(i);
                }
            }
            if (d < best) {
                best = d;
                out.normal = n;
                out.at_corner = corner;
                out.exact = exact;
            }
        }
    }
    if (best > period_) {
        best = period_;
        out.exact = false;
    }
    const bool inside = p.y < cell_height(p.x);
    out.distance = inside ? -best : best;
    return out;
}

std::vector<Vec2> Wall::polyline(double x0, double x1, int samples_per_period) const {
    std::vector<Vec2> pts;
    const double P = period();
    const int k0 = static_cast<int>(std::floor(x0 / P));
    const int k1 = static_cast<int>(std::ceil(x1 / P));
    const int per_arc = std::max(2, samples_per_period);
    auto push = [&](Vec2 p) {
        if (p.x < x0 - 1e-15 || p.x > x1 + 1e-15) return;
        if (!pts.empty() && norm(pts.back() - p) <= 1e-15) return;
        pts.push_back(p);
    };
    for (int k = k0; k < k1; ++k) {
        for (const auto& seg : segments(k)) {
            if (seg.kind == Segment::Kind::line) {
                push(seg.p0);
                push(seg.p1);
            } else {
                for (int i = 0; i <= per_arc; ++i) {
                    const double t = seg.t0 + (seg.t1 - seg.t0) * i / per_arc;
                    push(i == 0 ? seg.p0 : (i == per_arc ? seg.p1 : seg.point_at(t)));
                }
            }
        }
    }
    return pts;
}

Wall build_wall(const WallSpec& spec) { return Wall(spec); }

WallSpec foreshorten_by(const WallSpec& spec, double c) {
    require(std::isfinite(c) && c > 0.0, "foreshortening factor must be positive");
    WallSpec out = spec;
    out.scale = spec.scale * c;
    switch (spec.family) {
        case Family::flat: out.depth = spec.depth / c; break;
        case Family::rect_teeth: out.r = spec.r / c; break;
        case Family::tri_teeth: out.psi = 2.0 * std::atan(c * std::tan(spec.psi / 2.0)); break;
        case Family::circ_arcs:
            out.family = Family::ell_arcs;
            out.axis_ratio = c;
            break;
        case Family::ell_arcs:
            out.axis_ratio = spec.axis_ratio * c;
            if (std::abs(out.axis_ratio - 1.0) <= 1e-12) {
                out.family = Family::circ_arcs;
                out.axis_ratio = 1.0;
            }
            break;
        case Family::custom:
            for (auto& seg : out.segments) seg = seg.scaled(1.0, 1.0 / c);
            break;
    }
    return out;
}

WallSpec foreshorten(const WallSpec& spec, double m, double J) {
    require(std::isfinite(m) && m > 0.0 && std::isfinite(J) && J > 0.0, "mass and inertia must be positive");
    return foreshorten_by(spec, 1.0 / std::sqrt(1.0 + m / J));
}

}  // namespace rough
