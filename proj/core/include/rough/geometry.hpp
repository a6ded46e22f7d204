// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rough {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// One piece of the boundary: a line segment or an axis-aligned elliptical
/// arc c + (rx cos t, ry sin t) traversed from t0 to t1. Circular arcs have
/// rx == ry. Traversal runs left to right with the free region on the left,
/// so normal() points into the free region.
struct Segment {
    enum class Kind { line, arc };

    Kind kind = Kind::line;
    Vec2 p0;
    Vec2 p1;
    Vec2 center;
    double rx = 0.0;
    double ry = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    int period_index = 0;

    static Segment line(Vec2 a, Vec2 b);
    static Segment arc(Vec2 c, double rx, double ry, double t0, double t1);

    bool is_circle() const { return kind == Kind::arc && rx == ry; }
    /// True when the free region lies on the center side of the arc.
    bool concave() const;
    Vec2 point_at(double t) const;
    Vec2 tangent_at(double t) const;
    /// Unit normal at the point with parameter t (line: any t).
    Vec2 normal_at(double t) const;
    double curvature_at(double t) const;
    /// Arc parameter of a point on the arc's ellipse.
    double param_of(Vec2 p) const;
    bool param_in_range(double t, double slack) const;
    Segment translated(Vec2 d) const;
    Segment scaled(double sx, double sy) const;
};

enum class Family { flat, rect_teeth, tri_teeth, circ_arcs, ell_arcs, custom };
enum class Datum { half_plane, disk_wall };

struct WallSpec {
    Family family = Family::flat;
    double depth = 0.0;       ///< flat: depth below the datum line, in units of scale
    double r = 1.0;           ///< rect_teeth: tooth height / crevice width
    double psi = 1.0;         ///< tri_teeth: groove angle
    double xi = 1.0;          ///< circ_arcs, ell_arcs: half of the arc's turning angle
    double axis_ratio = 1.0;  ///< ell_arcs: horizontal / vertical semi-axis
    double period = 1.0;      ///< custom: period of the normalized cell
    std::vector<Segment> segments;  ///< custom: one normalized period
    double scale = 1.0;
    Datum datum = Datum::half_plane;
};

std::string family_name(Family f);
std::string datum_name(Datum d);
Family parse_family(const std::string& s);
Datum parse_datum(const std::string& s);

WallSpec wall_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WallSpec& spec);
nlohmann::json to_json(const Segment& s);

/// Immutable periodic wall. Geometry is stored for one period at scale 1 in
/// the half-plane datum; queries take physical coordinates.
class Wall {
public:
    explicit Wall(WallSpec spec);

    const WallSpec& spec() const { return spec_; }
    double scale() const { return spec_.scale; }
    /// Period in normalized units (2 for rect_teeth, 1 otherwise).
    double cell_period() const { return period_; }
    /// Period in physical units.
    double period() const { return period_ * spec_.scale; }
    /// Maximal depth of the normalized cell below its top line.
    double cell_depth() const { return depth_; }
    /// Height of the top line in physical units (0 or -1).
    double datum_offset() const { return spec_.datum == Datum::disk_wall ? -1.0 : 0.0; }
    const std::vector<Segment>& cell() const { return cell_; }
    /// corner(i): the joint at the start of segment i is not C^1.
    bool corner(std::size_t i) const { return corner_[i]; }
    bool corner_at_end(std::size_t i) const { return corner_[(i + 1) % cell_.size()]; }

    /// Segments of period k in physical coordinates.
    std::vector<Segment> segments(int k) const;

    /// Normalized boundary height below x (graph convention; vertical
    /// pieces are skipped). x is reduced modulo the period.
    double cell_height(double x) const;

    struct Nearest {
        double distance = 0.0;   ///< signed: positive in the free region
        Vec2 normal;             ///< unit normal at the nearest boundary point
        bool at_corner = false;  ///< nearest point within tolerance of a corner
        bool exact = true;       ///< false when distance is only a lower bound
    };

    /// Signed distance from a normalized, half-plane-datum point to the
    /// boundary. |distance| is exact near the boundary and a lower bound
    /// farther away; sign follows the graph inside test.
    Nearest cell_nearest(Vec2 p, double corner_tol) const;

    /// Physical-coordinate boundary polyline over [x0, x1].
    std::vector<Vec2> polyline(double x0, double x1, int samples_per_period) const;

private:
    WallSpec spec_;
    std::vector<Segment> cell_;
    std::vector<bool> corner_;
    double period_ = 1.0;
    double depth_ = 0.0;
};

/// Builds the spec's family geometry. Throws Error(InvalidParam) or
/// Error(MalformedCustom).
Wall build_wall(const WallSpec& spec);

/// Foreshortening by factor c: the wall is compressed horizontally by c with
/// depth unchanged, i.e. the cell is stretched vertically by 1/c at scale c.
WallSpec foreshorten_by(const WallSpec& spec, double c);

/// Foreshortening for the disk of mass m and inertia J: c = (1 + m/J)^(-1/2).
WallSpec foreshorten(const WallSpec& spec, double m, double J);

/// Normalized cell segments of the spec's family (no validation).
std::vector<Segment> family_cell(const WallSpec& spec);

}  // namespace rough
