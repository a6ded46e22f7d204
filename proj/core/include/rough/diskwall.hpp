// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "rough/billiard2d.hpp"
#include "rough/geometry.hpp"
#include "rough/kernels.hpp"
#include "rough/rng.hpp"

namespace rough {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Satellite count rule: max(8, round(2 pi eps^(-1/3))).
int satellite_count_for(double eps);

struct DiskParams {
    double m = 1.0;
    double J = 1.0;
    double eps = 1.0;
    int N = 8;
    double rho = 0.7853981633974483;

    /// Parameters with N and rho from satellite_count_for(eps).
    static DiskParams from_rule(double m, double J, double eps);
    /// Throws InvalidParam unless m, J, eps > 0, N >= 8 and N rho = 2 pi.
    void validate() const;
};

/// Configuration y = (x1, x2, alpha) and velocity w = (v1, v2, omega).
struct ConfigState {
    Vec3 y = Vec3::Zero();
    Vec3 w = Vec3::Zero();
};

struct TiltedState {
    double y1 = 0.0;
    double y3 = 0.0;
    double theta = 0.0;
    double psi = 0.0;
};

double ke_dot(const Vec3& a, const Vec3& b, const DiskParams& p);
double ke_norm(const Vec3& a, const DiskParams& p);
Mat3 ke_metric(const DiskParams& p);

/// KE-orthonormal frame: chi along the rolling direction (-1, 0, 1),
/// chi_perp in the plane x2 = 0, e2 = (0, m^(-1/2), 0).
struct Frame {
    Vec3 chi;
    Vec3 chi_perp;
    Vec3 e2;
};
Frame tilted_frame(const DiskParams& p);

std::vector<Vec2> satellite_positions(const Vec3& y, const DiskParams& p);

/// Config-space unit normal for a satellite at absolute angle beta touching
/// a wall with outward unit normal k.
Vec3 contact_normal(Vec2 k, double beta, const DiskParams& p);

/// Throws DegenerateAngle when sin(psi) < 1e-12.
TiltedState to_tilted(const ConfigState& s, const DiskParams& p);
ConfigState from_tilted(const TiltedState& t, const DiskParams& p);

double rolling_momentum(const Vec3& w, const DiskParams& p);

enum class CollisionKind { smooth, no_slip };
Mat3 collision_matrix(CollisionKind kind, const DiskParams& p);
/// Maps the actual pre-collision velocity u to the post-collision velocity.
Vec3 apply_collision_matrix(CollisionKind kind, const Vec3& u, const DiskParams& p);

struct CollisionResult {
    ConfigState out;
    Status status = Status::singular;
    std::size_t bounces = 0;
    double time = 0.0;
    double max_energy_drift = 0.0;  ///< largest | |u'|_KE - |u|_KE | over reflections
    double rolling_drift = 0.0;     ///< | rolling momentum out - in |
};

/// Collision law of the cylinder over the wall: axial motion along chi is
/// free, the orthogonal motion is the billiard of the foreshortened wall.
/// The input velocity w encodes a trajectory started at (y, -w).
CollisionResult collide_cyl(const Wall& wall, const DiskParams& p, const ConfigState& s, const Limits& limits = {});

/// Full collision law of the disk with satellites against a disk_wall
/// datum wall.
CollisionResult collide(const Wall& wall, const DiskParams& p, const ConfigState& s, const Limits& limits = {});

/// Rough collision law in tilted coordinates: (y1, y3, theta' ~ P(theta), pi - psi).
TiltedState rough_collision_sample(const Kernel& kernel, const TiltedState& t, Stream& rng);

/// Random point on P over one wall period and one satellite spacing, with
/// velocity given by tilted angles.
ConfigState random_incoming(const Wall& wall, const DiskParams& p, double theta, double psi, Stream& rng);

}  // namespace rough
