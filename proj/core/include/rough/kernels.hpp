// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rough/billiard2d.hpp"
#include "rough/empirical.hpp"
#include "rough/geometry.hpp"
#include "rough/rng.hpp"

namespace rough {

struct Atom {
    double angle = 0.0;
    double prob = 0.0;
};

/// Markov kernel on outgoing angles. Atomic kernels expose their atoms;
/// all kernels can be sampled.
class Kernel {
public:
    enum class Type { specular, retro, lambertian, rect, tri, circ, halving };

    static Kernel specular() { return Kernel(Type::specular, 0.0); }
    static Kernel retro() { return Kernel(Type::retro, 0.0); }
    static Kernel lambertian() { return Kernel(Type::lambertian, 0.0); }
    static Kernel rect(double r);
    static Kernel tri(double psi);
    static Kernel circ(double xi);
    /// theta' = theta / 2. Not a reflection law; used to check that tests fail.
    static Kernel halving() { return Kernel(Type::halving, 0.0); }

    /// Parses "specular", "retro", "lambertian", "rect:R", "tri:PSI",
    /// "circ:XI", "halving".
    static Kernel parse(const std::string& text);

    Type type() const { return type_; }
    double param() const { return param_; }
    std::string name() const;
    bool atomic() const { return type_ != Type::lambertian && type_ != Type::circ; }

    /// Atoms at theta (merged, zero-mass atoms dropped). Throws for
    /// non-atomic kernels and BoundaryCase inputs.
    std::vector<Atom> atoms(double theta) const;

    double sample(double theta, Stream& rng) const;

private:
    Kernel(Type t, double p) : type_(t), param_(p) {}
    Type type_;
    double param_;
};

/// Probability of the specular atom pi - theta for rectangular teeth with
/// height/width ratio r. Throws BoundaryCase when 2 r |cot theta| is within
/// 1e-12 of a positive integer.
double rect_specular_prob(double theta, double r);

/// Atoms of the triangular-teeth kernel: at most two when pi/psi is an
/// integer, up to four otherwise (each half of the beam split by the apex
/// crosses at most two images of the opening).
std::vector<Atom> tri_atoms(double theta, double psi);

/// Exit angle from a wall of circular arcs for entry point X in [0, 1] of
/// the unit period. Throws Singular for tangential or corner trajectories.
double circ_arc_map(double X, double theta, double xi);

double sample_kernel(const Kernel& kernel, double theta, Stream& rng);

/// Number of times a sampler had to jitter a BoundaryCase angle.
std::size_t boundary_jitter_count();

/// Law of theta' from macro_reflection with x uniform over one period.
/// Sample i uses Stream(seed, i). Throws TooManySingular above 1% exclusions.
EmpiricalDist averaged_kernel(const WallSpec& spec, double theta, std::size_t n, std::uint64_t seed,
                              const Limits& limits = {});

/// Largest |p(theta -> theta') sin theta - p(theta' -> theta) sin theta'|
/// over the grid and the atoms of each grid angle.
double detailed_balance_defect_exact(const Kernel& kernel, std::span<const double> grid);

struct DefectEstimate {
    double value = 0.0;
    double sigma = 0.0;
};

/// Monte Carlo estimate of the integral of f(theta, theta') - f(theta', theta)
/// against P(theta, d theta') sin theta d theta.
DefectEstimate detailed_balance_defect(const Kernel& kernel, const std::function<double(double, double)>& f,
                                       std::size_t n, std::uint64_t seed);

struct KnudsenResult {
    double time = 0.0;
    std::size_t bounces = 0;
    Status status = Status::returned;
};

/// Exit time of the axial position from [0, L] in a planar channel of unit
/// width, entering at X = 0 with incidence angle theta0.
KnudsenResult knudsen_exit_time(const Kernel& kernel, double L, Stream& rng, double theta0 = 1.5707963267948966,
                                std::size_t max_bounces = 1'000'000);

}  // namespace rough
