// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rough/billiard2d.hpp"
#include "rough/empirical.hpp"
#include "rough/geometry.hpp"
#include "rough/kernels.hpp"

namespace rough {

/// Two-sided tail mass of a normal 3-sigma event.
inline constexpr double three_sigma_tail = 0.0026997960632601866;

/// Largest allowed fraction of singular or capped samples.
inline constexpr double max_excluded_fraction = 0.01;

struct Report {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::vector<std::size_t> sizes;
    std::uint64_t seed = 0;
    double excluded_fraction = 0.0;

    /// pass = statistic <= threshold and exclusions within bounds.
    void decide();
};

nlohmann::json to_json(const Report& r);

/// sup |F_a - F_b|. Throws Empty.
double ks_distance(const EmpiricalDist& a, const EmpiricalDist& b);
/// sup |F_a - F|.
double ks_distance(const EmpiricalDist& a, const std::function<double(double)>& cdf);
/// max |F_a - F_b| over the given points only.
double ks_distance_at(const EmpiricalDist& a, const EmpiricalDist& b, std::span<const double> points);

/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_tail(double x);
/// x with P(K > x) = tail.
double kolmogorov_quantile_upper(double tail);

/// 3-sigma KS thresholds: one-sample and two-sample.
double ks_band(std::size_t n);
double ks_band(std::size_t n, std::size_t m);
/// Approximate standard deviation of the KS statistic.
double ks_sigma(std::size_t n_eff);

/// 3 sqrt(p(1-p)/n) with p clipped to [1/n, 1 - 1/n].
double binomial_band(double p, std::size_t n);

/// CDF of the density (1/2) sin theta on (0, pi).
double sine_cdf(double theta);

/// Sample q-quantile and an order-statistic estimate of its standard error.
struct QuantileEstimate {
    double value = 0.0;
    double sigma = 0.0;
};
QuantileEstimate quantile(std::vector<double> values, double q);

/// Pushes theta ~ (1/2) sin theta through the kernel; one-sample KS test.
Report invariance_report(const Kernel& kernel, std::size_t n, std::uint64_t seed);

/// Same for macro_reflection of a wall with x uniform over one period.
Report macro_invariance_report(const WallSpec& spec, std::size_t n, std::uint64_t seed, const Limits& limits = {});

/// Edges of `bins` equal bins on (0, pi).
std::vector<double> angle_bin_edges(int bins);

struct StudyConfig {
    WallSpec spec;
    double m = 1.0;
    double J = 1.0;
    std::vector<double> eps_list;
    double theta = 1.2;
    double psi = 1.27;
    std::size_t n = 10'000;
    std::uint64_t seed = 0;
    int ks_bins = 32;
    /// Quantile of the distance to the nearer cluster used as the radius.
    double cluster_quantile = 0.95;
    Limits limits{100'000, 1e4};
};

struct StudyRow {
    double eps = 0.0;
    int satellites = 0;
    std::size_t n = 0;
    std::size_t excluded = 0;
    double singular_frac = 0.0;
    double ks_theta = 0.0;
    double ks_sigma = 0.0;
    double median_psi_err = 0.0;
    double psi_err_sigma = 0.0;
    bool clusters = false;  ///< cluster columns are filled (rect_teeth only)
    double cluster_radius = 0.0;
    double cluster_sigma = 0.0;
    double smooth_freq = 0.0;
    double expected_p = 0.0;
    double freq_err = 0.0;
    double freq_sigma = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::vector<Report> reports;
    bool pass() const;
};

nlohmann::json to_json(const StudyRow& r);
nlohmann::json to_json(const StudyResult& r);

/// Compares collide at each eps with the averaged kernel of the
/// foreshortened wall; verdicts require each column to be non-increasing
/// along the ladder within 2 sigma.
StudyResult convergence_study(const StudyConfig& cfg);

/// Report for "values[i+1] <= values[i] + 2 sqrt(sigma[i]^2 + sigma[i+1]^2)".
/// statistic is the largest excess over the previous value, in sigmas.
Report monotone_report(const std::string& name, std::span<const double> values, std::span<const double> sigmas,
                       std::uint64_t seed, std::size_t n);

}  // namespace rough
