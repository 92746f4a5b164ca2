#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rndiff/estimator.hpp"
#include "rndiff/kernel.hpp"
#include "rndiff/selection.hpp"

namespace rndiff {

/// Simulation study: X_p ~ N(mu_p, var_p), X_q ~ N(mu_q, var_q) in 1-d,
/// iterated Lavrentiev with quasi-optimal lambda, MSD against the exact ratio.
/// N(mean, variance) throughout.
struct SimConfig {
    std::size_t n{100};
    std::size_t m{100};
    double mu_p{2.0};
    double var_p{5.0};
    std::vector<double> mu_q_list{2.0, 3.0, 4.0};
    double var_q{0.5};
    std::vector<int> k_list{1, 2, 3, 5, 10};
    int replications{20};
    LambdaGrid grid{};
    std::uint64_t seed{20240101};
    KernelSpec kernel{KernelSpec::gaussian_plus_one()};
    /// When non-empty, the max |beta - estimate| over these points is
    /// recorded per replication.
    std::vector<double> probe_points{};

    /// Throws InputError on invalid settings.
    void validate() const;
};

struct ReplicationResult {
    int replication{0};
    std::uint64_t seed{0};
    std::optional<double> chosen_lambda;
    std::optional<double> msd;
    std::optional<double> max_pointwise_error;
    std::optional<std::string> error;
};

/// Nearest-rank (type 1) quantiles: q(p) = x_(ceil(p N)), with q(0) = min.
struct BoxStats {
    std::size_t count{0};
    double min{0.0};
    double q1{0.0};
    double median{0.0};
    double q3{0.0};
    double max{0.0};
};

struct CellReport {
    double mu_q{0.0};
    int k{1};
    std::vector<ReplicationResult> replications;
    std::optional<BoxStats> msd_stats;
    /// False when any replication failed.
    bool complete{true};
};

struct ExperimentReport {
    SimConfig config;
    std::vector<CellReport> cells;

    [[nodiscard]] const CellReport& cell(double mu_q, int k) const;
};

/// Exact ratio of the two normal densities,
///   sqrt(var_p/var_q) exp((x-mu_p)^2/(2 var_p) - (x-mu_q)^2/(2 var_q)).
/// With the defaults this is sqrt(10) exp(((x-2)^2 - 10(x-mu_q)^2)/10).
[[nodiscard]] double true_beta(double x, double mu_q, double mu_p = 2.0, double var_p = 5.0, double var_q = 0.5);

/// splitmix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of replication `replication` in the cell keyed by `key` (mu_q for the
/// study, n for rate sweeps): mix64 chained over (base, replication, bits of key).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication, double key) noexcept;

/// `count` i.i.d. N(mu, var) draws. Generator: std::mt19937_64 seeded with
/// `seed`, 53-bit uniforms in (0, 1], Box-Muller pairs (cosine branch first).
[[nodiscard]] SampleSet sample_normal(double mu, double var, std::size_t count, std::uint64_t seed,
                                      MeasureTag tag = MeasureTag::p);

struct ReplicationDraw {
    std::uint64_t seed;
    SampleSet xp;
    SampleSet xq;
};

/// The samples of one study cell. X_p and X_q come from independent streams
/// keyed off derive_seed(config.seed, replication, mu_q).
[[nodiscard]] ReplicationDraw draw_replication(const SimConfig& config, double mu_q, int replication);

/// n^{-1} sum_i (beta(x_i) - estimate_i)^2 over the X_p points.
[[nodiscard]] double msd(const RatioModel& model, double mu_q, double mu_p = 2.0, double var_p = 5.0,
                         double var_q = 0.5);
[[nodiscard]] double msd(const Eigen::VectorXd& values, const PointMatrix& xp_points, double mu_q, double mu_p = 2.0,
                         double var_p = 5.0, double var_q = 0.5);

/// Throws InputError on an empty input.
[[nodiscard]] BoxStats box_stats(std::vector<double> values);

/// Every (mu_q, k, replication) cell; deterministic for a given config.seed
/// regardless of `threads` (0 = all cores).
[[nodiscard]] ExperimentReport run_study(const SimConfig& config, unsigned threads = 0);

struct RateConfig {
    std::vector<std::size_t> n_list{50, 100, 200, 400};
    double eta{1.0};
    double varsigma{0.5};
    int k{10};
    int replications{20};
    std::uint64_t seed{20240101};
    double mu_p{2.0};
    double var_p{5.0};
    double mu_q{2.0};
    double var_q{0.5};
    /// Pointwise error is measured here; defaults to mu_q.
    std::optional<double> probe{};
    KernelSpec kernel{KernelSpec::gaussian_plus_one()};
};

struct RatePoint {
    std::size_t n{0};
    double lambda{0.0};
    double median_pointwise_error{0.0};
    double median_rn_error{0.0};
};

struct RateRecord {
    std::vector<RatePoint> points;
    /// Least-squares slopes of log(error) against log(n^{-1/2}).
    std::optional<double> pointwise_slope;
    std::optional<double> rn_slope;
    /// "ok" or "insufficient points".
    std::string status;
};

/// Least-squares slope of log(errors) against log(scales). nullopt with fewer
/// than two points; InputError on non-positive inputs.
[[nodiscard]] std::optional<double> fit_log_slope(std::span<const double> scales, std::span<const double> errors);

/// Runs the estimator at lambda = lambda_mn(n, n, eta, varsigma) for each n
/// (m = n) and emits the observed error slopes. Asserts nothing.
[[nodiscard]] RateRecord run_rate_study(const RateConfig& config, unsigned threads = 0);

}  // namespace rndiff
