#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rndiff/kernel.hpp"

namespace rndiff {

/// Empirical capacity of the RKHS under the design sample X_p.
///
/// The population operator is unavailable, so everything here uses the
/// empirical covariance T = S*S (K/n in the point-evaluation basis). The
/// regularized Christoffel function C(x) = <k_x, (lambda I + T)^{-1} k_x>
/// is computed through the push-through identity
///
///   C(x) = (1/lambda) (k(x, x) - (1/n) k_x' (lambda I + K/n)^{-1} k_x),
///
/// with k_x = (k(x_i, x))_i.
struct CapacityProfile {
    std::vector<double> lambdas;
    std::vector<double> n_eff;
    std::vector<double> n_inf;
    std::optional<double> lambda_star;
};

/// Factorizes (lambda I + K/n) once and evaluates C at many points.
class ChristoffelEvaluator {
  public:
    ChristoffelEvaluator(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp, double lambda);

    [[nodiscard]] double operator()(Point x) const;

  private:
    KernelSpec kernel_;
    PointMatrix centers_;
    double lambda_;
    double n_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

[[nodiscard]] double christoffel(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp, double lambda,
                                 Point x);

/// Eigenvalues of K/n, clamped at zero.
[[nodiscard]] Eigen::VectorXd normalized_spectrum(const GramSystem& gram);

/// N(lambda) = trace((lambda I + K/n)^{-1} K/n) = sum_i t_i / (lambda + t_i).
[[nodiscard]] double effective_dimension(const GramSystem& gram, double lambda);
[[nodiscard]] double effective_dimension(const Eigen::VectorXd& spectrum, double lambda);

/// max of C over probe_points and X_p. Only a lower bound for the sup over
/// the whole domain.
[[nodiscard]] double n_inf_estimate(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp,
                                    double lambda, const PointMatrix& probe_points);

/// Uniform grid over the bounding box of X_p, inflated by `inflation` of its
/// width on each side. points_per_axis^d points.
[[nodiscard]] PointMatrix default_probe_grid(const SampleSet& xp, int points_per_axis = 50, double inflation = 0.2);

/// Solves N(lambda)/lambda = n by bisection on log(lambda).
///
/// The default bracket is (1e-8, max_i K_ii), the latter being kappa_0^2 for
/// the gaussian families. Throws InputError naming both endpoint ratios if
/// the bracket does not straddle n.
[[nodiscard]] double find_lambda_star(const GramSystem& gram,
                                      std::optional<std::pair<double, double>> bracket = std::nullopt);

/// N(lambda) and the N_inf estimate over `lambdas`, plus lambda_* when the
/// default bracket is valid.
[[nodiscard]] CapacityProfile capacity_profile(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp,
                                               const std::vector<double>& lambdas, const PointMatrix& probe_points);

}  // namespace rndiff
