#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rndiff/kernel.hpp"
#include "rndiff/regularization.hpp"

namespace rndiff {

/// Regularized density ratio in representer form
///
///   beta(x) = sum_i alpha_i k(x, x_i) + mu_coeff * (1/m) sum_j k(x, x'_j)
///
/// where x_i run over X_p and x'_j over X_q. The second term is the empirical
/// mean embedding f of q, i.e. the right-hand side of the empirical operator
/// equation T beta = f with T = (1/n) sum_i k(., x_i) <k(., x_i), .>.
///
/// Derivation of the recursion update. One Lavrentiev step solves
/// (lambda I + T) beta_l = f + lambda beta_{l-1}. Rearranged,
///
///   beta_l = (1/lambda) f + beta_{l-1} - (1/(n lambda)) sum_i beta_l(x_i) k(., x_i).
///
/// So each step adds 1/lambda to mu_coeff and subtracts beta_l(x_i)/(n lambda)
/// from alpha_i, where the values beta_l(x_i) come from the n x n system
/// (n lambda I + K) v_l = n lambda v_{l-1} + F. After k steps mu_coeff = k/lambda.
///
/// For a general filter g the same split reads g(T) f = g(0) f + T h(T) f with
/// h(t) = (g(t) - g(0))/t, and T h(T) f only involves the sampled sections.
/// Evaluating at X_p turns T into K/n, which gives alpha = h(K/n)(F/n)/n.
struct RatioModel {
    KernelSpec kernel;
    RegScheme scheme;
    PointMatrix xp_points;
    PointMatrix xq_points;
    Eigen::VectorXd alpha;
    double mu_coeff{0.0};
    Eigen::VectorXd values_at_xp;

    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(xp_points.rows()); }
    [[nodiscard]] std::size_t m() const noexcept { return static_cast<std::size_t>(xq_points.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(xp_points.cols()); }
};

/// One Cholesky factorization of (n lambda I + K), shared by every
/// Lavrentiev step at this lambda.
class LavrentievStepper {
  public:
    LavrentievStepper(const GramSystem& gram, double lambda);

    /// v_l = (n lambda I + K)^{-1} (n lambda v_{l-1} + F)
    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& previous) const;

    [[nodiscard]] double lambda() const noexcept { return lambda_; }

  private:
    Eigen::VectorXd f_bar_;
    double lambda_;
    double shift_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// k-times iterated Lavrentiev (k = 1 is KuLSIF), via the recursion.
[[nodiscard]] RatioModel fit_iterated_lavrentiev(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq,
                                                 const KernelSpec& kernel, double lambda, int k);

/// Any supported scheme, via the eigendecomposition of K/n.
[[nodiscard]] RatioModel fit_spectral(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq,
                                      const KernelSpec& kernel, const RegScheme& scheme);

/// Dispatches to the recursion for Lavrentiev-type schemes and to the
/// spectral path otherwise.
[[nodiscard]] RatioModel fit(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq,
                             const KernelSpec& kernel, const RegScheme& scheme);

[[nodiscard]] double evaluate(const RatioModel& model, Point x);

[[nodiscard]] std::vector<double> evaluate_batch(const RatioModel& model, const PointMatrix& xs);

}  // namespace rndiff
