#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rndiff/estimator.hpp"
#include "rndiff/kernel.hpp"

namespace rndiff {

/// lambda_i = lambda_0 * rho^i for i = 1..w. lambda_0 itself is kept as the
/// predecessor of the first candidate but is not a candidate.
class LambdaGrid {
  public:
    /// Defaults span [0.1, 0.9]: lambda_0 = 0.9, rho = (1/9)^(1/9), w = 9.
    LambdaGrid() : LambdaGrid(0.9, default_rho(), 9) {}
    LambdaGrid(double lambda_0, double rho, int w);

    [[nodiscard]] static double default_rho();

    [[nodiscard]] double lambda_0() const noexcept { return lambda_0_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }
    [[nodiscard]] int w() const noexcept { return static_cast<int>(values_.size()); }
    /// The w candidates, strictly decreasing.
    [[nodiscard]] const std::vector<double>& values() const& noexcept { return values_; }
    /// By value on temporaries, so `for (double l : LambdaGrid().values())` is safe.
    [[nodiscard]] std::vector<double> values() && { return std::move(values_); }
    /// lambda_0 followed by the candidates.
    [[nodiscard]] std::vector<double> with_predecessor() const;

  private:
    double lambda_0_;
    double rho_;
    std::vector<double> values_;
};

struct SelectionTrace {
    LambdaGrid grid;
    /// diffs[i - 1] = |beta^{lambda_i} - beta^{lambda_{i-1}}| in the 1/n-weighted
    /// Euclidean norm on X_p, for i = 1..w.
    std::vector<double> diffs;
    /// i_0 in 1..w.
    int chosen_index{1};
    double chosen_lambda{0.0};
    /// Fits at lambda_0, lambda_1, ..., lambda_w when requested.
    std::vector<RatioModel> models;
};

/// sqrt((1/n) sum u_i^2)
[[nodiscard]] double empirical_norm(const Eigen::VectorXd& u);

struct QuasiOptimalChoice {
    std::vector<double> diffs;
    int index;  ///< 1-based into the candidates
};

/// Minimizes the consecutive differences of `fits` (fits[0] is the
/// predecessor at lambda_0). Ties go to the smaller index, i.e. the larger
/// lambda.
[[nodiscard]] QuasiOptimalChoice quasi_optimal_index(std::span<const Eigen::VectorXd> fits);

/// Quasi-optimality criterion for the k-times iterated Lavrentiev estimator.
[[nodiscard]] SelectionTrace quasi_optimality(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq,
                                              const KernelSpec& kernel, int k, const LambdaGrid& grid,
                                              bool retain_models = false);

/// lambda_{m,n} = theta^{-1}(m^{-1/2} + n^{-1/2}) with theta(t) = t^{eta + 1 - varsigma},
/// the a-priori choice for phi(t) = t^eta and xi(t) = t^varsigma.
[[nodiscard]] double lambda_mn(std::size_t m, std::size_t n, double eta, double varsigma);

}  // namespace rndiff
