#include "rndiff/selection.hpp"

#include <cmath>
#include <sstream>

#include "rndiff/error.hpp"

namespace rndiff {

LambdaGrid::LambdaGrid(double lambda_0, double rho, int w) : lambda_0_(lambda_0), rho_(rho) {
    if (!(lambda_0 > 0.0) || !std::isfinite(lambda_0)) {
        throw InputError("lambda_0 must be positive");
    }
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InputError("grid ratio rho must lie in (0, 1)");
    }
    if (w < 1) {
        throw InputError("grid size w must be >= 1");
    }
    values_.reserve(static_cast<std::size_t>(w));
    for (int i = 1; i <= w; ++i) {
        values_.push_back(lambda_0 * std::pow(rho, i));
    }
}

double LambdaGrid::default_rho() { return std::pow(1.0 / 9.0, 1.0 / 9.0); }

std::vector<double> LambdaGrid::with_predecessor() const {
    std::vector<double> all{lambda_0_};
    all.insert(all.end(), values_.begin(), values_.end());
    return all;
}

double empirical_norm(const Eigen::VectorXd& u) {
    if (u.size() == 0) {
        return 0.0;
    }
    return std::sqrt(u.squaredNorm() / static_cast<double>(u.size()));
}

QuasiOptimalChoice quasi_optimal_index(std::span<const Eigen::VectorXd> fits) {
    if (fits.size() < 2) {
        throw InputError("quasi-optimality needs the predecessor fit and at least one candidate");
    }
    QuasiOptimalChoice choice{{}, 1};
    choice.diffs.reserve(fits.size() - 1);
    for (std::size_t i = 1; i < fits.size(); ++i) {
        if (fits[i].size() != fits[i - 1].size()) {
            throw InputError("fits differ in length");
        }
        choice.diffs.push_back(empirical_norm(fits[i] - fits[i - 1]));
    }
    for (std::size_t i = 1; i < choice.diffs.size(); ++i) {
        if (choice.diffs[i] < choice.diffs[static_cast<std::size_t>(choice.index - 1)]) {
            choice.index = static_cast<int>(i + 1);
        }
    }
    return choice;
}

SelectionTrace quasi_optimality(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq,
                                const KernelSpec& kernel, int k, const LambdaGrid& grid, bool retain_models) {
    if (grid.w() < 2) {
        throw InputError("quasi-optimality needs a grid with w >= 2");
    }
    const std::vector<double> lambdas = grid.with_predecessor();
    std::vector<Eigen::VectorXd> fits;
    fits.reserve(lambdas.size());
    SelectionTrace trace{grid, {}, 1, 0.0, {}};
    for (const double lambda : lambdas) {
        try {
            RatioModel model = fit_iterated_lavrentiev(gram, xp, xq, kernel, lambda, k);
            fits.push_back(model.values_at_xp);
            if (retain_models) {
                trace.models.push_back(std::move(model));
            }
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << "fit failed at lambda=" << lambda << ": " << e.what();
            throw NumericalError(msg.str());
        }
    }
    QuasiOptimalChoice choice = quasi_optimal_index(fits);
    trace.diffs = std::move(choice.diffs);
    trace.chosen_index = choice.index;
    trace.chosen_lambda = lambdas[static_cast<std::size_t>(choice.index)];
    return trace;
}

double lambda_mn(std::size_t m, std::size_t n, double eta, double varsigma) {
    if (m < 1 || n < 1) {
        throw InputError("sample sizes must be >= 1");
    }
    const double exponent = eta + 1.0 - varsigma;
    if (!(exponent > 0.0)) {
        throw InputError("eta + 1 - varsigma must be positive, got " + std::to_string(exponent));
    }
    const double base = 1.0 / std::sqrt(static_cast<double>(m)) + 1.0 / std::sqrt(static_cast<double>(n));
    return std::pow(base, 1.0 / exponent);
}

}  // namespace rndiff
