#include "rndiff/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rndiff/error.hpp"

namespace rndiff {

namespace {

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InputError("lambda must be positive, got " + std::to_string(lambda));
    }
}

}  // namespace

ChristoffelEvaluator::ChristoffelEvaluator(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp,
                                           double lambda)
    : kernel_(kernel), centers_(xp.points()), lambda_(lambda), n_(static_cast<double>(gram.n)) {
    require_lambda(lambda);
    if (gram.n != xp.size()) {
        throw InputError("gram system does not match X_p");
    }
    Eigen::MatrixXd shifted = gram.k_matrix / n_;
    shifted.diagonal().array() += lambda;
    llt_.compute(shifted);
    if (llt_.info() != Eigen::Success) {
        throw NumericalError("Cholesky factorization of (lambda I + K/n) failed at lambda=" + std::to_string(lambda));
    }
}

double ChristoffelEvaluator::operator()(Point x) const {
    if (x.size() != static_cast<std::size_t>(centers_.cols())) {
        throw InputError("probe point has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(centers_.cols()));
    }
    Eigen::VectorXd k_x(centers_.rows());
    for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
        k_x(i) = eval_kernel(kernel_, Point{centers_.row(i).data(), x.size()}, x);
    }
    const Eigen::VectorXd h = llt_.solve(k_x);
    const double value = (eval_kernel(kernel_, x, x) - k_x.dot(h) / n_) / lambda_;
    if (!std::isfinite(value)) {
        throw NumericalError("non-finite Christoffel value at lambda=" + std::to_string(lambda_));
    }
    // Exact arithmetic gives value >= 0; clip cancellation noise only.
    return value < 0.0 && value > -1e-10 ? 0.0 : value;
}

double christoffel(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp, double lambda, Point x) {
    return ChristoffelEvaluator(gram, kernel, xp, lambda)(x);
}

Eigen::VectorXd normalized_spectrum(const GramSystem& gram) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram.k_matrix / static_cast<double>(gram.n),
                                                             Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of K/n failed");
    }
    return eig.eigenvalues().cwiseMax(0.0);
}

double effective_dimension(const Eigen::VectorXd& spectrum, double lambda) {
    require_lambda(lambda);
    double sum = 0.0;
    for (const double t : spectrum) {
        sum += t / (lambda + t);
    }
    return sum;
}

double effective_dimension(const GramSystem& gram, double lambda) {
    return effective_dimension(normalized_spectrum(gram), lambda);
}

double n_inf_estimate(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp, double lambda,
                      const PointMatrix& probe_points) {
    if (probe_points.rows() == 0) {
        throw InputError("probe set is empty");
    }
    const ChristoffelEvaluator c(gram, kernel, xp, lambda);
    double best = 0.0;
    for (std::size_t i = 0; i < xp.size(); ++i) {
        best = std::max(best, c(xp.point(i)));
    }
    for (Eigen::Index r = 0; r < probe_points.rows(); ++r) {
        best = std::max(best, c(Point{probe_points.row(r).data(), static_cast<std::size_t>(probe_points.cols())}));
    }
    return best;
}

PointMatrix default_probe_grid(const SampleSet& xp, int points_per_axis, double inflation) {
    if (points_per_axis < 2) {
        throw InputError("probe grid needs at least 2 points per axis");
    }
    const auto d = static_cast<Eigen::Index>(xp.dim());
    const Eigen::RowVectorXd lo_raw = xp.points().colwise().minCoeff();
    const Eigen::RowVectorXd hi_raw = xp.points().colwise().maxCoeff();
    const Eigen::RowVectorXd pad = (hi_raw - lo_raw) * inflation;
    const Eigen::RowVectorXd lo = lo_raw - pad;
    const Eigen::RowVectorXd hi = hi_raw + pad;

    Eigen::Index total = 1;
    for (Eigen::Index a = 0; a < d; ++a) {
        total *= points_per_axis;
    }
    PointMatrix grid(total, d);
    for (Eigen::Index r = 0; r < total; ++r) {
        Eigen::Index rest = r;
        for (Eigen::Index a = 0; a < d; ++a) {
            const Eigen::Index idx = rest % points_per_axis;
            rest /= points_per_axis;
            grid(r, a) = lo(a) + (hi(a) - lo(a)) * static_cast<double>(idx) / (points_per_axis - 1);
        }
    }
    return grid;
}

double find_lambda_star(const GramSystem& gram, std::optional<std::pair<double, double>> bracket) {
    const double n = static_cast<double>(gram.n);
    const auto [lo_init, hi_init] = bracket.value_or(std::pair{1e-8, gram.k_matrix.diagonal().maxCoeff()});
    if (!(lo_init > 0.0) || !(hi_init > lo_init)) {
        throw InputError("lambda_* bracket must satisfy 0 < lo < hi");
    }
    const Eigen::VectorXd spectrum = normalized_spectrum(gram);
    const auto ratio = [&](double lambda) { return effective_dimension(spectrum, lambda) / lambda; };

    const double r_lo = ratio(lo_init);
    const double r_hi = ratio(hi_init);
    if (!(r_lo > n && n > r_hi)) {
        std::ostringstream msg;
        msg << "lambda_* bracket [" << lo_init << ", " << hi_init << "] is invalid: N(lo)/lo = " << r_lo
            << ", N(hi)/hi = " << r_hi << ", target n = " << n;
        throw InputError(msg.str());
    }

    // N(lambda)/lambda is strictly decreasing, so plain bisection in log space.
    double lo = std::log(lo_init);
    double hi = std::log(hi_init);
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (ratio(std::exp(mid)) > n) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

CapacityProfile capacity_profile(const GramSystem& gram, const KernelSpec& kernel, const SampleSet& xp,
                                 const std::vector<double>& lambdas, const PointMatrix& probe_points) {
    CapacityProfile profile;
    profile.lambdas = lambdas;
    const Eigen::VectorXd spectrum = normalized_spectrum(gram);
    for (const double lambda : lambdas) {
        profile.n_eff.push_back(effective_dimension(spectrum, lambda));
        profile.n_inf.push_back(n_inf_estimate(gram, kernel, xp, lambda, probe_points));
    }
    try {
        profile.lambda_star = find_lambda_star(gram);
    } catch (const InputError&) {
        profile.lambda_star = std::nullopt;
    }
    return profile;
}

}  // namespace rndiff
