#include "rndiff/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>
#include <string>

#include "rndiff/error.hpp"

namespace rndiff {

namespace {

void check_inputs(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq) {
    if (gram.n != xp.size() || gram.m != xq.size()) {
        throw InputError("gram system does not match the sample sets");
    }
    if (gram.n == 0 || gram.m == 0) {
        throw InputError("gram system is empty");
    }
    const auto n = static_cast<Eigen::Index>(gram.n);
    if (gram.k_matrix.rows() != n || gram.k_matrix.cols() != n || gram.f_bar.size() != n) {
        throw InputError("gram system has inconsistent shapes");
    }
}

void require_finite(const Eigen::VectorXd& v, double lambda, const char* what) {
    if (!v.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite " << what << " at lambda=" << lambda;
        throw NumericalError(msg.str());
    }
}

RatioModel empty_model(const SampleSet& xp, const SampleSet& xq, const KernelSpec& kernel, const RegScheme& scheme) {
    return RatioModel{kernel, scheme, xp.points(), xq.points(), {}, 0.0, {}};
}

}  // namespace

LavrentievStepper::LavrentievStepper(const GramSystem& gram, double lambda)
    : f_bar_(gram.f_bar), lambda_(lambda), shift_(static_cast<double>(gram.n) * lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InputError("lambda must be positive, got " + std::to_string(lambda));
    }
    Eigen::MatrixXd shifted = gram.k_matrix;
    shifted.diagonal().array() += shift_;
    llt_.compute(shifted);
    if (llt_.info() != Eigen::Success) {
        const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(shifted, Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .minCoeff();
        std::ostringstream msg;
        msg << "Cholesky factorization of (n lambda I + K) failed at lambda=" << lambda
            << ", smallest eigenvalue estimate " << min_eig;
        throw NumericalError(msg.str());
    }
}

Eigen::VectorXd LavrentievStepper::step(const Eigen::VectorXd& previous) const {
    Eigen::VectorXd rhs = shift_ * previous + f_bar_;
    Eigen::VectorXd next = llt_.solve(rhs);
    require_finite(next, lambda_, "recursion values");
    return next;
}

RatioModel fit_iterated_lavrentiev(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq,
                                   const KernelSpec& kernel, double lambda, int k) {
    check_inputs(gram, xp, xq);
    RatioModel model = empty_model(xp, xq, kernel, RegScheme::iterated_lavrentiev(lambda, k));
    const LavrentievStepper stepper(gram, lambda);
    const auto n = static_cast<Eigen::Index>(gram.n);
    const double n_lambda = static_cast<double>(gram.n) * lambda;

    Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
    model.alpha = Eigen::VectorXd::Zero(n);
    for (int l = 0; l < k; ++l) {
        values = stepper.step(values);
        model.alpha -= values / n_lambda;
    }
    model.mu_coeff = k / lambda;
    model.values_at_xp = std::move(values);
    return model;
}

RatioModel fit_spectral(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq, const KernelSpec& kernel,
                        const RegScheme& scheme) {
    check_inputs(gram, xp, xq);
    const double n = static_cast<double>(gram.n);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram.k_matrix / n);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of K/n failed at lambda=" + std::to_string(scheme.lambda()));
    }
    const Eigen::MatrixXd& basis = eig.eigenvectors();
    // Round-off can push zero eigenvalues of the PSD matrix slightly negative.
    const Eigen::VectorXd spectrum = eig.eigenvalues().cwiseMax(0.0);

    Eigen::VectorXd filtered(spectrum.size());
    Eigen::VectorXd slope(spectrum.size());
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        filtered(i) = filter_value(scheme, spectrum(i));
        slope(i) = filter_slope(scheme, spectrum(i));
    }

    const Eigen::VectorXd rhs = gram.f_bar / n;
    const Eigen::VectorXd coords = basis.transpose() * rhs;

    RatioModel model = empty_model(xp, xq, kernel, scheme);
    model.values_at_xp = basis * filtered.cwiseProduct(coords);
    model.alpha = basis * slope.cwiseProduct(coords) / n;
    model.mu_coeff = filter_value(scheme, 0.0);
    require_finite(model.values_at_xp, scheme.lambda(), "spectral values");
    require_finite(model.alpha, scheme.lambda(), "spectral coefficients");
    return model;
}

RatioModel fit(const GramSystem& gram, const SampleSet& xp, const SampleSet& xq, const KernelSpec& kernel,
               const RegScheme& scheme) {
    if (scheme.kind() == SchemeKind::spectral_cutoff) {
        return fit_spectral(gram, xp, xq, kernel, scheme);
    }
    RatioModel model = fit_iterated_lavrentiev(gram, xp, xq, kernel, scheme.lambda(), scheme.iterations());
    model.scheme = scheme;
    return model;
}

double evaluate(const RatioModel& model, Point x) {
    if (x.size() != model.dim()) {
        throw InputError("evaluation point has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(model.dim()));
    }
    const auto point_at = [](const PointMatrix& points, Eigen::Index r) {
        return Point{points.row(r).data(), static_cast<std::size_t>(points.cols())};
    };
    double sections = 0.0;
    for (Eigen::Index i = 0; i < model.xp_points.rows(); ++i) {
        sections += model.alpha(i) * eval_kernel(model.kernel, x, point_at(model.xp_points, i));
    }
    double embedding = 0.0;
    for (Eigen::Index j = 0; j < model.xq_points.rows(); ++j) {
        embedding += eval_kernel(model.kernel, x, point_at(model.xq_points, j));
    }
    embedding /= static_cast<double>(model.xq_points.rows());
    return sections + model.mu_coeff * embedding;
}

std::vector<double> evaluate_batch(const RatioModel& model, const PointMatrix& xs) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(xs.rows()));
    if (xs.rows() > 0 && static_cast<std::size_t>(xs.cols()) != model.dim()) {
        throw InputError("evaluation points have dimension " + std::to_string(xs.cols()) + ", model expects " +
                         std::to_string(model.dim()));
    }
    for (Eigen::Index r = 0; r < xs.rows(); ++r) {
        out.push_back(evaluate(model, Point{xs.row(r).data(), static_cast<std::size_t>(xs.cols())}));
    }
    return out;
}

}  // namespace rndiff
