#include "rndiff/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rndiff/error.hpp"

namespace rndiff {

namespace {

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InputError("regularization parameter lambda must be positive, got " + std::to_string(lambda));
    }
}

void require_t(double t) {
    if (!(t >= 0.0)) {
        throw InputError("filter argument must be non-negative, got " + std::to_string(t));
    }
}

// u = lambda/(lambda + t) lies in (0, 1]; every Lavrentiev-type quantity is a
// polynomial in u, which avoids the cancellation in 1 - u^k for small t.
double contraction(double lambda, double t) { return lambda / (lambda + t); }

}  // namespace

RegScheme RegScheme::lavrentiev(double lambda) {
    require_lambda(lambda);
    return {SchemeKind::lavrentiev, lambda, 1};
}

RegScheme RegScheme::iterated_lavrentiev(double lambda, int k) {
    require_lambda(lambda);
    if (k < 1) {
        throw InputError("iteration count k must be >= 1, got " + std::to_string(k));
    }
    return {SchemeKind::iterated_lavrentiev, lambda, k};
}

RegScheme RegScheme::spectral_cutoff(double lambda) {
    require_lambda(lambda);
    return {SchemeKind::spectral_cutoff, lambda, 0};
}

RegScheme RegScheme::with_lambda(double lambda) const {
    require_lambda(lambda);
    RegScheme copy = *this;
    copy.lambda_ = lambda;
    return copy;
}

SchemeConstants RegScheme::constants() const noexcept {
    if (kind_ == SchemeKind::spectral_cutoff) {
        return {1.0, 1.0, 1.0};
    }
    const double k = k_;
    return {1.0, std::sqrt(k), k};
}

double RegScheme::qualification() const noexcept {
    if (kind_ == SchemeKind::spectral_cutoff) {
        return std::numeric_limits<double>::infinity();
    }
    return k_;
}

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::lavrentiev:
            return "lavrentiev";
        case SchemeKind::iterated_lavrentiev:
            return "iterated_lavrentiev";
        case SchemeKind::spectral_cutoff:
            return "spectral_cutoff";
    }
    return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
    if (name == "lavrentiev") return SchemeKind::lavrentiev;
    if (name == "iterated_lavrentiev") return SchemeKind::iterated_lavrentiev;
    if (name == "spectral_cutoff") return SchemeKind::spectral_cutoff;
    throw InputError("unknown scheme kind '" + name + "'");
}

double filter_value(const RegScheme& scheme, double t) {
    require_t(t);
    const double lambda = scheme.lambda();
    if (scheme.kind() == SchemeKind::spectral_cutoff) {
        return t >= lambda ? 1.0 / t : 0.0;
    }
    // g(t) = (1/lambda) * sum_{j=1..k} u^j
    const double u = contraction(lambda, t);
    double power = 1.0;
    double sum = 0.0;
    for (int j = 0; j < scheme.iterations(); ++j) {
        power *= u;
        sum += power;
    }
    return sum / lambda;
}

double residual_value(const RegScheme& scheme, double t) {
    require_t(t);
    if (scheme.kind() == SchemeKind::spectral_cutoff) {
        return t >= scheme.lambda() ? 0.0 : 1.0;
    }
    const double u = contraction(scheme.lambda(), t);
    double r = 1.0;
    for (int j = 0; j < scheme.iterations(); ++j) {
        r *= u;
    }
    return r;
}

double filter_slope(const RegScheme& scheme, double t) {
    require_t(t);
    const double lambda = scheme.lambda();
    if (scheme.kind() == SchemeKind::spectral_cutoff) {
        return t >= lambda ? 1.0 / (t * t) : 0.0;
    }
    // With 1 - u = t u / lambda:
    //   (g(t) - k/lambda)/t = -(u/lambda^2) * sum_{j=1..k} sum_{i<j} u^i
    const double u = contraction(lambda, t);
    double partial = 0.0;  // 1 + u + ... + u^{j-1}
    double power = 1.0;
    double total = 0.0;
    for (int j = 1; j <= scheme.iterations(); ++j) {
        partial += power;
        power *= u;
        total += partial;
    }
    return -u * total / (lambda * lambda);
}

bool SchemeCheckReport::all_hold() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& c) { return c.holds; });
}

SchemeCheckReport check_scheme_constants(const RegScheme& scheme, double t_max, int grid_size,
                                         std::optional<double> qualification) {
    if (!(t_max > 0.0)) {
        throw InputError("t_max must be positive");
    }
    if (grid_size < 2) {
        throw InputError("grid_size must be >= 2");
    }
    double s = qualification.value_or(scheme.qualification());
    if (!std::isfinite(s)) {
        s = 1.0;
    }
    if (!(s > 0.0)) {
        throw InputError("qualification to check must be positive");
    }

    const double lambda = scheme.lambda();
    const SchemeConstants c = scheme.constants();
    const double gamma_s = 1.0;

    SchemeCheckReport report{t_max, s, {}};
    report.checks = {
        {"|r(t)| <= gamma_0", c.gamma_0, 0.0, 0.0, true},
        {"sqrt(t)|g(t)| <= gamma_-1/2 / sqrt(lambda)", c.gamma_neg_half / std::sqrt(lambda), 0.0, 0.0, true},
        {"|g(t)| <= gamma_-1 / lambda", c.gamma_neg_1 / lambda, 0.0, 0.0, true},
        {"t^s |r(t)| <= gamma_s lambda^s", gamma_s * std::pow(lambda, s), 0.0, 0.0, true},
    };

    // Twelve decades below t_max, log-spaced, endpoint included.
    const double log_hi = std::log(t_max);
    const double log_lo = log_hi - 12.0 * std::log(10.0);
    for (int i = 0; i < grid_size; ++i) {
        const double t =
            i + 1 == grid_size ? t_max : std::exp(log_lo + (log_hi - log_lo) * i / static_cast<double>(grid_size - 1));
        const double g = filter_value(scheme, t);
        const double r = residual_value(scheme, t);
        const double values[4] = {std::abs(r), std::sqrt(t) * std::abs(g), std::abs(g), std::pow(t, s) * std::abs(r)};
        for (std::size_t q = 0; q < 4; ++q) {
            if (values[q] > report.checks[q].max_value) {
                report.checks[q].max_value = values[q];
                report.checks[q].worst_t = t;
            }
        }
    }
    for (auto& check : report.checks) {
        check.holds = check.max_value <= check.bound * (1.0 + 1e-12);
    }
    return report;
}

}  // namespace rndiff
