#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rndiff {

enum class SchemeKind { lavrentiev, iterated_lavrentiev, spectral_cutoff };

/// Constants of the three generic filter bounds:
///   sup |1 - t g(t)| <= gamma_0
///   sup sqrt(t) |g(t)| <= gamma_neg_half / sqrt(lambda)
///   sup |g(t)| <= gamma_neg_1 / lambda
struct SchemeConstants {
    double gamma_0;
    double gamma_neg_half;
    double gamma_neg_1;
};

/// A spectral filter family g_lambda together with one value of lambda.
///
/// Lavrentiev is g(t) = 1/(lambda + t). Its k-times iterated version is
/// g(t) = (1 - (lambda/(lambda+t))^k)/t with qualification k. Spectral cutoff
/// inverts exactly above lambda and discards everything below; its
/// qualification is infinite.
class RegScheme {
  public:
    static RegScheme lavrentiev(double lambda);
    static RegScheme iterated_lavrentiev(double lambda, int k);
    static RegScheme spectral_cutoff(double lambda);

    [[nodiscard]] SchemeKind kind() const noexcept { return kind_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    /// Number of Lavrentiev steps; 1 for plain Lavrentiev, 0 for spectral cutoff.
    [[nodiscard]] int iterations() const noexcept { return k_; }
    [[nodiscard]] SchemeConstants constants() const noexcept;
    /// +infinity for spectral cutoff.
    [[nodiscard]] double qualification() const noexcept;

    [[nodiscard]] RegScheme with_lambda(double lambda) const;

    friend bool operator==(const RegScheme&, const RegScheme&) = default;

  private:
    RegScheme(SchemeKind kind, double lambda, int k) : kind_(kind), lambda_(lambda), k_(k) {}

    SchemeKind kind_;
    double lambda_;
    int k_;
};

[[nodiscard]] std::string to_string(SchemeKind kind);
[[nodiscard]] SchemeKind scheme_kind_from_string(const std::string& name);

/// g_lambda(t) for t >= 0, with the analytic limit at t = 0.
[[nodiscard]] double filter_value(const RegScheme& scheme, double t);

/// r_lambda(t) = 1 - t g_lambda(t), evaluated in closed form.
[[nodiscard]] double residual_value(const RegScheme& scheme, double t);

/// (g(t) - g(0)) / t, with its limit at t = 0. The estimator's spectral path
/// needs it to split g(T) f into g(0) f plus a part in the span of the
/// sampled kernel sections.
[[nodiscard]] double filter_slope(const RegScheme& scheme, double t);

struct InequalityCheck {
    std::string name;
    double bound;      ///< right-hand side
    double max_value;  ///< sup of the left-hand side over the grid
    double worst_t;    ///< grid point attaining max_value
    bool holds;

    [[nodiscard]] double slack() const noexcept { return bound - max_value; }
};

struct SchemeCheckReport {
    double t_max;
    double qualification_checked;
    std::vector<InequalityCheck> checks;

    [[nodiscard]] bool all_hold() const noexcept;
};

/// Evaluates the generic filter bounds and the qualification bound
/// t^s |r(t)| <= lambda^s on a log grid over (0, t_max]. `qualification`
/// defaults to the scheme's own (1 for spectral cutoff, where any s holds).
/// A violation is reported, not thrown.
[[nodiscard]] SchemeCheckReport check_scheme_constants(const RegScheme& scheme, double t_max, int grid_size,
                                                       std::optional<double> qualification = std::nullopt);

}  // namespace rndiff
