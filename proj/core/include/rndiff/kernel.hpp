#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace rndiff {

/// One point per row; rows are contiguous so a point can be viewed as a span.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Point = std::span<const double>;

enum class KernelFamily { gaussian_plus_one, gaussian, custom_ref };

/// User-supplied kernel body for KernelFamily::custom_ref. Must be symmetric
/// and positive semidefinite; the offset is still added on top.
using CustomKernel = std::function<double(Point, Point)>;

/// k(x, y) = offset + exp(-|x - y|^2 / (2 bandwidth^2)).
///
/// `gaussian_plus_one` is the default (offset 1, bandwidth 1), which makes the
/// constants part of the RKHS. `gaussian` forces offset 0.
class KernelSpec {
  public:
    KernelSpec() = default;

    static KernelSpec gaussian_plus_one(double bandwidth = 1.0, double offset = 1.0);
    static KernelSpec gaussian(double bandwidth = 1.0);
    static KernelSpec custom(CustomKernel body, double offset = 0.0);

    [[nodiscard]] KernelFamily family() const noexcept { return family_; }
    [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }
    [[nodiscard]] double offset() const noexcept { return offset_; }
    [[nodiscard]] const CustomKernel* custom_body() const noexcept { return custom_.get(); }

    /// kappa_0 = sup_x sqrt(k(x, x)). Only known in closed form for the
    /// gaussian families; custom kernels throw InputError.
    [[nodiscard]] double bound() const;

  private:
    KernelFamily family_{KernelFamily::gaussian_plus_one};
    double bandwidth_{1.0};
    double offset_{1.0};
    std::shared_ptr<const CustomKernel> custom_{};
};

enum class MeasureTag { p, q };

/// Non-empty ordered set of points in R^d, tagged with the measure it was
/// drawn from.
class SampleSet {
  public:
    SampleSet(PointMatrix points, MeasureTag tag, std::optional<std::uint64_t> seed = std::nullopt);

    /// 1-d convenience constructor.
    static SampleSet from_values(std::span<const double> values, MeasureTag tag,
                                 std::optional<std::uint64_t> seed = std::nullopt);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
    [[nodiscard]] Point point(std::size_t i) const;
    [[nodiscard]] const PointMatrix& points() const noexcept { return points_; }
    [[nodiscard]] MeasureTag tag() const noexcept { return tag_; }
    [[nodiscard]] std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  private:
    PointMatrix points_;
    MeasureTag tag_;
    std::optional<std::uint64_t> seed_;
};

/// Finite-dimensional form of the empirical operator equation: the Gram
/// matrix over X_p and F_i = (n/m) sum_j k(x_i, x'_j).
struct GramSystem {
    Eigen::MatrixXd k_matrix;
    Eigen::VectorXd f_bar;
    std::size_t n{0};
    std::size_t m{0};
};

[[nodiscard]] double eval_kernel(const KernelSpec& spec, Point x, Point y);

[[nodiscard]] GramSystem assemble_gram(const KernelSpec& spec, const SampleSet& xp, const SampleSet& xq);

/// Entry (r, i) is k(at_r, centers_i).
[[nodiscard]] Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const PointMatrix& at, const PointMatrix& centers);

/// Eigenvalue floor below which K is still accepted as PSD:
/// 1e-10 * n * max diagonal.
[[nodiscard]] double psd_tolerance(const GramSystem& gram);

}  // namespace rndiff
