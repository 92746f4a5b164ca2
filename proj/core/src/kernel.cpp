#include "rndiff/kernel.hpp"

#include <cmath>
#include <string>

#include "rndiff/error.hpp"

namespace rndiff {

KernelSpec KernelSpec::gaussian_plus_one(double bandwidth, double offset) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw InputError("kernel bandwidth must be positive, got " + std::to_string(bandwidth));
    }
    if (!(offset >= 0.0) || !std::isfinite(offset)) {
        throw InputError("kernel offset must be non-negative, got " + std::to_string(offset));
    }
    KernelSpec spec;
    spec.family_ = KernelFamily::gaussian_plus_one;
    spec.bandwidth_ = bandwidth;
    spec.offset_ = offset;
    return spec;
}

KernelSpec KernelSpec::gaussian(double bandwidth) {
    KernelSpec spec = gaussian_plus_one(bandwidth, 0.0);
    spec.family_ = KernelFamily::gaussian;
    return spec;
}

KernelSpec KernelSpec::custom(CustomKernel body, double offset) {
    if (!body) {
        throw InputError("custom kernel body is empty");
    }
    KernelSpec spec = gaussian_plus_one(1.0, offset);
    spec.family_ = KernelFamily::custom_ref;
    spec.custom_ = std::make_shared<const CustomKernel>(std::move(body));
    return spec;
}

double KernelSpec::bound() const {
    if (family_ == KernelFamily::custom_ref) {
        throw InputError("kernel bound is not known for custom kernels");
    }
    return std::sqrt(offset_ + 1.0);
}

SampleSet::SampleSet(PointMatrix points, MeasureTag tag, std::optional<std::uint64_t> seed)
    : points_(std::move(points)), tag_(tag), seed_(seed) {
    if (points_.rows() == 0) {
        throw InputError("sample set is empty");
    }
    if (points_.cols() == 0) {
        throw InputError("sample points have dimension 0");
    }
    if (!points_.allFinite()) {
        throw InputError("sample set contains non-finite coordinates");
    }
}

SampleSet SampleSet::from_values(std::span<const double> values, MeasureTag tag, std::optional<std::uint64_t> seed) {
    PointMatrix points(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        points(static_cast<Eigen::Index>(i), 0) = values[i];
    }
    return SampleSet(std::move(points), tag, seed);
}

Point SampleSet::point(std::size_t i) const {
    return {points_.row(static_cast<Eigen::Index>(i)).data(), dim()};
}

double eval_kernel(const KernelSpec& spec, Point x, Point y) {
    if (x.size() != y.size()) {
        throw InputError("kernel arguments differ in dimension: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    }
    if (spec.family() == KernelFamily::custom_ref) {
        return spec.offset() + (*spec.custom_body())(x, y);
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sq += d * d;
    }
    const double h = spec.bandwidth();
    return spec.offset() + std::exp(-sq / (2.0 * h * h));
}

namespace {

Point row_of(const PointMatrix& points, Eigen::Index r) {
    return {points.row(r).data(), static_cast<std::size_t>(points.cols())};
}

}  // namespace

GramSystem assemble_gram(const KernelSpec& spec, const SampleSet& xp, const SampleSet& xq) {
    if (xp.tag() != MeasureTag::p) {
        throw InputError("first sample set must be tagged p");
    }
    if (xq.tag() != MeasureTag::q) {
        throw InputError("second sample set must be tagged q");
    }
    if (xp.dim() != xq.dim()) {
        throw InputError("sample sets differ in dimension: " + std::to_string(xp.dim()) + " vs " +
                         std::to_string(xq.dim()));
    }

    const auto n = static_cast<Eigen::Index>(xp.size());
    const auto m = static_cast<Eigen::Index>(xq.size());

    GramSystem gram;
    gram.n = xp.size();
    gram.m = xq.size();
    gram.k_matrix.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            const double v = eval_kernel(spec, xp.point(i), xp.point(j));
            gram.k_matrix(i, j) = v;
            gram.k_matrix(j, i) = v;
        }
    }

    const double scale = static_cast<double>(n) / static_cast<double>(m);
    gram.f_bar.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            sum += eval_kernel(spec, xp.point(i), xq.point(j));
        }
        gram.f_bar(i) = scale * sum;
    }
    return gram;
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const PointMatrix& at, const PointMatrix& centers) {
    if (at.rows() > 0 && at.cols() != centers.cols()) {
        throw InputError("evaluation points have dimension " + std::to_string(at.cols()) + ", expected " +
                         std::to_string(centers.cols()));
    }
    Eigen::MatrixXd out(at.rows(), centers.rows());
    for (Eigen::Index r = 0; r < at.rows(); ++r) {
        for (Eigen::Index i = 0; i < centers.rows(); ++i) {
            out(r, i) = eval_kernel(spec, row_of(at, r), row_of(centers, i));
        }
    }
    return out;
}

double psd_tolerance(const GramSystem& gram) {
    const double max_diag = gram.k_matrix.size() > 0 ? gram.k_matrix.diagonal().maxCoeff() : 0.0;
    return 1e-10 * static_cast<double>(gram.n) * max_diag;
}

}  // namespace rndiff
