#pragma once

// Reference computations used only by the tests. They deliberately take
// different numerical routes from the library (LU instead of Cholesky,
// explicit inverses, textbook density formulas).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "rndiff/kernel.hpp"

namespace rndiff::oracle {

inline double normal_pdf(double x, double mean, double variance) {
    const double z = x - mean;
    return std::exp(-z * z / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

/// (n lambda I + K)^{-1} F by pivoted LU.
inline Eigen::VectorXd kulsif_direct(const GramSystem& gram, double lambda) {
    Eigen::MatrixXd a = gram.k_matrix;
    a.diagonal().array() += static_cast<double>(gram.n) * lambda;
    return a.fullPivLu().solve(gram.f_bar);
}

/// Recursion v_l = A^{-1}(n lambda v_{l-1} + F) with an explicit inverse.
inline Eigen::VectorXd iterated_by_inverse(const GramSystem& gram, double lambda, int k) {
    const double shift = static_cast<double>(gram.n) * lambda;
    Eigen::MatrixXd a = gram.k_matrix;
    a.diagonal().array() += shift;
    const Eigen::MatrixXd inv = a.inverse();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gram.n));
    for (int l = 0; l < k; ++l) {
        v = inv * (shift * v + gram.f_bar);
    }
    return v;
}

/// trace((lambda I + K/n)^{-1} K/n) through an explicit inverse.
inline double effective_dimension_by_trace(const GramSystem& gram, double lambda) {
    const Eigen::MatrixXd a = gram.k_matrix / static_cast<double>(gram.n);
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += lambda;
    return (shifted.inverse() * a).trace();
}

/// Scalar Lavrentiev recursion b_l = (1 + lambda b_{l-1})/(lambda + t),
/// i.e. the iteration applied to a single eigenvalue with unit right-hand side.
inline double filter_by_recursion(double lambda, int k, double t) {
    double b = 0.0;
    for (int l = 0; l < k; ++l) {
        b = (1.0 + lambda * b) / (lambda + t);
    }
    return b;
}

inline SampleSet uniform_samples(std::size_t count, std::size_t dim, double lo, double hi, std::uint64_t seed,
                                 MeasureTag tag) {
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    PointMatrix points(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            points(r, c) = u(engine);
        }
    }
    return SampleSet(std::move(points), tag, seed);
}

}  // namespace rndiff::oracle
