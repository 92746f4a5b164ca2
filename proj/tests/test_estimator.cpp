#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "rndiff/error.hpp"
#include "rndiff/estimator.hpp"
#include "rndiff/experiment.hpp"
#include "rndiff/selection.hpp"

using namespace rndiff;

namespace {

struct Instance {
    SampleSet xp;
    SampleSet xq;
    KernelSpec kernel;
    GramSystem gram;
};

Instance study_instance(std::size_t n, std::size_t m, double mu_q, std::uint64_t seed) {
    SampleSet xp = sample_normal(2.0, 5.0, n, seed, MeasureTag::p);
    SampleSet xq = sample_normal(mu_q, 0.5, m, seed + 7919, MeasureTag::q);
    KernelSpec kernel = KernelSpec::gaussian_plus_one();
    GramSystem gram = assemble_gram(kernel, xp, xq);
    return {std::move(xp), std::move(xq), kernel, std::move(gram)};
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(FitIteratedLavrentiev, ScalarCase) {
    const auto xp = SampleSet::from_values(std::vector<double>{0.4}, MeasureTag::p);
    const auto xq = SampleSet::from_values(std::vector<double>{0.4}, MeasureTag::q);
    const KernelSpec kernel = KernelSpec::gaussian_plus_one();
    const GramSystem g = assemble_gram(kernel, xp, xq);
    const RatioModel model = fit_iterated_lavrentiev(g, xp, xq, kernel, 1.0, 1);
    EXPECT_NEAR(model.values_at_xp(0), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(evaluate(model, xp.point(0)), 2.0 / 3.0, 1e-15);
}

TEST(FitIteratedLavrentiev, SingleStepIsDirectSolve) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Instance in = study_instance(60, 45, 3.0, seed);
        for (double lambda : {0.1, 0.4, 0.9}) {
            const RatioModel model = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, lambda, 1);
            EXPECT_LT(max_abs_diff(model.values_at_xp, oracle::kulsif_direct(in.gram, lambda)), 1e-10);
        }
    }
}

TEST(FitIteratedLavrentiev, MatchesExplicitInverseRecursion) {
    const Instance in = study_instance(50, 50, 4.0, 3);
    for (int k : {2, 3, 5, 10}) {
        const RatioModel model = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, 0.2, k);
        EXPECT_LT(max_abs_diff(model.values_at_xp, oracle::iterated_by_inverse(in.gram, 0.2, k)), 1e-9);
    }
}

TEST(FitIteratedLavrentiev, RepresenterReproducesSampleValues) {
    const Instance in = study_instance(70, 40, 2.0, 9);
    for (int k : {1, 3, 10}) {
        const RatioModel model = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, 0.15, k);
        EXPECT_EQ(model.mu_coeff, k / 0.15);
        for (std::size_t i = 0; i < in.xp.size(); ++i) {
            const double expected = model.values_at_xp(static_cast<Eigen::Index>(i));
            EXPECT_NEAR(evaluate(model, in.xp.point(i)), expected, 1e-8 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST(FitIteratedLavrentiev, MuCoefficientAccumulatesExactly) {
    const Instance in = study_instance(20, 20, 3.0, 5);
    for (double lambda : LambdaGrid().values()) {
        for (int k : {1, 2, 3, 5, 10}) {
            const RatioModel model = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, lambda, k);
            EXPECT_NEAR(model.mu_coeff, k / lambda, 1e-14 * k / lambda);
        }
    }
}

TEST(FitIteratedLavrentiev, ResidualTelescoping) {
    const Instance in = study_instance(40, 40, 3.0, 21);
    const double lambda = 0.3;
    const LavrentievStepper stepper(in.gram, lambda);
    for (int k : {2, 3, 5, 10}) {
        const RatioModel before = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, lambda, k - 1);
        const RatioModel after = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, lambda, k);
        EXPECT_LT(max_abs_diff(stepper.step(before.values_at_xp), after.values_at_xp), 1e-12);
        const double n_lambda = static_cast<double>(in.gram.n) * lambda;
        EXPECT_LT(max_abs_diff(before.alpha - after.values_at_xp / n_lambda, after.alpha), 1e-12);
    }
}

TEST(FitIteratedLavrentiev, LinearInRightHandSide) {
    Instance in = study_instance(30, 30, 3.0, 4);
    const RatioModel base = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, 0.25, 3);
    for (double c : {2.0, 0.5}) {  // powers of two scale exactly
        GramSystem scaled = in.gram;
        scaled.f_bar *= c;
        const RatioModel s = fit_iterated_lavrentiev(scaled, in.xp, in.xq, in.kernel, 0.25, 3);
        EXPECT_TRUE(s.values_at_xp == c * base.values_at_xp);
        EXPECT_TRUE(s.alpha == c * base.alpha);
    }
    GramSystem scaled = in.gram;
    scaled.f_bar *= 3.0;
    const RatioModel s = fit_iterated_lavrentiev(scaled, in.xp, in.xq, in.kernel, 0.25, 3);
    EXPECT_LT(max_abs_diff(s.values_at_xp, 3.0 * base.values_at_xp), 1e-12 * base.values_at_xp.cwiseAbs().maxCoeff());
}

TEST(FitIteratedLavrentiev, SameDistributionConcentratesNearOne) {
    const SampleSet xp = sample_normal(0.0, 1.0, 500, 101, MeasureTag::p);
    const SampleSet xq = sample_normal(0.0, 1.0, 500, 202, MeasureTag::q);
    const KernelSpec kernel = KernelSpec::gaussian_plus_one();
    const GramSystem g = assemble_gram(kernel, xp, xq);
    for (double lambda : LambdaGrid().values()) {
        const RatioModel model = fit_iterated_lavrentiev(g, xp, xq, kernel, lambda, 2);
        EXPECT_LT(std::abs(model.values_at_xp.mean() - 1.0), 0.25) << "lambda " << lambda;
    }
}

TEST(FitIteratedLavrentiev, ValidatesInputs) {
    const Instance in = study_instance(10, 10, 3.0, 1);
    EXPECT_THROW((void)fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, 0.0, 1), InputError);
    EXPECT_THROW((void)fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, 0.5, 0), InputError);
    const Instance other = study_instance(11, 10, 3.0, 1);
    EXPECT_THROW((void)fit_iterated_lavrentiev(other.gram, in.xp, in.xq, in.kernel, 0.5, 1), InputError);
}

TEST(FitIteratedLavrentiev, IndefiniteSystemIsNumericalError) {
    const Instance in = study_instance(10, 10, 3.0, 1);
    GramSystem broken = in.gram;
    broken.k_matrix(0, 0) = -50.0;
    try {
        (void)fit_iterated_lavrentiev(broken, in.xp, in.xq, in.kernel, 0.1, 1);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("lambda=0.1"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("smallest eigenvalue"), std::string::npos) << e.what();
    }
}

TEST(FitSpectral, AgreesWithRecursion) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Instance in = study_instance(30, 30, 2.0 + seed % 3, seed);
        const PointMatrix probes = sample_normal(2.0, 4.0, 10, seed + 99).points();
        for (int k : {1, 2, 3, 5, 10}) {
            for (double lambda : LambdaGrid().values()) {
                const RatioModel a = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, lambda, k);
                const RatioModel b =
                    fit_spectral(in.gram, in.xp, in.xq, in.kernel, RegScheme::iterated_lavrentiev(lambda, k));
                EXPECT_LT(max_abs_diff(a.values_at_xp, b.values_at_xp), 1e-8);
                EXPECT_NEAR(a.mu_coeff, b.mu_coeff, 1e-12 * a.mu_coeff);
                const auto ea = evaluate_batch(a, probes);
                const auto eb = evaluate_batch(b, probes);
                for (std::size_t i = 0; i < ea.size(); ++i) {
                    EXPECT_NEAR(ea[i], eb[i], 1e-8);
                }
            }
        }
    }
}

TEST(FitSpectral, CutoffBelowSpectrumInvertsExactly) {
    const Instance in = study_instance(8, 12, 3.0, 17);
    const double n = static_cast<double>(in.gram.n);
    const Eigen::VectorXd spectrum =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(in.gram.k_matrix / n, Eigen::EigenvaluesOnly).eigenvalues();
    const double lambda = 0.5 * spectrum.minCoeff();
    ASSERT_GT(lambda, 0.0);
    const RatioModel model = fit_spectral(in.gram, in.xp, in.xq, in.kernel, RegScheme::spectral_cutoff(lambda));
    const Eigen::VectorXd residual = in.gram.k_matrix / n * model.values_at_xp - in.gram.f_bar / n;
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(model.mu_coeff, 0.0);
    for (std::size_t i = 0; i < in.xp.size(); ++i) {
        EXPECT_NEAR(evaluate(model, in.xp.point(i)), model.values_at_xp(static_cast<Eigen::Index>(i)), 1e-6);
    }
}

TEST(FitSpectral, CutoffAboveSpectrumIsZero) {
    const Instance in = study_instance(20, 20, 3.0, 5);
    const RatioModel model = fit_spectral(in.gram, in.xp, in.xq, in.kernel, RegScheme::spectral_cutoff(100.0));
    EXPECT_EQ(model.values_at_xp.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(model.alpha.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(evaluate(model, in.xq.point(0)), 0.0);
}

TEST(Fit, DispatchesOnSchemeKind) {
    const Instance in = study_instance(15, 15, 3.0, 6);
    const RatioModel lav = fit(in.gram, in.xp, in.xq, in.kernel, RegScheme::lavrentiev(0.3));
    EXPECT_EQ(lav.scheme.kind(), SchemeKind::lavrentiev);
    EXPECT_LT(max_abs_diff(lav.values_at_xp, oracle::kulsif_direct(in.gram, 0.3)), 1e-10);
    const RatioModel cut = fit(in.gram, in.xp, in.xq, in.kernel, RegScheme::spectral_cutoff(100.0));
    EXPECT_EQ(cut.scheme.kind(), SchemeKind::spectral_cutoff);
}

TEST(Evaluate, MeanEmbeddingTerm) {
    const Instance in = study_instance(10, 6, 3.0, 8);
    RatioModel model = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, 0.5, 1);
    model.alpha.setZero();
    model.mu_coeff = 1.0;
    const std::vector<double> x{2.5};
    double mean = 0.0;
    for (std::size_t j = 0; j < in.xq.size(); ++j) {
        mean += eval_kernel(in.kernel, x, in.xq.point(j));
    }
    mean /= static_cast<double>(in.xq.size());
    EXPECT_NEAR(evaluate(model, x), mean, 1e-15);
}

TEST(Evaluate, BatchMatchesPointwise) {
    const Instance in = study_instance(25, 25, 3.0, 10);
    const RatioModel model = fit_iterated_lavrentiev(in.gram, in.xp, in.xq, in.kernel, 0.2, 3);
    EXPECT_TRUE(evaluate_batch(model, PointMatrix(0, 1)).empty());
    const PointMatrix one = in.xq.points().topRows(1);
    EXPECT_EQ(evaluate_batch(model, one), std::vector<double>{evaluate(model, in.xq.point(0))});
    const auto batch = evaluate_batch(model, in.xp.points());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        EXPECT_NEAR(batch[i], model.values_at_xp(static_cast<Eigen::Index>(i)), 1e-8);
    }
    EXPECT_THROW((void)evaluate(model, std::vector<double>{1.0, 2.0}), InputError);
    EXPECT_THROW((void)evaluate_batch(model, PointMatrix::Zero(2, 2)), InputError);
}

TEST(Evaluate, HigherIterationReducesMaxErrorOffSample) {
    SimConfig config;
    config.mu_q_list = {2.0};
    config.k_list = {1, 3};
    config.seed = 777;
    for (int i = 0; i <= 80; ++i) {
        config.probe_points.push_back(-2.0 + 0.1 * i);
    }
    const ExperimentReport report = run_study(config, 1);
    const auto& k1 = report.cell(2.0, 1).replications;
    const auto& k3 = report.cell(2.0, 3).replications;
    int wins = 0;
    for (std::size_t r = 0; r < k1.size(); ++r) {
        wins += *k3[r].max_pointwise_error < *k1[r].max_pointwise_error;
    }
    EXPECT_GE(wins, 15);
}
