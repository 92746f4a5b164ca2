// Acceptance suite: one line per criterion, "[PASS] ACn ..." or
// "[FAIL] ACn ...". Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

#include "oracles.hpp"
#include "rndiff/capacity.hpp"
#include "rndiff/estimator.hpp"
#include "rndiff/experiment.hpp"
#include "rndiff/regularization.hpp"
#include "rndiff/selection.hpp"

#ifdef RNDIFF_HAVE_CLI
#include "rndiff_cli/commands.hpp"
#endif

using namespace rndiff;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

double max_abs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

Outcome ac1_study_ordering() {
    const auto start = std::chrono::steady_clock::now();
    const SimConfig config;
    const ExperimentReport report = run_study(config, 1);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ordered = true;
    std::ostringstream detail;
    for (double mu_q : config.mu_q_list) {
        const CellReport& base = report.cell(mu_q, 1);
        if (!base.complete || !base.msd_stats) return {false, "incomplete k=1 cell"};
        detail << "mu_q=" << mu_q << " k1=" << base.msd_stats->median;
        for (int k : config.k_list) {
            if (k == 1) continue;
            const CellReport& cell = report.cell(mu_q, k);
            if (!cell.complete || !cell.msd_stats) return {false, "incomplete cell"};
            ordered = ordered && cell.msd_stats->median <= base.msd_stats->median;
        }
        detail << "; ";
    }
    detail << fmt("%.2f s single-threaded", seconds);
    return {ordered && seconds < 120.0, detail.str()};
}

Outcome ac2_two_path_equivalence() {
    double worst = 0.0;
    const std::vector<double> lambdas{0.1, 0.2, 0.35, 0.6, 0.9};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SampleSet xp = sample_normal(2.0, 5.0, 40, 100 + seed, MeasureTag::p);
        const SampleSet xq = sample_normal(3.0, 0.5, 40, 200 + seed, MeasureTag::q);
        const KernelSpec kernel = KernelSpec::gaussian_plus_one();
        const GramSystem g = assemble_gram(kernel, xp, xq);
        const SampleSet off = oracle::uniform_samples(10, 1, -4.0, 8.0, 300 + seed, MeasureTag::p);
        for (int k : {1, 2, 3, 5, 10}) {
            for (double lambda : lambdas) {
                const RatioModel a = fit_iterated_lavrentiev(g, xp, xq, kernel, lambda, k);
                const RatioModel b = fit_spectral(g, xp, xq, kernel, RegScheme::iterated_lavrentiev(lambda, k));
                worst = std::max(worst, max_abs(a.values_at_xp, b.values_at_xp));
                for (std::size_t i = 0; i < off.size(); ++i) {
                    worst = std::max(worst, std::abs(evaluate(a, off.point(i)) - evaluate(b, off.point(i))));
                }
            }
        }
    }
    return {worst <= 1e-8, fmt("max abs difference %.3g over 125 configurations", worst)};
}

Outcome ac3_kulsif_closed_form() {
    std::mt19937_64 engine(2718);
    std::uniform_int_distribution<int> size(10, 80);
    std::uniform_real_distribution<double> log_lambda(std::log(0.05), std::log(1.0));
    double worst = 0.0;
    for (int instance = 0; instance < 20; ++instance) {
        const auto n = static_cast<std::size_t>(size(engine));
        const auto m = static_cast<std::size_t>(size(engine));
        const double mu_q = 2.0 + instance % 3;
        const SampleSet xp = sample_normal(2.0, 5.0, n, engine(), MeasureTag::p);
        const SampleSet xq = sample_normal(mu_q, 0.5, m, engine(), MeasureTag::q);
        const KernelSpec kernel = KernelSpec::gaussian_plus_one();
        const GramSystem g = assemble_gram(kernel, xp, xq);
        const double lambda = std::exp(log_lambda(engine));
        const RatioModel model = fit_iterated_lavrentiev(g, xp, xq, kernel, lambda, 1);
        worst = std::max(worst, max_abs(model.values_at_xp, oracle::kulsif_direct(g, lambda)));
    }
    return {worst <= 1e-10, fmt("max abs difference %.3g over 20 instances", worst)};
}

Outcome ac4_filter_algebra() {
    const double t_max = std::pow(KernelSpec::gaussian_plus_one().bound(), 2);
    double identity = 0.0;
    double nesting = 0.0;
    bool constants_ok = true;
    for (int k : {1, 2, 3, 5, 10}) {
        for (double lambda : {0.01, 0.1, 0.3, 0.9}) {
            const RegScheme scheme = RegScheme::iterated_lavrentiev(lambda, k);
            for (int i = 0; i <= 400; ++i) {
                const double t = t_max * std::pow(10.0, -12.0 + 12.0 * i / 400.0);
                identity = std::max(identity, std::abs(t * filter_value(scheme, t) + residual_value(scheme, t) - 1.0));
                const double expected = std::pow(lambda / (lambda + t), k);
                nesting = std::max(nesting, std::abs(residual_value(scheme, t) - expected) / std::max(expected, 1e-300));
            }
            const SchemeConstants c = scheme.constants();
            constants_ok = constants_ok && c.gamma_0 == 1.0 && std::abs(c.gamma_neg_half - std::sqrt(k)) < 1e-15 &&
                           c.gamma_neg_1 == k && scheme.qualification() == k;
            const SchemeCheckReport report = check_scheme_constants(scheme, t_max, 2000);
            constants_ok = constants_ok && report.all_hold() && report.checks.size() == 4;
        }
    }
    const bool pass = identity <= 1e-12 && nesting <= 1e-12 && constants_ok;
    return {pass, fmt("identity err %.3g, nesting rel err %.3g, constants ", identity, nesting) +
                      (constants_ok ? "hold" : "violated")};
}

Outcome ac5_ground_truth() {
    double worst = 0.0;
    for (double mu_q : {2.0, 3.0, 4.0}) {
        for (int i = 0; i < 10000; ++i) {
            const double x = -10.0 + 20.0 * i / 9999.0;
            const double ratio = oracle::normal_pdf(x, mu_q, 0.5) / oracle::normal_pdf(x, 2.0, 5.0);
            worst = std::max(worst, std::abs(true_beta(x, mu_q) / ratio - 1.0));
        }
    }
    const double at_two = true_beta(2.0, 2.0);
    const double gap = std::abs(at_two - std::sqrt(10.0));
    const bool exact = gap <= 2.0 * std::numeric_limits<double>::epsilon() * std::sqrt(10.0);
    return {worst <= 1e-12 && exact, fmt("max rel err %.3g on 3x10^4 points, |beta(2)-sqrt(10)| = %.3g", worst, gap)};
}

Outcome ac6_capacity() {
    double mean_err = 0.0;
    bool decreasing = true;
    double contract = 0.0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const SampleSet xp = sample_normal(2.0, 5.0, 60, seed, MeasureTag::p);
        const SampleSet xq = sample_normal(3.0, 0.5, 60, seed + 50, MeasureTag::q);
        const KernelSpec kernel = KernelSpec::gaussian_plus_one();
        const GramSystem g = assemble_gram(kernel, xp, xq);
        for (double lambda : {0.005, 0.05, 0.5}) {
            const ChristoffelEvaluator c(g, kernel, xp, lambda);
            double mean = 0.0;
            for (std::size_t i = 0; i < xp.size(); ++i) mean += c(xp.point(i));
            mean /= static_cast<double>(xp.size());
            const double nd = effective_dimension(g, lambda);
            mean_err = std::max(mean_err, std::abs(mean / nd - 1.0));
        }
        double previous = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 80; ++i) {
            const double lambda = std::pow(10.0, -6.0 + 0.1 * i);
            const double ratio = effective_dimension(g, lambda) / lambda;
            decreasing = decreasing && ratio < previous;
            previous = ratio;
        }
        const double star = find_lambda_star(g);
        contract = std::max(contract, std::abs(effective_dimension(g, star) / star - 60.0) / 60.0);
    }
    GramSystem scalar;
    scalar.n = 1;
    scalar.m = 1;
    scalar.k_matrix = Eigen::MatrixXd::Constant(1, 1, 1.0);
    scalar.f_bar = Eigen::VectorXd::Ones(1);
    const double golden = find_lambda_star(scalar);
    const double golden_err = std::abs(golden - 0.618033988749894848);
    const bool pass = mean_err <= 1e-8 && decreasing && contract <= 1e-4 && golden_err <= 1e-6;
    return {pass, fmt("mean/N rel err %.3g, solver rel residual %.3g, golden-ratio err %.3g", mean_err, contract,
                      golden_err) +
                      (decreasing ? ", N/lambda decreasing" : ", N/lambda NOT decreasing")};
}

Outcome ac7_pointwise_advantage() {
    SimConfig config;
    std::vector<double> probes;
    for (int i = 0; i <= 80; ++i) probes.push_back(-2.0 + 0.1 * i);
    const KernelSpec kernel = KernelSpec::gaussian_plus_one();
    int wins = 0;
    for (int r = 0; r < 20; ++r) {
        const ReplicationDraw draw = draw_replication(config, 2.0, r);
        const GramSystem g = assemble_gram(kernel, draw.xp, draw.xq);
        double errors[2];
        int slot = 0;
        for (int k : {1, 10}) {
            const double lambda = quasi_optimality(g, draw.xp, draw.xq, kernel, k, config.grid).chosen_lambda;
            const RatioModel model = fit_iterated_lavrentiev(g, draw.xp, draw.xq, kernel, lambda, k);
            double worst = 0.0;
            for (double x : probes) {
                const double pt[1] = {x};
                worst = std::max(worst, std::abs(true_beta(x, 2.0) - evaluate(model, pt)));
            }
            errors[slot++] = worst;
        }
        if (errors[1] < errors[0]) ++wins;
    }
    return {wins >= 15, "k=10 beats k=1 in " + std::to_string(wins) + "/20 replications"};
}

#ifdef RNDIFF_HAVE_CLI
std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome ac8_determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / ("rndiff_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    std::ostringstream sink;
    const std::vector<std::string> thread_counts{"1", "1", "2", "4", "0"};
    for (std::size_t i = 0; i < thread_counts.size(); ++i) {
        const std::string dir = (root / std::to_string(i)).string();
        const char* argv[] = {"rndiff", "simulate", "--out-dir", dir.c_str(), "--threads", thread_counts[i].c_str()};
        if (cli::run(6, argv, sink, sink) != 0) {
            fs::remove_all(root);
            return {false, "simulate failed with --threads " + thread_counts[i]};
        }
    }
    bool identical = true;
    for (const char* file : {"report.json", "replications.csv", "box_stats.csv"}) {
        const std::string reference = slurp(root / "0" / file);
        identical = identical && !reference.empty();
        for (std::size_t i = 1; i < thread_counts.size(); ++i) {
            identical = identical && slurp(root / std::to_string(i) / file) == reference;
        }
    }
    fs::remove_all(root);
    return {identical, "5 simulate runs at --threads 1,1,2,4,0: outputs " +
                           std::string(identical ? "byte-identical" : "differ")};
}
#else
Outcome ac8_determinism() { return {false, "command-line tool not built"}; }
#endif

Outcome ac9_rate_fitter() {
    double worst = 0.0;
    for (double r : {0.2, 0.5, 2.0 / 3.0, 1.0, 1.7}) {
        for (double c : {0.01, 1.0, 250.0}) {
            std::vector<double> scales;
            std::vector<double> errors;
            for (double n : {50.0, 100.0, 200.0, 400.0}) {
                scales.push_back(1.0 / std::sqrt(n));
                errors.push_back(c * std::pow(scales.back(), r));
            }
            const auto slope = fit_log_slope(scales, errors);
            if (!slope) return {false, "fitter returned no slope"};
            worst = std::max(worst, std::abs(*slope - r));
        }
    }
    return {worst <= 1e-10, fmt("max slope error %.3g over 15 sequences", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 study: median MSD for k>1 <= k=1 at every mu_q", ac1_study_ordering},
        {"AC2 recursion and spectral paths agree to 1e-8", ac2_two_path_equivalence},
        {"AC3 k=1 equals direct (n lambda I + K)^-1 F solve to 1e-10", ac3_kulsif_closed_form},
        {"AC4 filter identity, residual nesting, scheme constants", ac4_filter_algebra},
        {"AC5 true_beta equals the normal density ratio", ac5_ground_truth},
        {"AC6 Christoffel mean, N/lambda monotone, lambda_* solver", ac6_capacity},
        {"AC7 k=10 pointwise error beats k=1 in >= 15/20", ac7_pointwise_advantage},
        {"AC8 simulate output independent of --threads", ac8_determinism},
        {"AC9 rate fitter recovers exact slopes to 1e-10", ac9_rate_fitter},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("[%s] %s (%s)\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
