#include "rndiff/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "rndiff/error.hpp"
#include "rndiff/parallel.hpp"

namespace rndiff {

void SimConfig::validate() const {
    if (n < 2 || m < 2) {
        throw InputError("sample sizes n and m must be >= 2");
    }
    if (!(var_p > 0.0) || !(var_q > 0.0)) {
        throw InputError("variances must be positive");
    }
    if (replications < 1) {
        throw InputError("replications must be >= 1");
    }
    if (mu_q_list.empty() || k_list.empty()) {
        throw InputError("mu_q and k lists must be non-empty");
    }
    for (const int k : k_list) {
        if (k < 1) {
            throw InputError("iteration counts must be >= 1");
        }
    }
    if (grid.w() < 2) {
        throw InputError("lambda grid needs w >= 2");
    }
}

const CellReport& ExperimentReport::cell(double mu_q, int k) const {
    for (const auto& c : cells) {
        if (c.mu_q == mu_q && c.k == k) {
            return c;
        }
    }
    throw InputError("no cell for mu_q=" + std::to_string(mu_q) + ", k=" + std::to_string(k));
}

double true_beta(double x, double mu_q, double mu_p, double var_p, double var_q) {
    const double dp = x - mu_p;
    const double dq = x - mu_q;
    return std::sqrt(var_p / var_q) * std::exp(dp * dp / (2.0 * var_p) - dq * dq / (2.0 * var_q));
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication, double key) noexcept {
    std::uint64_t h = mix64(base);
    h = mix64(h ^ replication);
    h = mix64(h ^ std::bit_cast<std::uint64_t>(key));
    return h;
}

SampleSet sample_normal(double mu, double var, std::size_t count, std::uint64_t seed, MeasureTag tag) {
    if (!(var > 0.0)) {
        throw InputError("normal variance must be positive");
    }
    if (count == 0) {
        throw InputError("sample count must be positive");
    }
    std::mt19937_64 engine(seed);
    const auto uniform = [&engine] {
        return static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
    };
    const double sd = std::sqrt(var);
    std::vector<double> values;
    values.reserve(count + 1);
    while (values.size() < count) {
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        values.push_back(mu + sd * radius * std::cos(angle));
        values.push_back(mu + sd * radius * std::sin(angle));
    }
    values.resize(count);
    return SampleSet::from_values(values, tag, seed);
}

double msd(const Eigen::VectorXd& values, const PointMatrix& xp_points, double mu_q, double mu_p, double var_p,
           double var_q) {
    if (xp_points.cols() != 1) {
        throw InputError("MSD is defined for 1-d samples");
    }
    if (values.size() != xp_points.rows() || values.size() == 0) {
        throw InputError("value vector does not match the sample");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double d = true_beta(xp_points(i, 0), mu_q, mu_p, var_p, var_q) - values(i);
        sum += d * d;
    }
    return sum / static_cast<double>(values.size());
}

double msd(const RatioModel& model, double mu_q, double mu_p, double var_p, double var_q) {
    return msd(model.values_at_xp, model.xp_points, mu_q, mu_p, var_p, var_q);
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) {
        throw InputError("box statistics need at least one value");
    }
    std::sort(values.begin(), values.end());
    const std::size_t count = values.size();
    const auto rank = [&](double p) {
        const auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(count)));
        return values[std::clamp<std::size_t>(r, 1, count) - 1];
    };
    return {count, values.front(), rank(0.25), rank(0.5), rank(0.75), values.back()};
}

namespace {

struct DrawnPair {
    SampleSet xp;
    SampleSet xq;
};

DrawnPair draw_pair(std::uint64_t seed, std::size_t n, std::size_t m, double mu_p, double var_p, double mu_q,
                    double var_q) {
    return {sample_normal(mu_p, var_p, n, mix64(seed ^ 0x70ULL), MeasureTag::p),
            sample_normal(mu_q, var_q, m, mix64(seed ^ 0x71ULL), MeasureTag::q)};
}

}  // namespace

ReplicationDraw draw_replication(const SimConfig& config, double mu_q, int replication) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(replication), mu_q);
    DrawnPair pair = draw_pair(seed, config.n, config.m, config.mu_p, config.var_p, mu_q, config.var_q);
    return {seed, std::move(pair.xp), std::move(pair.xq)};
}

ExperimentReport run_study(const SimConfig& config, unsigned threads) {
    config.validate();
    const std::size_t n_mu = config.mu_q_list.size();
    const std::size_t n_k = config.k_list.size();
    const auto reps = static_cast<std::size_t>(config.replications);

    ExperimentReport report{config, {}};
    report.cells.resize(n_mu * n_k);
    for (std::size_t a = 0; a < n_mu; ++a) {
        for (std::size_t b = 0; b < n_k; ++b) {
            CellReport& cell = report.cells[a * n_k + b];
            cell.mu_q = config.mu_q_list[a];
            cell.k = config.k_list[b];
            cell.replications.resize(reps);
        }
    }

    PointMatrix probes(static_cast<Eigen::Index>(config.probe_points.size()), 1);
    for (std::size_t i = 0; i < config.probe_points.size(); ++i) {
        probes(static_cast<Eigen::Index>(i), 0) = config.probe_points[i];
    }

    // One task per (mu_q, replication): the same draw serves every k.
    parallel_for(n_mu * reps, threads, [&](std::size_t task) {
        const std::size_t a = task / reps;
        const std::size_t r = task % reps;
        const double mu_q = config.mu_q_list[a];
        const std::uint64_t seed = derive_seed(config.seed, r, mu_q);

        std::optional<ReplicationDraw> pair;
        std::optional<GramSystem> gram;
        std::string setup_error;
        try {
            pair.emplace(draw_replication(config, mu_q, static_cast<int>(r)));
            gram.emplace(assemble_gram(config.kernel, pair->xp, pair->xq));
        } catch (const std::exception& e) {
            setup_error = e.what();
        }

        for (std::size_t b = 0; b < n_k; ++b) {
            ReplicationResult& out = report.cells[a * n_k + b].replications[r];
            out.replication = static_cast<int>(r);
            out.seed = seed;
            if (!gram) {
                out.error = setup_error;
                continue;
            }
            try {
                const int k = config.k_list[b];
                const SelectionTrace trace = quasi_optimality(*gram, pair->xp, pair->xq, config.kernel, k, config.grid);
                const RatioModel model =
                    fit_iterated_lavrentiev(*gram, pair->xp, pair->xq, config.kernel, trace.chosen_lambda, k);
                out.chosen_lambda = trace.chosen_lambda;
                out.msd = msd(model, mu_q, config.mu_p, config.var_p, config.var_q);
                if (probes.rows() > 0) {
                    const std::vector<double> estimates = evaluate_batch(model, probes);
                    double worst = 0.0;
                    for (std::size_t i = 0; i < estimates.size(); ++i) {
                        const double truth =
                            true_beta(config.probe_points[i], mu_q, config.mu_p, config.var_p, config.var_q);
                        worst = std::max(worst, std::abs(truth - estimates[i]));
                    }
                    out.max_pointwise_error = worst;
                }
                if (!std::isfinite(*out.msd)) {
                    throw NumericalError("non-finite MSD");
                }
            } catch (const std::exception& e) {
                out.chosen_lambda.reset();
                out.msd.reset();
                out.max_pointwise_error.reset();
                out.error = e.what();
            }
        }
    });

    for (auto& cell : report.cells) {
        std::vector<double> values;
        for (const auto& rep : cell.replications) {
            if (rep.msd) {
                values.push_back(*rep.msd);
            } else {
                cell.complete = false;
            }
        }
        if (!values.empty()) {
            cell.msd_stats = box_stats(std::move(values));
        }
    }
    return report;
}

std::optional<double> fit_log_slope(std::span<const double> scales, std::span<const double> errors) {
    if (scales.size() != errors.size()) {
        throw InputError("slope fit needs equally many scales and errors");
    }
    if (scales.size() < 2) {
        return std::nullopt;
    }
    const auto count = static_cast<double>(scales.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0) || !(errors[i] > 0.0)) {
            throw InputError("slope fit needs positive scales and errors");
        }
        xs.push_back(std::log(scales[i]));
        ys.push_back(std::log(errors[i]));
        mean_x += xs.back();
        mean_y += ys.back();
    }
    mean_x /= count;
    mean_y /= count;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    if (sxx == 0.0) {
        return std::nullopt;
    }
    return sxy / sxx;
}

RateRecord run_rate_study(const RateConfig& config, unsigned threads) {
    if (config.n_list.empty()) {
        throw InputError("rate study needs at least one sample size");
    }
    for (std::size_t i = 1; i < config.n_list.size(); ++i) {
        if (config.n_list[i] <= config.n_list[i - 1]) {
            throw InputError("rate study sample sizes must be increasing");
        }
    }
    if (config.n_list.front() < 2 || config.replications < 1 || config.k < 1) {
        throw InputError("rate study needs n >= 2, replications >= 1 and k >= 1");
    }
    const double probe = config.probe.value_or(config.mu_q);
    const double probe_truth = true_beta(probe, config.mu_q, config.mu_p, config.var_p, config.var_q);
    const auto reps = static_cast<std::size_t>(config.replications);
    const std::size_t sizes = config.n_list.size();

    std::vector<double> pointwise(sizes * reps);
    std::vector<double> rn(sizes * reps);
    parallel_for(sizes * reps, threads, [&](std::size_t task) {
        const std::size_t s = task / reps;
        const std::size_t r = task % reps;
        const std::size_t n = config.n_list[s];
        const double lambda = lambda_mn(n, n, config.eta, config.varsigma);
        const std::uint64_t seed = derive_seed(config.seed, r, static_cast<double>(n));
        const DrawnPair pair = draw_pair(seed, n, n, config.mu_p, config.var_p, config.mu_q, config.var_q);
        const GramSystem gram = assemble_gram(config.kernel, pair.xp, pair.xq);
        const RatioModel model = fit_iterated_lavrentiev(gram, pair.xp, pair.xq, config.kernel, lambda, config.k);
        const double at_probe = evaluate(model, Point{&probe, 1});
        pointwise[task] = std::abs(probe_truth - at_probe);
        rn[task] = std::sqrt(msd(model, config.mu_q, config.mu_p, config.var_p, config.var_q));
    });

    RateRecord record;
    std::vector<double> scales;
    std::vector<double> pw_medians;
    std::vector<double> rn_medians;
    for (std::size_t s = 0; s < sizes; ++s) {
        const std::size_t n = config.n_list[s];
        const auto begin = static_cast<std::ptrdiff_t>(s * reps);
        const auto end = begin + static_cast<std::ptrdiff_t>(reps);
        RatePoint point;
        point.n = n;
        point.lambda = lambda_mn(n, n, config.eta, config.varsigma);
        point.median_pointwise_error = box_stats({pointwise.begin() + begin, pointwise.begin() + end}).median;
        point.median_rn_error = box_stats({rn.begin() + begin, rn.begin() + end}).median;
        record.points.push_back(point);
        scales.push_back(1.0 / std::sqrt(static_cast<double>(n)));
        pw_medians.push_back(point.median_pointwise_error);
        rn_medians.push_back(point.median_rn_error);
    }
    if (sizes < 2) {
        record.status = "insufficient points";
        return record;
    }
    record.pointwise_slope = fit_log_slope(scales, pw_medians);
    record.rn_slope = fit_log_slope(scales, rn_medians);
    record.status = "ok";
    return record;
}

}  // namespace rndiff
