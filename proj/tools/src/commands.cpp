#include "rndiff_cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "json_config.hpp"
#include "rndiff/capacity.hpp"
#include "rndiff/error.hpp"
#include "rndiff/estimator.hpp"
#include "rndiff/experiment.hpp"
#include "rndiff/io.hpp"
#include "rndiff/regularization.hpp"
#include "rndiff/selection.hpp"

namespace rndiff::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct KernelFlags {
    std::string family{"gaussian_plus_one"};
    double bandwidth{1.0};
    double offset{1.0};

    void attach(CLI::App* cmd) {
        cmd->add_option("--kernel", family, "Kernel family")
            ->check(CLI::IsMember({"gaussian_plus_one", "gaussian"}));
        cmd->add_option("--bandwidth", bandwidth, "Gaussian bandwidth h in exp(-|x-y|^2/(2h^2))");
        cmd->add_option("--offset", offset, "Constant added to the gaussian_plus_one kernel");
    }

    [[nodiscard]] KernelSpec spec() const {
        if (family == "gaussian") return KernelSpec::gaussian(bandwidth);
        return KernelSpec::gaussian_plus_one(bandwidth, offset);
    }
};

struct GridFlags {
    double lambda0{0.9};
    double rho{LambdaGrid::default_rho()};
    int w{9};

    void attach(CLI::App* cmd) {
        cmd->add_option("--lambda0", lambda0, "Largest lambda of the geometric grid");
        cmd->add_option("--rho", rho, "Grid ratio lambda_i / lambda_{i-1}, (1/9)^(1/9) by default");
        cmd->add_option("--w", w, "Number of grid points below lambda0");
    }

    [[nodiscard]] LambdaGrid grid() const { return LambdaGrid(lambda0, rho, w); }
};

struct FitFlags {
    fs::path xp;
    fs::path xq;
    fs::path out;
    fs::path trace;
    std::string scheme{"iterated_lavrentiev"};
    int k{1};
    double lambda{0.0};
    CLI::Option* lambda_opt{nullptr};
    KernelFlags kernel;
    GridFlags grid;
};

struct EvaluateFlags {
    fs::path model;
    fs::path points;
    fs::path out;
};

struct SimulateFlags {
    fs::path out_dir;
    std::size_t n{100};
    std::size_t m{100};
    double mu_p{2.0};
    double var_p{5.0};
    std::vector<double> mu_q{2.0, 3.0, 4.0};
    double var_q{0.5};
    std::vector<int> k{1, 2, 3, 5, 10};
    int replications{20};
    std::uint64_t seed{20240101};
    std::vector<double> probe_grid;
    unsigned threads{0};
    KernelFlags kernel;
    GridFlags grid;
};

struct RatesFlags {
    std::vector<std::size_t> n_list{50, 100, 200, 400};
    double eta{1.0};
    double varsigma{0.5};
    int k{10};
    int replications{20};
    std::uint64_t seed{20240101};
    double mu_p{2.0};
    double var_p{5.0};
    double mu_q{2.0};
    double var_q{0.5};
    double probe{0.0};
    CLI::Option* probe_opt{nullptr};
    unsigned threads{0};
    fs::path out;
    KernelFlags kernel;
};

struct CapacityFlags {
    fs::path xp;
    fs::path out;
    int probes_per_axis{50};
    std::vector<double> bracket;
    KernelFlags kernel;
    GridFlags grid;
};

struct CheckFlags {
    std::string scheme{"iterated_lavrentiev"};
    int k{1};
    double lambda{0.1};
    double t_max{0.0};
    CLI::Option* t_max_opt{nullptr};
    int grid_size{4000};
    double qualification{0.0};
    CLI::Option* qualification_opt{nullptr};
    KernelFlags kernel;
};

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

void require_positive(double value, const std::string& flag) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InputError(flag + " must be positive and finite");
    }
}

RegScheme make_scheme(const std::string& name, double lambda, int k) {
    switch (scheme_kind_from_string(name)) {
        case SchemeKind::lavrentiev:
            return RegScheme::lavrentiev(lambda);
        case SchemeKind::iterated_lavrentiev:
            return RegScheme::iterated_lavrentiev(lambda, k);
        case SchemeKind::spectral_cutoff:
            return RegScheme::spectral_cutoff(lambda);
    }
    throw InputError("unknown scheme '" + name + "'");
}

void write_csv_stream(std::ostream& out, const CsvTable& table) {
    const auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            out << (i == 0 ? "" : ",") << fields[i];
        }
        out << '\n';
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
}

int cmd_fit(const FitFlags& f, std::ostream& out) {
    if (f.k < 1) throw InputError("--k must be at least 1");
    const SampleSet xp = read_samples_csv(f.xp, MeasureTag::p);
    const SampleSet xq = read_samples_csv(f.xq, MeasureTag::q);
    const KernelSpec kernel = f.kernel.spec();
    const bool lambda_given = f.lambda_opt->count() > 0;
    if (lambda_given) require_positive(f.lambda, "--lambda");
    const GramSystem gram = assemble_gram(kernel, xp, xq);

    double lambda = f.lambda;
    json summary;
    if (!lambda_given) {
        if (scheme_kind_from_string(f.scheme) == SchemeKind::spectral_cutoff) {
            throw InputError("--lambda is required for spectral_cutoff");
        }
        const int k = scheme_kind_from_string(f.scheme) == SchemeKind::lavrentiev ? 1 : f.k;
        const SelectionTrace trace = quasi_optimality(gram, xp, xq, kernel, k, f.grid.grid());
        lambda = trace.chosen_lambda;
        summary["selection"] = "quasi_optimality";
        summary["chosen_index"] = trace.chosen_index;
        if (!f.trace.empty()) write_json(f.trace, to_json(trace));
    } else {
        summary["selection"] = "fixed";
    }
    const RatioModel model = fit(gram, xp, xq, kernel, make_scheme(f.scheme, lambda, f.k));
    write_json(f.out, to_json(model));
    summary["lambda"] = lambda;
    summary["n"] = model.n();
    summary["m"] = model.m();
    summary["model"] = f.out.string();
    out << summary.dump() << '\n';
    return ok;
}

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
    const RatioModel model = model_from_json(read_json(f.model));
    const SampleSet points = read_samples_csv(f.points, MeasureTag::p);
    const std::vector<double> values = evaluate_batch(model, points.points());
    CsvTable table;
    for (std::size_t c = 0; c < points.dim(); ++c) table.header.push_back("x" + std::to_string(c));
    table.header.emplace_back("estimate");
    for (std::size_t r = 0; r < points.size(); ++r) {
        std::vector<std::string> row;
        for (double x : points.point(r)) row.push_back(format_real(x));
        row.push_back(format_real(values[r]));
        table.rows.push_back(std::move(row));
    }
    if (f.out.empty()) {
        write_csv_stream(out, table);
    } else {
        write_csv(f.out, table);
    }
    return ok;
}

std::vector<double> probe_points(const std::vector<double>& spec) {
    if (spec.empty()) return {};
    if (spec.size() != 3) throw InputError("--probe-grid takes exactly three values: lo hi count");
    const double lo = spec[0];
    const double hi = spec[1];
    const double count = spec[2];
    if (!(hi > lo) || count < 2.0 || count != std::floor(count)) {
        throw InputError("--probe-grid needs lo < hi and an integer count >= 2");
    }
    std::vector<double> points;
    const auto c = static_cast<int>(count);
    for (int i = 0; i < c; ++i) points.push_back(lo + (hi - lo) * i / (c - 1));
    return points;
}

void print_comparison(std::ostream& out, const ExperimentReport& report) {
    const std::vector<int>& ks = report.config.k_list;
    out << "median MSD by mu_q and k (nearest-rank)\n";
    out << std::setw(8) << "mu_q";
    for (int k : ks) out << std::setw(14) << ("k=" + std::to_string(k));
    out << std::setw(18) << "k>1 <= k=1" << '\n';
    for (double mu_q : report.config.mu_q_list) {
        out << std::setw(8) << mu_q;
        std::optional<double> base;
        bool ordered = true;
        bool comparable = false;
        for (int k : ks) {
            const CellReport& cell = report.cell(mu_q, k);
            if (!cell.msd_stats) {
                out << std::setw(14) << "n/a";
                continue;
            }
            out << std::setw(14) << std::setprecision(6) << cell.msd_stats->median;
            if (k == 1) base = cell.msd_stats->median;
        }
        if (base) {
            for (int k : ks) {
                const CellReport& cell = report.cell(mu_q, k);
                if (k == 1 || !cell.msd_stats) continue;
                comparable = true;
                ordered = ordered && cell.msd_stats->median <= *base;
            }
        }
        out << std::setw(18) << (comparable ? (ordered ? "yes" : "no") : "n/a") << '\n';
    }
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
    SimConfig config;
    config.n = f.n;
    config.m = f.m;
    config.mu_p = f.mu_p;
    config.var_p = f.var_p;
    config.mu_q_list = f.mu_q;
    config.var_q = f.var_q;
    config.k_list = f.k;
    config.replications = f.replications;
    config.seed = f.seed;
    config.grid = f.grid.grid();
    config.kernel = f.kernel.spec();
    config.probe_points = probe_points(f.probe_grid);
    config.validate();

    std::error_code ec;
    fs::create_directories(f.out_dir, ec);
    if (ec) throw IoError("cannot create " + f.out_dir.string() + ": " + ec.message());

    const ExperimentReport report = run_study(config, f.threads);
    write_json(f.out_dir / "report.json", to_json(report));
    write_csv(f.out_dir / "replications.csv", replication_table(report));
    write_csv(f.out_dir / "box_stats.csv", box_stats_table(report));
    print_comparison(out, report);
    for (const CellReport& cell : report.cells) {
        if (!cell.complete) {
            err << "warning: cell mu_q=" << cell.mu_q << " k=" << cell.k << " has failed replications\n";
        }
    }
    return ok;
}

int cmd_rates(const RatesFlags& f, std::ostream& out) {
    RateConfig config;
    config.n_list = f.n_list;
    config.eta = f.eta;
    config.varsigma = f.varsigma;
    config.k = f.k;
    config.replications = f.replications;
    config.seed = f.seed;
    config.mu_p = f.mu_p;
    config.var_p = f.var_p;
    config.mu_q = f.mu_q;
    config.var_q = f.var_q;
    if (f.probe_opt->count() > 0) config.probe = f.probe;
    config.kernel = f.kernel.spec();
    const json doc = to_json(run_rate_study(config, f.threads));
    if (f.out.empty()) {
        out << doc.dump(2) << '\n';
    } else {
        write_json(f.out, doc);
    }
    return ok;
}

int cmd_capacity(const CapacityFlags& f, std::ostream& out, std::ostream& err) {
    if (f.probes_per_axis < 1) throw InputError("--probes-per-axis must be at least 1");
    const SampleSet xp = read_samples_csv(f.xp, MeasureTag::p);
    // Capacity quantities depend on X_p alone; X_p doubles as the q-sample
    // only to complete the Gram system.
    const SampleSet as_q(xp.points(), MeasureTag::q);
    const KernelSpec kernel = f.kernel.spec();
    const GramSystem gram = assemble_gram(kernel, xp, as_q);
    const LambdaGrid grid = f.grid.grid();
    const CapacityProfile profile =
        capacity_profile(gram, kernel, xp, grid.with_predecessor(), default_probe_grid(xp, f.probes_per_axis));
    write_csv(f.out, capacity_table(profile));
    std::optional<double> lambda_star = profile.lambda_star;
    std::string reason = "the default search interval";
    if (!f.bracket.empty()) {
        if (f.bracket.size() != 2) throw InputError("--bracket takes exactly two values: lo hi");
        try {
            lambda_star = find_lambda_star(gram, std::pair{f.bracket[0], f.bracket[1]});
        } catch (const InputError& e) {
            lambda_star.reset();
            reason = e.what();
        }
    }
    json summary{{"rows", profile.lambdas.size()}, {"capacity", f.out.string()}};
    if (lambda_star) {
        summary["lambda_star"] = *lambda_star;
    } else {
        summary["lambda_star"] = nullptr;
        err << "warning: N(lambda)/lambda = n has no root in " << reason << "; lambda_star is undefined\n";
    }
    out << summary.dump() << '\n';
    return ok;
}

int cmd_check_schemes(const CheckFlags& f, std::ostream& out) {
    require_positive(f.lambda, "--lambda");
    const RegScheme scheme = make_scheme(f.scheme, f.lambda, f.k);
    double t_max = f.t_max;
    if (f.t_max_opt->count() > 0) {
        require_positive(t_max, "--t-max");
    } else {
        const double kappa = f.kernel.spec().bound();
        t_max = kappa * kappa;
    }
    std::optional<double> qualification;
    if (f.qualification_opt->count() > 0) {
        require_positive(f.qualification, "--qualification");
        qualification = f.qualification;
    }
    const SchemeCheckReport report = check_scheme_constants(scheme, t_max, f.grid_size, qualification);
    json doc = to_json(report);
    doc["scheme"] = to_json(scheme);
    out << doc.dump(2) << '\n';
    return report.all_hold() ? ok : scheme_check_failed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Radon-Nikodym derivative estimation with iterated Lavrentiev regularization", "rndiff"};
    app.option_defaults()->always_capture_default();
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file supplying flags, grouped by subcommand; command-line flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();
    app.get_formatter()->column_width(34);

    FitFlags fit_flags;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a density-ratio model from two sample CSV files");
    fit_cmd->add_option("--xp", fit_flags.xp, "CSV of samples from p (denominator)")->required();
    fit_cmd->add_option("--xq", fit_flags.xq, "CSV of samples from q (numerator)")->required();
    fit_cmd->add_option("--out", fit_flags.out, "Model JSON to write")->required();
    fit_cmd->add_option("--scheme", fit_flags.scheme, "Regularization scheme")
        ->check(CLI::IsMember({"iterated_lavrentiev", "lavrentiev", "spectral_cutoff"}));
    fit_cmd->add_option("--k", fit_flags.k, "Lavrentiev iterations (1 = KuLSIF)");
    fit_flags.lambda_opt = fit_cmd->add_option(
        "--lambda", fit_flags.lambda, "Regularization parameter; chosen by quasi-optimality on the grid if omitted");
    fit_cmd->add_option("--trace", fit_flags.trace, "Optional JSON file for the quasi-optimality trace");
    fit_flags.kernel.attach(fit_cmd);
    fit_flags.grid.attach(fit_cmd);

    EvaluateFlags eval_flags;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Evaluate a fitted model at the points of a CSV file");
    eval_cmd->add_option("--model", eval_flags.model, "Model JSON produced by fit")->required();
    eval_cmd->add_option("--points", eval_flags.points, "CSV of evaluation points")->required();
    eval_cmd->add_option("--out", eval_flags.out, "Output CSV (stdout if omitted)");

    SimulateFlags sim_flags;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the Gaussian simulation study");
    sim_cmd->add_option("--out-dir", sim_flags.out_dir, "Directory for report.json, replications.csv, box_stats.csv")
        ->required();
    sim_cmd->add_option("--n", sim_flags.n, "Size of the p-sample");
    sim_cmd->add_option("--m", sim_flags.m, "Size of the q-sample");
    sim_cmd->add_option("--mu-p", sim_flags.mu_p, "Mean of p");
    sim_cmd->add_option("--var-p", sim_flags.var_p, "Variance of p");
    sim_cmd->add_option("--mu-q", sim_flags.mu_q, "Means of q, one study arm each");
    sim_cmd->add_option("--var-q", sim_flags.var_q, "Variance of q");
    sim_cmd->add_option("--k", sim_flags.k, "Iteration counts to compare");
    sim_cmd->add_option("--replications", sim_flags.replications, "Replications per (mu_q, k) cell");
    sim_cmd->add_option("--seed", sim_flags.seed, "Base seed");
    sim_cmd->add_option("--probe-grid", sim_flags.probe_grid,
                        "lo hi count: also record max pointwise error on this grid")
        ->expected(3);
    sim_cmd->add_option("--threads", sim_flags.threads, "Worker threads (0 = all cores); results do not depend on it");
    sim_flags.kernel.attach(sim_cmd);
    sim_flags.grid.attach(sim_cmd);

    RatesFlags rate_flags;
    CLI::App* rate_cmd = app.add_subcommand("rates", "Error against n at the a-priori lambda_{m,n}");
    rate_cmd->add_option("--n-list", rate_flags.n_list, "Sample sizes (m = n)");
    rate_cmd->add_option("--eta", rate_flags.eta, "Source-condition exponent");
    rate_cmd->add_option("--varsigma", rate_flags.varsigma, "Capacity exponent in (0, 1/2]");
    rate_cmd->add_option("--k", rate_flags.k, "Lavrentiev iterations");
    rate_cmd->add_option("--replications", rate_flags.replications, "Replications per sample size");
    rate_cmd->add_option("--seed", rate_flags.seed, "Base seed");
    rate_cmd->add_option("--mu-p", rate_flags.mu_p, "Mean of p");
    rate_cmd->add_option("--var-p", rate_flags.var_p, "Variance of p");
    rate_cmd->add_option("--mu-q", rate_flags.mu_q, "Mean of q");
    rate_cmd->add_option("--var-q", rate_flags.var_q, "Variance of q");
    rate_flags.probe_opt = rate_cmd->add_option("--probe", rate_flags.probe, "Pointwise-error location (default mu_q)");
    rate_cmd->add_option("--threads", rate_flags.threads, "Worker threads (0 = all cores)");
    rate_cmd->add_option("--out", rate_flags.out, "Output JSON (stdout if omitted)");
    rate_flags.kernel.attach(rate_cmd);

    CapacityFlags cap_flags;
    CLI::App* cap_cmd = app.add_subcommand("capacity", "Effective dimension, N_inf and lambda_* of a p-sample");
    cap_cmd->add_option("--xp", cap_flags.xp, "CSV of samples from p")->required();
    cap_cmd->add_option("--out", cap_flags.out, "CSV with columns lambda, n_eff, n_inf")->required();
    cap_cmd->add_option("--probes-per-axis", cap_flags.probes_per_axis, "Probe grid resolution for N_inf");
    cap_cmd->add_option("--bracket", cap_flags.bracket, "lo hi: search interval for lambda_* (default 1e-8, kappa_0^2)")
        ->expected(2);
    cap_flags.kernel.attach(cap_cmd);
    cap_flags.grid.attach(cap_cmd);

    CheckFlags check_flags;
    CLI::App* check_cmd =
        app.add_subcommand("check-schemes", "Verify the filter constant and qualification bounds on a grid");
    check_cmd->add_option("--scheme", check_flags.scheme, "Regularization scheme")
        ->check(CLI::IsMember({"iterated_lavrentiev", "lavrentiev", "spectral_cutoff"}));
    check_cmd->add_option("--k", check_flags.k, "Lavrentiev iterations");
    check_cmd->add_option("--lambda", check_flags.lambda, "Regularization parameter");
    check_flags.t_max_opt =
        check_cmd->add_option("--t-max", check_flags.t_max, "Upper end of the spectrum grid (default kappa_0^2)");
    check_cmd->add_option("--grid-size", check_flags.grid_size, "Number of log-spaced grid points");
    check_flags.qualification_opt = check_cmd->add_option(
        "--qualification", check_flags.qualification, "Exponent s to test (default: the scheme's qualification)");
    check_flags.kernel.attach(check_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::FileError& e) {
        print_error(err, "io", e.what());
        return io_failure;
    } catch (const CLI::ParseError& e) {
        print_error(err, "validation", e.what());
        return validation_failure;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit_flags, out);
        if (*eval_cmd) return cmd_evaluate(eval_flags, out);
        if (*sim_cmd) return cmd_simulate(sim_flags, out, err);
        if (*rate_cmd) return cmd_rates(rate_flags, out);
        if (*cap_cmd) return cmd_capacity(cap_flags, out, err);
        if (*check_cmd) return cmd_check_schemes(check_flags, out);
    } catch (const IoError& e) {
        print_error(err, "io", e.what());
        return io_failure;
    } catch (const InputError& e) {
        print_error(err, "validation", e.what());
        return validation_failure;
    } catch (const NumericalError& e) {
        print_error(err, "numerical", e.what());
        return numerical_failure;
    } catch (const std::exception& e) {
        print_error(err, "internal", e.what());
        return internal_failure;
    }
    print_error(err, "validation", "no subcommand given");
    return validation_failure;
}

}  // namespace rndiff::cli
