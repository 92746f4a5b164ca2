#include "rndiff/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rndiff/error.hpp"

namespace rndiff {

using nlohmann::json;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_real(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) {
        return false;
    }
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (*begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

double real_field(const std::string& text, const std::string& what) {
    double value = 0.0;
    if (!parse_real(text, value)) {
        throw InputError("cannot parse '" + text + "' as a number in " + what);
    }
    return value;
}

json points_to_json(const PointMatrix& points) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            row.push_back(points(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

PointMatrix points_from_json(const json& rows) {
    if (!rows.is_array()) {
        throw InputError("points must be an array of arrays");
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index d = n > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
    PointMatrix points(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const json& row = rows.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
            throw InputError("points have inconsistent dimensions");
        }
        for (Eigen::Index c = 0; c < d; ++c) {
            points(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return points;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& doc) {
    const auto values = doc.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <class T>
json optional_to_json(const std::optional<T>& value) {
    return value ? json(*value) : json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) {
        return std::nullopt;
    }
    return doc.at(key).get<T>();
}

// Wraps nlohmann exceptions so malformed documents surface as input errors.
template <class Fn>
auto guarded(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

std::string format_real(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        for (auto& f : fields) {
            f = trim(f);
        }
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    const auto write_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << row[i];
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) {
        write_row(row);
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

SampleSet read_samples_csv(const std::filesystem::path& path, MeasureTag tag) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& f : fields) {
            double v = 0.0;
            if (!parse_real(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw InputError("non-numeric row in " + path.string() + ": '" + line + "'");
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InputError("rows of " + path.string() + " differ in length");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw InputError("sample file " + path.string() + " contains no points");
    }
    PointMatrix points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return SampleSet(std::move(points), tag);
}

void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples) {
    CsvTable table;
    for (std::size_t c = 0; c < samples.dim(); ++c) {
        table.header.push_back("x" + std::to_string(c));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::vector<std::string> row;
        for (const double v : samples.point(i)) {
            row.push_back(format_real(v));
        }
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::string to_string(MeasureTag tag) { return tag == MeasureTag::p ? "p" : "q"; }

MeasureTag measure_tag_from_string(const std::string& name) {
    if (name == "p") return MeasureTag::p;
    if (name == "q") return MeasureTag::q;
    throw InputError("measure tag must be 'p' or 'q', got '" + name + "'");
}

json to_json(const SampleSet& samples) {
    return {{"points", points_to_json(samples.points())},
            {"measure_tag", to_string(samples.tag())},
            {"seed", optional_to_json(samples.seed())}};
}

SampleSet sample_set_from_json(const json& doc) {
    return guarded("sample set", [&] {
        return SampleSet(points_from_json(doc.at("points")),
                         measure_tag_from_string(doc.at("measure_tag").get<std::string>()),
                         optional_from_json<std::uint64_t>(doc, "seed"));
    });
}

json to_json(const KernelSpec& kernel) {
    switch (kernel.family()) {
        case KernelFamily::gaussian_plus_one:
            return {{"family", "gaussian_plus_one"}, {"bandwidth", kernel.bandwidth()}, {"offset", kernel.offset()}};
        case KernelFamily::gaussian:
            return {{"family", "gaussian"}, {"bandwidth", kernel.bandwidth()}, {"offset", 0.0}};
        case KernelFamily::custom_ref:
            break;
    }
    throw InputError("custom kernels cannot be serialized");
}

KernelSpec kernel_from_json(const json& doc) {
    return guarded("kernel", [&] {
        const auto family = doc.at("family").get<std::string>();
        const double bandwidth = doc.value("bandwidth", 1.0);
        if (family == "gaussian_plus_one") {
            return KernelSpec::gaussian_plus_one(bandwidth, doc.value("offset", 1.0));
        }
        if (family == "gaussian") {
            return KernelSpec::gaussian(bandwidth);
        }
        throw InputError("unsupported kernel family '" + family + "'");
    });
}

json to_json(const RegScheme& scheme) {
    return {{"kind", to_string(scheme.kind())}, {"k", scheme.iterations()}, {"lambda", scheme.lambda()}};
}

RegScheme scheme_from_json(const json& doc) {
    return guarded("scheme", [&] {
        const SchemeKind kind = scheme_kind_from_string(doc.at("kind").get<std::string>());
        const double lambda = doc.at("lambda").get<double>();
        switch (kind) {
            case SchemeKind::lavrentiev:
                return RegScheme::lavrentiev(lambda);
            case SchemeKind::iterated_lavrentiev:
                return RegScheme::iterated_lavrentiev(lambda, doc.at("k").get<int>());
            case SchemeKind::spectral_cutoff:
                return RegScheme::spectral_cutoff(lambda);
        }
        throw InputError("unsupported scheme");
    });
}

json to_json(const RatioModel& model) {
    return {{"kernel", to_json(model.kernel)},
            {"scheme", to_json(model.scheme)},
            {"xp_points", points_to_json(model.xp_points)},
            {"xq_points", points_to_json(model.xq_points)},
            {"alpha", vector_to_json(model.alpha)},
            {"mu_coeff", model.mu_coeff},
            {"values_at_xp", vector_to_json(model.values_at_xp)}};
}

RatioModel model_from_json(const json& doc) {
    return guarded("model", [&] {
        RatioModel model{kernel_from_json(doc.at("kernel")),
                         scheme_from_json(doc.at("scheme")),
                         points_from_json(doc.at("xp_points")),
                         points_from_json(doc.at("xq_points")),
                         vector_from_json(doc.at("alpha")),
                         doc.at("mu_coeff").get<double>(),
                         vector_from_json(doc.at("values_at_xp"))};
        if (model.xp_points.rows() == 0 || model.xq_points.rows() == 0) {
            throw InputError("model has empty sample sets");
        }
        if (model.xp_points.cols() != model.xq_points.cols()) {
            throw InputError("model sample sets differ in dimension");
        }
        if (model.alpha.size() != model.xp_points.rows() || model.values_at_xp.size() != model.xp_points.rows()) {
            throw InputError("model coefficient vectors do not match X_p");
        }
        return model;
    });
}

json to_json(const LambdaGrid& grid) {
    return {{"lambda_0", grid.lambda_0()}, {"rho", grid.rho()}, {"w", grid.w()}, {"values", grid.values()}};
}

LambdaGrid lambda_grid_from_json(const json& doc) {
    return guarded("lambda grid", [&] {
        return LambdaGrid(doc.value("lambda_0", 0.9), doc.value("rho", LambdaGrid::default_rho()), doc.value("w", 9));
    });
}

json to_json(const SelectionTrace& trace) {
    json doc{{"grid", to_json(trace.grid)},
             {"diffs", trace.diffs},
             {"chosen_index", trace.chosen_index},
             {"chosen_lambda", trace.chosen_lambda}};
    if (!trace.models.empty()) {
        json fits = json::array();
        for (const auto& model : trace.models) {
            fits.push_back({{"lambda", model.scheme.lambda()}, {"values_at_xp", vector_to_json(model.values_at_xp)}});
        }
        doc["fits"] = std::move(fits);
    }
    return doc;
}

CsvTable capacity_table(const CapacityProfile& profile) {
    CsvTable table{{"lambda", "n_eff", "n_inf"}, {}};
    for (std::size_t i = 0; i < profile.lambdas.size(); ++i) {
        table.rows.push_back(
            {format_real(profile.lambdas[i]), format_real(profile.n_eff[i]), format_real(profile.n_inf[i])});
    }
    return table;
}

CapacityProfile capacity_from_table(const CsvTable& table) {
    if (table.header != std::vector<std::string>{"lambda", "n_eff", "n_inf"}) {
        throw InputError("capacity table must have columns lambda,n_eff,n_inf");
    }
    CapacityProfile profile;
    for (const auto& row : table.rows) {
        if (row.size() != 3) {
            throw InputError("capacity rows need three fields");
        }
        profile.lambdas.push_back(real_field(row[0], "capacity table"));
        profile.n_eff.push_back(real_field(row[1], "capacity table"));
        profile.n_inf.push_back(real_field(row[2], "capacity table"));
    }
    return profile;
}

json to_json(const SimConfig& config) {
    return {{"n", config.n},
            {"m", config.m},
            {"mu_p", config.mu_p},
            {"var_p", config.var_p},
            {"mu_q_list", config.mu_q_list},
            {"var_q", config.var_q},
            {"k_list", config.k_list},
            {"replications", config.replications},
            {"grid", to_json(config.grid)},
            {"seed", config.seed},
            {"kernel", to_json(config.kernel)},
            {"probe_points", config.probe_points}};
}

SimConfig sim_config_from_json(const json& doc) {
    return guarded("simulation config", [&] {
        SimConfig config;
        config.n = doc.value("n", config.n);
        config.m = doc.value("m", config.m);
        config.mu_p = doc.value("mu_p", config.mu_p);
        config.var_p = doc.value("var_p", config.var_p);
        config.mu_q_list = doc.value("mu_q_list", config.mu_q_list);
        config.var_q = doc.value("var_q", config.var_q);
        config.k_list = doc.value("k_list", config.k_list);
        config.replications = doc.value("replications", config.replications);
        if (doc.contains("grid")) {
            config.grid = lambda_grid_from_json(doc.at("grid"));
        }
        config.seed = doc.value("seed", config.seed);
        if (doc.contains("kernel")) {
            config.kernel = kernel_from_json(doc.at("kernel"));
        }
        config.probe_points = doc.value("probe_points", config.probe_points);
        config.validate();
        return config;
    });
}

json to_json(const ExperimentReport& report) {
    json cells = json::array();
    for (const auto& cell : report.cells) {
        json reps = json::array();
        for (const auto& rep : cell.replications) {
            reps.push_back({{"replication", rep.replication},
                            {"seed", rep.seed},
                            {"chosen_lambda", optional_to_json(rep.chosen_lambda)},
                            {"msd", optional_to_json(rep.msd)},
                            {"max_pointwise_error", optional_to_json(rep.max_pointwise_error)},
                            {"error", optional_to_json(rep.error)}});
        }
        json stats = nullptr;
        if (cell.msd_stats) {
            const BoxStats& b = *cell.msd_stats;
            stats = {{"count", b.count}, {"min", b.min},       {"q1", b.q1},
                     {"median", b.median}, {"q3", b.q3}, {"max", b.max}};
        }
        cells.push_back({{"mu_q", cell.mu_q},
                         {"k", cell.k},
                         {"complete", cell.complete},
                         {"msd_stats", std::move(stats)},
                         {"replications", std::move(reps)}});
    }
    return {{"config", to_json(report.config)}, {"quantile_convention", "nearest-rank"}, {"cells", std::move(cells)}};
}

ExperimentReport report_from_json(const json& doc) {
    return guarded("experiment report", [&] {
        ExperimentReport report{sim_config_from_json(doc.at("config")), {}};
        for (const auto& c : doc.at("cells")) {
            CellReport cell;
            cell.mu_q = c.at("mu_q").get<double>();
            cell.k = c.at("k").get<int>();
            cell.complete = c.at("complete").get<bool>();
            for (const auto& r : c.at("replications")) {
                ReplicationResult rep;
                rep.replication = r.at("replication").get<int>();
                rep.seed = r.at("seed").get<std::uint64_t>();
                rep.chosen_lambda = optional_from_json<double>(r, "chosen_lambda");
                rep.msd = optional_from_json<double>(r, "msd");
                rep.max_pointwise_error = optional_from_json<double>(r, "max_pointwise_error");
                rep.error = optional_from_json<std::string>(r, "error");
                cell.replications.push_back(std::move(rep));
            }
            if (!c.at("msd_stats").is_null()) {
                const json& s = c.at("msd_stats");
                cell.msd_stats = BoxStats{s.at("count").get<std::size_t>(), s.at("min").get<double>(),
                                          s.at("q1").get<double>(),         s.at("median").get<double>(),
                                          s.at("q3").get<double>(),         s.at("max").get<double>()};
            }
            report.cells.push_back(std::move(cell));
        }
        return report;
    });
}

CsvTable replication_table(const ExperimentReport& report) {
    CsvTable table{{"mu_q", "k", "replication", "chosen_lambda", "msd"}, {}};
    for (const auto& cell : report.cells) {
        for (const auto& rep : cell.replications) {
            table.rows.push_back({format_real(cell.mu_q), std::to_string(cell.k), std::to_string(rep.replication),
                                  rep.chosen_lambda ? format_real(*rep.chosen_lambda) : "",
                                  rep.msd ? format_real(*rep.msd) : ""});
        }
    }
    return table;
}

CsvTable box_stats_table(const ExperimentReport& report) {
    CsvTable table{{"mu_q", "k", "count", "min", "q1", "median", "q3", "max"}, {}};
    for (const auto& cell : report.cells) {
        if (!cell.msd_stats) {
            table.rows.push_back({format_real(cell.mu_q), std::to_string(cell.k), "0", "", "", "", "", ""});
            continue;
        }
        const BoxStats& b = *cell.msd_stats;
        table.rows.push_back({format_real(cell.mu_q), std::to_string(cell.k), std::to_string(b.count),
                              format_real(b.min), format_real(b.q1), format_real(b.median), format_real(b.q3),
                              format_real(b.max)});
    }
    return table;
}

json to_json(const RateRecord& record) {
    json points = json::array();
    for (const auto& p : record.points) {
        points.push_back({{"n", p.n},
                          {"lambda", p.lambda},
                          {"median_pointwise_error", p.median_pointwise_error},
                          {"median_rn_error", p.median_rn_error}});
    }
    return {{"points", std::move(points)},
            {"pointwise_slope", optional_to_json(record.pointwise_slope)},
            {"rn_slope", optional_to_json(record.rn_slope)},
            {"status", record.status}};
}

json to_json(const SchemeCheckReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"bound", c.bound},
                          {"max_value", c.max_value},
                          {"worst_t", c.worst_t},
                          {"slack", c.slack()},
                          {"holds", c.holds}});
    }
    return {{"t_max", report.t_max},
            {"qualification_checked", report.qualification_checked},
            {"all_hold", report.all_hold()},
            {"checks", std::move(checks)}};
}

}  // namespace rndiff
