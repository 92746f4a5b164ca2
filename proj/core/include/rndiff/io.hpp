#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rndiff/capacity.hpp"
#include "rndiff/estimator.hpp"
#include "rndiff/experiment.hpp"
#include "rndiff/kernel.hpp"
#include "rndiff/regularization.hpp"
#include "rndiff/selection.hpp"

namespace rndiff {

// CSV dialect everywhere: comma separated, '.' decimal point, one header row,
// LF line endings. Reals are written with 17 significant digits so that
// reading them back is exact.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
[[nodiscard]] std::string format_real(double value);

/// One point per row, one column per coordinate. A leading non-numeric row
/// is treated as a header. An empty file is an InputError.
[[nodiscard]] SampleSet read_samples_csv(const std::filesystem::path& path, MeasureTag tag);
void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples);

/// Reads and writes whole documents; IoError on file problems, InputError on
/// malformed content.
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

[[nodiscard]] std::string to_string(MeasureTag tag);
[[nodiscard]] MeasureTag measure_tag_from_string(const std::string& name);

/// {points, measure_tag, seed}
[[nodiscard]] nlohmann::json to_json(const SampleSet& samples);
[[nodiscard]] SampleSet sample_set_from_json(const nlohmann::json& doc);

/// {family, bandwidth, offset}; custom kernels are not serializable.
[[nodiscard]] nlohmann::json to_json(const KernelSpec& kernel);
[[nodiscard]] KernelSpec kernel_from_json(const nlohmann::json& doc);

/// {kind, k, lambda}
[[nodiscard]] nlohmann::json to_json(const RegScheme& scheme);
[[nodiscard]] RegScheme scheme_from_json(const nlohmann::json& doc);

/// {kernel, scheme, xp_points, xq_points, alpha, mu_coeff, values_at_xp}
[[nodiscard]] nlohmann::json to_json(const RatioModel& model);
[[nodiscard]] RatioModel model_from_json(const nlohmann::json& doc);

[[nodiscard]] nlohmann::json to_json(const LambdaGrid& grid);
[[nodiscard]] LambdaGrid lambda_grid_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json to_json(const SelectionTrace& trace);

/// Columns lambda, n_eff, n_inf.
[[nodiscard]] CsvTable capacity_table(const CapacityProfile& profile);
[[nodiscard]] CapacityProfile capacity_from_table(const CsvTable& table);

[[nodiscard]] nlohmann::json to_json(const SimConfig& config);
[[nodiscard]] SimConfig sim_config_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json to_json(const ExperimentReport& report);
[[nodiscard]] ExperimentReport report_from_json(const nlohmann::json& doc);
/// One row per (mu_q, k, replication): mu_q, k, replication, chosen_lambda, msd.
[[nodiscard]] CsvTable replication_table(const ExperimentReport& report);
/// One row per (mu_q, k): mu_q, k, count, min, q1, median, q3, max.
[[nodiscard]] CsvTable box_stats_table(const ExperimentReport& report);

[[nodiscard]] nlohmann::json to_json(const RateRecord& record);

[[nodiscard]] nlohmann::json to_json(const SchemeCheckReport& report);

}  // namespace rndiff
