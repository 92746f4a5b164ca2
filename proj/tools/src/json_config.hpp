#pragma once

#include <CLI11.hpp>

namespace rndiff::cli {

/// CLI11 config reader for JSON files. Top-level keys are either options of
/// the root command or subcommand names whose objects hold that subcommand's
/// options:
///
///   {"simulate": {"replications": 40, "mu-q": [2, 3]}}
///
/// Anything given on the command line wins over the file.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                          std::string prefix) const override;
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

}  // namespace rndiff::cli
