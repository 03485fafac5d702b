#pragma once

// Run configuration: a line-oriented `key = value` text file. `#` starts a
// comment; lists are comma separated; matrix rows are separated by `;`.
// The full key reference lives in README.md.

#include "osub/io/dataset.hpp"
#include "osub/model_set.hpp"
#include "osub/simulation.hpp"
#include "osub/two_stage.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace osub::io {

enum class Mode { Simulate, Real };

struct RunConfig {
    Mode mode = Mode::Simulate;
    Family family = Family::Logistic;
    Optimality criterion = Optimality::mMSE;
    std::uint64_t seed = 1;
    double eps = 1e-6;
    Index r0 = 100;
    std::vector<Index> r_grid;
    Index M = 1000;
    Index r = 0;  // single-run subsample size; defaults to the last r_grid entry
    SamplingMode sampling = SamplingMode::model_robust();
    bool write_probabilities = false;

    ModelSet models;
    std::vector<std::string> covariate_names;

    // simulate mode
    CovariateDistribution covariates = NormalCovariates{};
    Index N = 10000;
    Index true_model = 0;
    VectorXd true_theta;

    // real mode
    DatasetDescriptor dataset;

    // Keys exactly as given, in file order, for echoing into run metadata.
    std::vector<std::pair<std::string, std::string>> entries;

    ScenarioConfig scenario_config() const;
    RealDataStudyConfig real_data_config() const;
};

// Throws ConfigError (with the key path) for unknown keys, malformed values
// and invariant violations. Relative dataset paths resolve against base_dir.
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path);

std::string sampling_label(const SamplingMode& mode);
SamplingMode parse_sampling(std::string_view text);

}  // namespace osub::io
