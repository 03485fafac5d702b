#pragma once

// Result tables. Every writer produces the full file contents as a string so
// callers can hand it to write_file_atomic; every table has a matching parser.

#include "osub/io/config.hpp"
#include "osub/simulation.hpp"
#include "osub/two_stage.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace osub::io {

// scenario,estimating_model,r,smse,mean_model_info,failures
// estimating_model is written 1-based.
std::string metrics_csv(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> parse_metrics_csv(std::string_view text);

// seed,scenario,r,ssmse,failures
std::string ssmse_csv(std::uint64_t seed, const std::vector<SsmseRecord>& records);
std::vector<SsmseRecord> parse_ssmse_csv(std::string_view text, std::uint64_t* seed = nullptr);

struct FitRow {
    std::uint64_t seed = 0;
    std::string scenario;
    Index model = 0;  // 1-based as written
    std::string term;
    double estimate = 0.0;
    double std_error = 0.0;
    double model_information = 0.0;

    bool operator==(const FitRow&) const = default;
};

// seed,scenario,model,term,estimate,std_error,model_information
// One row per coefficient of every model. V~ estimates Var(theta~) directly,
// so std_error = sqrt(diag V~).
std::vector<FitRow> fit_rows(std::uint64_t seed, const std::string& scenario,
                             const TwoStageResult& result, const ModelSet& models,
                             const std::vector<std::string>& covariate_names);
std::string fits_csv(const std::vector<FitRow>& rows);
std::vector<FitRow> parse_fits_csv(std::string_view text);

// seed,scenario,row,phi   (row is 0-based into the dataset)
std::string probabilities_csv(std::uint64_t seed, const std::string& scenario,
                              const VectorXd& probs);

// key = value lines: tool version, command, effective seed, then the config
// exactly as given. Re-parseable by parse_metadata.
struct RunMetadata {
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> extra;  // run facts (stage seeds etc.)
    std::vector<std::pair<std::string, std::string>> config;
};
std::string metadata_text(const RunMetadata& meta);
RunMetadata parse_metadata(std::string_view text);

}  // namespace osub::io
