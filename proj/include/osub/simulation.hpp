#pragma once

// Synthetic data generation, Monte Carlo comparison of subsampling
// strategies, and the SMSE / SSMSE / model-information metrics.

#include "osub/glm.hpp"
#include "osub/model_set.hpp"
#include "osub/rng.hpp"
#include "osub/sampling.hpp"
#include "osub/two_stage.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace osub {

struct ExponentialCovariates {
    double rate = 1.0;
    Index dim = 1;
};

struct NormalCovariates {
    VectorXd mean;
    MatrixXd cov;
};

struct UniformCovariates {
    Index dim = 1;
};

using CovariateDistribution =
    std::variant<ExponentialCovariates, NormalCovariates, UniformCovariates>;

Index dimension(const CovariateDistribution& dist);
void validate(const CovariateDistribution& dist);

MatrixXd gen_covariates(const CovariateDistribution& dist, Index n, RngStream& rng);
VectorXd gen_response(Family family, const VectorXd& theta, const MatrixXd& design,
                      RngStream& rng);

// (1/M) sum_m ||estimate_m - truth||^2, estimates one per row.
double smse(const MatrixXd& estimates, const VectorXd& truth);
// sum_q smse(estimates_q, full_data_mle_q)
double ssmse(std::span<const MatrixXd> per_model_estimates,
             std::span<const VectorXd> full_data_mle);
// det(V~^{-1}) from a Cholesky factorisation of V~. Throws SingularInformation.
double model_information(const FitResult& fit);

// Scenario label: Random, Optimal(q) or ModelRobust. `model` is 0-based and
// printed 1-based.
struct Scenario {
    enum class Kind { Random, Optimal, ModelRobust };
    Kind kind = Kind::Random;
    Index model = 0;

    std::string label() const;
    static Scenario parse(const std::string& label);
    bool operator==(const Scenario&) const = default;
    // Random < Optimal(1) < ... < Optimal(Q) < ModelRobust
    bool operator<(const Scenario& o) const;
};

std::vector<Scenario> all_scenarios(Index model_count);

TwoStageResult run_scenario(const Scenario& scenario, Family family, const PreparedData& data,
                            Index r0, Index r, const RngStream& rng,
                            const TwoStageOptions& options);

struct ScenarioConfig {
    Family family = Family::Logistic;
    CovariateDistribution covariates = NormalCovariates{};
    ModelSet model_set;
    Index true_model = 0;
    VectorXd true_theta;
    Index N = 10000;
    Index r0 = 100;
    std::vector<Index> r_grid;
    Index M = 1000;
    double eps = 1e-6;
    std::uint64_t master_seed = 0;
    Optimality criterion = Optimality::mMSE;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

struct MetricsRecord {
    Scenario scenario;
    Index estimating_model = 0;  // 0-based
    Index r = 0;
    double smse = 0.0;
    double mean_model_information = 0.0;
    Index n_failed_replicates = 0;

    bool operator==(const MetricsRecord&) const = default;
};

struct StudyOptions {
    unsigned threads = 1;
};

// Regenerates the full data per replicate, runs every scenario for every r,
// and aggregates SMSE of the data-generating model's estimates against the
// true theta plus the mean over models of det(V~_q^{-1}). Output is sorted by
// (scenario, r) and depends only on the config.
std::vector<MetricsRecord> run_study(const ScenarioConfig& config,
                                     const StudyOptions& options = {});

// Fixed data (e.g. a loaded CSV), repeated subsampling compared against the
// full-data MLE of every model.
struct RealDataStudyConfig {
    Family family = Family::Logistic;
    Index r0 = 100;
    std::vector<Index> r_grid;
    Index M = 100;
    double eps = 1e-6;
    std::uint64_t master_seed = 0;
    Optimality criterion = Optimality::mMSE;
};

struct SsmseRecord {
    Scenario scenario;
    Index r = 0;
    double ssmse = 0.0;
    Index n_failed_replicates = 0;

    bool operator==(const SsmseRecord&) const = default;
};

// Full-data MLE of every model in the set (fit with probabilities 1/N).
std::vector<VectorXd> full_data_mles(Family family, const PreparedData& data,
                                     const FitOptions& options = {});

std::vector<SsmseRecord> run_ssmse_study(const RealDataStudyConfig& config,
                                         const PreparedData& data,
                                         const StudyOptions& options = {});

// Calls body(i) for i in [0, count) on up to `threads` threads. Exceptions
// escaping body are rethrown on the calling thread.
template <class Body>
void parallel_for(Index count, unsigned threads, Body&& body);

}  // namespace osub

#include "osub/detail/parallel.hpp"
