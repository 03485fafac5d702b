#include "osub/simulation.hpp"

#include "osub/errors.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace osub {

namespace {

constexpr std::uint64_t kDataTag = 0;
constexpr std::uint64_t kScenarioTag = 1;
constexpr std::uint64_t kCovariateTag = 1;
constexpr std::uint64_t kResponseTag = 2;

std::uint64_t scenario_code(const Scenario& s) {
    return static_cast<std::uint64_t>(s.kind) * 100000ULL + static_cast<std::uint64_t>(s.model);
}

struct ReplicateOutcome {
    std::vector<VectorXd> thetas;  // per model
    double mean_information = 0.0;
};

std::optional<ReplicateOutcome> try_scenario(const Scenario& scenario, Family family,
                                             const PreparedData& data, Index r0, Index r,
                                             const RngStream& rng,
                                             const TwoStageOptions& options) {
    try {
        const TwoStageResult res = run_scenario(scenario, family, data, r0, r, rng, options);
        ReplicateOutcome out;
        double info = 0.0;
        for (const auto& fit : res.fits) {
            out.thetas.push_back(fit.theta);
            info += model_information(fit);
        }
        out.mean_information = info / static_cast<double>(res.fits.size());
        return out;
    } catch (const ValidationError&) {
        throw;
    } catch (const Error&) {
        return std::nullopt;
    }
}

MatrixXd stack_rows(const std::vector<VectorXd>& rows, Index width) {
    MatrixXd m(static_cast<Index>(rows.size()), width);
    for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = rows[i].transpose();
    return m;
}

}  // namespace

Index dimension(const CovariateDistribution& dist) {
    return std::visit(
        [](const auto& d) -> Index {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, NormalCovariates>) {
                return d.mean.size();
            } else {
                return d.dim;
            }
        },
        dist);
}

void validate(const CovariateDistribution& dist) {
    if (const auto* e = std::get_if<ExponentialCovariates>(&dist)) {
        if (!(e->rate > 0.0)) throw ValidationError("exponential rate must be positive");
        if (e->dim < 1) throw ValidationError("covariate dimension must be positive");
    } else if (const auto* n = std::get_if<NormalCovariates>(&dist)) {
        if (n->mean.size() < 1 || n->cov.rows() != n->mean.size() ||
            n->cov.cols() != n->mean.size()) {
            throw ValidationError("normal covariates need a mean vector and a matching square "
                                  "covariance");
        }
        if (!n->cov.isApprox(n->cov.transpose())) {
            throw ValidationError("covariance matrix is not symmetric");
        }
        Eigen::LLT<MatrixXd> llt(n->cov);
        if (llt.info() != Eigen::Success) {
            throw ValidationError("Cholesky factorisation failed: covariance is not positive "
                                  "definite");
        }
    } else if (std::get<UniformCovariates>(dist).dim < 1) {
        throw ValidationError("covariate dimension must be positive");
    }
}

MatrixXd gen_covariates(const CovariateDistribution& dist, Index n, RngStream& rng) {
    if (n < 1) throw ValidationError("number of rows must be positive");
    validate(dist);
    const Index p = dimension(dist);
    MatrixXd x(n, p);
    if (const auto* e = std::get_if<ExponentialCovariates>(&dist)) {
        std::exponential_distribution<double> draw(e->rate);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < p; ++j) x(i, j) = draw(rng.engine());
        }
    } else if (const auto* nc = std::get_if<NormalCovariates>(&dist)) {
        const MatrixXd lower = Eigen::LLT<MatrixXd>(nc->cov).matrixL();
        std::normal_distribution<double> draw(0.0, 1.0);
        VectorXd z(p);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < p; ++j) z[j] = draw(rng.engine());
            x.row(i) = (nc->mean + lower * z).transpose();
        }
    } else {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < p; ++j) x(i, j) = rng.uniform();
        }
    }
    return x;
}

VectorXd gen_response(Family family, const VectorXd& theta, const MatrixXd& design,
                      RngStream& rng) {
    if (theta.size() != design.cols()) {
        throw DimensionMismatch("theta length does not match the design width");
    }
    const VectorXd mu = eval_mean(family, design * theta);
    VectorXd y(mu.size());
    for (Index i = 0; i < mu.size(); ++i) {
        if (family == Family::Logistic) {
            y[i] = rng.uniform() < mu[i] ? 1.0 : 0.0;
        } else {
            std::poisson_distribution<long long> draw(mu[i]);
            y[i] = static_cast<double>(draw(rng.engine()));
        }
    }
    return y;
}

double smse(const MatrixXd& estimates, const VectorXd& truth) {
    if (estimates.cols() != truth.size()) {
        throw DimensionMismatch("estimate width does not match the parameter vector");
    }
    if (estimates.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
    return (estimates.rowwise() - truth.transpose()).squaredNorm() /
           static_cast<double>(estimates.rows());
}

double ssmse(std::span<const MatrixXd> per_model_estimates,
             std::span<const VectorXd> full_data_mle) {
    if (per_model_estimates.size() != full_data_mle.size()) {
        throw DimensionMismatch("need one full-data MLE per model");
    }
    double total = 0.0;
    for (size_t q = 0; q < full_data_mle.size(); ++q) {
        total += smse(per_model_estimates[q], full_data_mle[q]);
    }
    return total;
}

double model_information(const FitResult& fit) {
    Eigen::LLT<MatrixXd> llt(fit.variance);
    if (fit.variance.size() == 0 || llt.info() != Eigen::Success) {
        throw SingularInformation("estimated variance matrix is not positive definite");
    }
    // det(V) = prod(diag L)^2, so det(V^{-1}) = prod(1/diag L)^2.
    double log_det = 0.0;
    for (Index j = 0; j < fit.variance.rows(); ++j) {
        const double l = llt.matrixLLT()(j, j);
        if (!(l > 0.0)) throw SingularInformation("estimated variance matrix is singular");
        log_det += 2.0 * std::log(l);
    }
    return std::exp(-log_det);
}

std::string Scenario::label() const {
    switch (kind) {
        case Kind::Random: return "Random";
        case Kind::Optimal: return "Optimal(" + std::to_string(model + 1) + ")";
        case Kind::ModelRobust: return "ModelRobust";
    }
    return "unknown";
}

Scenario Scenario::parse(const std::string& label) {
    if (label == "Random") return {Kind::Random, 0};
    if (label == "ModelRobust") return {Kind::ModelRobust, 0};
    if (label.size() > 9 && label.rfind("Optimal(", 0) == 0 && label.back() == ')') {
        const std::string digits = label.substr(8, label.size() - 9);
        size_t used = 0;
        long long q = 0;
        try {
            q = std::stoll(digits, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == digits.size() && q >= 1) return {Kind::Optimal, static_cast<Index>(q - 1)};
    }
    throw ValidationError("unknown scenario label '" + label + "'");
}

bool Scenario::operator<(const Scenario& o) const {
    if (kind != o.kind) return static_cast<int>(kind) < static_cast<int>(o.kind);
    return model < o.model;
}

std::vector<Scenario> all_scenarios(Index model_count) {
    std::vector<Scenario> out{{Scenario::Kind::Random, 0}};
    for (Index q = 0; q < model_count; ++q) out.push_back({Scenario::Kind::Optimal, q});
    out.push_back({Scenario::Kind::ModelRobust, 0});
    return out;
}

TwoStageResult run_scenario(const Scenario& scenario, Family family, const PreparedData& data,
                            Index r0, Index r, const RngStream& rng,
                            const TwoStageOptions& options) {
    switch (scenario.kind) {
        case Scenario::Kind::Random:
            return random_sampling_baseline(family, data, r0, r, rng, options);
        case Scenario::Kind::Optimal:
            return two_stage(SamplingMode::single(scenario.model), family, data, r0, r, rng,
                             options);
        case Scenario::Kind::ModelRobust:
            return two_stage(SamplingMode::model_robust(), family, data, r0, r, rng, options);
    }
    throw ValidationError("unknown scenario");
}

void ScenarioConfig::validate() const {
    try {
        osub::validate(covariates);
    } catch (const ValidationError& e) {
        throw ConfigError("covariates", e.what());
    }
    if (model_set.size() < 1) throw ConfigError("models", "model set is empty");
    try {
        validate_alpha(model_set.alpha);
        for (const auto& spec : model_set.specs) {
            spec.validate();
            for (Index c : spec.main_effects) {
                if (c >= dimension(covariates)) {
                    throw ValidationError("model uses covariate " + std::to_string(c + 1) +
                                          " but only " + std::to_string(dimension(covariates)) +
                                          " are generated");
                }
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError("models", e.what());
    }
    if (true_model < 0 || true_model >= model_set.size()) {
        throw ConfigError("truth.model", "not an index into the model set");
    }
    if (true_theta.size() != model_set.specs[static_cast<size_t>(true_model)].width()) {
        throw ConfigError("truth.theta",
                          "has " + std::to_string(true_theta.size()) +
                              " entries but the data-generating model has " +
                              std::to_string(model_set.specs[static_cast<size_t>(true_model)]
                                                 .width()) +
                              " columns");
    }
    if (N < 1) throw ConfigError("N", "must be positive");
    if (M < 1) throw ConfigError("M", "must be at least 1");
    if (r0 < model_set.max_width() + 1) {
        throw ConfigError("r0", "must exceed the widest model (" +
                                    std::to_string(model_set.max_width()) + " columns)");
    }
    if (r_grid.empty()) throw ConfigError("r_grid", "is empty");
    for (size_t i = 0; i < r_grid.size(); ++i) {
        if (r_grid[i] < r0) throw ConfigError("r_grid", "every r must be at least r0");
        if (i > 0 && r_grid[i] <= r_grid[i - 1]) {
            throw ConfigError("r_grid", "must be strictly ascending");
        }
    }
    if (!(eps > 0.0)) throw ConfigError("eps", "must be positive");
}

std::vector<MetricsRecord> run_study(const ScenarioConfig& config, const StudyOptions& options) {
    config.validate();
    const std::vector<Scenario> scenarios = all_scenarios(config.model_set.size());
    const size_t n_r = config.r_grid.size();
    const size_t n_s = scenarios.size();
    TwoStageOptions two_stage_options;
    two_stage_options.criterion = config.criterion;
    two_stage_options.probability.eps = config.eps;

    // outcomes[m][ri * n_s + si]
    std::vector<std::vector<std::optional<ReplicateOutcome>>> outcomes(
        static_cast<size_t>(config.M));

    parallel_for(config.M, options.threads, [&](Index m) {
        auto& slot = outcomes[static_cast<size_t>(m)];
        slot.resize(n_r * n_s);
        const RngStream data_stream =
            RngStream::derive(config.master_seed, {static_cast<std::uint64_t>(m), kDataTag});
        RngStream cov_stream = data_stream.child(kCovariateTag);
        RngStream resp_stream = data_stream.child(kResponseTag);
        MatrixXd raw = gen_covariates(config.covariates, config.N, cov_stream);
        const MatrixXd truth_design =
            build_design(config.model_set.specs[static_cast<size_t>(config.true_model)], raw);
        VectorXd y = gen_response(config.family, config.true_theta, truth_design, resp_stream);
        PreparedData data;
        try {
            data = PreparedData::make(std::move(raw), std::move(y), config.model_set);
            initial_probabilities(config.family, data.y);
        } catch (const ValidationError&) {
            return;  // degenerate replicate: every scenario counts it as failed
        }
        for (size_t ri = 0; ri < n_r; ++ri) {
            const Index r = config.r_grid[ri];
            for (size_t si = 0; si < n_s; ++si) {
                const RngStream stream = RngStream::derive(
                    config.master_seed, {static_cast<std::uint64_t>(m), kScenarioTag,
                                         static_cast<std::uint64_t>(r),
                                         scenario_code(scenarios[si])});
                slot[ri * n_s + si] = try_scenario(scenarios[si], config.family, data,
                                                   config.r0, r, stream, two_stage_options);
            }
        }
    });

    const Index truth_width = config.true_theta.size();
    std::vector<MetricsRecord> records;
    for (size_t si = 0; si < n_s; ++si) {
        for (size_t ri = 0; ri < n_r; ++ri) {
            std::vector<VectorXd> estimates;
            double info_total = 0.0;
            Index failed = 0;
            for (const auto& rep : outcomes) {
                const auto& o = rep.empty() ? std::nullopt : rep[ri * n_s + si];
                if (!o) {
                    ++failed;
                    continue;
                }
                estimates.push_back(o->thetas[static_cast<size_t>(config.true_model)]);
                info_total += o->mean_information;
            }
            MetricsRecord rec;
            rec.scenario = scenarios[si];
            rec.estimating_model = config.true_model;
            rec.r = config.r_grid[ri];
            rec.smse = smse(stack_rows(estimates, truth_width), config.true_theta);
            rec.mean_model_information =
                estimates.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : info_total / static_cast<double>(estimates.size());
            rec.n_failed_replicates = failed;
            records.push_back(rec);
        }
    }
    return records;
}

std::vector<VectorXd> full_data_mles(Family family, const PreparedData& data,
                                     const FitOptions& options) {
    std::vector<VectorXd> out;
    const Index n = data.rows();
    for (const auto& design : data.designs) {
        WeightedSample s{design, data.y, VectorXd::Constant(n, 1.0 / static_cast<double>(n)), n};
        out.push_back(fit_weighted_mle(family, s, options).theta);
    }
    return out;
}

std::vector<SsmseRecord> run_ssmse_study(const RealDataStudyConfig& config,
                                         const PreparedData& data,
                                         const StudyOptions& options) {
    if (config.M < 1) throw ConfigError("M", "must be at least 1");
    if (config.r_grid.empty()) throw ConfigError("r_grid", "is empty");
    for (size_t i = 1; i < config.r_grid.size(); ++i) {
        if (config.r_grid[i] <= config.r_grid[i - 1]) {
            throw ConfigError("r_grid", "must be strictly ascending");
        }
    }
    const std::vector<VectorXd> mles = full_data_mles(config.family, data);
    const std::vector<Scenario> scenarios = all_scenarios(data.models.size());
    const size_t n_r = config.r_grid.size();
    const size_t n_s = scenarios.size();
    TwoStageOptions two_stage_options;
    two_stage_options.criterion = config.criterion;
    two_stage_options.probability.eps = config.eps;

    std::vector<std::vector<std::optional<ReplicateOutcome>>> outcomes(
        static_cast<size_t>(config.M));
    parallel_for(config.M, options.threads, [&](Index m) {
        auto& slot = outcomes[static_cast<size_t>(m)];
        slot.resize(n_r * n_s);
        for (size_t ri = 0; ri < n_r; ++ri) {
            const Index r = config.r_grid[ri];
            for (size_t si = 0; si < n_s; ++si) {
                const RngStream stream = RngStream::derive(
                    config.master_seed, {static_cast<std::uint64_t>(m), kScenarioTag,
                                         static_cast<std::uint64_t>(r),
                                         scenario_code(scenarios[si])});
                slot[ri * n_s + si] = try_scenario(scenarios[si], config.family, data,
                                                   config.r0, r, stream, two_stage_options);
            }
        }
    });

    std::vector<SsmseRecord> records;
    for (size_t si = 0; si < n_s; ++si) {
        for (size_t ri = 0; ri < n_r; ++ri) {
            std::vector<std::vector<VectorXd>> per_model(mles.size());
            Index failed = 0;
            for (const auto& rep : outcomes) {
                const auto& o = rep[ri * n_s + si];
                if (!o) {
                    ++failed;
                    continue;
                }
                for (size_t q = 0; q < mles.size(); ++q) per_model[q].push_back(o->thetas[q]);
            }
            std::vector<MatrixXd> stacked;
            for (size_t q = 0; q < mles.size(); ++q) {
                stacked.push_back(stack_rows(per_model[q], mles[q].size()));
            }
            records.push_back(
                {scenarios[si], config.r_grid[ri], ssmse(stacked, mles), failed});
        }
    }
    return records;
}

}  // namespace osub
