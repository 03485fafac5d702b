#pragma once

// Subsampling probabilities (stage-1 rules, single-model and model-robust
// optimal probabilities) and with-replacement sampling.

#include "osub/glm.hpp"
#include "osub/model_set.hpp"
#include "osub/rng.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace osub {

enum class Optimality { mMSE, mVc };

std::string_view to_string(Optimality criterion);
Optimality parse_optimality(std::string_view name);

enum class ProbabilityRule { Uniform, Proportional, mMSE, mVc, ModelRobust_mMSE, ModelRobust_mVc };

std::string_view to_string(ProbabilityRule rule);

struct ProbabilityVector {
    VectorXd probs;
    ProbabilityRule rule = ProbabilityRule::Uniform;

    Index size() const { return probs.size(); }
    // Sum to 1 within 1e-10, every entry in (0,1]. Throws ValidationError.
    void validate() const;
};

// Logistic: (2 N0)^{-1} for y=0 rows and (2 N1)^{-1} for y=1 rows.
// Poisson: 1/N.
ProbabilityVector initial_probabilities(Family family, const VectorXd& y);

// max(|y_i - mean(eta_i)|, eps)
VectorXd floored_residuals(Family family, const VectorXd& theta, const MatrixXd& design,
                           const VectorXd& y, double eps = 1e-6);

struct ProbabilityOptions {
    double eps = 1e-6;
    // Above this width mMSE solves against J_X instead of forming its inverse.
    Index inverse_width_limit = 50;
};

// Optimal probabilities for one model: proportional to
//   res_i * ||J^{-1} x_i||   (mMSE)   or   res_i * ||x_i||   (mVc).
// `information` replaces the full-data J_X (e.g. the pilot-sample estimate);
// when absent J_X = full_information(family, theta, design).
ProbabilityVector phi_single(Optimality criterion, Family family, const VectorXd& theta,
                             const MatrixXd& design, const VectorXd& y,
                             const std::optional<MatrixXd>& information = std::nullopt,
                             const ProbabilityOptions& options = {});

// alpha-weighted average of the per-model normalised probability vectors.
// `designs[q]` is build_design(models.specs[q], raw); `informations`, when
// non-empty, supplies one J_X per model.
ProbabilityVector phi_model_robust(Optimality criterion, Family family, const ModelSet& models,
                                   std::span<const VectorXd> thetas,
                                   std::span<const MatrixXd> designs, const VectorXd& y,
                                   std::span<const MatrixXd> informations = {},
                                   const ProbabilityOptions& options = {});

ProbabilityVector phi_model_robust(Optimality criterion, Family family, const ModelSet& models,
                                   std::span<const VectorXd> thetas, const MatrixXd& raw,
                                   const VectorXd& y, const ProbabilityOptions& options = {});

// Walker/Vose alias table: O(N) construction, O(1) per draw.
class AliasSampler {
public:
    // Weights need not be normalised; they must be non-negative with a
    // positive sum.
    explicit AliasSampler(std::span<const double> weights);

    Index draw(RngStream& rng) const;
    std::vector<Index> draw(Index count, RngStream& rng) const;
    Index size() const { return static_cast<Index>(prob_.size()); }

private:
    std::vector<double> prob_;
    std::vector<Index> alias_;
};

std::vector<Index> draw_with_replacement(const VectorXd& probs, Index r, RngStream& rng);

}  // namespace osub
