#include "osub/sampling.hpp"

#include "osub/errors.hpp"

#include <cmath>
#include <string>

namespace osub {

std::string_view to_string(Optimality criterion) {
    return criterion == Optimality::mMSE ? "mMSE" : "mVc";
}

Optimality parse_optimality(std::string_view name) {
    if (name == "mMSE" || name == "mmse" || name == "A") return Optimality::mMSE;
    if (name == "mVc" || name == "mvc" || name == "L") return Optimality::mVc;
    throw ValidationError("unknown optimality criterion '" + std::string(name) + "'");
}

std::string_view to_string(ProbabilityRule rule) {
    switch (rule) {
        case ProbabilityRule::Uniform: return "uniform";
        case ProbabilityRule::Proportional: return "proportional";
        case ProbabilityRule::mMSE: return "mMSE";
        case ProbabilityRule::mVc: return "mVc";
        case ProbabilityRule::ModelRobust_mMSE: return "model-robust-mMSE";
        case ProbabilityRule::ModelRobust_mVc: return "model-robust-mVc";
    }
    return "unknown";
}

void ProbabilityVector::validate() const {
    if (probs.size() == 0) throw ValidationError("probability vector is empty");
    for (Index i = 0; i < probs.size(); ++i) {
        if (!(probs[i] > 0.0 && probs[i] <= 1.0)) {
            throw ValidationError("probability " + std::to_string(probs[i]) + " at row " +
                                  std::to_string(i) + " is outside (0,1]");
        }
    }
    if (std::abs(probs.sum() - 1.0) > 1e-10) {
        throw ValidationError("probabilities sum to " + std::to_string(probs.sum()));
    }
}

ProbabilityVector initial_probabilities(Family family, const VectorXd& y) {
    validate_response(family, y);
    const Index n = y.size();
    if (n == 0) throw ValidationError("response vector is empty");
    if (family == Family::Poisson) {
        return {VectorXd::Constant(n, 1.0 / static_cast<double>(n)), ProbabilityRule::Uniform};
    }
    const auto n1 = static_cast<Index>(y.sum());
    const Index n0 = n - n1;
    if (n0 == 0 || n1 == 0) {
        throw DegenerateResponse("logistic response has " + std::to_string(n0) + " zeros and " +
                                 std::to_string(n1) + " ones; both classes are required");
    }
    VectorXd p(n);
    const double p0 = 1.0 / (2.0 * static_cast<double>(n0));
    const double p1 = 1.0 / (2.0 * static_cast<double>(n1));
    for (Index i = 0; i < n; ++i) p[i] = y[i] == 0.0 ? p0 : p1;
    return {std::move(p), ProbabilityRule::Proportional};
}

VectorXd floored_residuals(Family family, const VectorXd& theta, const MatrixXd& design,
                           const VectorXd& y, double eps) {
    if (!(eps > 0.0)) throw ValidationError("residual floor eps must be positive");
    if (design.rows() != y.size() || design.cols() != theta.size()) {
        throw DimensionMismatch("residuals: design, response and theta sizes disagree");
    }
    const VectorXd mu = eval_mean(family, design * theta);
    return (y - mu).cwiseAbs().cwiseMax(eps);
}

ProbabilityVector phi_single(Optimality criterion, Family family, const VectorXd& theta,
                             const MatrixXd& design, const VectorXd& y,
                             const std::optional<MatrixXd>& information,
                             const ProbabilityOptions& options) {
    const VectorXd res = floored_residuals(family, theta, design, y, options.eps);
    VectorXd norms(design.rows());
    if (criterion == Optimality::mVc) {
        norms = design.rowwise().norm();
    } else {
        const MatrixXd jx = information ? *information : full_information(family, theta, design);
        if (jx.rows() != design.cols() || jx.cols() != design.cols()) {
            throw DimensionMismatch("information matrix does not match the design width");
        }
        if (design.cols() <= options.inverse_width_limit) {
            const MatrixXd jinv = spd_inverse(jx, "J_X");
            norms = (design * jinv).rowwise().norm();
        } else {
            Eigen::LDLT<MatrixXd> ldlt(jx);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > 1e-14)) {
                throw SingularInformation("J_X is singular or not positive definite");
            }
            norms = ldlt.solve(design.transpose()).colwise().norm().transpose();
        }
    }
    VectorXd p = res.cwiseProduct(norms);
    p /= p.sum();
    return {std::move(p), criterion == Optimality::mMSE ? ProbabilityRule::mMSE
                                                        : ProbabilityRule::mVc};
}

ProbabilityVector phi_model_robust(Optimality criterion, Family family, const ModelSet& models,
                                   std::span<const VectorXd> thetas,
                                   std::span<const MatrixXd> designs, const VectorXd& y,
                                   std::span<const MatrixXd> informations,
                                   const ProbabilityOptions& options) {
    const auto q_count = static_cast<size_t>(models.size());
    if (thetas.size() != q_count || designs.size() != q_count ||
        (!informations.empty() && informations.size() != q_count)) {
        throw DimensionMismatch("model-robust probabilities need one theta and design per model");
    }
    VectorXd p = VectorXd::Zero(y.size());
    for (size_t q = 0; q < q_count; ++q) {
        std::optional<MatrixXd> info;
        if (!informations.empty()) info = informations[q];
        const ProbabilityVector single =
            phi_single(criterion, family, thetas[q], designs[q], y, info, options);
        p += models.alpha[static_cast<Index>(q)] * single.probs;
    }
    return {std::move(p), criterion == Optimality::mMSE ? ProbabilityRule::ModelRobust_mMSE
                                                        : ProbabilityRule::ModelRobust_mVc};
}

ProbabilityVector phi_model_robust(Optimality criterion, Family family, const ModelSet& models,
                                   std::span<const VectorXd> thetas, const MatrixXd& raw,
                                   const VectorXd& y, const ProbabilityOptions& options) {
    std::vector<MatrixXd> designs;
    designs.reserve(models.specs.size());
    for (const auto& spec : models.specs) designs.push_back(build_design(spec, raw));
    return phi_model_robust(criterion, family, models, thetas, designs, y, {}, options);
}

AliasSampler::AliasSampler(std::span<const double> weights) {
    const auto n = weights.size();
    if (n == 0) throw ValidationError("cannot sample from an empty distribution");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ValidationError("sampling weights must be finite and non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("sampling weights sum to zero");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<Index> small;
    std::vector<Index> large;
    for (size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] * static_cast<double>(n) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<Index>(i));
    }
    while (!small.empty() && !large.empty()) {
        const Index s = small.back();
        small.pop_back();
        const Index l = large.back();
        large.pop_back();
        prob_[static_cast<size_t>(s)] = scaled[static_cast<size_t>(s)];
        alias_[static_cast<size_t>(s)] = l;
        scaled[static_cast<size_t>(l)] += scaled[static_cast<size_t>(s)] - 1.0;
        (scaled[static_cast<size_t>(l)] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers are 1 up to rounding.
    for (Index i : large) prob_[static_cast<size_t>(i)] = 1.0;
    for (Index i : small) prob_[static_cast<size_t>(i)] = 1.0;
}

Index AliasSampler::draw(RngStream& rng) const {
    const auto column = static_cast<size_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[column] ? static_cast<Index>(column) : alias_[column];
}

std::vector<Index> AliasSampler::draw(Index count, RngStream& rng) const {
    std::vector<Index> out(static_cast<size_t>(count));
    for (auto& idx : out) idx = draw(rng);
    return out;
}

std::vector<Index> draw_with_replacement(const VectorXd& probs, Index r, RngStream& rng) {
    if (r < 1) throw ValidationError("subsample size must be at least 1");
    const AliasSampler sampler(std::span<const double>(probs.data(), static_cast<size_t>(probs.size())));
    return sampler.draw(r, rng);
}

}  // namespace osub
