#include "osub/glm.hpp"

#include "osub/errors.hpp"

#include <cmath>
#include <string>

namespace osub {

namespace {

constexpr double kRcondFloor = 1e-14;

bool usable(const Eigen::LDLT<MatrixXd>& ldlt) {
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const auto d = ldlt.vectorD();
    if (!(d.minCoeff() > kRcondFloor * d.maxCoeff())) return false;
    return ldlt.rcond() > kRcondFloor;
}

void check_theta(const VectorXd& theta, const MatrixXd& design) {
    if (theta.size() != design.cols()) {
        throw DimensionMismatch("theta has " + std::to_string(theta.size()) +
                                " entries but the design has " +
                                std::to_string(design.cols()) + " columns");
    }
}

// log(1 + e^eta) without overflow for large |eta|.
double log1p_exp(double eta) {
    if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
    return std::log1p(std::exp(eta));
}

}  // namespace

std::string_view to_string(Family family) {
    switch (family) {
        case Family::Logistic: return "logistic";
        case Family::Poisson: return "poisson";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "logistic" || name == "binomial") return Family::Logistic;
    if (name == "poisson") return Family::Poisson;
    throw ValidationError("unknown family '" + std::string(name) + "'");
}

double mean_of(Family family, double eta) {
    if (family == Family::Poisson) return std::exp(eta);
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double cumulant_of(Family family, double eta) {
    if (family == Family::Poisson) return std::exp(eta);
    return log1p_exp(eta);
}

double info_weight_of(Family family, double eta) {
    if (family == Family::Poisson) return std::exp(eta);
    const double p = mean_of(family, eta);
    return p * (1.0 - p);
}

VectorXd eval_mean(Family family, const VectorXd& eta) {
    VectorXd mu(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
        mu[i] = mean_of(family, eta[i]);
        if (!std::isfinite(mu[i])) {
            throw NumericOverflow(i, "mean is not finite for eta = " + std::to_string(eta[i]));
        }
    }
    return mu;
}

void validate_response(Family family, const VectorXd& y) {
    for (Index i = 0; i < y.size(); ++i) {
        const double v = y[i];
        const bool ok = family == Family::Logistic
                            ? (v == 0.0 || v == 1.0)
                            : (std::isfinite(v) && v >= 0.0 && v == std::floor(v));
        if (!ok) {
            throw ValidationError("response value " + std::to_string(v) + " at row " +
                                  std::to_string(i) + " is invalid for the " +
                                  std::string(to_string(family)) + " family");
        }
    }
}

void WeightedSample::validate() const {
    if (response.size() != design.rows() || probs.size() != design.rows()) {
        throw DimensionMismatch("weighted sample has " + std::to_string(design.rows()) +
                                " design rows, " + std::to_string(response.size()) +
                                " responses and " + std::to_string(probs.size()) +
                                " probabilities");
    }
    for (Index i = 0; i < probs.size(); ++i) {
        if (!(probs[i] > 0.0 && probs[i] <= 1.0)) {
            throw ValidationError("selection probability " + std::to_string(probs[i]) +
                                  " at row " + std::to_string(i) + " is outside (0,1]");
        }
    }
    if (population_size < 1) throw ValidationError("population size must be positive");
}

double weighted_loglik(Family family, const VectorXd& theta, const WeightedSample& sample) {
    sample.validate();
    check_theta(theta, sample.design);
    const VectorXd eta = sample.design * theta;
    double total = 0.0;
    for (Index l = 0; l < eta.size(); ++l) {
        total += (sample.response[l] * eta[l] - cumulant_of(family, eta[l])) / sample.probs[l];
    }
    return total / static_cast<double>(sample.rows());
}

VectorXd weighted_score(Family family, const VectorXd& theta, const WeightedSample& sample) {
    sample.validate();
    check_theta(theta, sample.design);
    const VectorXd mu = eval_mean(family, sample.design * theta);
    const VectorXd c = (sample.response - mu).cwiseQuotient(sample.probs);
    return sample.design.transpose() * c / static_cast<double>(sample.rows());
}

MatrixXd spd_inverse(const MatrixXd& m, std::string_view what) {
    Eigen::LDLT<MatrixXd> ldlt(m);
    if (!usable(ldlt)) {
        throw SingularInformation(std::string(what) + " is singular or not positive definite");
    }
    return ldlt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

FitResult fit_weighted_mle(Family family, const WeightedSample& sample, const VectorXd& init,
                           const FitOptions& options) {
    sample.validate();
    validate_response(family, sample.response);
    check_theta(init, sample.design);
    const Index n = sample.rows();
    const Index d = sample.cols();
    if (n < d) {
        throw ValidationError("weighted sample has " + std::to_string(n) + " rows but " +
                              std::to_string(d) + " parameters");
    }

    const MatrixXd& x = sample.design;
    const VectorXd inv_phi = sample.probs.cwiseInverse();
    VectorXd theta = init;
    FitResult out;

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        const VectorXd eta = x * theta;
        VectorXd w(n);
        VectorXd c(n);
        for (Index l = 0; l < n; ++l) {
            const double mu = mean_of(family, eta[l]);
            if (!std::isfinite(mu)) throw NumericOverflow(l, "mean overflow during Newton step");
            w[l] = info_weight_of(family, eta[l]) * inv_phi[l];
            c[l] = (sample.response[l] - mu) * inv_phi[l];
        }
        const MatrixXd hessian = x.transpose() * w.asDiagonal() * x;
        const VectorXd score = x.transpose() * c;
        Eigen::LDLT<MatrixXd> ldlt(hessian);
        if (!usable(ldlt)) {
            // Singular at the start means a rank-deficient design. Later on it
            // means the weights vanished as the iterates ran off to infinity
            // (separated data), i.e. the maximiser does not exist.
            if (iter > 1) throw NonConvergence(theta, iter - 1);
            throw SingularInformation("weighted information matrix is singular");
        }
        const VectorXd step = ldlt.solve(score);
        if (!step.allFinite()) throw SingularInformation("Newton step is not finite");
        theta += step;
        out.iterations = iter;
        if (step.norm() < options.tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) throw NonConvergence(theta, out.iterations);

    // J~_X and V~_c at the converged estimate, scaled by N and the sample size.
    const double population = static_cast<double>(sample.population_size);
    const double size = static_cast<double>(n);
    const VectorXd eta = x * theta;
    VectorXd w(n);
    VectorXd s(n);
    for (Index l = 0; l < n; ++l) {
        const double res = sample.response[l] - mean_of(family, eta[l]);
        w[l] = info_weight_of(family, eta[l]) * inv_phi[l];
        s[l] = res * res * inv_phi[l] * inv_phi[l];
    }
    out.theta = theta;
    out.info_jx = x.transpose() * w.asDiagonal() * x / (population * size);
    out.vc = x.transpose() * s.asDiagonal() * x / (population * population * size * size);
    const MatrixXd jinv = spd_inverse(out.info_jx, "J~_X");
    out.variance = jinv * out.vc * jinv;
    out.variance = 0.5 * (out.variance + out.variance.transpose()).eval();
    return out;
}

FitResult fit_weighted_mle(Family family, const WeightedSample& sample,
                           const FitOptions& options) {
    return fit_weighted_mle(family, sample, VectorXd::Zero(sample.cols()), options);
}

MatrixXd full_information(Family family, const VectorXd& theta, const MatrixXd& design) {
    check_theta(theta, design);
    const VectorXd eta = design * theta;
    VectorXd w(eta.size());
    for (Index h = 0; h < eta.size(); ++h) w[h] = info_weight_of(family, eta[h]);
    return design.transpose() * w.asDiagonal() * design / static_cast<double>(design.rows());
}

}  // namespace osub
