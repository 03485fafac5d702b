#pragma once

// Canonical-link exponential-family GLMs (logistic, Poisson) and the
// inverse-probability weighted maximum-likelihood fit used on subsamples.

#include <Eigen/Dense>

#include <string_view>

namespace osub {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Family { Logistic, Poisson };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

// Scalar pieces of the family as functions of the linear predictor eta.
// With a canonical link the natural parameter equals eta, so the mean is the
// derivative of the cumulant and the information weight is its second
// derivative. Dispersion is fixed at 1.
double mean_of(Family family, double eta);
double cumulant_of(Family family, double eta);
double info_weight_of(Family family, double eta);

// Elementwise mean. Throws NumericOverflow naming the first index whose mean
// is not finite (Poisson with very large eta).
VectorXd eval_mean(Family family, const VectorXd& eta);

// Checks y against the family's support: {0,1} for logistic, non-negative
// integers for Poisson. Throws ValidationError naming the offending row.
void validate_response(Family family, const VectorXd& y);

// Rows drawn from a population of `population_size` rows, each carrying the
// probability it was drawn with.
struct WeightedSample {
    MatrixXd design;
    VectorXd response;
    VectorXd probs;
    Index population_size = 0;

    Index rows() const { return design.rows(); }
    Index cols() const { return design.cols(); }

    // Throws DimensionMismatch / ValidationError if the invariants do not hold.
    void validate() const;
};

// (1/r) sum_l [y_l eta_l - cumulant(eta_l)] / phi_l. Constant terms in y
// (log y! for Poisson) are dropped.
double weighted_loglik(Family family, const VectorXd& theta, const WeightedSample& sample);

// Gradient of weighted_loglik with respect to theta.
VectorXd weighted_score(Family family, const VectorXd& theta, const WeightedSample& sample);

struct FitOptions {
    double tol = 1e-4;   // Euclidean norm of the Newton step
    int max_iter = 100;
};

struct FitResult {
    VectorXd theta;
    MatrixXd info_jx;   // J~_X
    MatrixXd vc;        // V~_c
    MatrixXd variance;  // J~_X^{-1} V~_c J~_X^{-1}
    int iterations = 0;
    bool converged = false;
};

// Newton-Raphson on the weighted objective. Throws SingularInformation if the
// weighted Hessian cannot be factorised and NonConvergence (carrying the last
// iterate) when max_iter is exhausted.
FitResult fit_weighted_mle(Family family, const WeightedSample& sample, const VectorXd& init,
                           const FitOptions& options = {});
FitResult fit_weighted_mle(Family family, const WeightedSample& sample,
                           const FitOptions& options = {});

// J_X = N^{-1} sum_h w(eta_h) x_h x_h^T over every row of `design`.
MatrixXd full_information(Family family, const VectorXd& theta, const MatrixXd& design);

// Inverse of a symmetric positive definite matrix; throws SingularInformation
// naming `what` when the matrix is not numerically positive definite.
MatrixXd spd_inverse(const MatrixXd& m, std::string_view what);

}  // namespace osub
