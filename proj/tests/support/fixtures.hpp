#pragma once

#include "osub/glm.hpp"
#include "osub/rng.hpp"

#include <cmath>
#include <random>

namespace fixture {

using osub::Family;
using osub::Index;
using osub::MatrixXd;
using osub::VectorXd;

// Intercept column followed by p standard-normal covariates.
inline MatrixXd normal_design(Index n, Index p, osub::RngStream& rng, double sd = 1.0) {
    std::normal_distribution<double> z(0.0, sd);
    MatrixXd x(n, p + 1);
    for (Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (Index j = 1; j <= p; ++j) x(i, j) = z(rng.engine());
    }
    return x;
}

inline VectorXd draw_response(Family f, const MatrixXd& x, const VectorXd& theta,
                              osub::RngStream& rng) {
    VectorXd y(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        const double mu = osub::mean_of(f, x.row(i).dot(theta));
        if (f == Family::Logistic) {
            y[i] = rng.uniform() < mu ? 1.0 : 0.0;
        } else {
            y[i] = static_cast<double>(std::poisson_distribution<int>(mu)(rng.engine()));
        }
    }
    return y;
}

inline osub::WeightedSample uniform_sample(const MatrixXd& x, const VectorXd& y) {
    return {x, y, VectorXd::Constant(x.rows(), 1.0 / static_cast<double>(x.rows())), x.rows()};
}

}  // namespace fixture
