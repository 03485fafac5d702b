#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace osub {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Feature map from raw covariates to a design matrix. Indices are 0-based
// columns of the raw matrix. Design columns are always
//   [1 | main effects in listed order | squares of quadratic_terms in listed order].
struct ModelSpec {
    std::vector<Index> main_effects;
    std::vector<Index> quadratic_terms;

    Index width() const {
        return 1 + static_cast<Index>(main_effects.size() + quadratic_terms.size());
    }

    // Throws ValidationError on duplicates or quadratic terms outside main_effects.
    void validate() const;

    // Column labels, e.g. "(Intercept)", "x1", "x1^2".
    std::vector<std::string> term_names(const std::vector<std::string>& raw_names) const;

    bool operator==(const ModelSpec&) const = default;
};

MatrixXd build_design(const ModelSpec& spec, const MatrixXd& raw);

// Ordered candidate models with prior weights alpha (sum 1, entries in [0,1]).
struct ModelSet {
    std::vector<ModelSpec> specs;
    VectorXd alpha;

    Index size() const { return static_cast<Index>(specs.size()); }
    Index max_width() const;

    // Validates every spec and alpha; uniform alpha is filled in when empty.
    static ModelSet make(std::vector<ModelSpec> specs, VectorXd alpha = {});
};

VectorXd validate_alpha(const VectorXd& alpha);

// Main effects 0..n_main-1 plus every subset of squares of `continuous`,
// ordered by subset size and then lexicographically; uniform alpha.
ModelSet enumerate_quadratic_models(Index n_main, std::span<const Index> continuous);

}  // namespace osub
