#include "osub/model_set.hpp"

#include "osub/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace osub {

void ModelSpec::validate() const {
    std::set<Index> mains;
    for (Index c : main_effects) {
        if (c < 0) throw ValidationError("negative covariate index in model spec");
        if (!mains.insert(c).second) {
            throw ValidationError("duplicate main effect " + std::to_string(c));
        }
    }
    std::set<Index> quads;
    for (Index c : quadratic_terms) {
        if (!mains.count(c)) {
            throw ValidationError("quadratic term " + std::to_string(c) +
                                  " is not a main effect of the model");
        }
        if (!quads.insert(c).second) {
            throw ValidationError("duplicate quadratic term " + std::to_string(c));
        }
    }
}

std::vector<std::string> ModelSpec::term_names(const std::vector<std::string>& raw_names) const {
    auto name = [&](Index c) {
        return c < static_cast<Index>(raw_names.size()) ? raw_names[static_cast<size_t>(c)]
                                                        : "x" + std::to_string(c + 1);
    };
    std::vector<std::string> out{"(Intercept)"};
    for (Index c : main_effects) out.push_back(name(c));
    for (Index c : quadratic_terms) out.push_back(name(c) + "^2");
    return out;
}

MatrixXd build_design(const ModelSpec& spec, const MatrixXd& raw) {
    for (Index c : spec.main_effects) {
        if (c < 0 || c >= raw.cols()) {
            throw ValidationError("model references covariate column " + std::to_string(c) +
                                  " but the data has " + std::to_string(raw.cols()) +
                                  " columns");
        }
    }
    spec.validate();
    MatrixXd x(raw.rows(), spec.width());
    x.col(0).setOnes();
    Index j = 1;
    for (Index c : spec.main_effects) x.col(j++) = raw.col(c);
    for (Index c : spec.quadratic_terms) x.col(j++) = raw.col(c).cwiseAbs2();
    return x;
}

Index ModelSet::max_width() const {
    Index w = 0;
    for (const auto& s : specs) w = std::max(w, s.width());
    return w;
}

ModelSet ModelSet::make(std::vector<ModelSpec> specs, VectorXd alpha) {
    if (specs.empty()) throw ValidationError("model set must contain at least one model");
    for (const auto& s : specs) s.validate();
    const auto q = static_cast<Index>(specs.size());
    if (alpha.size() == 0) alpha = VectorXd::Constant(q, 1.0 / static_cast<double>(q));
    if (alpha.size() != q) {
        throw ValidationError("model set has " + std::to_string(q) + " models but " +
                              std::to_string(alpha.size()) + " prior weights");
    }
    return ModelSet{std::move(specs), validate_alpha(alpha)};
}

VectorXd validate_alpha(const VectorXd& alpha) {
    if (alpha.size() == 0) throw ValidationError("model weights are empty");
    for (Index q = 0; q < alpha.size(); ++q) {
        if (!(alpha[q] >= 0.0 && alpha[q] <= 1.0)) {
            throw ValidationError("model weight " + std::to_string(alpha[q]) +
                                  " is outside [0,1]");
        }
    }
    const double total = alpha.sum();
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("model weights sum to " + std::to_string(total) + ", not 1");
    }
    return alpha;
}

ModelSet enumerate_quadratic_models(Index n_main, std::span<const Index> continuous) {
    std::vector<Index> mains(static_cast<size_t>(n_main));
    for (Index c = 0; c < n_main; ++c) mains[static_cast<size_t>(c)] = c;

    const auto k = continuous.size();
    std::vector<std::vector<Index>> subsets;
    // Subsets of each size in lexicographic order of positions.
    for (size_t size = 0; size <= k; ++size) {
        std::vector<bool> pick(k, false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
        do {
            std::vector<Index> subset;
            for (size_t i = 0; i < k; ++i) {
                if (pick[i]) subset.push_back(continuous[i]);
            }
            subsets.push_back(std::move(subset));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }

    std::vector<ModelSpec> specs;
    specs.reserve(subsets.size());
    for (auto& s : subsets) specs.push_back(ModelSpec{mains, std::move(s)});
    return ModelSet::make(std::move(specs));
}

}  // namespace osub
