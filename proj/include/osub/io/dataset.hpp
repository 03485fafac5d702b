#pragma once

#include "osub/glm.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace osub::io {

enum class Scaling {
    None,
    Standardize,  // mean 0, population variance 1
    RangeToUnit,  // min -> 0, max -> 1
};

std::string_view to_string(Scaling s);
Scaling parse_scaling(std::string_view name);

struct CovariateColumn {
    std::string name;
    bool continuous = true;
    Scaling scaling = Scaling::None;
};

struct DatasetDescriptor {
    std::filesystem::path path;
    std::string response;
    std::vector<CovariateColumn> covariates;

    std::vector<std::string> covariate_names() const;
    // Indices (into covariates) of the continuous columns.
    std::vector<Index> continuous_indices() const;
    void validate() const;
};

struct LoadedData {
    MatrixXd raw;  // covariates in descriptor order, scaled
    VectorXd y;
};

// Scales one column in place. Throws ValidationError for a constant column.
void apply_scaling(Eigen::Ref<VectorXd> column, Scaling scaling, std::string_view name);

// Reads the CSV, parses every referenced cell (errors name row and column),
// checks the response against the family's support and applies scaling.
LoadedData load_csv(const DatasetDescriptor& descriptor, Family family);

}  // namespace osub::io
