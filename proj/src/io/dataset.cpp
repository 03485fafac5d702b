#include "osub/io/dataset.hpp"

#include "osub/errors.hpp"
#include "osub/io/csv.hpp"

#include <cmath>
#include <set>

namespace osub::io {

std::string_view to_string(Scaling s) {
    switch (s) {
        case Scaling::None: return "none";
        case Scaling::Standardize: return "standardize";
        case Scaling::RangeToUnit: return "range";
    }
    return "none";
}

Scaling parse_scaling(std::string_view name) {
    if (name == "none") return Scaling::None;
    if (name == "standardize" || name == "standardise") return Scaling::Standardize;
    if (name == "range" || name == "unit-range") return Scaling::RangeToUnit;
    throw ValidationError("unknown scaling rule '" + std::string(name) +
                          "' (expected none, standardize or range)");
}

std::vector<std::string> DatasetDescriptor::covariate_names() const {
    std::vector<std::string> out;
    for (const auto& c : covariates) out.push_back(c.name);
    return out;
}

std::vector<Index> DatasetDescriptor::continuous_indices() const {
    std::vector<Index> out;
    for (size_t j = 0; j < covariates.size(); ++j) {
        if (covariates[j].continuous) out.push_back(static_cast<Index>(j));
    }
    return out;
}

void DatasetDescriptor::validate() const {
    if (response.empty()) throw ValidationError("dataset needs a response column");
    if (covariates.empty()) throw ValidationError("dataset needs at least one covariate");
    std::set<std::string> seen;
    for (const auto& c : covariates) {
        if (c.name == response) {
            throw ValidationError("column '" + c.name + "' is both response and covariate");
        }
        if (!seen.insert(c.name).second) {
            throw ValidationError("covariate '" + c.name + "' is listed twice");
        }
    }
}

void apply_scaling(Eigen::Ref<VectorXd> column, Scaling scaling, std::string_view name) {
    if (scaling == Scaling::None || column.size() == 0) return;
    if (scaling == Scaling::Standardize) {
        const double mean = column.mean();
        const double var = (column.array() - mean).square().mean();
        if (!(var > 0.0)) {
            throw ValidationError("column '" + std::string(name) +
                                  "' is constant and cannot be standardized");
        }
        column = (column.array() - mean) / std::sqrt(var);
        return;
    }
    const double lo = column.minCoeff();
    const double hi = column.maxCoeff();
    if (!(hi > lo)) {
        throw ValidationError("column '" + std::string(name) +
                              "' is constant and cannot be range-scaled");
    }
    column = (column.array() - lo) / (hi - lo);
}

LoadedData load_csv(const DatasetDescriptor& descriptor, Family family) {
    descriptor.validate();
    const CsvTable table = read_csv(descriptor.path);
    if (table.rows.empty()) throw ValidationError("dataset '" + descriptor.path.string() + "' has no rows");

    const size_t y_col = table.column(descriptor.response);
    std::vector<size_t> cols;
    for (const auto& c : descriptor.covariates) cols.push_back(table.column(c.name));

    const auto n = static_cast<Index>(table.rows.size());
    LoadedData out;
    out.raw.resize(n, static_cast<Index>(cols.size()));
    out.y.resize(n);
    auto where = [&](Index row, const std::string& col) {
        // +2: 1-based and the header line
        return "row " + std::to_string(row + 2) + ", column '" + col + "'";
    };
    for (Index i = 0; i < n; ++i) {
        const auto& rec = table.rows[static_cast<size_t>(i)];
        out.y[i] = parse_double(rec[y_col], where(i, descriptor.response));
        for (size_t j = 0; j < cols.size(); ++j) {
            const double v = parse_double(rec[cols[j]], where(i, descriptor.covariates[j].name));
            if (!std::isfinite(v)) {
                throw ValidationError("non-finite value at " +
                                      where(i, descriptor.covariates[j].name));
            }
            out.raw(i, static_cast<Index>(j)) = v;
        }
    }
    validate_response(family, out.y);
    for (size_t j = 0; j < cols.size(); ++j) {
        const auto& c = descriptor.covariates[j];
        apply_scaling(out.raw.col(static_cast<Index>(j)), c.scaling, c.name);
    }
    return out;
}

}  // namespace osub::io
