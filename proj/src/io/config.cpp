#include "osub/io/config.hpp"

#include "osub/errors.hpp"
#include "osub/io/csv.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace osub::io {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

// Key lookup that records which keys were consumed.
class Entries {
public:
    explicit Entries(std::vector<std::pair<std::string, std::string>> items) {
        for (auto& [k, v] : items) values_[k] = v;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string text(const std::string& key) {
        used_.insert(key);
        return values_.at(key);
    }
    std::string text_or(const std::string& key, std::string fallback) {
        return has(key) ? text(key) : std::move(fallback);
    }

    double real(const std::string& key) {
        try {
            return parse_double(text(key), "'" + key + "'");
        } catch (const ValidationError&) {
            throw ConfigError(key, "expected a number, got '" + values_.at(key) + "'");
        }
    }
    long long integer(const std::string& key) {
        try {
            return parse_integer(text(key), "'" + key + "'");
        } catch (const ValidationError&) {
            throw ConfigError(key, "expected an integer, got '" + values_.at(key) + "'");
        }
    }
    bool boolean(const std::string& key) {
        const std::string v = text(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw ConfigError(key, "expected true or false, got '" + v + "'");
    }
    VectorXd reals(const std::string& key) {
        const auto parts = split(text(key), ',');
        VectorXd v(static_cast<Index>(parts.size()));
        for (size_t i = 0; i < parts.size(); ++i) {
            try {
                v[static_cast<Index>(i)] = parse_double(parts[i], "'" + key + "'");
            } catch (const ValidationError&) {
                throw ConfigError(key, "expected numbers, got '" + parts[i] + "'");
            }
        }
        return v;
    }
    MatrixXd matrix(const std::string& key) {
        const auto rows = split(text(key), ';');
        MatrixXd m;
        for (size_t i = 0; i < rows.size(); ++i) {
            const auto cells = split(rows[i], ',');
            if (i == 0) m.resize(static_cast<Index>(rows.size()), static_cast<Index>(cells.size()));
            if (static_cast<Index>(cells.size()) != m.cols()) {
                throw ConfigError(key, "matrix rows have different lengths");
            }
            for (size_t j = 0; j < cells.size(); ++j) {
                try {
                    m(static_cast<Index>(i), static_cast<Index>(j)) =
                        parse_double(cells[j], "'" + key + "'");
                } catch (const ValidationError&) {
                    throw ConfigError(key, "expected numbers, got '" + cells[j] + "'");
                }
            }
        }
        return m;
    }
    // "100,200,300" or "start:stop:step" (inclusive)
    std::vector<Index> index_list(const std::string& key) {
        const std::string v = text(key);
        std::vector<Index> out;
        try {
            if (v.find(':') != std::string::npos) {
                const auto parts = split(v, ':');
                if (parts.size() != 3) throw ConfigError(key, "range must be start:stop:step");
                const auto start = parse_integer(parts[0], key);
                const auto stop = parse_integer(parts[1], key);
                const auto step = parse_integer(parts[2], key);
                if (step <= 0) throw ConfigError(key, "range step must be positive");
                for (auto x = start; x <= stop; x += step) out.push_back(static_cast<Index>(x));
            } else {
                for (const auto& p : split(v, ',')) {
                    out.push_back(static_cast<Index>(parse_integer(p, key)));
                }
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const ValidationError&) {
            throw ConfigError(key, "expected integers, got '" + v + "'");
        }
        return out;
    }
    std::vector<std::string> names(const std::string& key) { return split(text(key), ','); }

    void reject_unused() const {
        for (const auto& [k, v] : values_) {
            if (!used_.count(k)) throw ConfigError(k, "unknown key");
        }
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

Index name_index(const std::vector<std::string>& names, const std::string& name,
                 const std::string& key) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError(key, "unknown covariate '" + name + "'");
    return static_cast<Index>(it - names.begin());
}

CovariateDistribution parse_covariates(Entries& e) {
    const std::string kind = e.text_or("covariates", "normal");
    if (kind == "normal") {
        NormalCovariates n;
        n.mean = e.has("covariates.mean") ? e.reals("covariates.mean") : VectorXd::Zero(2);
        n.cov = e.has("covariates.cov") ? e.matrix("covariates.cov")
                                        : MatrixXd::Identity(n.mean.size(), n.mean.size());
        return n;
    }
    const Index dim = e.has("covariates.dim") ? static_cast<Index>(e.integer("covariates.dim")) : 2;
    if (kind == "exponential") {
        return ExponentialCovariates{e.has("covariates.rate") ? e.real("covariates.rate") : 1.0,
                                     dim};
    }
    if (kind == "uniform") return UniformCovariates{dim};
    throw ConfigError("covariates", "expected normal, exponential or uniform, got '" + kind + "'");
}

}  // namespace

std::string sampling_label(const SamplingMode& mode) {
    switch (mode.kind) {
        case SamplingMode::Kind::Random: return "Random";
        case SamplingMode::Kind::Single: return "Optimal(" + std::to_string(mode.model + 1) + ")";
        case SamplingMode::Kind::ModelRobust: return "ModelRobust";
    }
    return "unknown";
}

SamplingMode parse_sampling(std::string_view text) {
    const std::string v = trim(text);
    if (v == "robust" || v == "ModelRobust") return SamplingMode::model_robust();
    if (v == "random" || v == "Random") return SamplingMode::random();
    std::string digits = v;
    if (v.rfind("model:", 0) == 0) digits = v.substr(6);
    if (v.rfind("Optimal(", 0) == 0 && v.back() == ')') digits = v.substr(8, v.size() - 9);
    const long long q = parse_integer(digits, "sampling");
    if (q < 1) throw ValidationError("sampling model index must be 1 or larger");
    return SamplingMode::single(static_cast<Index>(q - 1));
}

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    size_t line_no = 0;
    std::set<std::string> keys;
    for (const auto& raw_line : split(text, '\n')) {
        ++line_no;
        std::string line = raw_line;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
        if (!keys.insert(key).second) throw ConfigError(key, "given more than once");
        cfg.entries.emplace_back(std::move(key), std::move(value));
    }
    Entries e(cfg.entries);

    const std::string mode = e.text_or("mode", "simulate");
    if (mode == "simulate") {
        cfg.mode = Mode::Simulate;
    } else if (mode == "real") {
        cfg.mode = Mode::Real;
    } else {
        throw ConfigError("mode", "expected simulate or real, got '" + mode + "'");
    }
    try {
        cfg.family = parse_family(e.text_or("family", "logistic"));
    } catch (const ValidationError& err) {
        throw ConfigError("family", err.what());
    }
    try {
        cfg.criterion = parse_optimality(e.text_or("criterion", "mMSE"));
    } catch (const ValidationError& err) {
        throw ConfigError("criterion", err.what());
    }
    if (e.has("seed")) {
        const long long s = e.integer("seed");
        if (s < 0) throw ConfigError("seed", "must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (e.has("eps")) cfg.eps = e.real("eps");
    if (!(cfg.eps > 0.0)) throw ConfigError("eps", "must be positive");
    if (e.has("r0")) cfg.r0 = static_cast<Index>(e.integer("r0"));
    if (cfg.r0 < 2) throw ConfigError("r0", "must be at least 2");
    if (!e.has("r_grid")) throw ConfigError("r_grid", "is required");
    cfg.r_grid = e.index_list("r_grid");
    if (cfg.r_grid.empty()) throw ConfigError("r_grid", "is empty");
    for (size_t i = 0; i < cfg.r_grid.size(); ++i) {
        if (cfg.r_grid[i] < cfg.r0) throw ConfigError("r_grid", "every r must be at least r0");
        if (i > 0 && cfg.r_grid[i] <= cfg.r_grid[i - 1]) {
            throw ConfigError("r_grid", "must be strictly ascending");
        }
    }
    if (e.has("M")) cfg.M = static_cast<Index>(e.integer("M"));
    if (cfg.M < 1) throw ConfigError("M", "must be at least 1");
    cfg.r = e.has("r") ? static_cast<Index>(e.integer("r")) : cfg.r_grid.back();
    if (cfg.r < cfg.r0) throw ConfigError("r", "must be at least r0");
    if (e.has("sampling")) {
        try {
            cfg.sampling = parse_sampling(e.text("sampling"));
        } catch (const ValidationError& err) {
            throw ConfigError("sampling", err.what());
        }
    }
    if (e.has("output.probabilities")) cfg.write_probabilities = e.boolean("output.probabilities");

    std::vector<Index> continuous;
    if (cfg.mode == Mode::Simulate) {
        if (e.has("N")) cfg.N = static_cast<Index>(e.integer("N"));
        if (cfg.N < 1) throw ConfigError("N", "must be positive");
        cfg.covariates = parse_covariates(e);
        try {
            osub::validate(cfg.covariates);
        } catch (const ValidationError& err) {
            throw ConfigError("covariates", err.what());
        }
        const Index p = dimension(cfg.covariates);
        for (Index j = 0; j < p; ++j) {
            cfg.covariate_names.push_back("x" + std::to_string(j + 1));
            continuous.push_back(j);
        }
    } else {
        if (!e.has("dataset.path")) throw ConfigError("dataset.path", "is required in real mode");
        std::filesystem::path path = e.text("dataset.path");
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        cfg.dataset.path = path;
        if (!e.has("dataset.response")) throw ConfigError("dataset.response", "is required");
        cfg.dataset.response = e.text("dataset.response");
        if (!e.has("dataset.covariates")) throw ConfigError("dataset.covariates", "is required");
        cfg.covariate_names = e.names("dataset.covariates");
        const auto cont_names = e.has("dataset.continuous") ? e.names("dataset.continuous")
                                                            : cfg.covariate_names;
        Scaling default_scaling = Scaling::None;
        if (e.has("dataset.scaling")) {
            try {
                default_scaling = parse_scaling(e.text("dataset.scaling"));
            } catch (const ValidationError& err) {
                throw ConfigError("dataset.scaling", err.what());
            }
        }
        for (const auto& name : cont_names) name_index(cfg.covariate_names, name, "dataset.continuous");
        for (const auto& name : cfg.covariate_names) {
            CovariateColumn col{name, false, Scaling::None};
            col.continuous =
                std::find(cont_names.begin(), cont_names.end(), name) != cont_names.end();
            if (col.continuous) col.scaling = default_scaling;
            const std::string key = "dataset.scaling." + name;
            if (e.has(key)) {
                try {
                    col.scaling = parse_scaling(e.text(key));
                } catch (const ValidationError& err) {
                    throw ConfigError(key, err.what());
                }
            }
            cfg.dataset.covariates.push_back(col);
        }
        try {
            cfg.dataset.validate();
        } catch (const ValidationError& err) {
            throw ConfigError("dataset", err.what());
        }
        continuous = cfg.dataset.continuous_indices();
    }

    std::vector<Index> quadratic = continuous;
    if (e.has("models.quadratic_over")) {
        quadratic.clear();
        for (const auto& name : e.names("models.quadratic_over")) {
            const Index j = name_index(cfg.covariate_names, name, "models.quadratic_over");
            if (std::find(continuous.begin(), continuous.end(), j) == continuous.end()) {
                throw ConfigError("models.quadratic_over",
                                  "covariate '" + name + "' is not continuous");
            }
            if (std::find(quadratic.begin(), quadratic.end(), j) != quadratic.end()) {
                throw ConfigError("models.quadratic_over", "covariate '" + name + "' repeated");
            }
            quadratic.push_back(j);
        }
    }
    cfg.models = enumerate_quadratic_models(static_cast<Index>(cfg.covariate_names.size()),
                                            quadratic);
    if (e.has("models.alpha")) {
        try {
            cfg.models = ModelSet::make(cfg.models.specs, e.reals("models.alpha"));
        } catch (const ConfigError&) {
            throw;
        } catch (const ValidationError& err) {
            throw ConfigError("models.alpha", err.what());
        }
    }
    if (cfg.r0 < cfg.models.max_width() + 1) {
        throw ConfigError("r0", "must exceed the widest model (" +
                                    std::to_string(cfg.models.max_width()) + " columns)");
    }
    if (cfg.sampling.kind == SamplingMode::Kind::Single &&
        cfg.sampling.model >= cfg.models.size()) {
        throw ConfigError("sampling", "model " + std::to_string(cfg.sampling.model + 1) +
                                          " is not in the model set of size " +
                                          std::to_string(cfg.models.size()));
    }

    if (cfg.mode == Mode::Simulate) {
        if (e.has("truth.model")) {
            const long long q = e.integer("truth.model");
            if (q < 1 || q > cfg.models.size()) {
                throw ConfigError("truth.model", "must be between 1 and " +
                                                     std::to_string(cfg.models.size()));
            }
            cfg.true_model = static_cast<Index>(q - 1);
        }
        if (!e.has("truth.theta")) throw ConfigError("truth.theta", "is required in simulate mode");
        cfg.true_theta = e.reals("truth.theta");
        cfg.scenario_config().validate();
    }
    e.reject_unused();
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const ValidationError& err) {
        throw ConfigError("<file>", err.what());
    }
    return parse_config_text(text, path.parent_path());
}

ScenarioConfig RunConfig::scenario_config() const {
    ScenarioConfig s;
    s.family = family;
    s.covariates = covariates;
    s.model_set = models;
    s.true_model = true_model;
    s.true_theta = true_theta;
    s.N = N;
    s.r0 = r0;
    s.r_grid = r_grid;
    s.M = M;
    s.eps = eps;
    s.master_seed = seed;
    s.criterion = criterion;
    return s;
}

RealDataStudyConfig RunConfig::real_data_config() const {
    RealDataStudyConfig c;
    c.family = family;
    c.r0 = r0;
    c.r_grid = r_grid;
    c.M = M;
    c.eps = eps;
    c.master_seed = seed;
    c.criterion = criterion;
    return c;
}

}  // namespace osub::io
