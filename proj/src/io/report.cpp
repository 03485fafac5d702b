#include "osub/io/report.hpp"

#include "osub/errors.hpp"
#include "osub/io/csv.hpp"
#include "osub/version.hpp"

#include <cmath>
#include <limits>

namespace osub::io {

namespace {

void expect_header(const CsvTable& table, const std::vector<std::string>& header,
                   std::string_view what) {
    if (table.header != header) {
        throw ValidationError(std::string(what) + " CSV has an unexpected header");
    }
}

std::string where(std::string_view what, size_t row, std::string_view col) {
    return std::string(what) + " row " + std::to_string(row + 2) + ", column '" +
           std::string(col) + "'";
}

std::uint64_t parse_seed(const std::string& text, const std::string& at) {
    const long long v = parse_integer(text, at);
    if (v < 0) throw ValidationError("negative seed at " + at);
    return static_cast<std::uint64_t>(v);
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
    std::string out = "scenario,estimating_model,r,smse,mean_model_info,failures\n";
    for (const auto& rec : records) {
        out += csv_line({rec.scenario.label(), std::to_string(rec.estimating_model + 1),
                         std::to_string(rec.r), format_double(rec.smse),
                         format_double(rec.mean_model_information),
                         std::to_string(rec.n_failed_replicates)});
    }
    return out;
}

std::vector<MetricsRecord> parse_metrics_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    expect_header(table,
                  {"scenario", "estimating_model", "r", "smse", "mean_model_info", "failures"},
                  "metrics");
    std::vector<MetricsRecord> out;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        MetricsRecord rec;
        rec.scenario = Scenario::parse(row[0]);
        rec.estimating_model =
            static_cast<Index>(parse_integer(row[1], where("metrics", i, "estimating_model"))) - 1;
        rec.r = static_cast<Index>(parse_integer(row[2], where("metrics", i, "r")));
        rec.smse = parse_double(row[3], where("metrics", i, "smse"));
        rec.mean_model_information = parse_double(row[4], where("metrics", i, "mean_model_info"));
        rec.n_failed_replicates =
            static_cast<Index>(parse_integer(row[5], where("metrics", i, "failures")));
        out.push_back(rec);
    }
    return out;
}

std::string ssmse_csv(std::uint64_t seed, const std::vector<SsmseRecord>& records) {
    std::string out = "seed,scenario,r,ssmse,failures\n";
    for (const auto& rec : records) {
        out += csv_line({std::to_string(seed), rec.scenario.label(), std::to_string(rec.r),
                         format_double(rec.ssmse), std::to_string(rec.n_failed_replicates)});
    }
    return out;
}

std::vector<SsmseRecord> parse_ssmse_csv(std::string_view text, std::uint64_t* seed) {
    const CsvTable table = parse_csv(text);
    expect_header(table, {"seed", "scenario", "r", "ssmse", "failures"}, "ssmse");
    std::vector<SsmseRecord> out;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::uint64_t s = parse_seed(row[0], where("ssmse", i, "seed"));
        if (seed) *seed = s;
        SsmseRecord rec;
        rec.scenario = Scenario::parse(row[1]);
        rec.r = static_cast<Index>(parse_integer(row[2], where("ssmse", i, "r")));
        rec.ssmse = parse_double(row[3], where("ssmse", i, "ssmse"));
        rec.n_failed_replicates =
            static_cast<Index>(parse_integer(row[4], where("ssmse", i, "failures")));
        out.push_back(rec);
    }
    return out;
}

std::vector<FitRow> fit_rows(std::uint64_t seed, const std::string& scenario,
                             const TwoStageResult& result, const ModelSet& models,
                             const std::vector<std::string>& covariate_names) {
    std::vector<FitRow> rows;
    for (Index q = 0; q < models.size(); ++q) {
        const FitResult& fit = result.fits[static_cast<size_t>(q)];
        const auto terms = models.specs[static_cast<size_t>(q)].term_names(covariate_names);
        double info = std::numeric_limits<double>::quiet_NaN();
        try {
            info = model_information(fit);
        } catch (const SingularInformation&) {
        }
        for (Index k = 0; k < fit.theta.size(); ++k) {
            rows.push_back({seed, scenario, q + 1, terms[static_cast<size_t>(k)], fit.theta[k],
                            std::sqrt(fit.variance(k, k)), info});
        }
    }
    return rows;
}

std::string fits_csv(const std::vector<FitRow>& rows) {
    std::string out = "seed,scenario,model,term,estimate,std_error,model_information\n";
    for (const auto& row : rows) {
        out += csv_line({std::to_string(row.seed), row.scenario, std::to_string(row.model),
                         row.term, format_double(row.estimate), format_double(row.std_error),
                         format_double(row.model_information)});
    }
    return out;
}

std::vector<FitRow> parse_fits_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    expect_header(table,
                  {"seed", "scenario", "model", "term", "estimate", "std_error",
                   "model_information"},
                  "fits");
    std::vector<FitRow> out;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        FitRow f;
        f.seed = parse_seed(row[0], where("fits", i, "seed"));
        f.scenario = row[1];
        f.model = static_cast<Index>(parse_integer(row[2], where("fits", i, "model")));
        f.term = row[3];
        f.estimate = parse_double(row[4], where("fits", i, "estimate"));
        f.std_error = parse_double(row[5], where("fits", i, "std_error"));
        f.model_information = parse_double(row[6], where("fits", i, "model_information"));
        out.push_back(f);
    }
    return out;
}

std::string probabilities_csv(std::uint64_t seed, const std::string& scenario,
                              const VectorXd& probs) {
    std::string out = "seed,scenario,row,phi\n";
    const std::string s = std::to_string(seed);
    const std::string label = csv_field(scenario);
    for (Index i = 0; i < probs.size(); ++i) {
        out += s + ',' + label + ',' + std::to_string(i) + ',' + format_double(probs[i]) + '\n';
    }
    return out;
}

std::string metadata_text(const RunMetadata& meta) {
    std::string out = "# osub run metadata\n";
    out += "version = " + std::string(kVersion) + "\n";
    out += "command = " + meta.command + "\n";
    out += "seed = " + std::to_string(meta.seed) + "\n";
    for (const auto& [k, v] : meta.extra) out += "run." + k + " = " + v + "\n";
    for (const auto& [k, v] : meta.config) out += "config." + k + " = " + v + "\n";
    return out;
}

RunMetadata parse_metadata(std::string_view text) {
    RunMetadata meta;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find(" = ");
        if (eq == std::string_view::npos) throw ValidationError("malformed metadata line");
        const std::string key(line.substr(0, eq));
        const std::string value(line.substr(eq + 3));
        if (key == "version") continue;
        if (key == "command") {
            meta.command = value;
        } else if (key == "seed") {
            meta.seed = parse_seed(value, "metadata seed");
        } else if (key.rfind("run.", 0) == 0) {
            meta.extra.emplace_back(key.substr(4), value);
        } else if (key.rfind("config.", 0) == 0) {
            meta.config.emplace_back(key.substr(7), value);
        } else {
            throw ValidationError("unknown metadata key '" + key + "'");
        }
    }
    return meta;
}

}  // namespace osub::io
