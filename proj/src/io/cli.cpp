#include "osub/io/cli.hpp"

#include "osub/errors.hpp"
#include "osub/io/config.hpp"
#include "osub/io/csv.hpp"
#include "osub/io/dataset.hpp"
#include "osub/io/report.hpp"
#include "osub/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <thread>

namespace osub::io {

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("config", c.config_path, "run configuration file")->required();
    cmd->add_option("--seed", c.seed, "override the configured master seed");
    cmd->add_option("--threads", c.threads, "worker threads (results do not depend on it)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", c.out, "output file (relative paths honour OSUB_OUTPUT_DIR)");
}

fs::path output_path(const Common& c, const std::string& command) {
    fs::path base;
    if (const char* dir = std::getenv("OSUB_OUTPUT_DIR"); dir && *dir) base = dir;
    fs::path out = c.out.empty()
                       ? fs::path(fs::path(c.config_path).stem().string() + "." + command + ".csv")
                       : fs::path(c.out);
    if (out.is_relative() && !base.empty()) out = base / out;
    return out;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p += suffix;
    return p;
}

unsigned thread_count(const Common& c) {
    if (c.threads > 0) return c.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig load_config(const Common& c) {
    RunConfig cfg = parse_config(c.config_path);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

TwoStageOptions two_stage_options(const RunConfig& cfg) {
    TwoStageOptions o;
    o.criterion = cfg.criterion;
    o.probability.eps = cfg.eps;
    return o;
}

// Real mode reads the CSV; simulate mode draws one F_N from the configured
// generator so the single-run commands also work on synthetic data.
PreparedData prepare_data(const RunConfig& cfg) {
    if (cfg.mode == Mode::Real) {
        LoadedData loaded = load_csv(cfg.dataset, cfg.family);
        return PreparedData::make(std::move(loaded.raw), std::move(loaded.y), cfg.models);
    }
    const RngStream data = RngStream::derive(cfg.seed, {0, 0});
    RngStream cov_rng = data.child(1);
    RngStream resp_rng = data.child(2);
    MatrixXd raw = gen_covariates(cfg.covariates, cfg.N, cov_rng);
    const MatrixXd design =
        build_design(cfg.models.specs[static_cast<size_t>(cfg.true_model)], raw);
    VectorXd y = gen_response(cfg.family, cfg.true_theta, design, resp_rng);
    return PreparedData::make(std::move(raw), std::move(y), cfg.models);
}

RunMetadata base_metadata(const RunConfig& cfg, const std::string& command) {
    RunMetadata meta;
    meta.command = command;
    meta.seed = cfg.seed;
    meta.config = cfg.entries;
    return meta;
}

void write_outputs(const fs::path& out, const std::string& table, const RunMetadata& meta,
                   std::ostream& log) {
    write_file_atomic(out, table);
    write_file_atomic(sibling(out, ".meta"), metadata_text(meta));
    log << "wrote " << out.string() << "\n";
}

int cmd_simulate(const Common& c, std::ostream& log) {
    const RunConfig cfg = load_config(c);
    if (cfg.mode != Mode::Simulate) {
        throw ConfigError("mode", "the simulate command needs mode = simulate");
    }
    const auto records = run_study(cfg.scenario_config(), StudyOptions{thread_count(c)});
    write_outputs(output_path(c, "simulate"), metrics_csv(records),
                  base_metadata(cfg, "simulate"), log);
    return 0;
}

int cmd_subsample(const Common& c, std::ostream& log) {
    const RunConfig cfg = load_config(c);
    const PreparedData data = prepare_data(cfg);
    const RngStream rng = RngStream::derive(cfg.seed, {1});
    const TwoStageResult result =
        two_stage(cfg.sampling, cfg.family, data, cfg.r0, cfg.r, rng, two_stage_options(cfg));
    const std::string label = sampling_label(cfg.sampling);
    const fs::path out = output_path(c, "subsample");

    RunMetadata meta = base_metadata(cfg, "subsample");
    meta.extra = {{"scenario", label},
                  {"r0", std::to_string(result.r0)},
                  {"r", std::to_string(result.r)},
                  {"stage1_seed", std::to_string(result.stage1_seed)},
                  {"stage2_seed", std::to_string(result.stage2_seed)},
                  {"pilot_attempts", std::to_string(result.pilot_attempts)}};
    if (cfg.write_probabilities) {
        const fs::path phi = sibling(out, ".probabilities.csv");
        write_file_atomic(phi, probabilities_csv(cfg.seed, label, result.stage2_probs.probs));
        meta.extra.emplace_back("probabilities", phi.filename().string());
    }
    write_outputs(out,
                  fits_csv(fit_rows(cfg.seed, label, result, cfg.models, cfg.covariate_names)),
                  meta, log);
    return 0;
}

int cmd_probabilities(const Common& c, std::ostream& log) {
    const RunConfig cfg = load_config(c);
    const PreparedData data = prepare_data(cfg);
    // Same stream as `subsample`, so these are the stage-2 probabilities that
    // command would sample from.
    const RngStream rng = RngStream::derive(cfg.seed, {1});
    const PilotStage pilot =
        pilot_stage(cfg.sampling, cfg.family, data, cfg.r0, rng, two_stage_options(cfg));
    const std::string label = sampling_label(cfg.sampling);
    RunMetadata meta = base_metadata(cfg, "probabilities");
    meta.extra = {{"scenario", label},
                  {"r0", std::to_string(cfg.r0)},
                  {"pilot_attempts", std::to_string(pilot.attempts)}};
    write_outputs(output_path(c, "probabilities"),
                  probabilities_csv(cfg.seed, label, pilot.stage2_probs.probs), meta, log);
    return 0;
}

int cmd_ssmse(const Common& c, std::ostream& log) {
    const RunConfig cfg = load_config(c);
    const PreparedData data = prepare_data(cfg);
    const auto records =
        run_ssmse_study(cfg.real_data_config(), data, StudyOptions{thread_count(c)});
    write_outputs(output_path(c, "ssmse"), ssmse_csv(cfg.seed, records),
                  base_metadata(cfg, "ssmse"), log);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal and model-robust subsampling for logistic and Poisson GLMs", "osub"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common common;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo scenario study, metrics CSV");
    auto* subsample = app.add_subcommand("subsample", "one two-stage run, fitted coefficients");
    auto* probabilities = app.add_subcommand("probabilities", "stage-2 probabilities after a pilot fit");
    auto* ssmse = app.add_subcommand("ssmse", "repeated subsampling against full-data MLEs");
    for (auto* cmd : {simulate, subsample, probabilities, ssmse}) add_common(cmd, common);

    std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rev.begin(), rev.end());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(common, err);
        if (subsample->parsed()) return cmd_subsample(common, err);
        if (probabilities->parsed()) return cmd_probabilities(common, err);
        if (ssmse->parsed()) return cmd_ssmse(common, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace osub::io
