#include "osub/two_stage.hpp"

#include "osub/errors.hpp"

#include <optional>
#include <string>

namespace osub {

namespace {

constexpr std::uint64_t kStage1Tag = 1;
constexpr std::uint64_t kStage2Tag = 2;

WeightedSample gather(const MatrixXd& design, const VectorXd& y, const std::vector<Index>& rows,
                      const VectorXd& row_probs, Index population) {
    WeightedSample s;
    const auto n = static_cast<Index>(rows.size());
    s.design.resize(n, design.cols());
    s.response.resize(n);
    for (Index l = 0; l < n; ++l) {
        const Index i = rows[static_cast<size_t>(l)];
        s.design.row(l) = design.row(i);
        s.response[l] = y[i];
    }
    s.probs = row_probs;
    s.population_size = population;
    return s;
}

VectorXd probs_at(const VectorXd& probs, const std::vector<Index>& rows) {
    VectorXd out(static_cast<Index>(rows.size()));
    for (size_t l = 0; l < rows.size(); ++l) out[static_cast<Index>(l)] = probs[rows[l]];
    return out;
}

void check_r0(const PreparedData& data, Index r0) {
    const Index d_max = data.models.max_width();
    if (r0 < d_max + 1) {
        throw ValidationError("r0 = " + std::to_string(r0) + " must be at least " +
                              std::to_string(d_max + 1) + " (widest model + 1)");
    }
}

ProbabilityVector optimal_probabilities(SamplingMode mode, Family family,
                                        const PreparedData& data, const PilotStage& stage,
                                        const TwoStageOptions& options) {
    auto info_for = [&](size_t q) -> MatrixXd {
        const FitResult& pilot = stage.pilots[q];
        if (options.information == InformationSource::PilotSample) return pilot.info_jx;
        return full_information(family, pilot.theta, data.designs[q]);
    };
    const bool mmse = options.criterion == Optimality::mMSE;
    if (mode.kind == SamplingMode::Kind::ModelRobust) {
        std::vector<VectorXd> thetas;
        std::vector<MatrixXd> infos;
        for (size_t q = 0; q < stage.pilots.size(); ++q) {
            thetas.push_back(stage.pilots[q].theta);
            if (mmse) infos.push_back(info_for(q));
        }
        return phi_model_robust(options.criterion, family, data.models, thetas, data.designs,
                                data.y, infos, options.probability);
    }
    const auto q = static_cast<size_t>(mode.model);
    std::optional<MatrixXd> info;
    if (mmse) info = info_for(q);
    return phi_single(options.criterion, family, stage.pilots[q].theta, data.designs[q], data.y,
                      info, options.probability);
}

}  // namespace

PreparedData PreparedData::make(MatrixXd raw, VectorXd y, ModelSet models) {
    if (raw.rows() != y.size()) {
        throw DimensionMismatch("covariate matrix has " + std::to_string(raw.rows()) +
                                " rows but the response has " + std::to_string(y.size()));
    }
    PreparedData d{std::move(raw), std::move(y), std::move(models), {}};
    d.designs.reserve(d.models.specs.size());
    for (const auto& spec : d.models.specs) d.designs.push_back(build_design(spec, d.raw));
    return d;
}

WeightedSample TwoStageResult::sample_for(const PreparedData& data, Index q) const {
    return gather(data.designs[static_cast<size_t>(q)], data.y, rows, row_probs, data.rows());
}

PilotStage pilot_stage(SamplingMode mode, Family family, const PreparedData& data, Index r0,
                       const RngStream& rng, const TwoStageOptions& options) {
    check_r0(data, r0);
    const auto q_count = static_cast<size_t>(data.models.size());
    if (mode.kind == SamplingMode::Kind::Single &&
        (mode.model < 0 || mode.model >= data.models.size())) {
        throw ValidationError("sampling model " + std::to_string(mode.model + 1) +
                              " is not in the model set");
    }
    ProbabilityVector initial = initial_probabilities(family, data.y);
    const AliasSampler sampler(
        std::span<const double>(initial.probs.data(), static_cast<size_t>(initial.size())));

    std::vector<bool> need(q_count, mode.kind == SamplingMode::Kind::ModelRobust);
    if (mode.kind == SamplingMode::Kind::Single) need[static_cast<size_t>(mode.model)] = true;

    RngStream stream = rng.child(kStage1Tag);
    std::string last_reason;
    for (int attempt = 1; attempt <= options.max_pilot_attempts; ++attempt) {
        PilotStage out;
        out.attempts = attempt;
        out.rows = sampler.draw(r0, stream);
        out.row_probs = probs_at(initial.probs, out.rows);
        out.pilots.resize(q_count);
        out.fitted = need;
        try {
            for (size_t q = 0; q < q_count; ++q) {
                if (!need[q]) continue;
                out.pilots[q] = fit_weighted_mle(
                    family, gather(data.designs[q], data.y, out.rows, out.row_probs, data.rows()),
                    options.fit);
            }
            out.stage2_probs = mode.kind == SamplingMode::Kind::Random
                                   ? initial
                                   : optimal_probabilities(mode, family, data, out, options);
            return out;
        } catch (const NonConvergence& e) {
            last_reason = e.what();
        } catch (const SingularInformation& e) {
            last_reason = e.what();
        }
    }
    throw PilotFailure(options.max_pilot_attempts, last_reason);
}

TwoStageResult two_stage(SamplingMode mode, Family family, const PreparedData& data, Index r0,
                         Index r, const RngStream& rng, const TwoStageOptions& options) {
    check_r0(data, r0);
    if (r < r0) {
        throw ValidationError("r = " + std::to_string(r) + " must be at least r0 = " +
                              std::to_string(r0));
    }
    PilotStage stage = pilot_stage(mode, family, data, r0, rng, options);

    TwoStageResult out;
    out.r0 = r0;
    out.r = r;
    out.pilot_attempts = stage.attempts;
    out.stage1_seed = rng.child(kStage1Tag).seed();
    out.stage2_seed = rng.child(kStage2Tag).seed();

    RngStream stream2 = rng.child(kStage2Tag);
    const std::vector<Index> rows2 = draw_with_replacement(stage.stage2_probs.probs, r, stream2);
    out.rows = std::move(stage.rows);
    out.rows.insert(out.rows.end(), rows2.begin(), rows2.end());
    out.row_probs.resize(r0 + r);
    out.row_probs.head(r0) = stage.row_probs;
    out.row_probs.tail(r) = probs_at(stage.stage2_probs.probs, rows2);
    out.stage2_probs = std::move(stage.stage2_probs);

    out.fits.reserve(data.designs.size());
    for (Index q = 0; q < data.models.size(); ++q) {
        out.fits.push_back(fit_weighted_mle(family, out.sample_for(data, q), options.fit));
    }
    return out;
}

TwoStageResult random_sampling_baseline(Family family, const PreparedData& data, Index r0,
                                        Index r, const RngStream& rng,
                                        const TwoStageOptions& options) {
    return two_stage(SamplingMode::random(), family, data, r0, r, rng, options);
}

}  // namespace osub
