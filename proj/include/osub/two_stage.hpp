#pragma once

// Two-stage subsample-then-estimate drivers: single-model optimal,
// model-robust optimal, and the random-sampling baseline.

#include "osub/glm.hpp"
#include "osub/model_set.hpp"
#include "osub/rng.hpp"
#include "osub/sampling.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace osub {

// Full data with the design matrix of every candidate model built once.
struct PreparedData {
    MatrixXd raw;
    VectorXd y;
    ModelSet models;
    std::vector<MatrixXd> designs;

    Index rows() const { return y.size(); }

    static PreparedData make(MatrixXd raw, VectorXd y, ModelSet models);
};

// Which model(s) shape the stage-2 probabilities.
struct SamplingMode {
    enum class Kind { Single, ModelRobust, Random };
    Kind kind = Kind::ModelRobust;
    Index model = 0;  // used by Single

    static SamplingMode single(Index q) { return {Kind::Single, q}; }
    static SamplingMode model_robust() { return {Kind::ModelRobust, 0}; }
    static SamplingMode random() { return {Kind::Random, 0}; }
};

// Where the J_X used by mMSE comes from.
enum class InformationSource {
    PilotSample,  // weighted estimate from the stage-1 subsample
    FullData,     // N^{-1} sum over all rows at the pilot estimate
};

struct TwoStageOptions {
    Optimality criterion = Optimality::mMSE;
    ProbabilityOptions probability{};
    FitOptions fit{};
    int max_pilot_attempts = 10;
    InformationSource information = InformationSource::PilotSample;
};

struct TwoStageResult {
    std::vector<FitResult> fits;   // one per model in the set
    std::vector<Index> rows;       // stage-1 rows first, then stage-2 rows
    VectorXd row_probs;            // probability each row was drawn with
    Index r0 = 0;
    Index r = 0;
    ProbabilityVector stage2_probs;
    std::uint64_t stage1_seed = 0;
    std::uint64_t stage2_seed = 0;
    int pilot_attempts = 0;

    // Combined subsample S_{r0+r} in the design space of model q.
    WeightedSample sample_for(const PreparedData& data, Index q) const;
};

// Stage 1 plus the stage-2 probabilities it implies.
struct PilotStage {
    std::vector<Index> rows;
    VectorXd row_probs;
    std::vector<FitResult> pilots;  // indexed by model; empty fits for unused models
    std::vector<bool> fitted;
    int attempts = 0;
    ProbabilityVector stage2_probs;
};

// Draws S_{r0} from initial_probabilities and fits the pilot(s) needed by
// `mode`, then computes the stage-2 probabilities. Random mode fits nothing
// and returns the initial probabilities.
PilotStage pilot_stage(SamplingMode mode, Family family, const PreparedData& data, Index r0,
                       const RngStream& rng, const TwoStageOptions& options = {});

// Stage 1 draws r0 rows from initial_probabilities and fits pilots (model q
// only in single mode, every model in robust mode). Failing pilots trigger a
// fresh stage-1 draw, up to max_pilot_attempts, then PilotFailure. Stage 2
// draws r rows from the optimal probabilities and every model is refit on the
// combined sample. Requires r >= r0 >= max model width + 1.
TwoStageResult two_stage(SamplingMode mode, Family family, const PreparedData& data, Index r0,
                         Index r, const RngStream& rng, const TwoStageOptions& options = {});

// two_stage(SamplingMode::random(), ...): stage 2 reuses the stage-1
// probabilities, same output shape.
TwoStageResult random_sampling_baseline(Family family, const PreparedData& data, Index r0,
                                        Index r, const RngStream& rng,
                                        const TwoStageOptions& options = {});

}  // namespace osub
