#include <doctest.h>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include "osub/errors.hpp"
#include "osub/simulation.hpp"
#include "osub/two_stage.hpp"

#include <algorithm>
#include <cmath>

using namespace osub;

namespace {

VectorXd v(std::initializer_list<double> xs) {
    VectorXd out(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) out[i++] = x;
    return out;
}

PreparedData normal_data(Family f, Index n, const VectorXd& theta, std::uint64_t seed,
                         ModelSet models) {
    RngStream rng(seed);
    NormalCovariates cov{VectorXd::Zero(2), 1.5 * MatrixXd::Identity(2, 2)};
    if (f == Family::Poisson) cov.cov = MatrixXd::Identity(2, 2);
    MatrixXd raw = gen_covariates(cov, n, rng);
    VectorXd y = gen_response(f, theta, build_design(models.specs[0], raw), rng);
    return PreparedData::make(std::move(raw), std::move(y), std::move(models));
}

ModelSet quadratic_set() {
    const std::vector<Index> c{0, 1};
    return enumerate_quadratic_models(2, c);
}

}  // namespace

TEST_CASE("two_stage result shape and weights") {
    const PreparedData data = normal_data(Family::Logistic, 3000, v({-1, 0.5, 0.1}), 1, quadratic_set());
    const RngStream rng(5);
    const TwoStageResult res = two_stage(SamplingMode::single(1), Family::Logistic, data, 60, 200, rng);
    CHECK(res.fits.size() == 4);
    CHECK(res.rows.size() == 260);
    CHECK(res.row_probs.size() == 260);
    const ProbabilityVector init = initial_probabilities(Family::Logistic, data.y);
    for (Index l = 0; l < 60; ++l) CHECK(res.row_probs[l] == init.probs[res.rows[static_cast<size_t>(l)]]);
    for (Index l = 60; l < 260; ++l) {
        CHECK(res.row_probs[l] == res.stage2_probs.probs[res.rows[static_cast<size_t>(l)]]);
    }
    CHECK(res.stage2_probs.rule == ProbabilityRule::mMSE);
    for (Index q = 0; q < 4; ++q) {
        CHECK(res.fits[static_cast<size_t>(q)].theta.size() == data.models.specs[static_cast<size_t>(q)].width());
        CHECK(res.sample_for(data, q).rows() == 260);
    }
    CHECK(res.stage1_seed != res.stage2_seed);
}

TEST_CASE("two_stage preconditions") {
    const PreparedData data = normal_data(Family::Logistic, 500, v({-1, 0.5, 0.1}), 1, quadratic_set());
    const RngStream rng(5);
    CHECK_THROWS_AS(two_stage(SamplingMode::model_robust(), Family::Logistic, data, 100, 50, rng),
                    ValidationError);
    CHECK_THROWS_AS(two_stage(SamplingMode::model_robust(), Family::Logistic, data, 5, 50, rng),
                    ValidationError);
    CHECK_THROWS_AS(two_stage(SamplingMode::single(7), Family::Logistic, data, 50, 50, rng),
                    ValidationError);
}

TEST_CASE("model-robust with one model reproduces single-model probabilities bitwise") {
    const ModelSet one = ModelSet::make({ModelSpec{{0, 1}, {}}});
    for (Family f : {Family::Logistic, Family::Poisson}) {
        const VectorXd theta = f == Family::Logistic ? v({-1, 0.5, 0.1}) : v({1, 0.5, 0.1});
        const PreparedData data = normal_data(f, 4000, theta, 8, one);
        for (Optimality c : {Optimality::mMSE, Optimality::mVc}) {
            TwoStageOptions o;
            o.criterion = c;
            const RngStream rng(31);
            const TwoStageResult a = two_stage(SamplingMode::model_robust(), f, data, 100, 300, rng, o);
            const TwoStageResult b = two_stage(SamplingMode::single(0), f, data, 100, 300, rng, o);
            CHECK(a.stage2_probs.probs == b.stage2_probs.probs);
            CHECK(a.rows == b.rows);
            CHECK(a.fits[0].theta == b.fits[0].theta);
        }
    }
}

TEST_CASE("random baseline reuses stage-1 probabilities") {
    const PreparedData data = normal_data(Family::Poisson, 2000, v({1, 0.5, 0.1}), 2, quadratic_set());
    const TwoStageResult res = random_sampling_baseline(Family::Poisson, data, 80, 300, RngStream(4));
    CHECK(res.stage2_probs.probs == initial_probabilities(Family::Poisson, data.y).probs);
    CHECK(res.row_probs.isApproxToConstant(1.0 / 2000.0, 0.0));

    // constant weights: weighted MLE equals the unweighted MLE on those rows
    const WeightedSample s = res.sample_for(data, 0);
    const VectorXd ref = oracle::irls(oracle::Fam::Poisson, s.design, s.response);
    CHECK((res.fits[0].theta - ref).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("full-size uniform subsample lands near the full-data MLE") {
    // r0 = r = N on a tiny dataset; duplicates make this a statistical check
    const ModelSet one = ModelSet::make({ModelSpec{{0, 1}, {}}});
    const PreparedData data = normal_data(Family::Poisson, 400, v({1, 0.5, 0.1}), 6, one);
    const VectorXd mle = full_data_mles(Family::Poisson, data)[0];
    std::vector<double> err;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const TwoStageResult res = random_sampling_baseline(Family::Poisson, data, 400, 400, RngStream(s));
        err.push_back((res.fits[0].theta - mle).cwiseAbs().maxCoeff());
    }
    std::sort(err.begin(), err.end());
    CHECK(err[25] < 0.05);
}

TEST_CASE("optimal subsampling beats random sampling in median error") {
    const ModelSet one = ModelSet::make({ModelSpec{{0, 1}, {}}});
    const PreparedData data = normal_data(Family::Logistic, 10000, v({-1, 0.5, 0.1}), 12, one);
    const VectorXd mle = full_data_mles(Family::Logistic, data)[0];
    std::vector<double> opt, rnd;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const RngStream rng = RngStream::derive(99, {s});
        opt.push_back((two_stage(SamplingMode::single(0), Family::Logistic, data, 100, 1000, rng)
                           .fits[0].theta - mle).norm());
        rnd.push_back((random_sampling_baseline(Family::Logistic, data, 100, 1000, rng)
                           .fits[0].theta - mle).norm());
    }
    std::nth_element(opt.begin(), opt.begin() + 50, opt.end());
    std::nth_element(rnd.begin(), rnd.begin() + 50, rnd.end());
    CHECK(opt[50] < rnd[50]);
}

TEST_CASE("pilot failures are retried then reported") {
    // Perfectly separable covariate: every pilot fit diverges.
    const Index n = 400;
    MatrixXd raw(n, 1);
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        raw(i, 0) = static_cast<double>(i) / n - 0.5;
        y[i] = raw(i, 0) > 0 ? 1.0 : 0.0;
    }
    const PreparedData data =
        PreparedData::make(raw, y, ModelSet::make({ModelSpec{{0}, {}}}));
    try {
        two_stage(SamplingMode::model_robust(), Family::Logistic, data, 50, 50, RngStream(1));
        FAIL("expected pilot failure");
    } catch (const PilotFailure& e) {
        CHECK(e.attempts() == 10);
    }
}

TEST_CASE("full-data information option is honoured") {
    const PreparedData data = normal_data(Family::Logistic, 3000, v({-1, 0.5, 0.1}), 3, quadratic_set());
    TwoStageOptions a, b;
    b.information = InformationSource::FullData;
    const RngStream rng(17);
    const PilotStage pa = pilot_stage(SamplingMode::single(0), Family::Logistic, data, 100, rng, a);
    const PilotStage pb = pilot_stage(SamplingMode::single(0), Family::Logistic, data, 100, rng, b);
    CHECK(pa.rows == pb.rows);
    const VectorXd expect = phi_single(Optimality::mMSE, Family::Logistic, pb.pilots[0].theta,
                                       data.designs[0], data.y).probs;
    CHECK((pb.stage2_probs.probs - expect).cwiseAbs().maxCoeff() < 1e-15);
    const VectorXd pilot_based = phi_single(Optimality::mMSE, Family::Logistic, pa.pilots[0].theta,
                                            data.designs[0], data.y, pa.pilots[0].info_jx).probs;
    CHECK((pa.stage2_probs.probs - pilot_based).cwiseAbs().maxCoeff() < 1e-15);
}
