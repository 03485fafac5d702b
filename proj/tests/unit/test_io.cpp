#include <doctest.h>

#include "osub/errors.hpp"
#include "osub/io/config.hpp"
#include "osub/io/csv.hpp"
#include "osub/io/dataset.hpp"
#include "osub/io/report.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <unistd.h>

using namespace osub;
using namespace osub::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("osub_io_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

std::string expect_config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

const char* kLogisticNormal = R"(# logistic, normal covariates
mode = simulate
family = logistic
covariates = normal
covariates.mean = 0,0
covariates.cov = 1.5,0;0,1.5
truth.model = 1
truth.theta = -1,0.5,0.1
N = 10000
r0 = 100
r_grid = 100:1400:100
M = 200
seed = 7
)";

}  // namespace

TEST_CASE("csv parsing and quoting") {
    const CsvTable t = parse_csv("a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\n2,,\"multi\nline\"\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[0][2] == "say \"hi\"");
    CHECK(t.rows[1][1].empty());
    CHECK(t.rows[1][2] == "multi\nline");
    CHECK(parse_csv(csv_line({"p,q", "r\"s", "plain"}) + csv_line({"1", "2", "3"})).header ==
          std::vector<std::string>{"p,q", "r\"s", "plain"});
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ValidationError);
    CHECK_THROWS_AS(parse_csv("a\n\"open\n"), ValidationError);
    CHECK_THROWS_AS(parse_csv(""), ValidationError);
}

TEST_CASE("number formatting round-trips exactly") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.0}) {
        CHECK(parse_double(format_double(x), "test") == x);
    }
    CHECK(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()), "t")));
    CHECK(parse_double(format_double(-std::numeric_limits<double>::infinity()), "t") < 0);
    CHECK_THROWS_AS(parse_double("1.2.3", "t"), ValidationError);
    CHECK_THROWS_AS(parse_integer("12x", "t"), ValidationError);
}

TEST_CASE("atomic write leaves no temporary file") {
    const fs::path p = scratch("atomic.txt");
    write_file_atomic(p, "first");
    write_file_atomic(p, "second");
    CHECK(read_file(p) == "second");
    for (const auto& e : fs::directory_iterator(p.parent_path())) {
        CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
    }
}

TEST_CASE("scaling rules") {
    VectorXd a(2);
    a << 0, 255;
    apply_scaling(a, Scaling::RangeToUnit, "a");
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 1.0);

    VectorXd b(3);
    b << 1, 2, 3;
    apply_scaling(b, Scaling::Standardize, "b");
    CHECK(b[0] == doctest::Approx(-1.2247448714).epsilon(1e-10));
    CHECK(b[1] == doctest::Approx(0.0));
    CHECK(b[2] == doctest::Approx(1.2247448714).epsilon(1e-10));

    // standardize is idempotent; range is idempotent on [0,1] data
    VectorXd c(5);
    c << 3.1, -2.0, 7.7, 0.4, 1.9;
    apply_scaling(c, Scaling::Standardize, "c");
    VectorXd c2 = c;
    apply_scaling(c2, Scaling::Standardize, "c");
    CHECK((c2 - c).cwiseAbs().maxCoeff() < 1e-12);
    VectorXd d(3);
    d << 0, 0.25, 1;
    VectorXd d2 = d;
    apply_scaling(d2, Scaling::RangeToUnit, "d");
    CHECK(d2 == d);

    VectorXd k = VectorXd::Constant(3, 2.0);
    CHECK_THROWS_AS(apply_scaling(k, Scaling::Standardize, "k"), ValidationError);
}

TEST_CASE("load_csv") {
    const fs::path p = scratch("data.csv");
    write_file_atomic(p, "y,u,v,w\n0,0,1,5\n1,255,2,5\n1,100,3,5\n");
    DatasetDescriptor d{p, "y", {{"u", true, Scaling::RangeToUnit}, {"v", true, Scaling::Standardize}}};
    const LoadedData data = load_csv(d, Family::Logistic);
    CHECK(data.raw.rows() == 3);
    CHECK(data.raw(1, 0) == 1.0);
    CHECK(data.raw(1, 1) == doctest::Approx(0.0));
    CHECK(data.y == Eigen::Vector3d(0, 1, 1));

    SUBCASE("response outside the family support") {
        write_file_atomic(p, "y,u\n0,1\n2,3\n");
        DatasetDescriptor d2{p, "y", {{"u", true, Scaling::None}}};
        CHECK_THROWS_AS(load_csv(d2, Family::Logistic), ValidationError);
    }
    SUBCASE("non-numeric cell names row and column") {
        write_file_atomic(p, "y,u\n0,1\n1,abc\n");
        DatasetDescriptor d2{p, "y", {{"u", true, Scaling::None}}};
        try {
            load_csv(d2, Family::Logistic);
            FAIL("expected error");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 3") != std::string::npos);
            CHECK(msg.find("'u'") != std::string::npos);
        }
    }
    SUBCASE("missing column and constant standardized column") {
        DatasetDescriptor d2{p, "y", {{"zz", true, Scaling::None}}};
        CHECK_THROWS_AS(load_csv(d2, Family::Logistic), ValidationError);
        DatasetDescriptor d3{p, "y", {{"w", true, Scaling::Standardize}}};
        CHECK_THROWS_AS(load_csv(d3, Family::Logistic), ValidationError);
    }
    SUBCASE("descriptor invariants") {
        DatasetDescriptor d2{p, "y", {{"y", true, Scaling::None}}};
        CHECK_THROWS_AS(d2.validate(), ValidationError);
        DatasetDescriptor d3{p, "y", {}};
        CHECK_THROWS_AS(d3.validate(), ValidationError);
    }
}

TEST_CASE("config: simulate mode") {
    const RunConfig cfg = parse_config_text(kLogisticNormal);
    CHECK(cfg.mode == Mode::Simulate);
    CHECK(cfg.family == Family::Logistic);
    CHECK(cfg.true_theta == Eigen::Vector3d(-1, 0.5, 0.1));
    CHECK(cfg.eps == 1e-6);
    CHECK(cfg.criterion == Optimality::mMSE);
    CHECK(cfg.models.size() == 4);
    CHECK(cfg.models.alpha.isApproxToConstant(0.25));
    CHECK(cfg.r_grid.size() == 14);
    CHECK(cfg.r_grid.front() == 100);
    CHECK(cfg.r_grid.back() == 1400);
    CHECK(cfg.r == 1400);
    CHECK(cfg.seed == 7);
    const ScenarioConfig sc = cfg.scenario_config();
    CHECK(sc.N == 10000);
    CHECK(sc.M == 200);
    CHECK_NOTHROW(sc.validate());
}

TEST_CASE("config: errors carry the key path") {
    const std::string base = kLogisticNormal;
    CHECK(expect_config_error(base + "bogus = 1\n") == "bogus");
    CHECK(expect_config_error(base + "eps = small\n") == "eps");
    CHECK(expect_config_error(base + "criterion = best\n") == "criterion");
    std::string descending = base;
    descending.replace(descending.find("100:1400:100"), 12, "300,200");
    CHECK(expect_config_error(descending) == "r_grid");
    CHECK(expect_config_error(base + "models.alpha = 0.5,0.6,0,0\n") == "models.alpha");
    CHECK(expect_config_error(base + "sampling = model:9\n") == "sampling");
    std::string wrong_model = base;
    wrong_model.replace(wrong_model.find("truth.model = 1"), 15, "truth.model = 2");
    CHECK(expect_config_error(wrong_model) == "truth.theta");
    CHECK(expect_config_error(base + "truth.model = 2\n") == "truth.model");
    CHECK(expect_config_error(base + "seed = 3\n") == "seed");
    std::string bad_cov = base;
    bad_cov.replace(bad_cov.find("1.5,0;0,1.5"), 11, "1,2;2,1");
    CHECK(expect_config_error(bad_cov) == "covariates");
}

TEST_CASE("config: options") {
    const std::string base = kLogisticNormal;
    const RunConfig a = parse_config_text(base + "sampling = model:2\ncriterion = mVc\neps = 1e-5\n"
                                                 "models.quadratic_over = x2\nr = 500\n");
    CHECK(a.sampling.kind == SamplingMode::Kind::Single);
    CHECK(a.sampling.model == 1);
    CHECK(a.criterion == Optimality::mVc);
    CHECK(a.eps == 1e-5);
    CHECK(a.models.size() == 2);
    CHECK(a.r == 500);
    CHECK(parse_config_text(base + "sampling = random\n").sampling.kind == SamplingMode::Kind::Random);
}

TEST_CASE("config: real mode") {
    const fs::path dir = scratch("real");
    fs::create_directories(dir);
    write_file_atomic(dir / "d.csv", "y,a,b,flag\n0,1,2,0\n1,2,3,1\n0,3,5,1\n");
    const std::string text =
        "mode = real\nfamily = logistic\nr0 = 20\nr_grid = 50,100\nM = 10\n"
        "dataset.path = d.csv\ndataset.response = y\ndataset.covariates = a,b,flag\n"
        "dataset.continuous = a,b\ndataset.scaling = standardize\ndataset.scaling.b = range\n";
    const RunConfig cfg = parse_config_text(text, dir);
    CHECK(cfg.dataset.path == dir / "d.csv");
    REQUIRE(cfg.dataset.covariates.size() == 3);
    CHECK(cfg.dataset.covariates[0].scaling == Scaling::Standardize);
    CHECK(cfg.dataset.covariates[1].scaling == Scaling::RangeToUnit);
    CHECK(!cfg.dataset.covariates[2].continuous);
    CHECK(cfg.dataset.covariates[2].scaling == Scaling::None);
    CHECK(cfg.models.size() == 4);
    CHECK(cfg.models.specs[0].main_effects.size() == 3);

    CHECK(expect_config_error(text + "models.quadratic_over = flag\n") == "models.quadratic_over");
    CHECK(expect_config_error("mode = real\nr0 = 20\nr_grid = 50\n") == "dataset.path");
}

TEST_CASE("metrics CSV round trip") {
    std::vector<MetricsRecord> recs;
    recs.push_back({{Scenario::Kind::Random, 0}, 0, 100, 0.1234567890123, 1.5e12, 0});
    recs.push_back({{Scenario::Kind::Optimal, 3}, 0, 1400, 1.0 / 3.0, 2.25, 2});
    recs.push_back({{Scenario::Kind::ModelRobust, 0}, 1, 200, std::nan(""), 7.0, 5});
    const std::string text = metrics_csv(recs);
    CHECK(text.rfind("scenario,estimating_model,r,smse,mean_model_info,failures\n", 0) == 0);
    const auto back = parse_metrics_csv(text);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == recs[0]);
    CHECK(back[1] == recs[1]);
    CHECK(std::isnan(back[2].smse));
    CHECK(back[2].scenario == recs[2].scenario);
    CHECK(back[2].n_failed_replicates == 5);
    CHECK(metrics_csv(back) == text);
}

TEST_CASE("other tables round trip") {
    std::vector<SsmseRecord> s{{{Scenario::Kind::Optimal, 0}, 300, 0.017, 1}};
    std::uint64_t seed = 0;
    CHECK(parse_ssmse_csv(ssmse_csv(99, s), &seed) == s);
    CHECK(seed == 99);

    std::vector<FitRow> rows{{4, "ModelRobust", 2, "x1^2", -0.25, 0.01, 3e9}};
    CHECK(parse_fits_csv(fits_csv(rows)) == rows);

    RunMetadata m;
    m.command = "simulate";
    m.seed = 12;
    m.extra = {{"stage1_seed", "5"}};
    m.config = {{"family", "poisson"}, {"r_grid", "100:200:100"}};
    const RunMetadata back = parse_metadata(metadata_text(m));
    CHECK(back.command == m.command);
    CHECK(back.seed == 12);
    CHECK(back.extra == m.extra);
    CHECK(back.config == m.config);
}
