#include "setar/dgp.hpp"
#include "setar/io.hpp"
#include "setar/serialize.hpp"
#include "setar/setar_forest.hpp"
#include "test_helpers.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace setar;
using namespace setar::io;

TEST_CASE("values file round trip", "[io]") {
    const auto c = parse_values("a:1,2.5,-3\nb: 4e-3 , 5\n\n");
    REQUIRE(c.series.size() == 2);
    CHECK(c.series[0].id == "a");
    CHECK(c.series[0].values == std::vector<double>{1.0, 2.5, -3.0});
    CHECK(c.series[1].values == std::vector<double>{0.004, 5.0});
    CHECK(format_values(c) == "a:1,2.5,-3\nb:0.004,5\n");

    const auto sim = dgp::gen_chaotic_logistic([] {
        dgp::DgpConfig d;
        d.n_series = 4;
        d.length = 50;
        return d;
    }());
    const auto back = parse_values(format_values(sim));
    for (std::size_t s = 0; s < 4; ++s) CHECK(back.series[s].values == sim.series[s].values);
}

TEST_CASE("values file errors", "[io]") {
    CHECK_THROWS_AS(parse_values("a 1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_values(":1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_values("a:1,x\n"), ParseError);
    CHECK_THROWS_AS(parse_values("a:1,,2\n"), ParseError);
    CHECK_THROWS_AS(parse_values("a:1,nan\n"), ParseError);
    CHECK_THROWS_AS(parse_values("a:1\na:2\n"), DataError);
}

TEST_CASE("long CSV with covariates", "[io]") {
    const std::string text =
        "series_id,timestep,value,price,day\n"
        "x,0,1.5,10,mon\n"
        "x,1,2.5,11,tue\n"
        "x,2,,12,wed\n"
        "y,0,3,1,tue\n"
        "y,1,4,2,mon\n"
        "y,2,,3,mon\n";
    const auto kinds = parse_covariate_kinds("# kinds\ncov.day.kind=categorical\ncov.price.kind = numeric\n");
    const auto c = parse_long_csv(text, kinds);
    REQUIRE(c.series.size() == 2);
    CHECK(c.series[0].values == std::vector<double>{1.5, 2.5});
    REQUIRE(c.covariates.size() == 2);
    CHECK(c.covariates[0].numeric[1] == std::vector<double>{1.0, 2.0});
    CHECK(c.covariates[0].future_numeric[0] == std::vector<double>{12.0});
    CHECK(c.covariates[1].kind == CovariateKind::categorical);
    CHECK(c.covariates[1].labels[0] == std::vector<std::string>{"mon", "tue"});
    CHECK(c.covariates[1].future_labels[1] == std::vector<std::string>{"mon"});
    CHECK(parse_series_any(text, kinds).series.size() == 2);

    CHECK_THROWS_AS(parse_long_csv("id,t,v\nx,0,1\n"), ParseError);
    CHECK_THROWS_AS(parse_long_csv("series_id,timestep,value\nx,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_long_csv("series_id,timestep,value\nx,0,\n"), ParseError);
    CHECK_THROWS_AS(parse_long_csv("series_id,timestep,value\nx,0,1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_covariate_kinds("cov.a.kind=text\n"), ParseError);
    CHECK_THROWS_AS(parse_covariate_kinds("a=numeric\n"), ParseError);
}

TEST_CASE("forecast CSV round trip", "[io]") {
    ForecastMatrix f;
    f.series_ids = {"T1", "T2"};
    f.values.resize(2, 3);
    f.values << 0.1, 1.0 / 3.0, -2e-300, 5.0, 6.25, 1e300;
    const auto text = format_forecasts(f);
    CHECK(text.rfind("series_id,h1,h2,h3\nT1,0.1,", 0) == 0);
    const auto back = parse_forecasts(text);
    CHECK(back.series_ids == f.series_ids);
    CHECK(back.values == f.values);
    CHECK(parse_series_any(text).series[1].values == std::vector<double>{5.0, 6.25, 1e300});
}

TEST_CASE("reals survive text exactly", "[io][property]") {
    CounterRng rng(77);
    for (int i = 0; i < 5000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30.0, 30.0));
        CHECK(parse_real(format_real(v)) == v);
    }
}

TEST_CASE("atomic write replaces the target", "[io]") {
    const auto dir = std::filesystem::temp_directory_path() / "setar_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    atomic_write(path, "first\n");
    atomic_write(path, "second\n");
    CHECK(read_file(path) == "second\n");
    for (const auto& e : std::filesystem::directory_iterator(dir)) CHECK(e.path().filename() == "out.txt");
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_file(dir / "missing.txt"), DataError);
}

TEST_CASE("tree model round trip", "[io]") {
    const auto data = dgp::gen_setar2(testing::setar2_config(3, 6, 202, 0.1));
    const auto m = create_input_matrix(data, 3);
    TreeConfig cfg;
    cfg.stopping.criterion = StoppingCriterion::lin_test;
    cfg.stopping.alpha0 = 0.07;
    const auto tree = train_tree(m, cfg);
    REQUIRE(tree.leaves.size() > 1);
    const auto text = tree_to_string(tree);
    const auto back = tree_from_string(text);
    CHECK(tree_to_string(back) == text);
    CHECK(back.config.alpha0 == 0.07);
    CHECK(back.config.criterion == StoppingCriterion::lin_test);
    CHECK(forecast(back, data, 8).values == forecast(tree, data, 8).values);

    CHECK_THROWS_AS(tree_from_string("(setar-tree (version 99))"), ModelFormatError);
    CHECK_THROWS_AS(tree_from_string(text.substr(0, text.size() / 2)), ModelFormatError);
    CHECK_THROWS_AS(tree_from_string("not a model"), ModelFormatError);
}

TEST_CASE("tree with covariates round trip", "[io]") {
    SeriesCollection c;
    CounterRng rng(4);
    Covariate day{"day", CovariateKind::categorical, {}, {}, {}, {}};
    Covariate price{"price", CovariateKind::numeric, {}, {}, {}, {}};
    for (int s = 0; s < 3; ++s) {
        Series series{"s" + std::to_string(s), {}};
        std::vector<std::string> labels;
        std::vector<double> prices;
        for (int t = 0; t < 80; ++t) {
            series.values.push_back(rng.normal());
            labels.push_back(t % 3 == 0 ? "a" : "b");
            prices.push_back(rng.uniform());
        }
        c.series.push_back(series);
        day.labels.push_back(labels);
        day.future_labels.push_back({"a", "b", "b"});
        price.numeric.push_back(prices);
        price.future_numeric.push_back({0.1, 0.2, 0.3});
    }
    c.covariates = {day, price};
    const auto m = create_input_matrix(c, 2, infer_covariate_specs(c));
    const auto tree = train_tree(m);
    const auto back = tree_from_string(tree_to_string(tree));
    CHECK(back.column_names() == tree.column_names());
    CHECK(forecast(back, c, 3).values == forecast(tree, c, 3).values);
}

TEST_CASE("forest model round trip", "[io]") {
    const auto data = dgp::gen_setar2(testing::setar2_config(5, 6, 202, 0.1));
    const auto m = create_input_matrix(data, 2);
    ForestConfig cfg;
    cfg.n_trees = 4;
    cfg.seed = 0xDEADBEEFCAFEULL;
    cfg.feature_fraction = 0.5;
    cfg.average_per_step = true;
    const auto forest = train_forest(m, cfg);
    const auto text = forest_to_string(forest);
    const auto back = forest_from_string(text);
    CHECK(forest_to_string(back) == text);
    CHECK(back.config.seed == cfg.seed);
    CHECK(back.config.average_per_step);
    CHECK(back.tree_configs.size() == 4);
    CHECK(back.row_samples == forest.row_samples);
    CHECK(forecast_forest(back, data, 8).values == forecast_forest(forest, data, 8).values);

    SetarTree t;
    SetarForest f;
    CHECK(read_model(text, t, f));
    CHECK_FALSE(read_model(tree_to_string(forest.trees[0]), t, f));
}
