// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "paak/pipeline.hpp"

using namespace paak;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

// Small, fast pipeline configuration for tests.
PipelineConfig test_config() {
    PipelineConfig cfg;
    cfg.cell_size = 0.06;
    cfg.margin = 0.5;
    cfg.window = 16;
    cfg.m2 = 8;
    cfg.m3 = 16;
    cfg.epochs = 40;
    cfg.spacing = 0.6;
    return cfg;
}

struct TempTree {
    std::filesystem::path root;
    explicit TempTree(const std::string& name) : root(name) {
        std::filesystem::remove_all(root);
        std::filesystem::create_directories(root);
    }
    ~TempTree() { std::filesystem::remove_all(root); }
    std::string path(const std::string& leaf) const { return (root / leaf).string(); }
};

void write_test_inputs(const TempTree& tmp) {
    write_file(tmp.path("scene.json"), R"({
      "floor": {"width": 2.2, "depth": 2.2},
      "boxes": [{"class": "chair", "center": [0.6, 0.6, 0.225], "size": [0.5, 0.5, 0.45]}]
    })");
    SynthAnimParams p;
    p.duration_s = 1.0;
    p.seat_height = 0.45;
    save_animation(synth_animation(MotionKind::walk_then_sit, p), tmp.path("clip.anm"));
}

}  // namespace

TEST_CASE("toml parser handles tables, scalars and arrays") {
    std::istringstream in(R"(
# top comment
mode = "active"
seed = 7
ratio = 0.25
flag = true

[weighting]
lambda_s = 0.6   # inline comment
lambda_m = 0.4

[misc]
values = [1, 2, 3]
names = ["a", "b"]
)");
    const nlohmann::json j = parse_toml(in, "test.toml");
    CHECK(j.at("mode") == "active");
    CHECK(j.at("seed") == 7);
    CHECK(j.at("ratio") == 0.25);
    CHECK(j.at("flag") == true);
    CHECK(j.at("weighting").at("lambda_s") == 0.6);
    CHECK(j.at("misc").at("values").size() == 3);
    CHECK(j.at("misc").at("names").at(1) == "b");
}

TEST_CASE("toml parser reports malformed lines") {
    std::istringstream bad_kv("just words\n");
    CHECK_THROWS_AS(parse_toml(bad_kv, "x"), FormatError);
    std::istringstream bad_str("key = \"unterminated\n");
    CHECK_THROWS_AS(parse_toml(bad_str, "x"), FormatError);
    std::istringstream bad_table("[half\n");
    CHECK_THROWS_AS(parse_toml(bad_table, "x"), FormatError);
}

TEST_CASE("config overlay applies values and rejects unknown keys") {
    PipelineConfig cfg;
    nlohmann::json j;
    j["mode"] = "geometric";
    j["loss"] = {{"lambda_pen", 5.0}};
    j["placement"] = {{"spacing", 0.25}};
    apply_config_json(cfg, j, "test");
    CHECK(cfg.mode == WeightMode::geometric);
    CHECK(cfg.loss.lambda_pen == 5.0);
    CHECK(cfg.spacing == 0.25);
    CHECK(cfg.loss.lambda_sem == 1.0);  // untouched default

    nlohmann::json bad;
    bad["tpyo"] = 1;
    CHECK_THROWS_AS(apply_config_json(cfg, bad, "test"), ValidationError);
}

TEST_CASE("config file round trip through toml") {
    const std::string path = "cfg_test.toml";
    write_file(path, R"(
mode = "uniform"
seed = 11

[loss]
lambda_pen = 2.5

[placement]
top_k = 4
)");
    const PipelineConfig cfg = load_pipeline_config(path);
    CHECK(cfg.mode == WeightMode::uniform);
    CHECK(cfg.seed == 11);
    CHECK(cfg.loss.lambda_pen == 2.5);
    CHECK(cfg.top_k == 4);
    std::remove(path.c_str());
}

TEST_CASE("pose json round trip") {
    const PlacementPose pose{{1.25, -0.5, 0.1}, deg_to_rad(42.0)};
    const PlacementPose back = pose_from_json(pose_to_json(pose));
    CHECK(back.tau.x == Catch::Approx(pose.tau.x).margin(1e-12));
    CHECK(back.tau.y == Catch::Approx(pose.tau.y).margin(1e-12));
    CHECK(back.theta == Catch::Approx(pose.theta).margin(1e-12));
}

TEST_CASE("uniform-mode weights are all ones") {
    const Animation a = synth_animation(MotionKind::walk, {});
    const SemanticVocabulary vocab = default_vocabulary();
    const FeatureMap fm = heuristic_features(a, vocab);
    PipelineConfig cfg = test_config();
    cfg.mode = WeightMode::uniform;
    const WeightsBundle wb = compute_weights(a, fm, vocab, cfg);
    for (const double k : wb.applied) REQUIRE(k == 1.0);
    CHECK(wb.weights.k_g.size() == a.frame_count());
}

TEST_CASE("active-mode weights mix the model output with diversity") {
    SynthAnimParams p;
    p.duration_s = 1.0;
    const Animation a = synth_animation(MotionKind::walk_then_sit, p);
    const SemanticVocabulary vocab = default_vocabulary();
    const FeatureMap fm = heuristic_features(a, vocab);
    PipelineConfig cfg = test_config();
    cfg.mode = WeightMode::active;
    const WeightsBundle wb = compute_weights(a, fm, vocab, cfg);
    REQUIRE(wb.weights.k_a.size() == a.frame_count());
    REQUIRE(wb.weights.k_hat_g.size() == a.frame_count());
    REQUIRE(wb.weights.w_d.size() == a.frame_count());
    for (size_t i = 0; i < wb.applied.size(); ++i) {
        const double expect = cfg.weighting.lambda_g * wb.weights.k_hat_g[i] +
                              cfg.weighting.lambda_b * wb.weights.w_d[i];
        REQUIRE(wb.applied[i] == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("pipeline produces artifacts with config echo and hashes") {
    TempTree tmp("pipe_test");
    write_test_inputs(tmp);

    PipelineInputs in;
    in.recipe = tmp.path("scene.json");
    in.animation = tmp.path("clip.anm");
    in.out_dir = tmp.path("out");
    PipelineConfig cfg = test_config();
    cfg.mode = WeightMode::uniform;

    const PipelineOutput out = run_pipeline(in, cfg);
    CHECK(std::filesystem::exists(tmp.path("out") + "/result.json"));
    CHECK(std::filesystem::exists(tmp.path("out") + "/report.json"));
    CHECK(out.result_json.at("config").at("mode") == "uniform");
    CHECK(out.result_json.at("inputs").at("scene").get<std::string>().size() == 16);
    CHECK(out.result_json.at("per_frame").size() == 30);
    CHECK(out.report_json.at("non_collision").get<double>() >= 0.0);
    CHECK(out.report_json.at("contact").get<double>() >= 0.0);
}

TEST_CASE("active pipeline on a chair scene keeps the body in contact") {
    TempTree tmp("pipe_contact");
    write_test_inputs(tmp);

    PipelineInputs in;
    in.recipe = tmp.path("scene.json");
    in.animation = tmp.path("clip.anm");
    PipelineConfig cfg = test_config();
    cfg.mode = WeightMode::active;

    const PipelineOutput out = run_pipeline(in, cfg);
    CHECK(out.report.contact >= 0.8);
    CHECK(out.report.non_collision >= 0.95);
}

TEST_CASE("identical config and seed give byte-identical results") {
    TempTree tmp("pipe_det");
    write_test_inputs(tmp);

    PipelineInputs in;
    in.recipe = tmp.path("scene.json");
    in.animation = tmp.path("clip.anm");
    PipelineConfig cfg = test_config();
    cfg.mode = WeightMode::active;
    cfg.seed = 5;

    const PipelineOutput a = run_pipeline(in, cfg);
    const PipelineOutput b = run_pipeline(in, cfg);
    CHECK(a.result_json.dump() == b.result_json.dump());
    CHECK(a.report_json.dump() == b.report_json.dump());
}

TEST_CASE("warm sdf cache reproduces cold-run numbers") {
    TempTree tmp("pipe_cache");
    write_test_inputs(tmp);

    PipelineInputs in;
    in.recipe = tmp.path("scene.json");
    in.animation = tmp.path("clip.anm");
    PipelineConfig cfg = test_config();
    cfg.mode = WeightMode::geometric;
    cfg.cache_dir = tmp.path("cache");

    const PipelineOutput cold = run_pipeline(in, cfg);
    const PipelineOutput warm = run_pipeline(in, cfg);
    CHECK(cold.result_json.dump() == warm.result_json.dump());
}

TEST_CASE("compare emits one row per mode with shared hashes") {
    TempTree tmp("pipe_cmp");
    write_test_inputs(tmp);

    PipelineInputs in;
    in.recipe = tmp.path("scene.json");
    in.animation = tmp.path("clip.anm");
    PipelineConfig cfg = test_config();

    const CompareOutput out = compare_modes(
        in, cfg, {WeightMode::uniform, WeightMode::geometric, WeightMode::active});
    REQUIRE(out.rows.size() == 3);
    CHECK(out.rows[0].mode == "uniform");
    CHECK(out.rows[2].mode == "active");

    std::istringstream csv(out.csv);
    std::string line;
    std::getline(csv, line);
    CHECK(line ==
          "mode,energy,non_collision,contact,scene_hash,animation_hash,features_hash");
    std::vector<std::string> hashes;
    while (std::getline(csv, line)) {
        const auto last = line.rfind(',');
        const auto second_last = line.rfind(',', last - 1);
        hashes.push_back(line.substr(second_last));  // animation + features hash
    }
    REQUIRE(hashes.size() == 3);
    CHECK(hashes[0] == hashes[1]);
    CHECK(hashes[1] == hashes[2]);
}

TEST_CASE("compare requires at least two modes") {
    PipelineInputs in;
    CHECK_THROWS_AS(compare_modes(in, {}, {WeightMode::uniform}), ValidationError);
}
