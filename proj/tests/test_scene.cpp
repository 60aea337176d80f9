// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>
#include <map>

#include "paak/scene.hpp"

using namespace paak;

namespace {

SceneBuildOptions fast_opts() {
    SceneBuildOptions opt;
    opt.cell_size = 0.08;
    opt.margin = 0.6;
    return opt;
}

SceneRecipe chair_recipe() {
    SceneRecipe r;
    r.floor_width = 2.0;
    r.floor_depth = 2.0;
    r.boxes.push_back({"chair", {0.5, 0.5, 0.225}, {0.5, 0.5, 0.45}, 0.0});
    return r;
}

}  // namespace

TEST_CASE("vocabulary validation") {
    SemanticVocabulary v = default_vocabulary();
    CHECK_NOTHROW(v.validate());
    CHECK(v.id_of("chair") == 2);
    CHECK(v.id_of("nonsense") == -1);

    v.names.push_back("chair");  // duplicate
    CHECK_THROWS_AS(v.validate(), ValidationError);

    SemanticVocabulary bad_floor;
    bad_floor.names = {"a"};
    bad_floor.floor_id = 3;
    CHECK_THROWS_AS(bad_floor.validate(), ValidationError);
}

TEST_CASE("floor-only recipe gives two floor triangles at height zero") {
    SceneRecipe r;
    r.floor_width = 4.0;
    r.floor_depth = 4.0;
    const SceneModel scene = synth_scene(r, fast_opts());
    REQUIRE(scene.mesh.triangle_count() == 2);
    CHECK(scene.face_labels()[0] == scene.vocab.floor_id);
    CHECK(scene.face_labels()[1] == scene.vocab.floor_id);
    CHECK(scene.floor_height == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("chair recipe: seat top sits at the box height") {
    const SceneModel scene = synth_scene(chair_recipe(), fast_opts());
    REQUIRE(scene.mesh.triangle_count() == 14);
    double chair_top = -1.0;
    for (size_t t = 0; t < scene.mesh.triangle_count(); ++t)
        if (scene.face_labels()[t] == scene.vocab.id_of("chair"))
            for (int c = 0; c < 3; ++c)
                chair_top = std::max(chair_top, scene.mesh.tri_vertex(t, c).z);
    CHECK(chair_top == Catch::Approx(0.45).margin(1e-12));
}

TEST_CASE("two-class vocabulary with a chair box counts 14 labeled faces") {
    SemanticVocabulary vocab;
    vocab.names = {"floor", "chair"};
    vocab.floor_id = 0;
    const SceneModel scene = synth_scene(chair_recipe(), fast_opts(), vocab);
    CHECK(scene.vocab.size() == 2);
    REQUIRE(scene.face_labels().size() == 14);
    int chairs = 0;
    for (const int32_t l : scene.face_labels()) chairs += (l == 1);
    CHECK(chairs == 12);
}

TEST_CASE("recipe with three boxes: label histogram matches") {
    SceneRecipe r;
    r.floor_width = 3.0;
    r.floor_depth = 3.0;
    r.boxes.push_back({"chair", {1.0, 0.0, 0.2}, {0.4, 0.4, 0.4}, 0.0});
    r.boxes.push_back({"table", {-1.0, 0.5, 0.35}, {0.8, 0.6, 0.7}, 0.3});
    r.boxes.push_back({"bed", {0.0, -1.0, 0.25}, {1.6, 0.9, 0.5}, 0.0});
    const SceneModel scene = synth_scene(r, fast_opts());
    std::map<int32_t, int> hist;
    for (const int32_t l : scene.face_labels()) ++hist[l];
    CHECK(hist[scene.vocab.id_of("floor")] == 2);
    CHECK(hist[scene.vocab.id_of("chair")] == 12);
    CHECK(hist[scene.vocab.id_of("table")] == 12);
    CHECK(hist[scene.vocab.id_of("bed")] == 12);
}

TEST_CASE("inverted and unknown boxes are rejected") {
    SceneRecipe r = chair_recipe();
    r.boxes[0].size.z = -0.1;
    CHECK_THROWS_AS(synth_scene(r, fast_opts()), ValidationError);

    SceneRecipe r2 = chair_recipe();
    r2.boxes[0].cls = "throne";
    CHECK_THROWS_AS(synth_scene(r2, fast_opts()), ValidationError);
}

TEST_CASE("scene save/load round trip is bit-exact") {
    const SceneModel scene = synth_scene(chair_recipe(), fast_opts());
    save_scene(scene, "rt_scene.obj", "rt_scene.labels.json");
    const SceneModel loaded = load_scene("rt_scene.obj", "rt_scene.labels.json", fast_opts());
    REQUIRE(loaded.mesh.vertex_count() == scene.mesh.vertex_count());
    for (size_t i = 0; i < scene.mesh.vertex_count(); ++i)
        CHECK(loaded.mesh.vertices[i] == scene.mesh.vertices[i]);
    CHECK(loaded.face_labels() == scene.face_labels());
    CHECK(loaded.vocab.names == scene.vocab.names);
    CHECK(loaded.floor_height == scene.floor_height);
    std::remove("rt_scene.obj");
    std::remove("rt_scene.labels.json");
}

TEST_CASE("corrupt sidecar with one label short names the face index") {
    const SceneModel scene = synth_scene(chair_recipe(), fast_opts());
    save_obj(scene.mesh, "short_scene.obj");
    std::vector<int32_t> labels = scene.face_labels();
    labels.pop_back();
    save_labels(scene.vocab, labels, "short_scene.labels.json");
    try {
        load_scene("short_scene.obj", "short_scene.labels.json", fast_opts());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("13") != std::string::npos);
    }
    std::remove("short_scene.obj");
    std::remove("short_scene.labels.json");
}

TEST_CASE("missing floor class in the sidecar is a validation error") {
    const SceneModel scene = synth_scene(chair_recipe(), fast_opts());
    save_obj(scene.mesh, "nofloor_scene.obj");
    {
        std::ofstream out("nofloor_scene.labels.json");
        nlohmann::ordered_json j;
        j["classes"] = {{{"id", 0}, {"name", "floor"}}, {{"id", 1}, {"name", "wall"}},
                        {{"id", 2}, {"name", "chair"}}, {{"id", 3}, {"name", "sofa"}},
                        {{"id", 4}, {"name", "bed"}}, {{"id", 5}, {"name", "table"}},
                        {{"id", 6}, {"name", "object"}}};
        j["floor_id"] = 12;  // not a valid class id
        j["face_labels"] = scene.face_labels();
        out << j.dump(2);
    }
    CHECK_THROWS_AS(load_scene("nofloor_scene.obj", "nofloor_scene.labels.json", fast_opts()),
                    ValidationError);
    std::remove("nofloor_scene.obj");
    std::remove("nofloor_scene.labels.json");
}

TEST_CASE("sdf above open floor reads plus half a meter") {
    SceneRecipe r;
    r.floor_width = 2.5;
    r.floor_depth = 2.5;
    const SceneBuildOptions opt = fast_opts();
    const SceneModel scene = synth_scene(r, opt);
    for (const double x : {-0.8, 0.0, 0.7})
        for (const double y : {-0.6, 0.3}) {
            const double v = sample_sdf(scene.sdf, {x, y, scene.floor_height + 0.5}).value;
            CHECK(v == Catch::Approx(0.5).margin(opt.cell_size));
        }
}

TEST_CASE("floor height follows the modal floor-face height") {
    SceneRecipe r;
    r.floor_width = 2.0;
    r.floor_depth = 2.0;
    r.floor_height = 0.3;
    const SceneModel scene = synth_scene(r, fast_opts());
    CHECK(scene.floor_height == Catch::Approx(0.3).margin(0.01));
}

TEST_CASE("sdf cache: warm load reproduces the cold bake exactly") {
    SceneBuildOptions opt = fast_opts();
    opt.cache_dir = "cache_test_dir";
    std::filesystem::remove_all(opt.cache_dir);
    const SceneModel cold = synth_scene(chair_recipe(), opt);
    const SceneModel warm = synth_scene(chair_recipe(), opt);
    CHECK(cold.sdf.values == warm.sdf.values);
    CHECK(cold.sdf.semantic_ids == warm.sdf.semantic_ids);
    CHECK(cold.sdf.origin == warm.sdf.origin);
    std::filesystem::remove_all(opt.cache_dir);
}

TEST_CASE("voxel semantics carry the nearest face label") {
    const SceneModel scene = synth_scene(chair_recipe(), fast_opts());
    // Just above the seat the nearest surface is the chair top.
    CHECK(sample_sdf(scene.sdf, {0.5, 0.5, 0.5}).semantic == scene.vocab.id_of("chair"));
    // Far from the chair, just above the floor, it is floor.
    CHECK(sample_sdf(scene.sdf, {-0.7, -0.7, 0.05}).semantic == scene.vocab.floor_id);
}

TEST_CASE("recipe json loads every field") {
    const std::string path = "recipe_test.json";
    {
        std::ofstream out(path);
        out << R"({
          "floor": {"width": 3.0, "depth": 2.0, "center": [0.5, -0.5]},
          "boxes": [
            {"class": "bed", "center": [1.0, 0.0, 0.25], "size": [1.8, 0.9, 0.5], "yaw_deg": 90}
          ]
        })";
    }
    const SceneRecipe r = load_recipe(path);
    CHECK(r.floor_width == 3.0);
    CHECK(r.floor_depth == 2.0);
    CHECK(r.floor_center.x == 0.5);
    REQUIRE(r.boxes.size() == 1);
    CHECK(r.boxes[0].cls == "bed");
    CHECK(r.boxes[0].yaw == Catch::Approx(kPi / 2));
    std::remove(path.c_str());
}
