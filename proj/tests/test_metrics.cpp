// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "paak/metrics.hpp"

using namespace paak;

namespace {

SceneBuildOptions fast_opts() {
    SceneBuildOptions opt;
    opt.cell_size = 0.05;
    opt.margin = 0.6;
    return opt;
}

SceneModel box_scene() {
    SceneRecipe r;
    r.floor_width = 3.0;
    r.floor_depth = 3.0;
    r.boxes.push_back({"table", {0, 0, 0.5}, {1.0, 1.0, 1.0}, 0.0});
    return synth_scene(r, fast_opts());
}

Animation two_frames(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    Animation anim;
    anim.fps = 30;
    anim.topology = {{0, 1, 2}};
    BodyFrame fa, fb;
    fa.vertices = a;
    fb.vertices = b;
    Vec3 ca{0, 0, 0}, cb{0, 0, 0};
    for (const auto& v : a) ca += v;
    for (const auto& v : b) cb += v;
    fa.pelvis = ca / static_cast<double>(a.size());
    fb.pelvis = cb / static_cast<double>(b.size());
    anim.frames = {fa, fb};
    return anim;
}

}  // namespace

TEST_CASE("free-floating bodies have a perfect non-collision score") {
    const SceneModel scene = box_scene();
    std::vector<Vec3> verts(50, Vec3{1.2, 1.2, 1.5});
    const Animation a = two_frames(verts, verts);
    const PlausibilityReport r = plausibility(a, scene);
    CHECK(r.non_collision == 1.0);
}

TEST_CASE("a frame with a tenth of its vertices inside scores 0.9") {
    const SceneModel scene = box_scene();
    std::vector<Vec3> verts;
    for (int i = 0; i < 10; ++i) verts.push_back({0, 0, 0.5});   // deep inside the table
    for (int i = 0; i < 90; ++i)
        verts.push_back({1.3, 1.3, 1.0 + 0.001 * static_cast<double>(i)});
    const Animation a = two_frames(verts, verts);
    const auto per_frame = non_collision_score(a, scene);
    CHECK(per_frame[0] == Catch::Approx(0.90).margin(1e-12));
}

TEST_CASE("standing on the floor scores full contact") {
    const SceneModel scene = box_scene();
    const Animation a = synth_animation(MotionKind::walk, {});
    // Shift the walk onto open floor, clear of the table.
    const Animation placed = transform(a, PlacementPose{{-1.0, -1.0, 0.0}, 0.0});
    const PlausibilityReport r = plausibility(placed, scene, 0.02);
    CHECK(r.contact == 1.0);
    CHECK(r.non_collision > 0.98);
}

TEST_CASE("a body levitating a meter up never touches") {
    const SceneModel scene = box_scene();
    const Animation a = synth_animation(MotionKind::walk, {});
    const Animation placed = transform(a, PlacementPose{{-1.0, -1.0, 1.0}, 0.0});
    const PlausibilityReport r = plausibility(placed, scene, 0.02);
    CHECK(r.contact == 0.0);
}

TEST_CASE("jump clips lose contact exactly while airborne") {
    SceneRecipe r;
    r.floor_width = 4.0;
    r.floor_depth = 4.0;
    const SceneModel scene = synth_scene(r, fast_opts());
    SynthAnimParams p;
    p.jump_height = 0.4;
    const Animation a = synth_animation(MotionKind::jump, p);
    const auto contact = contact_score(a, scene, 0.02);

    // Grounded at the start and the end, airborne around the apex.
    CHECK(contact.front() == 1);
    CHECK(contact.back() == 1);
    const size_t apex = static_cast<size_t>(0.55 * static_cast<double>(a.frame_count()));
    CHECK(contact[apex] == 0);
}

TEST_CASE("an infinite threshold counts every frame as contact") {
    const SceneModel scene = box_scene();
    const Animation a = synth_animation(MotionKind::walk, {});
    const Animation placed = transform(a, PlacementPose{{0, 0, 3.0}, 0.0});
    const auto contact =
        contact_score(placed, scene, std::numeric_limits<double>::infinity());
    for (const uint8_t c : contact) CHECK(c == 1);
}

TEST_CASE("pushing a body into geometry never raises non-collision") {
    // Vertex block starts left of the table (x in [-1.4, -1.05], z in the
    // box interior band) and is pushed along +x until fully inside.
    const SceneModel scene = box_scene();
    std::vector<Vec3> verts;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            verts.push_back({-1.4 + 0.05 * i, 0.0, 0.55 + 0.05 * j});
    const Animation a = two_frames(verts, verts);

    double previous = 1.0;
    for (double push = 0.0; push <= 1.0; push += 0.05) {
        const Animation placed = transform(a, PlacementPose{{push, 0, 0}, 0.0});
        const PlausibilityReport r = plausibility(placed, scene);
        REQUIRE(r.non_collision <= previous + 1e-12);
        previous = r.non_collision;
    }
}

TEST_CASE("report means equal the per-frame means") {
    const SceneModel scene = box_scene();
    const Animation a = synth_animation(MotionKind::jump, {});
    const PlausibilityReport r = plausibility(a, scene, 0.02);
    double nc = 0.0, c = 0.0;
    for (const double v : r.per_frame_non_collision) nc += v;
    for (const uint8_t v : r.per_frame_contact) c += v;
    CHECK(r.non_collision ==
          Catch::Approx(nc / static_cast<double>(a.frame_count())).margin(1e-12));
    CHECK(r.contact == Catch::Approx(c / static_cast<double>(a.frame_count())).margin(1e-12));
}
