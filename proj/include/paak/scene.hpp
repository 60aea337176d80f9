// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "paak/bvh.hpp"
#include "paak/core.hpp"
#include "paak/io.hpp"
#include "paak/mesh.hpp"
#include "paak/sdf.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Class vocabulary. Ids are dense 0..C-1 and double as vector indices.
// ---------------------------------------------------------------------------

struct SemanticVocabulary {
    std::vector<std::string> names;  // names[id] = class name
    int32_t floor_id = 0;

    int32_t size() const { return static_cast<int32_t>(names.size()); }

    bool valid_id(int32_t id) const { return id >= 0 && id < size(); }

    int32_t id_of(const std::string& name) const {
        for (int32_t i = 0; i < size(); ++i)
            if (names[static_cast<size_t>(i)] == name) return i;
        return -1;
    }

    void validate() const {
        if (names.empty()) throw ValidationError("vocabulary: no classes");
        for (size_t i = 0; i < names.size(); ++i)
            for (size_t j = i + 1; j < names.size(); ++j)
                if (names[i] == names[j])
                    throw ValidationError("vocabulary: duplicate class name '" + names[i] + "'");
        if (!valid_id(floor_id))
            throw ValidationError("vocabulary: floor_id " + std::to_string(floor_id) +
                                  " out of range");
    }
};

// Covers the interactions the placement losses care about: sitting, laying,
// standing, touching.
inline SemanticVocabulary default_vocabulary() {
    SemanticVocabulary v;
    v.names = {"floor", "wall", "chair", "sofa", "bed", "table", "object"};
    v.floor_id = 0;
    return v;
}

// ---------------------------------------------------------------------------
// Scene: labeled mesh + SDF + BVH, immutable after construction. Labels live
// on faces; mesh.face_ids is the single copy.
// ---------------------------------------------------------------------------

struct SceneModel {
    TriangleMesh mesh;
    SemanticVocabulary vocab;
    Bvh bvh;
    SdfGrid sdf;
    double floor_height = 0.0;

    const std::vector<int32_t>& face_labels() const { return mesh.face_ids; }

    // Bounding rectangle of floor-labeled faces, in xy.
    void floor_rect(double& xmin, double& xmax, double& ymin, double& ymax) const {
        bool any = false;
        xmin = ymin = std::numeric_limits<double>::max();
        xmax = ymax = std::numeric_limits<double>::lowest();
        for (size_t t = 0; t < mesh.triangle_count(); ++t) {
            if (mesh.face_ids[t] != vocab.floor_id) continue;
            any = true;
            for (int c = 0; c < 3; ++c) {
                const Vec3 v = mesh.tri_vertex(t, c);
                xmin = std::min(xmin, v.x);
                xmax = std::max(xmax, v.x);
                ymin = std::min(ymin, v.y);
                ymax = std::max(ymax, v.y);
            }
        }
        if (!any) throw ValidationError("scene: no floor-labeled faces");
    }
};

struct SceneBuildOptions {
    double cell_size = 0.05;     // m
    double margin = 0.75;        // grid padding around the mesh bounds, m
    uint64_t max_voxels = kDefaultMaxVoxels;
    int jobs = 1;
    std::string cache_dir;       // empty = no SDF caching
};

namespace detail {

// Modal z of floor-face centroids, binned at 1 cm. Ties go to the lower bin.
inline double modal_floor_height(const TriangleMesh& mesh, int32_t floor_id) {
    std::map<long, std::pair<int, double>> bins;  // bin -> (count, sum of z)
    for (size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (mesh.face_ids[t] != floor_id) continue;
        const double z = mesh.tri_centroid(t).z;
        const long bin = std::lround(z * 100.0);
        auto& b = bins[bin];
        b.first += 1;
        b.second += z;
    }
    if (bins.empty()) throw ValidationError("scene: no floor-labeled faces");
    long best_bin = 0;
    int best_count = -1;
    for (const auto& [bin, b] : bins) {
        if (b.first > best_count) {  // map iterates ascending, keeps lowest on tie
            best_count = b.first;
            best_bin = bin;
        }
    }
    const auto& b = bins[best_bin];
    return b.second / b.first;
}

inline std::string sdf_cache_key(const TriangleMesh& mesh, double cell_size, double margin) {
    uint64_t h = fnv1a64(mesh.vertices.data(), mesh.vertices.size() * sizeof(Vec3));
    h = fnv1a64(mesh.triangles.data(), mesh.triangles.size() * sizeof(std::array<uint32_t, 3>), h);
    if (!mesh.face_ids.empty())
        h = fnv1a64(mesh.face_ids.data(), mesh.face_ids.size() * sizeof(int32_t), h);
    h = fnv1a64(&cell_size, sizeof(cell_size), h);
    h = fnv1a64(&margin, sizeof(margin), h);
    return hex64(h);
}

}  // namespace detail

// Validates labels, builds the BVH, bakes (or cache-loads) the SDF and
// computes the floor height. Shared tail of load_scene and synth_scene.
inline SceneModel attach_scene(TriangleMesh mesh, SemanticVocabulary vocab,
                               const SceneBuildOptions& opt = {}) {
    vocab.validate();
    if (mesh.face_ids.size() != mesh.triangle_count())
        throw FormatError("scene: " + std::to_string(mesh.face_ids.size()) +
                          " face labels for " + std::to_string(mesh.triangle_count()) +
                          " faces; first unlabeled face index " +
                          std::to_string(std::min(mesh.face_ids.size(), mesh.triangle_count())));
    mesh.validate();
    for (size_t t = 0; t < mesh.face_ids.size(); ++t)
        if (!vocab.valid_id(mesh.face_ids[t]))
            throw ValidationError("scene: face " + std::to_string(t) + " has label " +
                                  std::to_string(mesh.face_ids[t]) + " not in vocabulary");

    SceneModel scene;
    scene.mesh = std::move(mesh);
    scene.vocab = std::move(vocab);
    scene.floor_height = detail::modal_floor_height(scene.mesh, scene.vocab.floor_id);
    scene.bvh = build_bvh(scene.mesh);

    Aabb bounds = scene.mesh.aabb().inflated(opt.margin);
    // Slide the grid down so one voxel-center plane coincides with the
    // floor height. Open floors bake to a |z - floor| profile; without the
    // alignment the interpolated field bottoms out at half a cell instead
    // of zero, which poisons contact distances at the most common surface.
    {
        const double cell = opt.cell_size;
        const double k = std::ceil((scene.floor_height - bounds.lo.z) / cell - 0.5);
        bounds.lo.z = scene.floor_height - (k + 0.5) * cell;
    }
    if (!opt.cache_dir.empty()) {
        const std::string key = detail::sdf_cache_key(scene.mesh, opt.cell_size, opt.margin);
        const auto path = std::filesystem::path(opt.cache_dir) / ("sdf_" + key + ".sdf");
        if (std::filesystem::exists(path)) {
            scene.sdf = load_sdf(path.string());
            return scene;
        }
        scene.sdf = bake_sdf(scene.mesh, scene.bvh, bounds, opt.cell_size, opt.max_voxels, opt.jobs);
        std::filesystem::create_directories(opt.cache_dir);
        save_sdf(scene.sdf, path.string());
        return scene;
    }
    scene.sdf = bake_sdf(scene.mesh, scene.bvh, bounds, opt.cell_size, opt.max_voxels, opt.jobs);
    return scene;
}

// ---------------------------------------------------------------------------
// Labels sidecar (JSON): classes, floor_id, per-face labels.
// ---------------------------------------------------------------------------

inline void save_labels(const SemanticVocabulary& vocab, const std::vector<int32_t>& face_labels,
                        const std::string& path) {
    nlohmann::ordered_json j;
    j["classes"] = nlohmann::ordered_json::array();
    for (int32_t i = 0; i < vocab.size(); ++i)
        j["classes"].push_back({{"id", i}, {"name", vocab.names[static_cast<size_t>(i)]}});
    j["floor_id"] = vocab.floor_id;
    j["face_labels"] = face_labels;
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

inline void save_labels(const SceneModel& scene, const std::string& path) {
    save_labels(scene.vocab, scene.face_labels(), path);
}

// Parse just the vocabulary from a labels sidecar.
inline SemanticVocabulary load_vocabulary(const std::string& labels_path) {
    std::ifstream in(labels_path);
    if (!in) throw FormatError("cannot open: " + labels_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(labels_path + ": " + e.what());
    }
    SemanticVocabulary vocab;
    try {
        for (const auto& c : j.at("classes")) {
            const auto id = c.at("id").get<int32_t>();
            if (id != vocab.size())
                throw FormatError(labels_path + ": class ids must be dense and ordered");
            vocab.names.push_back(c.at("name").get<std::string>());
        }
        vocab.floor_id = j.at("floor_id").get<int32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(labels_path + ": " + e.what());
    }
    vocab.validate();
    return vocab;
}

inline void save_scene(const SceneModel& scene, const std::string& mesh_path,
                       const std::string& labels_path) {
    save_obj(scene.mesh, mesh_path);
    save_labels(scene, labels_path);
}

inline SceneModel load_scene(const std::string& mesh_path, const std::string& labels_path,
                             const SceneBuildOptions& opt = {}) {
    TriangleMesh mesh = load_obj(mesh_path);

    nlohmann::json j;
    {
        std::ifstream in(labels_path);
        if (!in) throw FormatError("cannot open: " + labels_path);
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(labels_path + ": " + e.what());
        }
    }

    SemanticVocabulary vocab;
    try {
        for (const auto& c : j.at("classes")) {
            const auto id = c.at("id").get<int32_t>();
            if (id != vocab.size())
                throw FormatError(labels_path + ": class ids must be dense and ordered, got " +
                                  std::to_string(id) + " at position " + std::to_string(vocab.size()));
            vocab.names.push_back(c.at("name").get<std::string>());
        }
        vocab.floor_id = j.at("floor_id").get<int32_t>();
        mesh.face_ids = j.at("face_labels").get<std::vector<int32_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(labels_path + ": " + e.what());
    }
    if (!vocab.valid_id(vocab.floor_id))
        throw ValidationError(labels_path + ": missing floor class (floor_id " +
                              std::to_string(vocab.floor_id) + " not in vocabulary)");
    return attach_scene(std::move(mesh), std::move(vocab), opt);
}

// ---------------------------------------------------------------------------
// Synthetic scenes: a floor rectangle plus labeled boxes. Boxes are
// watertight so the baked sign is trustworthy. Overlaps are allowed (real
// furniture overlaps walls); inverted boxes are not.
// ---------------------------------------------------------------------------

struct RecipeBox {
    std::string cls;   // vocabulary class name
    Vec3 center;       // full 3D center, m
    Vec3 size;         // full extents, m
    double yaw = 0.0;  // radians about +z
};

struct SceneRecipe {
    double floor_width = 4.0;
    double floor_depth = 4.0;
    double floor_height = 0.0;
    Vec3 floor_center{0, 0, 0};
    std::vector<RecipeBox> boxes;
};

inline SceneRecipe load_recipe(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    SceneRecipe r;
    try {
        const auto& f = j.at("floor");
        r.floor_width = f.at("width").get<double>();
        r.floor_depth = f.at("depth").get<double>();
        if (f.contains("height")) r.floor_height = f.at("height").get<double>();
        if (f.contains("center")) {
            r.floor_center.x = f.at("center").at(0).get<double>();
            r.floor_center.y = f.at("center").at(1).get<double>();
        }
        for (const auto& b : j.value("boxes", nlohmann::json::array())) {
            RecipeBox box;
            box.cls = b.at("class").get<std::string>();
            for (int a = 0; a < 3; ++a) {
                (a == 0 ? box.center.x : a == 1 ? box.center.y : box.center.z) =
                    b.at("center").at(static_cast<size_t>(a)).get<double>();
                (a == 0 ? box.size.x : a == 1 ? box.size.y : box.size.z) =
                    b.at("size").at(static_cast<size_t>(a)).get<double>();
            }
            if (b.contains("yaw_deg")) box.yaw = deg_to_rad(b.at("yaw_deg").get<double>());
            r.boxes.push_back(box);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return r;
}

// Labeled mesh for a recipe, without the SDF/BVH attachment.
inline TriangleMesh build_recipe_mesh(const SceneRecipe& recipe, const SemanticVocabulary& vocab) {
    vocab.validate();
    if (recipe.floor_width <= 0.0 || recipe.floor_depth <= 0.0)
        throw ValidationError("synth_scene: floor extent must be positive");

    TriangleMesh mesh = make_floor_rect(recipe.floor_width, recipe.floor_depth,
                                        recipe.floor_height, recipe.floor_center, vocab.floor_id);
    for (size_t b = 0; b < recipe.boxes.size(); ++b) {
        const RecipeBox& box = recipe.boxes[b];
        if (box.size.x <= 0.0 || box.size.y <= 0.0 || box.size.z <= 0.0)
            throw ValidationError("synth_scene: box " + std::to_string(b) + " ('" + box.cls +
                                  "') has non-positive size (inverted box)");
        const int32_t label = vocab.id_of(box.cls);
        if (label < 0)
            throw ValidationError("synth_scene: box " + std::to_string(b) + " has unknown class '" +
                                  box.cls + "'");
        append_mesh(mesh, make_box(box.center, box.size * 0.5, box.yaw, label));
    }
    return mesh;
}

inline SceneModel synth_scene(const SceneRecipe& recipe,
                              const SceneBuildOptions& opt = {},
                              SemanticVocabulary vocab = default_vocabulary()) {
    TriangleMesh mesh = build_recipe_mesh(recipe, vocab);
    return attach_scene(std::move(mesh), std::move(vocab), opt);
}

}  // namespace paak
