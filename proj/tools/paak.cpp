// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// paak: place human animations into labeled 3D scenes.
//
// Subcommands: bake-sdf, synth, features, keyframes, train-model, place,
// eval, compare, run. All randomness flows from --seed; identical inputs
// and seeds produce byte-identical artifacts.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paak/animation.hpp"
#include "paak/keyframes.hpp"
#include "paak/metrics.hpp"
#include "paak/model.hpp"
#include "paak/pipeline.hpp"
#include "paak/placement.hpp"
#include "paak/scene.hpp"
#include "paak/sdf.hpp"

namespace {

namespace fs = std::filesystem;

std::string default_labels_path(const std::string& mesh_path) {
    fs::path p(mesh_path);
    p.replace_extension("");
    return p.string() + ".labels.json";
}

void write_text(const std::string& path, const std::string& text) {
    if (const auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw paak::FormatError("cannot open for writing: " + path);
    out << text;
    if (!out) throw paak::FormatError("write failed: " + path);
}

struct GlobalFlags {
    std::string config_path;
    uint64_t seed = 0;
    int jobs = 1;
    std::string cache_dir;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
    CLI::Option* cache_opt = nullptr;

    paak::PipelineConfig resolve() const {
        paak::PipelineConfig cfg = paak::load_pipeline_config(config_path);
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (jobs_opt->count() > 0) cfg.jobs = jobs;
        if (cache_opt->count() > 0) cfg.cache_dir = cache_dir;
        return cfg;
    }
};

paak::SemanticVocabulary vocab_from(const std::string& labels_path) {
    return labels_path.empty() ? paak::default_vocabulary() : paak::load_vocabulary(labels_path);
}

std::vector<paak::WeightMode> parse_modes(const std::string& csv) {
    std::vector<paak::WeightMode> modes;
    std::string item;
    std::istringstream ss(csv);
    while (std::getline(ss, item, ','))
        if (!item.empty()) modes.push_back(paak::weight_mode_from_string(item));
    return modes;
}

nlohmann::ordered_json weights_to_json(const paak::WeightsBundle& wb, paak::WeightMode mode,
                                       const paak::PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["mode"] = paak::to_string(mode);
    j["dominant_class"] = wb.dominant_class;
    j["w_s"] = wb.weights.w_s;
    j["w_m"] = wb.weights.w_m;
    j["k_g"] = wb.weights.k_g;
    if (!wb.weights.k_hat_g.empty()) {
        j["k_hat_g"] = wb.weights.k_hat_g;
        j["w_d"] = wb.weights.w_d;
        j["k_a"] = wb.weights.k_a;
    }
    j["applied"] = wb.applied;
    j["config"] = paak::config_to_json(cfg);
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paak: place human animations into labeled 3D scenes"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config_path, "TOML or JSON pipeline config");
    g.seed_opt = app.add_option("--seed", g.seed, "top-level RNG seed");
    g.jobs_opt = app.add_option("--jobs", g.jobs, "worker threads (deterministic output)");
    g.cache_opt = app.add_option("--cache-dir", g.cache_dir, "SDF cache directory");

    // --- bake-sdf ---------------------------------------------------------
    auto* bake = app.add_subcommand("bake-sdf", "bake a scene SDF cache file");
    std::string bake_mesh, bake_labels, bake_out;
    double bake_cell = -1.0, bake_margin = -1.0;
    bake->add_option("scene", bake_mesh, "scene mesh (OBJ)")->required();
    bake->add_option("--labels", bake_labels, "labels sidecar (default: <scene>.labels.json)");
    auto* bake_cell_opt = bake->add_option("--cell-size", bake_cell, "voxel size in meters");
    auto* bake_margin_opt = bake->add_option("--margin", bake_margin, "grid padding in meters");
    bake->add_option("--out", bake_out, "output cache path")->required();
    bake->callback([&] {
        paak::PipelineConfig cfg = g.resolve();
        if (bake_cell_opt->count() > 0) cfg.cell_size = bake_cell;
        if (bake_margin_opt->count() > 0) cfg.margin = bake_margin;
        const std::string labels = bake_labels.empty() ? default_labels_path(bake_mesh) : bake_labels;
        const paak::SceneModel scene = paak::load_scene(bake_mesh, labels, cfg.scene_options());
        paak::save_sdf(scene.sdf, bake_out);
        std::cout << "baked " << scene.sdf.dims[0] << "x" << scene.sdf.dims[1] << "x"
                  << scene.sdf.dims[2] << " voxels at " << cfg.cell_size << " m -> " << bake_out
                  << "\n";
    });

    // --- synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate synthetic scenes and clips");
    synth->require_subcommand(1);

    auto* synth_scene_cmd = synth->add_subcommand("scene", "synthesize a labeled scene");
    std::string sscene_recipe, sscene_out;
    synth_scene_cmd->add_option("--recipe", sscene_recipe, "scene recipe (JSON)")->required();
    synth_scene_cmd->add_option("--out", sscene_out, "output stem (.obj + .labels.json)")
        ->required();
    synth_scene_cmd->callback([&] {
        const paak::SceneRecipe recipe = paak::load_recipe(sscene_recipe);
        const paak::SemanticVocabulary vocab = paak::default_vocabulary();
        const paak::TriangleMesh mesh = paak::build_recipe_mesh(recipe, vocab);
        paak::save_obj(mesh, sscene_out + ".obj");
        paak::save_labels(vocab, mesh.face_ids, sscene_out + ".labels.json");
        std::cout << "wrote " << sscene_out << ".obj (" << mesh.triangle_count()
                  << " faces) and " << sscene_out << ".labels.json\n";
    });

    auto* synth_anim_cmd = synth->add_subcommand("anim", "synthesize a capsule-person clip");
    std::string sanim_kind = "walk", sanim_out;
    paak::SynthAnimParams sanim;
    synth_anim_cmd->add_option("--kind", sanim_kind, "walk|sit|walk_then_sit|jump");
    synth_anim_cmd->add_option("--duration", sanim.duration_s, "seconds");
    synth_anim_cmd->add_option("--fps", sanim.fps, "frames per second");
    synth_anim_cmd->add_option("--speed", sanim.speed, "walk speed m/s");
    synth_anim_cmd->add_option("--seat-height", sanim.seat_height, "seat height m");
    synth_anim_cmd->add_option("--jump-height", sanim.jump_height, "jump apex m");
    synth_anim_cmd->add_option("--out", sanim_out, "output .anm path")->required();
    synth_anim_cmd->callback([&] {
        sanim.seed = g.resolve().seed;
        const paak::Animation anim =
            paak::synth_animation(paak::motion_kind_from_string(sanim_kind), sanim);
        paak::save_animation(anim, sanim_out);
        std::cout << "wrote " << sanim_out << " (" << anim.frame_count() << " frames, "
                  << anim.vertex_count() << " vertices)\n";
    });

    // --- features ---------------------------------------------------------
    auto* feat = app.add_subcommand("features", "estimate or validate interaction features");
    std::string feat_anim, feat_out, feat_from, feat_vocab, feat_seat;
    feat->add_option("anim", feat_anim, "animation (.anm)")->required();
    feat->add_option("--out", feat_out, "output .ftr path")->required();
    feat->add_option("--from", feat_from, "external feature file to validate and re-emit");
    feat->add_option("--vocab", feat_vocab, "labels sidecar providing the class vocabulary");
    auto* feat_seat_opt = feat->add_option("--seat-class", feat_seat, "heuristic seat class");
    feat->callback([&] {
        paak::PipelineConfig cfg = g.resolve();
        if (feat_seat_opt->count() > 0) cfg.seat_class = feat_seat;
        const paak::Animation anim = paak::load_animation(feat_anim);
        const paak::SemanticVocabulary vocab = vocab_from(feat_vocab);
        paak::HeuristicFeatureOptions hopt;
        hopt.seat_class = cfg.seat_class;
        const paak::FeatureMap fm = paak::estimate_features(anim, vocab, feat_from, hopt);
        paak::save_features(fm, feat_out);
        std::cout << "wrote " << feat_out << " (" << fm.frames << "x" << fm.vertices << ")\n";
    });

    // --- keyframes ----------------------------------------------------------
    auto* kf = app.add_subcommand("keyframes", "compute per-frame keyframe weights");
    std::string kf_anim, kf_features, kf_mode = "geometric", kf_model, kf_out, kf_vocab;
    kf->add_option("anim", kf_anim, "animation (.anm)")->required();
    kf->add_option("features", kf_features, "feature file (.ftr) or 'heuristic'")->required();
    kf->add_option("--mode", kf_mode, "geometric|active");
    kf->add_option("--model", kf_model, "pretrained model file (active mode)");
    kf->add_option("--vocab", kf_vocab, "labels sidecar providing the class vocabulary");
    kf->add_option("--out", kf_out, "output weights.json")->required();
    kf->callback([&] {
        paak::PipelineConfig cfg = g.resolve();
        cfg.mode = paak::weight_mode_from_string(kf_mode);
        const paak::Animation anim = paak::load_animation(kf_anim);
        const paak::SemanticVocabulary vocab = vocab_from(kf_vocab);
        paak::HeuristicFeatureOptions hopt;
        hopt.seat_class = cfg.seat_class;
        const paak::FeatureMap fm = paak::estimate_features(
            anim, vocab, kf_features == "heuristic" ? "" : kf_features, hopt);
        std::optional<paak::KeyframeModel> model;
        if (!kf_model.empty()) model = paak::load_model(kf_model);
        const paak::WeightsBundle wb =
            paak::compute_weights(anim, fm, vocab, cfg, model ? &*model : nullptr);
        write_text(kf_out, weights_to_json(wb, cfg.mode, cfg).dump(2) + "\n");
        std::cout << "wrote " << kf_out << "\n";
    });

    // --- train-model --------------------------------------------------------
    auto* train = app.add_subcommand("train-model", "train the keyframe regressor");
    std::string train_data, train_out, train_vocab;
    double train_lr = -1.0;
    uint32_t train_epochs = 0;
    train->add_option("--data", train_data, "directory of paired .anm/.ftr clips")->required();
    auto* train_epochs_opt = train->add_option("--epochs", train_epochs, "training epochs");
    auto* train_lr_opt = train->add_option("--lr", train_lr, "learning rate");
    train->add_option("--vocab", train_vocab, "labels sidecar providing the class vocabulary");
    train->add_option("--out", train_out, "output model file")->required();
    train->callback([&] {
        paak::PipelineConfig cfg = g.resolve();
        if (train_epochs_opt->count() > 0) cfg.epochs = train_epochs;
        if (train_lr_opt->count() > 0) cfg.learning_rate = train_lr;
        const paak::SemanticVocabulary vocab = vocab_from(train_vocab);

        std::vector<std::string> stems;
        for (const auto& entry : fs::directory_iterator(train_data))
            if (entry.path().extension() == ".anm")
                stems.push_back(entry.path().stem().string());
        std::sort(stems.begin(), stems.end());
        if (stems.empty())
            throw paak::StructuralError("train-model: no .anm files in " + train_data);

        std::vector<paak::TrainSample> dataset;
        paak::ModelConfig mc;
        for (const auto& stem : stems) {
            const auto anm = (fs::path(train_data) / (stem + ".anm")).string();
            const auto ftr = (fs::path(train_data) / (stem + ".ftr")).string();
            const paak::Animation anim = paak::load_animation(anm);
            paak::HeuristicFeatureOptions hopt;
            hopt.seat_class = cfg.seat_class;
            const paak::FeatureMap fm = paak::estimate_features(
                anim, vocab, fs::exists(ftr) ? ftr : "", hopt);
            const auto this_mc = cfg.model_config(static_cast<uint32_t>(anim.vertex_count()),
                                                  static_cast<uint32_t>(vocab.size()));
            if (dataset.empty()) mc = this_mc;
            else if (!(this_mc == mc))
                throw paak::StructuralError("train-model: clip " + stem +
                                            " has a different vertex count");
            const auto w_m = paak::motion_weights(anim);
            int32_t dominant;
            try {
                dominant = paak::dominant_semantic_class(fm, vocab);
            } catch (const paak::NoDominantClassError&) {
                dominant = vocab.floor_id;
            }
            const auto w_s = paak::semantic_weights(fm, dominant);
            const auto k_g = paak::geometric_keyframes(w_s, w_m, cfg.weighting);
            paak::TrainSample sample;
            sample.input = paak::build_model_input(anim, fm, vocab, mc.window);
            sample.target = paak::max_normalized(paak::resample_series(k_g, mc.window));
            dataset.push_back(std::move(sample));
        }

        paak::KeyframeModel model = paak::init_model(mc, cfg.seed);
        paak::TrainOptions topt{cfg.epochs, cfg.learning_rate, cfg.batch_size, cfg.seed};
        const paak::TrainResult tr = paak::train_model(model, dataset, topt);
        paak::save_model(model, train_out);
        std::cout << "trained on " << dataset.size() << " clips for " << cfg.epochs
                  << " epochs; loss " << tr.epoch_loss.front() << " -> " << tr.epoch_loss.back()
                  << "; wrote " << train_out << "\n";
    });

    // --- place --------------------------------------------------------------
    auto* place_cmd = app.add_subcommand("place", "optimize a placement into a scene");
    std::string pl_scene, pl_anim, pl_features, pl_labels, pl_weights = "active", pl_model, pl_out;
    double pl_spacing = -1.0;
    place_cmd->add_option("scene", pl_scene, "scene mesh (OBJ)")->required();
    place_cmd->add_option("anim", pl_anim, "animation (.anm)")->required();
    place_cmd->add_option("features", pl_features, "feature file (.ftr) or 'heuristic'")
        ->required();
    place_cmd->add_option("--labels", pl_labels, "labels sidecar (default: <scene>.labels.json)");
    place_cmd->add_option("--weights", pl_weights, "uniform|geometric|active");
    place_cmd->add_option("--model", pl_model, "pretrained model file (active mode)");
    auto* pl_spacing_opt = place_cmd->add_option("--spacing", pl_spacing, "seed grid pitch, m");
    place_cmd->add_option("--out", pl_out, "output result.json")->required();
    place_cmd->callback([&] {
        paak::PipelineConfig cfg = g.resolve();
        cfg.mode = paak::weight_mode_from_string(pl_weights);
        if (pl_spacing_opt->count() > 0) cfg.spacing = pl_spacing;
        paak::PipelineInputs in;
        in.scene_mesh = pl_scene;
        in.scene_labels = pl_labels.empty() ? default_labels_path(pl_scene) : pl_labels;
        in.animation = pl_anim;
        in.features = pl_features == "heuristic" ? "" : pl_features;
        in.model = pl_model;
        const paak::PipelineOutput out = paak::run_pipeline(in, cfg);
        write_text(pl_out, out.result_json.dump(2) + "\n");
        std::cout << "energy " << out.best.energy << " at tau=(" << out.best.pose.tau.x << ", "
                  << out.best.pose.tau.y << ", " << out.best.pose.tau.z << "), theta="
                  << paak::rad_to_deg(out.best.pose.theta) << " deg; wrote " << pl_out << "\n";
    });

    // --- eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "score the physical plausibility of a placement");
    std::string ev_scene, ev_anim, ev_pose, ev_labels, ev_out;
    double ev_threshold = -1.0;
    eval_cmd->add_option("scene", ev_scene, "scene mesh (OBJ)")->required();
    eval_cmd->add_option("anim", ev_anim, "animation (.anm)")->required();
    eval_cmd->add_option("pose", ev_pose, "result.json from 'place' (pose is read from it)")
        ->required();
    eval_cmd->add_option("--labels", ev_labels, "labels sidecar (default: <scene>.labels.json)");
    auto* ev_thresh_opt =
        eval_cmd->add_option("--contact-threshold", ev_threshold, "contact distance, m");
    eval_cmd->add_option("--out", ev_out, "output report.json")->required();
    eval_cmd->callback([&] {
        paak::PipelineConfig cfg = g.resolve();
        if (ev_thresh_opt->count() > 0) cfg.contact_threshold = ev_threshold;
        const std::string labels = ev_labels.empty() ? default_labels_path(ev_scene) : ev_labels;
        const paak::SceneModel scene = paak::load_scene(ev_scene, labels, cfg.scene_options());
        const paak::Animation anim = paak::load_animation(ev_anim);

        nlohmann::json pose_json;
        {
            std::ifstream in(ev_pose);
            if (!in) throw paak::FormatError("cannot open: " + ev_pose);
            try {
                in >> pose_json;
            } catch (const nlohmann::json::exception& e) {
                throw paak::FormatError(ev_pose + ": " + std::string(e.what()));
            }
        }
        const paak::PlacementPose pose = paak::pose_from_json(
            pose_json.contains("pose") ? pose_json.at("pose") : pose_json);

        const paak::Animation placed = paak::transform(anim, pose);
        const paak::PlausibilityReport report =
            paak::plausibility(placed, scene, cfg.contact_threshold);

        nlohmann::ordered_json j;
        j["non_collision"] = report.non_collision;
        j["contact"] = report.contact;
        j["contact_threshold"] = cfg.contact_threshold;
        j["per_frame_non_collision"] = report.per_frame_non_collision;
        j["per_frame_contact"] = report.per_frame_contact;
        j["pose"] = paak::pose_to_json(pose);
        j["inputs"] = {{"scene", paak::file_hash_hex(ev_scene)},
                       {"animation", paak::file_hash_hex(ev_anim)}};
        j["config"] = paak::config_to_json(cfg);
        write_text(ev_out, j.dump(2) + "\n");
        std::cout << "non_collision " << report.non_collision << ", contact " << report.contact
                  << "; wrote " << ev_out << "\n";
    });

    // --- compare -------------------------------------------------------------
    auto* cmp = app.add_subcommand("compare", "run several weight modes and tabulate");
    std::string cmp_scene, cmp_anim, cmp_features, cmp_labels, cmp_recipe, cmp_model, cmp_out;
    std::string cmp_modes = "uniform,geometric,active";
    cmp->add_option("--scene", cmp_scene, "scene mesh (OBJ)");
    cmp->add_option("--labels", cmp_labels, "labels sidecar (default: <scene>.labels.json)");
    cmp->add_option("--recipe", cmp_recipe, "scene recipe (JSON), alternative to --scene");
    cmp->add_option("--anim", cmp_anim, "animation (.anm)")->required();
    cmp->add_option("--features", cmp_features, "feature file (.ftr), empty = heuristic");
    cmp->add_option("--model", cmp_model, "pretrained model file (active mode)");
    cmp->add_option("--modes", cmp_modes, "comma-separated mode list");
    cmp->add_option("--out", cmp_out, "output CSV path")->required();
    cmp->callback([&] {
        const paak::PipelineConfig cfg = g.resolve();
        paak::PipelineInputs in;
        in.scene_mesh = cmp_scene;
        in.scene_labels = !cmp_scene.empty() && cmp_labels.empty()
                              ? default_labels_path(cmp_scene)
                              : cmp_labels;
        in.recipe = cmp_recipe;
        in.animation = cmp_anim;
        in.features = cmp_features;
        in.model = cmp_model;
        const paak::CompareOutput out = paak::compare_modes(in, cfg, parse_modes(cmp_modes));
        write_text(cmp_out, out.csv);
        std::cout << out.csv;
    });

    // --- run ------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "full pipeline: features, keyframes, place, eval");
    std::string run_scene, run_labels, run_recipe, run_anim, run_features, run_model, run_out_dir;
    std::string run_mode;
    run->add_option("--scene", run_scene, "scene mesh (OBJ)");
    run->add_option("--labels", run_labels, "labels sidecar (default: <scene>.labels.json)");
    run->add_option("--recipe", run_recipe, "scene recipe (JSON), alternative to --scene");
    run->add_option("--anim", run_anim, "animation (.anm)")->required();
    run->add_option("--features", run_features, "feature file (.ftr), empty = heuristic");
    run->add_option("--model", run_model, "pretrained model file (active mode)");
    auto* run_mode_opt = run->add_option("--mode", run_mode, "uniform|geometric|active");
    run->add_option("--out-dir", run_out_dir, "artifact directory")->required();
    run->callback([&] {
        paak::PipelineConfig cfg = g.resolve();
        if (run_mode_opt->count() > 0) cfg.mode = paak::weight_mode_from_string(run_mode);
        paak::PipelineInputs in;
        in.scene_mesh = run_scene;
        in.scene_labels = !run_scene.empty() && run_labels.empty()
                              ? default_labels_path(run_scene)
                              : run_labels;
        in.recipe = run_recipe;
        in.animation = run_anim;
        in.features = run_features;
        in.model = run_model;
        in.out_dir = run_out_dir;
        const paak::PipelineOutput out = paak::run_pipeline(in, cfg);
        std::cout << "energy " << out.best.energy << ", non_collision "
                  << out.report.non_collision << ", contact " << out.report.contact
                  << "; artifacts in " << run_out_dir << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const paak::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
