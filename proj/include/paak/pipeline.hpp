// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "paak/animation.hpp"
#include "paak/core.hpp"
#include "paak/io.hpp"
#include "paak/keyframes.hpp"
#include "paak/metrics.hpp"
#include "paak/model.hpp"
#include "paak/placement.hpp"
#include "paak/scene.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Minimal TOML reader covering the config surface: [section] tables,
// bare keys, strings, numbers, booleans and flat arrays. Parsed into JSON
// so the config overlay code has a single representation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string toml_trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline nlohmann::json toml_value(const std::string& raw, const std::string& where) {
    const std::string v = toml_trim(raw);
    if (v.empty()) throw FormatError(where + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw FormatError(where + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '[') {
        if (v.back() != ']') throw FormatError(where + ": unterminated array");
        nlohmann::json arr = nlohmann::json::array();
        std::string inner = v.substr(1, v.size() - 2);
        std::string item;
        int depth = 0;
        bool in_str = false;
        for (const char c : inner) {
            if (c == '"') in_str = !in_str;
            if (!in_str && c == '[') ++depth;
            if (!in_str && c == ']') --depth;
            if (c == ',' && depth == 0 && !in_str) {
                if (!toml_trim(item).empty()) arr.push_back(toml_value(item, where));
                item.clear();
            } else {
                item += c;
            }
        }
        if (!toml_trim(item).empty()) arr.push_back(toml_value(item, where));
        return arr;
    }
    try {
        size_t used = 0;
        if (v.find('.') == std::string::npos && v.find('e') == std::string::npos &&
            v.find('E') == std::string::npos) {
            const long long i = std::stoll(v, &used);
            if (used == v.size()) return i;
        }
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (...) {
    }
    throw FormatError(where + ": cannot parse value '" + v + "'");
}

}  // namespace detail

inline nlohmann::json parse_toml(std::istream& in, const std::string& path) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);
        // Strip comments outside strings.
        bool in_str = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) {
                line = line.substr(0, i);
                break;
            }
        }
        const std::string s = detail::toml_trim(line);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw FormatError(where + ": malformed table header");
            const std::string name = detail::toml_trim(s.substr(1, s.size() - 2));
            if (name.empty()) throw FormatError(where + ": empty table name");
            root[name] = nlohmann::json::object();
            table = &root[name];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw FormatError(where + ": expected key = value");
        const std::string key = detail::toml_trim(s.substr(0, eq));
        if (key.empty()) throw FormatError(where + ": empty key");
        (*table)[key] = detail::toml_value(s.substr(eq + 1), where);
    }
    return root;
}

inline nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        try {
            nlohmann::json j;
            in >> j;
            return j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path + ": " + e.what());
        }
    }
    return parse_toml(in, path);
}

// ---------------------------------------------------------------------------
// Pipeline configuration. Every knob has a default; the resolved config is
// echoed into all output artifacts for provenance.
// ---------------------------------------------------------------------------

enum class WeightMode { uniform, geometric, active };

inline WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "uniform") return WeightMode::uniform;
    if (s == "geometric") return WeightMode::geometric;
    if (s == "active") return WeightMode::active;
    throw ValidationError("unknown weight mode '" + s + "' (expected uniform|geometric|active)");
}

inline std::string to_string(WeightMode m) {
    switch (m) {
        case WeightMode::uniform: return "uniform";
        case WeightMode::geometric: return "geometric";
        default: return "active";
    }
}

struct PipelineConfig {
    WeightMode mode = WeightMode::active;
    uint64_t seed = 0;
    int jobs = 1;
    std::string cache_dir;

    WeightingConfig weighting;
    LossConfig loss;

    double cell_size = 0.05;
    double margin = 0.75;
    uint64_t max_voxels = kDefaultMaxVoxels;

    double spacing = 0.5;
    double step_xy = 0.25;
    double step_z = 0.10;
    double step_theta_deg = 15.0;
    double min_step_translation = 0.01;
    double min_step_theta_deg = 1.0;
    uint32_t max_refine_evals = 200;
    uint32_t top_k = 10;

    uint32_t window = 60;
    uint32_t m1 = 8;
    uint32_t m2 = 32;
    uint32_t m3 = 64;

    uint32_t epochs = 200;
    double learning_rate = 0.05;
    uint32_t batch_size = 4;

    std::string seat_class = "chair";
    double contact_threshold = 0.02;

    SceneBuildOptions scene_options() const {
        return SceneBuildOptions{cell_size, margin, max_voxels, jobs, cache_dir};
    }

    PlaceConfig place_config() const {
        PlaceConfig pc;
        pc.loss = loss;
        pc.spacing = spacing;
        pc.step_xy = step_xy;
        pc.step_z = step_z;
        pc.step_theta = deg_to_rad(step_theta_deg);
        pc.min_step_translation = min_step_translation;
        pc.min_step_theta = deg_to_rad(min_step_theta_deg);
        pc.max_refine_evals = max_refine_evals;
        pc.top_k = top_k;
        return pc;
    }

    ModelConfig model_config(uint32_t vertices, uint32_t classes) const {
        return ModelConfig{window, vertices, 4 + classes, m1, m2, m3};
    }
};

inline nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(c.mode);
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["cache_dir"] = c.cache_dir;
    j["weighting"] = {{"lambda_s", c.weighting.lambda_s}, {"lambda_m", c.weighting.lambda_m},
                      {"lambda_g", c.weighting.lambda_g}, {"lambda_b", c.weighting.lambda_b}};
    j["loss"] = {{"lambda_sem", c.loss.lambda_sem}, {"lambda_pen", c.loss.lambda_pen},
                 {"contact_clamp", c.loss.contact_clamp}};
    j["sdf"] = {{"cell_size", c.cell_size}, {"margin", c.margin}, {"max_voxels", c.max_voxels}};
    j["placement"] = {{"spacing", c.spacing}, {"step_xy", c.step_xy}, {"step_z", c.step_z},
                      {"step_theta_deg", c.step_theta_deg},
                      {"min_step_translation", c.min_step_translation},
                      {"min_step_theta_deg", c.min_step_theta_deg},
                      {"max_refine_evals", c.max_refine_evals}, {"top_k", c.top_k}};
    j["model"] = {{"window", c.window}, {"m1", c.m1}, {"m2", c.m2}, {"m3", c.m3}};
    j["train"] = {{"epochs", c.epochs}, {"learning_rate", c.learning_rate},
                  {"batch_size", c.batch_size}};
    j["features"] = {{"seat_class", c.seat_class}};
    j["metrics"] = {{"contact_threshold", c.contact_threshold}};
    return j;
}

// Overlay file values onto defaults. Unknown keys are errors; silent typos
// in experiment configs are worse than loud ones.
inline void apply_config_json(PipelineConfig& c, const nlohmann::json& j,
                              const std::string& where) {
    const auto get = [&](const nlohmann::json& obj, const char* key, auto& target) {
        if (!obj.contains(key)) return;
        try {
            target = obj.at(key).get<std::decay_t<decltype(target)>>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(where + ": bad value for '" + key + "': " + e.what());
        }
    };
    static const std::vector<std::string> known_sections = {
        "mode", "seed", "jobs", "cache_dir", "weighting", "loss", "sdf",
        "placement", "model", "train", "features", "metrics"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool known = false;
        for (const auto& k : known_sections) known |= (k == key);
        if (!known) throw ValidationError(where + ": unknown config key '" + key + "'");
    }

    if (j.contains("mode")) c.mode = weight_mode_from_string(j.at("mode").get<std::string>());
    get(j, "seed", c.seed);
    get(j, "jobs", c.jobs);
    get(j, "cache_dir", c.cache_dir);
    if (j.contains("weighting")) {
        const auto& w = j.at("weighting");
        get(w, "lambda_s", c.weighting.lambda_s);
        get(w, "lambda_m", c.weighting.lambda_m);
        get(w, "lambda_g", c.weighting.lambda_g);
        get(w, "lambda_b", c.weighting.lambda_b);
    }
    if (j.contains("loss")) {
        const auto& l = j.at("loss");
        get(l, "lambda_sem", c.loss.lambda_sem);
        get(l, "lambda_pen", c.loss.lambda_pen);
        get(l, "contact_clamp", c.loss.contact_clamp);
    }
    if (j.contains("sdf")) {
        const auto& s = j.at("sdf");
        get(s, "cell_size", c.cell_size);
        get(s, "margin", c.margin);
        get(s, "max_voxels", c.max_voxels);
    }
    if (j.contains("placement")) {
        const auto& p = j.at("placement");
        get(p, "spacing", c.spacing);
        get(p, "step_xy", c.step_xy);
        get(p, "step_z", c.step_z);
        get(p, "step_theta_deg", c.step_theta_deg);
        get(p, "min_step_translation", c.min_step_translation);
        get(p, "min_step_theta_deg", c.min_step_theta_deg);
        get(p, "max_refine_evals", c.max_refine_evals);
        get(p, "top_k", c.top_k);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        get(m, "window", c.window);
        get(m, "m1", c.m1);
        get(m, "m2", c.m2);
        get(m, "m3", c.m3);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        get(t, "epochs", c.epochs);
        get(t, "learning_rate", c.learning_rate);
        get(t, "batch_size", c.batch_size);
    }
    if (j.contains("features")) get(j.at("features"), "seat_class", c.seat_class);
    if (j.contains("metrics")) get(j.at("metrics"), "contact_threshold", c.contact_threshold);
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
    PipelineConfig c;
    if (!path.empty()) apply_config_json(c, load_config_file(path), path);
    return c;
}

// ---------------------------------------------------------------------------
// Keyframe weighting per mode. The active path trains the regressor on the
// clip's own geometric targets when no pretrained model is supplied; either
// way the diversity score comes from the model actually used.
// ---------------------------------------------------------------------------

struct WeightsBundle {
    KeyframeWeights weights;
    std::vector<double> applied;  // the k actually fed to the optimizer
    int32_t dominant_class = -1;
};

inline WeightsBundle compute_weights(const Animation& anim, const FeatureMap& fm,
                                     const SemanticVocabulary& vocab, const PipelineConfig& cfg,
                                     const KeyframeModel* pretrained = nullptr) {
    WeightsBundle out;
    const size_t n = anim.frame_count();

    int32_t dominant;
    try {
        dominant = dominant_semantic_class(fm, vocab);
    } catch (const NoDominantClassError&) {
        dominant = vocab.floor_id;  // documented fallback
    }
    out.dominant_class = dominant;
    out.weights.w_s = semantic_weights(fm, dominant);
    out.weights.w_m = motion_weights(anim);
    out.weights.k_g = geometric_keyframes(out.weights.w_s, out.weights.w_m, cfg.weighting);

    if (cfg.mode == WeightMode::uniform) {
        out.applied.assign(n, 1.0);
        return out;
    }
    if (cfg.mode == WeightMode::geometric) {
        out.applied = out.weights.k_g;
        return out;
    }

    const ModelConfig mc = cfg.model_config(static_cast<uint32_t>(anim.vertex_count()),
                                            static_cast<uint32_t>(vocab.size()));
    KeyframeModel model;
    if (pretrained) {
        model = *pretrained;
        if (!(model.cfg == mc))
            throw StructuralError("compute_weights: pretrained model shape does not match inputs");
    } else {
        model = init_model(mc, cfg.seed);
        TrainSample sample;
        sample.input = build_model_input(anim, fm, vocab, mc.window);
        sample.target = max_normalized(resample_series(out.weights.k_g, mc.window));
        TrainOptions topt{cfg.epochs, cfg.learning_rate, cfg.batch_size, cfg.seed};
        train_model(model, {sample}, topt);
    }

    const ModelInput input = build_model_input(anim, fm, vocab, mc.window);
    const ForwardTrace trace = model_forward(model, input);
    out.weights.k_hat_g = resample_series(trace.k_hat_g, n);
    out.weights.w_d = resample_series(diversity_scores(model, input), n);
    out.weights.k_a = active_keyframes(out.weights.k_hat_g, out.weights.w_d, cfg.weighting);
    out.applied = out.weights.k_a;
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline: features -> keyframes -> placement -> plausibility.
// ---------------------------------------------------------------------------

struct PipelineInputs {
    std::string scene_mesh;    // OBJ path; requires scene_labels
    std::string scene_labels;  // JSON sidecar
    std::string recipe;        // alternative: synthesize the scene
    std::string animation;
    std::string features;      // empty = built-in heuristic
    std::string model;         // empty = train on the fly in active mode
    std::string out_dir;       // empty = do not write artifacts
};

inline SceneModel resolve_scene(const PipelineInputs& in, const PipelineConfig& cfg) {
    if (!in.recipe.empty()) return synth_scene(load_recipe(in.recipe), cfg.scene_options());
    if (in.scene_mesh.empty() || in.scene_labels.empty())
        throw ValidationError("pipeline: need either a scene recipe or mesh + labels paths");
    return load_scene(in.scene_mesh, in.scene_labels, cfg.scene_options());
}

inline std::string features_content_hash(const FeatureMap& fm) {
    uint64_t h = fnv1a64(fm.contact.data(), fm.contact.size() * sizeof(float));
    h = fnv1a64(fm.semantic.data(), fm.semantic.size() * sizeof(uint16_t), h);
    return hex64(h);
}

struct PipelineOutput {
    PlacementResult best;
    std::vector<PlacementResult> prospects;
    PlausibilityReport report;
    WeightsBundle weights;
    nlohmann::ordered_json result_json;
    nlohmann::ordered_json report_json;
};

inline nlohmann::ordered_json pose_to_json(const PlacementPose& pose) {
    return {{"tau", {pose.tau.x, pose.tau.y, pose.tau.z}},
            {"theta_deg", rad_to_deg(pose.theta)}};
}

inline PlacementPose pose_from_json(const nlohmann::json& j) {
    PlacementPose pose;
    pose.tau = {j.at("tau").at(0).get<double>(), j.at("tau").at(1).get<double>(),
                j.at("tau").at(2).get<double>()};
    pose.theta = wrap_angle(deg_to_rad(j.at("theta_deg").get<double>()));
    return pose;
}

inline PipelineOutput run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg) {
    const SceneModel scene = resolve_scene(in, cfg);
    const Animation anim = load_animation(in.animation);

    HeuristicFeatureOptions hopt;
    hopt.seat_class = cfg.seat_class;
    const FeatureMap fm = estimate_features(anim, scene.vocab, in.features, hopt);

    std::optional<KeyframeModel> pretrained;
    if (!in.model.empty()) pretrained = load_model(in.model);

    const WeightsBundle wb =
        compute_weights(anim, fm, scene.vocab, cfg, pretrained ? &*pretrained : nullptr);

    const PlaceOutcome outcome = place(anim, fm, wb.applied, scene, cfg.place_config());
    const Animation placed = transform(anim, outcome.best.pose);
    const PlausibilityReport report = plausibility(placed, scene, cfg.contact_threshold);

    nlohmann::ordered_json inputs_json;
    inputs_json["scene"] = !in.recipe.empty()
                               ? file_hash_hex(in.recipe)
                               : file_hash_hex(in.scene_mesh) + ":" + file_hash_hex(in.scene_labels);
    inputs_json["animation"] = file_hash_hex(in.animation);
    inputs_json["features"] =
        in.features.empty() ? "heuristic:" + features_content_hash(fm) : file_hash_hex(in.features);

    PipelineOutput out;
    out.best = outcome.best;
    out.prospects = outcome.prospects;
    out.report = report;
    out.weights = wb;

    auto& rj = out.result_json;
    rj["mode"] = to_string(cfg.mode);
    rj["pose"] = pose_to_json(outcome.best.pose);
    rj["energy"] = outcome.best.energy;
    rj["evaluations"] = outcome.best.evaluations;
    rj["per_frame"] = nlohmann::ordered_json::array();
    for (const auto& row : outcome.best.per_frame)
        rj["per_frame"].push_back(
            {{"weight", row.weight}, {"afford", row.afford}, {"pen", row.pen}});
    rj["prospects"] = nlohmann::ordered_json::array();
    for (const auto& p : outcome.prospects)
        rj["prospects"].push_back({{"pose", pose_to_json(p.pose)}, {"energy", p.energy},
                                   {"evaluations", p.evaluations}});
    rj["inputs"] = inputs_json;
    rj["config"] = config_to_json(cfg);

    auto& pj = out.report_json;
    pj["mode"] = to_string(cfg.mode);
    pj["non_collision"] = report.non_collision;
    pj["contact"] = report.contact;
    pj["contact_threshold"] = cfg.contact_threshold;
    pj["per_frame_non_collision"] = report.per_frame_non_collision;
    pj["per_frame_contact"] = report.per_frame_contact;
    pj["pose"] = pose_to_json(outcome.best.pose);
    pj["inputs"] = inputs_json;
    pj["config"] = config_to_json(cfg);

    if (!in.out_dir.empty()) {
        std::filesystem::create_directories(in.out_dir);
        const auto write = [&](const std::string& name, const nlohmann::ordered_json& j) {
            const auto path = std::filesystem::path(in.out_dir) / name;
            std::ofstream f(path);
            if (!f) throw FormatError("cannot open for writing: " + path.string());
            f << j.dump(2) << '\n';
        };
        write("result.json", out.result_json);
        write("report.json", out.report_json);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mode comparison on one scene/clip pair: one CSV row per mode, all modes
// sharing a single loaded scene (and therefore a single SDF bake).
// ---------------------------------------------------------------------------

struct CompareRow {
    std::string mode;
    double energy = 0.0;
    double non_collision = 0.0;
    double contact = 0.0;
};

struct CompareOutput {
    std::vector<CompareRow> rows;
    std::string csv;
};

inline CompareOutput compare_modes(const PipelineInputs& in, const PipelineConfig& base_cfg,
                                   const std::vector<WeightMode>& modes) {
    if (modes.size() < 2)
        throw ValidationError("compare: need at least 2 modes");
    const SceneModel scene = resolve_scene(in, base_cfg);
    const Animation anim = load_animation(in.animation);
    HeuristicFeatureOptions hopt;
    hopt.seat_class = base_cfg.seat_class;
    const FeatureMap fm = estimate_features(anim, scene.vocab, in.features, hopt);

    std::optional<KeyframeModel> pretrained;
    if (!in.model.empty()) pretrained = load_model(in.model);

    const std::string scene_hash = !in.recipe.empty()
                                       ? file_hash_hex(in.recipe)
                                       : file_hash_hex(in.scene_mesh);
    const std::string anim_hash = file_hash_hex(in.animation);
    const std::string feat_hash = in.features.empty()
                                      ? "heuristic:" + features_content_hash(fm)
                                      : file_hash_hex(in.features);

    CompareOutput out;
    std::ostringstream csv;
    csv << "mode,energy,non_collision,contact,scene_hash,animation_hash,features_hash\n";
    char buf[96];
    for (const WeightMode mode : modes) {
        PipelineConfig cfg = base_cfg;
        cfg.mode = mode;
        const WeightsBundle wb =
            compute_weights(anim, fm, scene.vocab, cfg, pretrained ? &*pretrained : nullptr);
        const PlaceOutcome outcome = place(anim, fm, wb.applied, scene, cfg.place_config());
        const Animation placed = transform(anim, outcome.best.pose);
        const PlausibilityReport report = plausibility(placed, scene, cfg.contact_threshold);

        CompareRow row{to_string(mode), outcome.best.energy, report.non_collision, report.contact};
        out.rows.push_back(row);
        std::snprintf(buf, sizeof(buf), "%.10g,%.6f,%.6f", row.energy, row.non_collision,
                      row.contact);
        csv << row.mode << ',' << buf << ',' << scene_hash << ',' << anim_hash << ',' << feat_hash
            << '\n';
    }
    out.csv = csv.str();
    return out;
}

}  // namespace paak
