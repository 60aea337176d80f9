// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "paak/animation.hpp"
#include "paak/core.hpp"
#include "paak/scene.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Per-frame importance weighting. Geometric weights mix a semantic term
// (how many vertices a frame activates in the animation's dominant class)
// with a motion term (pelvis speed); active weights mix the learned
// regressor's output with a diversity score.
// ---------------------------------------------------------------------------

struct WeightingConfig {
    double lambda_s = 0.7;  // semantic term
    double lambda_m = 0.3;  // motion term
    double lambda_g = 0.7;  // model term
    double lambda_b = 0.3;  // diversity term

    void validate() const {
        if (lambda_s < 0 || lambda_m < 0 || lambda_g < 0 || lambda_b < 0)
            throw ValidationError("weighting: lambdas must be >= 0");
        if (lambda_s + lambda_m <= 0)
            throw ValidationError("weighting: lambda_s + lambda_m must be > 0");
        if (lambda_g + lambda_b <= 0)
            throw ValidationError("weighting: lambda_g + lambda_b must be > 0");
    }
};

struct KeyframeWeights {
    std::vector<double> w_s;       // dominant-class vertex counts
    std::vector<double> w_m;       // pelvis displacement to next frame
    std::vector<double> k_g;       // geometric mix
    std::vector<double> k_hat_g;   // model prediction, in (0,1)
    std::vector<double> w_d;       // diversity ranks, in [0,1]
    std::vector<double> k_a;       // active mix
};

// Most frequent semantic id across all frames and vertices, floor excluded
// (it would almost always dominate). Occurrences are weighted by contact
// probability: a label only means anything where the vertex is actually
// expected to touch, so filler labels on free-floating vertices cannot
// drown out the interaction class. Ties break to the smallest id.
inline int32_t dominant_semantic_class(const FeatureMap& fm, const SemanticVocabulary& vocab) {
    std::vector<double> mass(static_cast<size_t>(vocab.size()), 0.0);
    std::vector<int64_t> counts(static_cast<size_t>(vocab.size()), 0);
    for (size_t i = 0; i < fm.semantic.size(); ++i) {
        const uint16_t s = fm.semantic[i];
        if (!vocab.valid_id(s)) continue;
        mass[s] += fm.contact[i];
        ++counts[s];
    }
    bool any_non_floor = false;
    double total_mass = 0.0;
    for (int32_t id = 0; id < vocab.size(); ++id) {
        if (id == vocab.floor_id) continue;
        any_non_floor |= counts[static_cast<size_t>(id)] > 0;
        total_mass += mass[static_cast<size_t>(id)];
    }
    if (!any_non_floor)
        throw NoDominantClassError("dominant_semantic_class: every label is the floor class");

    int32_t best = -1;
    double best_score = -1.0;
    for (int32_t id = 0; id < vocab.size(); ++id) {
        if (id == vocab.floor_id) continue;
        // Plain counts break the tie when no non-floor vertex carries contact.
        const double score = total_mass > 0.0 ? mass[static_cast<size_t>(id)]
                                              : static_cast<double>(counts[static_cast<size_t>(id)]);
        if (score > best_score) {
            best_score = score;
            best = id;
        }
    }
    return best;
}

// Per-frame count of vertices labeled with the dominant class.
inline std::vector<double> semantic_weights(const FeatureMap& fm, int32_t dominant) {
    std::vector<double> w(fm.frames, 0.0);
    for (size_t f = 0; f < fm.frames; ++f) {
        int64_t count = 0;
        for (size_t i = 0; i < fm.vertices; ++i)
            if (fm.semantic_at(f, i) == dominant) ++count;
        w[f] = static_cast<double>(count);
    }
    return w;
}

// Pelvis displacement to the following frame; the last frame copies its
// predecessor (the forward difference is undefined there).
inline std::vector<double> motion_weights(const Animation& anim) {
    if (anim.frame_count() < 2)
        throw ValidationError("motion_weights: need at least 2 frames");
    const size_t n = anim.frame_count();
    std::vector<double> w(n, 0.0);
    for (size_t f = 0; f + 1 < n; ++f)
        w[f] = norm(anim.frames[f + 1].pelvis - anim.frames[f].pelvis);
    w[n - 1] = w[n - 2];
    return w;
}

// k_g = lambda_s * w_s/max(w_s) + lambda_m * w_m/max(w_m). A term whose
// max is zero contributes nothing instead of NaN.
inline std::vector<double> geometric_keyframes(const std::vector<double>& w_s,
                                               const std::vector<double>& w_m,
                                               const WeightingConfig& cfg = {}) {
    cfg.validate();
    if (w_s.size() != w_m.size())
        throw ValidationError("geometric_keyframes: w_s and w_m lengths differ");
    double max_s = 0.0, max_m = 0.0;
    for (const double v : w_s) max_s = std::max(max_s, v);
    for (const double v : w_m) max_m = std::max(max_m, v);
    std::vector<double> k(w_s.size(), 0.0);
    for (size_t i = 0; i < k.size(); ++i) {
        const double s = max_s > 0.0 ? w_s[i] / max_s : 0.0;
        const double m = max_m > 0.0 ? w_m[i] / max_m : 0.0;
        k[i] = cfg.lambda_s * s + cfg.lambda_m * m;
    }
    return k;
}

// k_a = lambda_g * k_hat_g + lambda_b * w_d.
inline std::vector<double> active_keyframes(const std::vector<double>& k_hat_g,
                                            const std::vector<double>& w_d,
                                            const WeightingConfig& cfg = {}) {
    cfg.validate();
    if (k_hat_g.size() != w_d.size())
        throw ValidationError("active_keyframes: k_hat_g and w_d lengths differ");
    std::vector<double> k(k_hat_g.size(), 0.0);
    for (size_t i = 0; i < k.size(); ++i)
        k[i] = cfg.lambda_g * k_hat_g[i] + cfg.lambda_b * w_d[i];
    return k;
}

// Max-normalize to [0,1]; all-zero input stays all-zero.
inline std::vector<double> max_normalized(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m = std::max(m, x);
    std::vector<double> out(v.size(), 0.0);
    if (m > 0.0)
        for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] / m;
    return out;
}

}  // namespace paak
