// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "paak/animation.hpp"
#include "paak/scene.hpp"
#include "paak/sdf.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Physical plausibility of a placed animation, both evaluated on the same
// SDF the placement optimized against.
//   non-collision: fraction of body vertices with positive SDF, per frame.
//   contact: 1 if any vertex sits within the contact threshold of a
//   surface, per frame.
// ---------------------------------------------------------------------------

struct PlausibilityReport {
    double non_collision = 0.0;  // mean over frames
    double contact = 0.0;        // mean over frames
    std::vector<double> per_frame_non_collision;
    std::vector<uint8_t> per_frame_contact;
};

inline std::vector<double> non_collision_score(const Animation& placed, const SceneModel& scene) {
    std::vector<double> per_frame(placed.frame_count(), 0.0);
    for (size_t f = 0; f < placed.frame_count(); ++f) {
        size_t positive = 0;
        for (const Vec3& v : placed.frames[f].vertices)
            if (sample_sdf(scene.sdf, v).value > 0.0) ++positive;
        per_frame[f] = static_cast<double>(positive) /
                       static_cast<double>(placed.frames[f].vertices.size());
    }
    return per_frame;
}

inline std::vector<uint8_t> contact_score(const Animation& placed, const SceneModel& scene,
                                          double threshold) {
    std::vector<uint8_t> per_frame(placed.frame_count(), 0);
    for (size_t f = 0; f < placed.frame_count(); ++f) {
        for (const Vec3& v : placed.frames[f].vertices) {
            if (std::abs(sample_sdf(scene.sdf, v).value) < threshold) {
                per_frame[f] = 1;
                break;
            }
        }
    }
    return per_frame;
}

inline PlausibilityReport plausibility(const Animation& placed, const SceneModel& scene,
                                       double contact_threshold = 0.02) {
    PlausibilityReport report;
    report.per_frame_non_collision = non_collision_score(placed, scene);
    report.per_frame_contact = contact_score(placed, scene, contact_threshold);
    const auto n = static_cast<double>(placed.frame_count());
    for (const double v : report.per_frame_non_collision) report.non_collision += v;
    report.non_collision /= n;
    for (const uint8_t v : report.per_frame_contact) report.contact += v;
    report.contact /= n;
    return report;
}

}  // namespace paak
