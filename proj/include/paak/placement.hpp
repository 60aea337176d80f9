// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "paak/animation.hpp"
#include "paak/core.hpp"
#include "paak/scene.hpp"
#include "paak/sdf.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Placement objective. Per frame, the affordance loss pulls high-contact
// vertices onto correctly-labeled surfaces and the penetration loss pushes
// every vertex out of solid geometry; the total energy is the keyframe-
// weighted sum over frames. Losses are per-vertex means so the lambda
// defaults hold across body resolutions.
// ---------------------------------------------------------------------------

struct LossConfig {
    double lambda_sem = 1.0;     // semantic mismatch weight
    double lambda_pen = 10.0;    // penetration weight
    double contact_clamp = 0.5;  // m, contact distance saturation

    void validate() const {
        if (lambda_sem < 0 || lambda_pen < 0 || contact_clamp < 0)
            throw ValidationError("loss: coefficients must be >= 0");
    }
};

struct FrameLosses {
    double afford = 0.0;
    double pen = 0.0;
};

inline FrameLosses frame_losses(const std::vector<Vec3>& vertices, const float* contact,
                                const uint16_t* semantic, const SceneModel& scene,
                                const LossConfig& cfg = {}) {
    double contact_term = 0.0, mismatch_term = 0.0, pen_term = 0.0;
    for (size_t i = 0; i < vertices.size(); ++i) {
        const SdfSample s = sample_sdf(scene.sdf, vertices[i]);
        const double fc = contact[i];
        contact_term += fc * std::min(std::abs(s.value), cfg.contact_clamp);
        if (semantic[i] != s.semantic) mismatch_term += fc;
        if (s.value < 0.0) pen_term += -s.value;
    }
    const double inv = 1.0 / static_cast<double>(vertices.size());
    return {(contact_term + cfg.lambda_sem * mismatch_term) * inv,
            cfg.lambda_pen * pen_term * inv};
}

inline FrameLosses frame_losses(const BodyFrame& frame, const FeatureMap& fm, size_t frame_index,
                                const SceneModel& scene, const LossConfig& cfg = {}) {
    return frame_losses(frame.vertices, &fm.contact[fm.index(frame_index, 0)],
                        &fm.semantic[fm.index(frame_index, 0)], scene, cfg);
}

struct FrameLossRow {
    double afford = 0.0;
    double pen = 0.0;
    double weight = 0.0;
};

struct PlacementResult {
    PlacementPose pose;
    double energy = 0.0;
    std::vector<FrameLossRow> per_frame;
    uint64_t evaluations = 0;
};

// Exact objective with the per-frame breakdown: transform, then the
// weighted sum of frame losses.
inline PlacementResult energy(const Animation& anim, const FeatureMap& fm,
                              const std::vector<double>& weights, const SceneModel& scene,
                              const PlacementPose& pose, const LossConfig& cfg = {}) {
    cfg.validate();
    if (weights.size() != anim.frame_count())
        throw ValidationError("energy: weight count does not match frame count");
    const Animation placed = transform(anim, pose);
    PlacementResult result;
    result.pose = pose;
    result.pose.theta = wrap_angle(pose.theta);
    result.per_frame.resize(placed.frame_count());
    for (size_t f = 0; f < placed.frame_count(); ++f) {
        const FrameLosses l = frame_losses(placed.frames[f], fm, f, scene, cfg);
        result.per_frame[f] = {l.afford, l.pen, weights[f]};
        result.energy += weights[f] * (l.afford + l.pen);
    }
    result.evaluations = 1;
    return result;
}

// ---------------------------------------------------------------------------
// Fast pose evaluator. Caches pelvis-anchored local coordinates, applies a
// yaw once per rotation, then sweeps translations with an early abort that
// is exact for minimum searches: frame losses are non-negative, so once the
// running sum exceeds the bound the final energy must too.
// ---------------------------------------------------------------------------

class PlacementEvaluator {
public:
    PlacementEvaluator(const Animation& anim, const FeatureMap& fm,
                       const std::vector<double>& weights, const SceneModel& scene,
                       const LossConfig& cfg = {})
        : grid_(&scene.sdf), loss_(cfg), weights_(weights),
          frames_(anim.frame_count()), verts_(anim.vertex_count()),
          center_(rotation_center(anim)) {
        cfg.validate();
        if (weights.size() != frames_)
            throw ValidationError("evaluator: weight count does not match frame count");
        const size_t total = frames_ * verts_;
        local_x_.resize(total);
        local_y_.resize(total);
        z_.resize(total);
        rot_x_.resize(total);
        rot_y_.resize(total);
        contact_.resize(total);
        semantic_.resize(total);
        for (size_t f = 0; f < frames_; ++f) {
            for (size_t v = 0; v < verts_; ++v) {
                const size_t i = f * verts_ + v;
                const Vec3& p = anim.frames[f].vertices[v];
                local_x_[i] = p.x - center_.x;
                local_y_[i] = p.y - center_.y;
                z_[i] = p.z;
                contact_[i] = fm.contact_at(f, v);
                semantic_[i] = fm.semantic_at(f, v);
            }
        }
        // Heavy frames first: during bounded minimum searches the running
        // sum then crosses the abort threshold after a frame or two on
        // hopeless poses instead of at the end of the clip.
        frame_order_.resize(frames_);
        std::iota(frame_order_.begin(), frame_order_.end(), size_t{0});
        std::stable_sort(frame_order_.begin(), frame_order_.end(),
                         [&](size_t a, size_t b) { return weights_[a] > weights_[b]; });
        set_rotation(0.0);
    }

    size_t frame_count() const { return frames_; }

    void set_rotation(double theta) {
        theta_ = theta;
        const double cs = std::cos(theta), sn = std::sin(theta);
        for (size_t i = 0; i < rot_x_.size(); ++i) {
            rot_x_[i] = center_.x + cs * local_x_[i] - sn * local_y_[i];
            rot_y_[i] = center_.y + sn * local_x_[i] + cs * local_y_[i];
        }
    }

    double rotation() const { return theta_; }

    // Energy at translation tau under the current rotation. If the running
    // sum exceeds abort_above, returns the partial sum (> abort_above),
    // which is a lower bound of the true energy.
    double energy_at(const Vec3& tau,
                     double abort_above = std::numeric_limits<double>::infinity()) const {
        double total = 0.0;
        const double inv = 1.0 / static_cast<double>(verts_);
        for (const size_t f : frame_order_) {
            const double k = weights_[f];
            if (k == 0.0) break;  // sorted descending; the rest are zero too
            double contact_term = 0.0, mismatch_term = 0.0, pen_term = 0.0;
            const size_t base = f * verts_;
            for (size_t v = 0; v < verts_; ++v) {
                const size_t i = base + v;
                const Vec3 p{rot_x_[i] + tau.x, rot_y_[i] + tau.y, z_[i] + tau.z};
                const SdfSample s = sample_sdf(*grid_, p);
                const double fc = contact_[i];
                contact_term += fc * std::min(std::abs(s.value), loss_.contact_clamp);
                if (semantic_[i] != s.semantic) mismatch_term += fc;
                if (s.value < 0.0) pen_term += -s.value;
            }
            total += k * ((contact_term + loss_.lambda_sem * mismatch_term) +
                          loss_.lambda_pen * pen_term) * inv;
            if (total > abort_above) return total;
        }
        return total;
    }

    double energy_of(const PlacementPose& pose,
                     double abort_above = std::numeric_limits<double>::infinity()) {
        if (pose.theta != theta_) set_rotation(pose.theta);
        return energy_at(pose.tau, abort_above);
    }

private:
    const SdfGrid* grid_;
    LossConfig loss_;
    std::vector<double> weights_;
    size_t frames_, verts_;
    Vec3 center_;
    double theta_ = 0.0;
    std::vector<double> local_x_, local_y_, z_, rot_x_, rot_y_;
    std::vector<size_t> frame_order_;  // descending weight
    std::vector<float> contact_;
    std::vector<uint16_t> semantic_;
};

// ---------------------------------------------------------------------------
// Seeding: positions on a regular xy-grid across the floor bounding
// rectangle (endpoints inclusive), 12 yaw angles each, z chosen so the
// animation's lowest vertex starts on the floor.
// ---------------------------------------------------------------------------

inline std::vector<PlacementPose> seed_grid(const SceneModel& scene, const Animation& anim,
                                            double spacing) {
    if (spacing <= 0.0) throw ValidationError("seed_grid: spacing must be > 0");
    double xmin, xmax, ymin, ymax;
    scene.floor_rect(xmin, xmax, ymin, ymax);

    const auto steps = [&](double lo, double hi) {
        return static_cast<size_t>(std::floor((hi - lo) / spacing + 1e-9)) + 1;
    };
    const size_t nx = steps(xmin, xmax);
    const size_t ny = steps(ymin, ymax);

    const Vec3 anchor = rotation_center(anim);
    const double tau_z = scene.floor_height - anim.min_vertex_z();

    std::vector<PlacementPose> seeds;
    seeds.reserve(nx * ny * 12);
    for (size_t ix = 0; ix < nx; ++ix) {
        for (size_t iy = 0; iy < ny; ++iy) {
            const double gx = xmin + static_cast<double>(ix) * spacing;
            const double gy = ymin + static_cast<double>(iy) * spacing;
            for (int a = 0; a < 12; ++a) {
                PlacementPose pose;
                pose.tau = {gx - anchor.x, gy - anchor.y, tau_z};
                pose.theta = wrap_angle(deg_to_rad(30.0 * a));
                seeds.push_back(pose);
            }
        }
    }
    return seeds;
}

// ---------------------------------------------------------------------------
// Full placement: evaluate every seed, keep the lowest-energy prospects,
// refine each with accept-only-improvement pattern search over
// (tau_x, tau_y, tau_z, theta), and return the best refined result.
// Derivative-free search because the sampled SDF is only C0 and the
// semantic indicator is discontinuous.
// ---------------------------------------------------------------------------

struct PlaceConfig {
    LossConfig loss;
    double spacing = 0.5;            // m, seed grid pitch
    double step_xy = 0.25;           // m, initial pattern steps
    double step_z = 0.10;
    double step_theta = deg_to_rad(15.0);
    double min_step_translation = 0.01;        // m, terminal resolution
    double min_step_theta = deg_to_rad(1.0);
    uint32_t max_refine_evals = 200;  // per prospect
    uint32_t top_k = 10;
};

struct PlaceOutcome {
    PlacementResult best;                    // evaluations = total across seeds + refinement
    std::vector<PlacementResult> prospects;  // refined top-k in selection order
};

namespace detail {

struct RefineState {
    PlacementPose pose;
    double energy = 0.0;
    uint64_t evals = 0;
};

inline RefineState refine_prospect(PlacementEvaluator& eval, const PlacementPose& seed,
                                   double seed_energy, const PlaceConfig& cfg) {
    RefineState st;
    st.pose = seed;
    st.energy = seed_energy;

    double step[4] = {cfg.step_xy, cfg.step_xy, cfg.step_z, cfg.step_theta};
    const double min_step[4] = {cfg.min_step_translation, cfg.min_step_translation,
                                cfg.min_step_translation, cfg.min_step_theta};

    while (st.evals < cfg.max_refine_evals) {
        PlacementPose best_pose = st.pose;
        double best_energy = st.energy;
        bool improved = false;
        for (int axis = 0; axis < 4 && st.evals < cfg.max_refine_evals; ++axis) {
            for (const double sign : {+1.0, -1.0}) {
                if (st.evals >= cfg.max_refine_evals) break;
                PlacementPose cand = st.pose;
                switch (axis) {
                    case 0: cand.tau.x += sign * step[0]; break;
                    case 1: cand.tau.y += sign * step[1]; break;
                    case 2: cand.tau.z += sign * step[2]; break;
                    case 3: cand.theta = wrap_angle(cand.theta + sign * step[3]); break;
                }
                const double e = eval.energy_of(cand, best_energy);
                ++st.evals;
                if (e < best_energy) {
                    best_energy = e;
                    best_pose = cand;
                    improved = true;
                }
            }
        }
        if (improved) {
            st.pose = best_pose;
            st.energy = best_energy;
            continue;
        }
        bool done = true;
        for (int axis = 0; axis < 4; ++axis) {
            step[axis] *= 0.5;
            if (step[axis] >= min_step[axis]) done = false;
        }
        if (done) break;
    }
    return st;
}

}  // namespace detail

inline PlaceOutcome place(const Animation& anim, const FeatureMap& fm,
                          const std::vector<double>& weights, const SceneModel& scene,
                          const PlaceConfig& cfg = {}) {
    const std::vector<PlacementPose> seeds = seed_grid(scene, anim, cfg.spacing);
    PlacementEvaluator eval(anim, fm, weights, scene, cfg.loss);

    // Seed sweep. Seeds arrive position-major; grouping evaluations by yaw
    // shares each rotation pass across all grid positions.
    std::vector<double> seed_energy(seeds.size());
    for (int a = 0; a < 12; ++a) {
        eval.set_rotation(wrap_angle(deg_to_rad(30.0 * a)));
        for (size_t s = static_cast<size_t>(a); s < seeds.size(); s += 12)
            seed_energy[s] = eval.energy_at(seeds[s].tau);
    }
    uint64_t total_evals = seeds.size();

    const size_t keep = std::min<size_t>(std::max<uint32_t>(1, cfg.top_k), seeds.size());
    std::vector<size_t> by_energy(seeds.size());
    std::iota(by_energy.begin(), by_energy.end(), 0u);
    std::partial_sort(by_energy.begin(), by_energy.begin() + static_cast<long>(keep),
                      by_energy.end(), [&](size_t a, size_t b) {
                          return seed_energy[a] < seed_energy[b] ||
                                 (seed_energy[a] == seed_energy[b] && a < b);
                      });

    PlaceOutcome outcome;
    outcome.prospects.reserve(keep);
    size_t best_prospect = 0;
    for (size_t p = 0; p < keep; ++p) {
        const size_t s = by_energy[p];
        const detail::RefineState st =
            detail::refine_prospect(eval, seeds[s], seed_energy[s], cfg);
        total_evals += st.evals;

        PlacementResult r;
        r.pose = st.pose;
        r.energy = st.energy;
        r.evaluations = st.evals;
        outcome.prospects.push_back(r);
        if (st.energy < outcome.prospects[best_prospect].energy) best_prospect = p;
    }

    // Recompute the winner through the exact path to attach the per-frame
    // loss table; the evaluator and the exact path agree to roundoff.
    outcome.best = energy(anim, fm, weights, scene,
                          outcome.prospects[best_prospect].pose, cfg.loss);
    outcome.best.evaluations = total_evals;
    return outcome;
}

}  // namespace paak
