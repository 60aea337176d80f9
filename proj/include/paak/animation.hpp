// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "paak/core.hpp"
#include "paak/io.hpp"
#include "paak/mesh.hpp"
#include "paak/scene.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Body-mesh time series. All frames share one topology; each frame carries
// vertex positions and a pelvis joint. Immutable after load.
// ---------------------------------------------------------------------------

struct BodyFrame {
    std::vector<Vec3> vertices;
    Vec3 pelvis;
};

struct Animation {
    std::vector<std::array<uint32_t, 3>> topology;
    std::vector<BodyFrame> frames;
    double fps = 30.0;

    size_t frame_count() const { return frames.size(); }
    size_t vertex_count() const { return frames.empty() ? 0 : frames[0].vertices.size(); }

    void validate() const {
        if (frames.size() < 2)
            throw ValidationError("animation: needs at least 2 frames, got " +
                                  std::to_string(frames.size()));
        if (fps <= 0.0) throw FormatError("animation: fps must be > 0");
        const size_t v = frames[0].vertices.size();
        if (v == 0) throw ValidationError("animation: frames have no vertices");
        for (size_t f = 0; f < frames.size(); ++f) {
            if (frames[f].vertices.size() != v)
                throw FormatError("animation: frame " + std::to_string(f) + " has " +
                                  std::to_string(frames[f].vertices.size()) +
                                  " vertices, expected " + std::to_string(v));
            Vec3 centroid{0, 0, 0};
            for (const auto& p : frames[f].vertices) centroid += p;
            centroid = centroid / static_cast<double>(v);
            if (norm(frames[f].pelvis - centroid) > 2.0)
                throw ValidationError("animation: frame " + std::to_string(f) +
                                      " pelvis is more than 2 m from the vertex centroid");
        }
        // Large pelvis jumps are tracking glitches, not motion.
        for (size_t f = 0; f + 1 < frames.size(); ++f)
            if (norm(frames[f + 1].pelvis - frames[f].pelvis) >= 1.0)
                throw ValidationError("animation: pelvis jumps " +
                                      std::to_string(norm(frames[f + 1].pelvis - frames[f].pelvis)) +
                                      " m between frames " + std::to_string(f) + " and " +
                                      std::to_string(f + 1));
    }

    Aabb aabb() const {
        Aabb b;
        for (const auto& f : frames)
            for (const auto& v : f.vertices) b.expand(v);
        return b;
    }

    double min_vertex_z() const {
        double z = std::numeric_limits<double>::max();
        for (const auto& f : frames)
            for (const auto& v : f.vertices) z = std::min(z, v.z);
        return z;
    }
};

// ---------------------------------------------------------------------------
// Per-frame, per-vertex interaction features: contact probability in [0,1]
// and the scene class the vertex is expected to touch. Frame-major layout.
// ---------------------------------------------------------------------------

struct FeatureMap {
    size_t frames = 0;
    size_t vertices = 0;
    std::vector<float> contact;      // frames*vertices
    std::vector<uint16_t> semantic;  // frames*vertices

    size_t index(size_t frame, size_t vertex) const { return frame * vertices + vertex; }

    float contact_at(size_t frame, size_t vertex) const { return contact[index(frame, vertex)]; }
    uint16_t semantic_at(size_t frame, size_t vertex) const { return semantic[index(frame, vertex)]; }

    void validate(const Animation& anim, const SemanticVocabulary& vocab) const {
        if (frames != anim.frame_count() || vertices != anim.vertex_count())
            throw FormatError("features: shape " + std::to_string(frames) + "x" +
                              std::to_string(vertices) + " does not match animation " +
                              std::to_string(anim.frame_count()) + "x" +
                              std::to_string(anim.vertex_count()));
        if (contact.size() != frames * vertices || semantic.size() != frames * vertices)
            throw FormatError("features: array lengths do not match header shape");
        for (size_t i = 0; i < contact.size(); ++i)
            if (!(contact[i] >= 0.0f && contact[i] <= 1.0f))
                throw ValidationError("features: contact value " + std::to_string(contact[i]) +
                                      " at flat index " + std::to_string(i) +
                                      " outside [0,1]");
        for (size_t i = 0; i < semantic.size(); ++i)
            if (!vocab.valid_id(semantic[i]))
                throw ValidationError("features: semantic id " + std::to_string(semantic[i]) +
                                      " at flat index " + std::to_string(i) +
                                      " not in vocabulary");
    }
};

// ---------------------------------------------------------------------------
// Binary formats.
//   Animation: "PAAKANM1", u32 frames, u32 vertices, u32 triangles, f32 fps,
//              topology u32[t*3], per frame f32[v*3] vertices + f32[3] pelvis.
//   Features:  "PAAKFTR1", u32 frames, u32 vertices,
//              f32[n*v] contact, u16[n*v] semantic.
// ---------------------------------------------------------------------------

inline void save_animation(const Animation& anim, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    write_magic(out, "PAAKANM1");
    write_pod(out, static_cast<uint32_t>(anim.frame_count()));
    write_pod(out, static_cast<uint32_t>(anim.vertex_count()));
    write_pod(out, static_cast<uint32_t>(anim.topology.size()));
    write_pod(out, static_cast<float>(anim.fps));
    for (const auto& t : anim.topology)
        for (int c = 0; c < 3; ++c) write_pod(out, t[static_cast<size_t>(c)]);
    for (const auto& f : anim.frames) {
        for (const auto& v : f.vertices) {
            write_pod(out, static_cast<float>(v.x));
            write_pod(out, static_cast<float>(v.y));
            write_pod(out, static_cast<float>(v.z));
        }
        write_pod(out, static_cast<float>(f.pelvis.x));
        write_pod(out, static_cast<float>(f.pelvis.y));
        write_pod(out, static_cast<float>(f.pelvis.z));
    }
    if (!out) throw FormatError("write failed: " + path);
}

inline Animation load_animation(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    expect_magic(in, "PAAKANM1", path);
    Animation anim;
    const auto n = read_pod<uint32_t>(in, "frame count");
    const auto v = read_pod<uint32_t>(in, "vertex count");
    const auto t = read_pod<uint32_t>(in, "triangle count");
    anim.fps = read_pod<float>(in, "fps");
    if (anim.fps <= 0.0) throw FormatError(path + ": fps must be > 0");
    anim.topology.resize(t);
    for (uint32_t i = 0; i < t; ++i)
        for (int c = 0; c < 3; ++c)
            anim.topology[i][static_cast<size_t>(c)] = read_pod<uint32_t>(in, "topology");
    anim.frames.resize(n);
    for (uint32_t f = 0; f < n; ++f) {
        auto& frame = anim.frames[f];
        frame.vertices.resize(v);
        for (uint32_t i = 0; i < v; ++i) {
            frame.vertices[i].x = read_pod<float>(in, "vertex");
            frame.vertices[i].y = read_pod<float>(in, "vertex");
            frame.vertices[i].z = read_pod<float>(in, "vertex");
        }
        frame.pelvis.x = read_pod<float>(in, "pelvis");
        frame.pelvis.y = read_pod<float>(in, "pelvis");
        frame.pelvis.z = read_pod<float>(in, "pelvis");
    }
    anim.validate();
    return anim;
}

inline void save_features(const FeatureMap& fm, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    write_magic(out, "PAAKFTR1");
    write_pod(out, static_cast<uint32_t>(fm.frames));
    write_pod(out, static_cast<uint32_t>(fm.vertices));
    write_array(out, fm.contact);
    write_array(out, fm.semantic);
    if (!out) throw FormatError("write failed: " + path);
}

inline FeatureMap load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    expect_magic(in, "PAAKFTR1", path);
    FeatureMap fm;
    fm.frames = read_pod<uint32_t>(in, "feature frame count");
    fm.vertices = read_pod<uint32_t>(in, "feature vertex count");
    const size_t n = fm.frames * fm.vertices;
    read_array(in, fm.contact, n, path + " contact");
    read_array(in, fm.semantic, n, path + " semantic");
    return fm;
}

// ---------------------------------------------------------------------------
// Rigid placement transform: yaw about the vertical axis through the
// first frame's pelvis ground projection, then translation. Yaw-only keeps
// people upright; the rotation center makes yaw and translation act almost
// independently during optimization.
// ---------------------------------------------------------------------------

struct PlacementPose {
    Vec3 tau;            // translation, m
    double theta = 0.0;  // yaw, radians, normalized to [0, 2*pi)

    void validate() const {
        if (!finite(tau) || !std::isfinite(theta))
            throw ValidationError("pose: non-finite components");
    }
};

inline Vec3 rotation_center(const Animation& anim) {
    const Vec3 p = anim.frames.front().pelvis;
    return {p.x, p.y, 0.0};
}

inline Animation transform(const Animation& anim, const PlacementPose& pose) {
    pose.validate();
    const Vec3 c = rotation_center(anim);
    const double cs = std::cos(pose.theta), sn = std::sin(pose.theta);
    Animation out;
    out.topology = anim.topology;
    out.fps = anim.fps;
    out.frames.resize(anim.frames.size());
    for (size_t f = 0; f < anim.frames.size(); ++f) {
        const auto& src = anim.frames[f];
        auto& dst = out.frames[f];
        dst.vertices.resize(src.vertices.size());
        const auto rotate = [&](const Vec3& p) -> Vec3 {
            const double rx = p.x - c.x, ry = p.y - c.y;
            return {c.x + cs * rx - sn * ry + pose.tau.x,
                    c.y + sn * rx + cs * ry + pose.tau.y,
                    p.z + pose.tau.z};
        };
        for (size_t i = 0; i < src.vertices.size(); ++i) dst.vertices[i] = rotate(src.vertices[i]);
        dst.pelvis = rotate(src.pelvis);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Heuristic interaction features. Deliberately crude stand-in for an
// external per-vertex estimator: contact falls off exponentially with a
// vertex's height above the frame's lowest point; seat-class labels go to
// downward-facing lower-body vertices of low-pelvis frames, floor labels to
// the foot band, everything else is generic object.
// ---------------------------------------------------------------------------

struct HeuristicFeatureOptions {
    std::string seat_class = "chair";
    double contact_scale = 0.05;   // m, e-folding height for contact
    double foot_band = 0.1;        // m above the frame's lowest vertex
    double low_pelvis = 0.6;       // m, pelvis-above-lowest threshold for "seated"
    double torso_band = 0.5;       // m, height band eligible for seat labels
    double downward_z = -0.2;      // vertex normal z below this counts as downward
};

inline std::vector<Vec3> vertex_normals(const std::vector<std::array<uint32_t, 3>>& topology,
                                        const std::vector<Vec3>& vertices) {
    std::vector<Vec3> normals(vertices.size(), Vec3{0, 0, 0});
    for (const auto& t : topology) {
        const Vec3 n = cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
        normals[t[0]] += n;  // area-weighted
        normals[t[1]] += n;
        normals[t[2]] += n;
    }
    for (auto& n : normals) n = normalized(n);
    return normals;
}

inline FeatureMap heuristic_features(const Animation& anim, const SemanticVocabulary& vocab,
                                     const HeuristicFeatureOptions& opt = {}) {
    const int32_t seat_id = vocab.id_of(opt.seat_class);
    if (seat_id < 0)
        throw ValidationError("heuristic_features: seat class '" + opt.seat_class +
                              "' not in vocabulary");
    const int32_t object_id = vocab.id_of("object") >= 0 ? vocab.id_of("object") : seat_id;

    FeatureMap fm;
    fm.frames = anim.frame_count();
    fm.vertices = anim.vertex_count();
    fm.contact.resize(fm.frames * fm.vertices);
    fm.semantic.resize(fm.frames * fm.vertices);

    for (size_t f = 0; f < anim.frame_count(); ++f) {
        const auto& frame = anim.frames[f];
        double min_z = std::numeric_limits<double>::max();
        for (const auto& p : frame.vertices) min_z = std::min(min_z, p.z);
        const bool low_pelvis = (frame.pelvis.z - min_z) < opt.low_pelvis;
        const std::vector<Vec3> normals = vertex_normals(anim.topology, frame.vertices);

        for (size_t i = 0; i < frame.vertices.size(); ++i) {
            const double h = frame.vertices[i].z - min_z;
            const double c = std::clamp(std::exp(-h / opt.contact_scale), 0.0, 1.0);
            fm.contact[fm.index(f, i)] = static_cast<float>(c);

            // The foot band only exists while standing; in seated frames
            // the lowest body region is seat contact, not feet.
            int32_t label;
            if (low_pelvis && normals[i].z < opt.downward_z && h < opt.torso_band)
                label = seat_id;
            else if (!low_pelvis && h < opt.foot_band)
                label = vocab.floor_id;
            else
                label = object_id;
            fm.semantic[fm.index(f, i)] = static_cast<uint16_t>(label);
        }
    }
    return fm;
}

// Resolve features from an external file when given, otherwise run the
// heuristic. Loaded maps are validated against the animation either way.
inline FeatureMap estimate_features(const Animation& anim, const SemanticVocabulary& vocab,
                                    const std::string& feature_path = {},
                                    const HeuristicFeatureOptions& opt = {}) {
    FeatureMap fm = feature_path.empty() ? heuristic_features(anim, vocab, opt)
                                         : load_features(feature_path);
    fm.validate(anim, vocab);
    return fm;
}

// ---------------------------------------------------------------------------
// Synthetic clips: a capsule person (~114 vertices, fixed topology) driven
// through walk / sit / walk-then-sit / jump profiles. Deterministic for a
// given seed; the seed only perturbs the gait sway phase.
// ---------------------------------------------------------------------------

enum class MotionKind { walk, sit, walk_then_sit, jump };

inline MotionKind motion_kind_from_string(const std::string& s) {
    if (s == "walk") return MotionKind::walk;
    if (s == "sit") return MotionKind::sit;
    if (s == "walk_then_sit") return MotionKind::walk_then_sit;
    if (s == "jump") return MotionKind::jump;
    throw ValidationError("unknown motion kind '" + s + "'");
}

struct SynthAnimParams {
    double duration_s = 2.0;
    double fps = 30.0;
    double speed = 1.0;         // m/s while walking
    double seat_height = 0.45;  // m
    // Forward slide onto the seat while sitting. Long enough that the
    // preceding stance clears both the seat front and its semantic shadow
    // on the floor (nearest-surface labels flip to the seat class well
    // before the box itself).
    double seat_slide = 0.55;
    double jump_height = 0.3;   // m
    uint64_t seed = 0;
};

namespace detail {

constexpr double kBodyHeight = 1.7;
constexpr double kBodyRadius = 0.15;
constexpr double kPelvisStand = 0.9;     // pelvis above the feet, standing
constexpr double kPelvisSeatOffset = 0.10;  // pelvis above the seat, seated
constexpr double kSeatedHeight = 0.95;   // capsule height while seated
constexpr int kBodyRings = 14;
constexpr int kBodySegments = 8;

// Capsule radius at normalized height t for a capsule of height h.
inline double capsule_radius(double t, double h) {
    const double z = t * h;
    const double r = kBodyRadius;
    if (z < r) {
        const double d = r - z;
        return std::sqrt(std::max(0.0, r * r - d * d));
    }
    if (z > h - r) {
        const double d = z - (h - r);
        return std::sqrt(std::max(0.0, r * r - d * d));
    }
    return r;
}

struct BodyShape {
    std::vector<std::array<uint32_t, 3>> topology;
    std::vector<double> ring_t;      // normalized height per ring
    std::vector<double> seg_cos, seg_sin;
};

inline BodyShape capsule_body_shape() {
    BodyShape s;
    s.ring_t.resize(kBodyRings);
    for (int i = 0; i < kBodyRings; ++i)
        s.ring_t[static_cast<size_t>(i)] = (i + 0.5) / kBodyRings;
    s.seg_cos.resize(kBodySegments);
    s.seg_sin.resize(kBodySegments);
    for (int j = 0; j < kBodySegments; ++j) {
        const double a = 2.0 * kPi * j / kBodySegments;
        s.seg_cos[static_cast<size_t>(j)] = std::cos(a);
        s.seg_sin[static_cast<size_t>(j)] = std::sin(a);
    }
    // Vertex layout: rings*segments lateral vertices, then bottom pole,
    // then top pole.
    const auto ring_vert = [&](int ring, int seg) {
        return static_cast<uint32_t>(ring * kBodySegments + (seg % kBodySegments));
    };
    const auto bottom = static_cast<uint32_t>(kBodyRings * kBodySegments);
    const auto top = bottom + 1;
    for (int i = 0; i + 1 < kBodyRings; ++i) {
        for (int j = 0; j < kBodySegments; ++j) {
            s.topology.push_back({ring_vert(i, j), ring_vert(i, j + 1), ring_vert(i + 1, j)});
            s.topology.push_back({ring_vert(i, j + 1), ring_vert(i + 1, j + 1), ring_vert(i + 1, j)});
        }
    }
    for (int j = 0; j < kBodySegments; ++j) {
        s.topology.push_back({bottom, ring_vert(0, j + 1), ring_vert(0, j)});
        s.topology.push_back({top, ring_vert(kBodyRings - 1, j), ring_vert(kBodyRings - 1, j + 1)});
    }
    return s;
}

struct BodyState {
    double x = 0.0, y = 0.0;       // ground-plane position
    double bottom_z = 0.0;          // lowest body point
    double height = kBodyHeight;    // current capsule height
    double pelvis_above = kPelvisStand;
};

inline BodyFrame realize_body(const BodyShape& shape, const BodyState& st) {
    BodyFrame frame;
    frame.vertices.resize(static_cast<size_t>(kBodyRings * kBodySegments) + 2);
    size_t v = 0;
    for (int i = 0; i < kBodyRings; ++i) {
        const double t = shape.ring_t[static_cast<size_t>(i)];
        const double rad = capsule_radius(t, st.height);
        const double z = st.bottom_z + t * st.height;
        for (int j = 0; j < kBodySegments; ++j, ++v)
            frame.vertices[v] = {st.x + rad * shape.seg_cos[static_cast<size_t>(j)],
                                 st.y + rad * shape.seg_sin[static_cast<size_t>(j)], z};
    }
    frame.vertices[v++] = {st.x, st.y, st.bottom_z};
    frame.vertices[v++] = {st.x, st.y, st.bottom_z + st.height};
    frame.pelvis = {st.x, st.y, st.bottom_z + st.pelvis_above};
    return frame;
}

inline double smoothstep(double a, double b, double t) {
    const double u = std::clamp((t - a) / (b - a), 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

}  // namespace detail

inline Animation synth_animation(MotionKind kind, const SynthAnimParams& params) {
    const auto n = static_cast<size_t>(std::max(2.0, std::round(params.duration_s * params.fps)));
    Rng rng(params.seed);
    const double sway_phase = rng.uniform(0.0, 2.0 * kPi);
    const double sway_amp = 0.005;
    const double cadence = 1.8;  // gait cycles per second

    const detail::BodyShape shape = detail::capsule_body_shape();
    Animation anim;
    anim.topology = shape.topology;
    anim.fps = params.fps;
    anim.frames.reserve(n);

    const double seat = params.seat_height;
    const double seated_pelvis = seat + detail::kPelvisSeatOffset;

    for (size_t f = 0; f < n; ++f) {
        const double u = static_cast<double>(f) / static_cast<double>(n - 1);  // 0..1
        const double t = u * params.duration_s;
        detail::BodyState st;

        // Sitting rises first and slides onto the seat after: feet stop at
        // the seat front while the pelvis ends over the seat center, the
        // way a person backs onto a chair. Rise-before-slide keeps the
        // body from sweeping through the seat box on the way up.
        const auto seated_blend = [&](double amount) {
            const double rise = detail::smoothstep(0.0, 0.7, amount);
            const double slide = detail::smoothstep(0.4, 1.0, amount);
            st.bottom_z = rise * seat;
            st.height = detail::kBodyHeight + amount * (detail::kSeatedHeight - detail::kBodyHeight);
            st.pelvis_above = detail::kPelvisStand +
                              amount * ((seated_pelvis - st.bottom_z) - detail::kPelvisStand);
            st.x += slide * params.seat_slide;
        };

        switch (kind) {
            case MotionKind::walk:
                st.x = params.speed * t;
                st.y = sway_amp * std::sin(2.0 * kPi * cadence * t + sway_phase);
                break;
            case MotionKind::sit:
                seated_blend(detail::smoothstep(0.3, 0.6, u));
                break;
            case MotionKind::walk_then_sit: {
                const double walk_end = 0.6;
                const double walked = std::min(u, walk_end) / walk_end;
                st.x = params.speed * (walk_end * params.duration_s) * walked;
                if (u < walk_end)
                    st.y = sway_amp * std::sin(2.0 * kPi * cadence * t + sway_phase);
                seated_blend(detail::smoothstep(walk_end, 0.8, u));
                break;
            }
            case MotionKind::jump: {
                const double crouch = 0.12 * (detail::smoothstep(0.25, 0.4, u) -
                                              detail::smoothstep(0.4, 0.55, u));
                st.height = detail::kBodyHeight - crouch;
                if (u >= 0.4 && u <= 0.7)
                    st.bottom_z = params.jump_height * std::sin(kPi * (u - 0.4) / 0.3);
                break;
            }
        }
        anim.frames.push_back(detail::realize_body(shape, st));
    }
    anim.validate();
    return anim;
}

}  // namespace paak
