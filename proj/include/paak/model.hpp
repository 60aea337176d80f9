// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "paak/animation.hpp"
#include "paak/core.hpp"
#include "paak/io.hpp"
#include "paak/keyframes.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Keyframe regressor. Four fully connected layers: the first runs across
// each vertex, the second across all vertices of a mesh, the last two
// across the whole animation window. Output is one weight per frame,
// sigmoid-bounded to match max-normalized geometric targets.
//
//   per-vertex   f -> m1, ReLU
//   per-frame    v*m1 -> m2, ReLU          (the per-frame "hidden" vector)
//   animation    n*m2 -> m3, ReLU
//   animation    m3 -> n, sigmoid
// ---------------------------------------------------------------------------

struct ModelConfig {
    uint32_t window = 60;       // n, frames per window
    uint32_t vertices = 0;      // v
    uint32_t features = 0;      // f = 3 (pelvis-relative position) + 1 (contact) + C (one-hot)
    uint32_t m1 = 8;
    uint32_t m2 = 32;
    uint32_t m3 = 64;

    bool operator==(const ModelConfig&) const = default;
};

struct KeyframeModel {
    ModelConfig cfg;
    std::vector<double> w1, b1;  // [m1 x f], [m1]
    std::vector<double> w2, b2;  // [m2 x v*m1], [m2]
    std::vector<double> w3, b3;  // [m3 x n*m2], [m3]
    std::vector<double> w4, b4;  // [n x m3], [n]

    size_t parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size() +
               w4.size() + b4.size();
    }

    void validate() const {
        const ModelConfig& c = cfg;
        if (c.window == 0 || c.vertices == 0 || c.features == 0 || c.m1 == 0 || c.m2 == 0 ||
            c.m3 == 0)
            throw StructuralError("model: zero-sized dimension");
        const auto expect = [](const std::vector<double>& v, size_t n, const char* name) {
            if (v.size() != n)
                throw StructuralError(std::string("model: ") + name + " has wrong size");
            for (const double x : v)
                if (!std::isfinite(x))
                    throw ValidationError(std::string("model: non-finite parameter in ") + name);
        };
        expect(w1, static_cast<size_t>(c.m1) * c.features, "w1");
        expect(b1, c.m1, "b1");
        expect(w2, static_cast<size_t>(c.m2) * c.vertices * c.m1, "w2");
        expect(b2, c.m2, "b2");
        expect(w3, static_cast<size_t>(c.m3) * c.window * c.m2, "w3");
        expect(b3, c.m3, "b3");
        expect(w4, static_cast<size_t>(c.window) * c.m3, "w4");
        expect(b4, c.window, "b4");
    }
};

// He-style init for the ReLU layers, zero biases.
inline KeyframeModel init_model(const ModelConfig& cfg, uint64_t seed) {
    KeyframeModel m;
    m.cfg = cfg;
    Rng rng(seed);
    const auto fill = [&](std::vector<double>& w, size_t rows, size_t cols) {
        w.resize(rows * cols);
        const double scale = std::sqrt(2.0 / static_cast<double>(cols));
        for (auto& x : w) x = rng.normal() * scale;
    };
    fill(m.w1, cfg.m1, cfg.features);
    m.b1.assign(cfg.m1, 0.0);
    fill(m.w2, cfg.m2, static_cast<size_t>(cfg.vertices) * cfg.m1);
    m.b2.assign(cfg.m2, 0.0);
    fill(m.w3, cfg.m3, static_cast<size_t>(cfg.window) * cfg.m2);
    m.b3.assign(cfg.m3, 0.0);
    fill(m.w4, cfg.window, cfg.m3);
    m.b4.assign(cfg.window, 0.0);
    return m;
}

// ---------------------------------------------------------------------------
// Window inputs: the animation resampled to n frames, each vertex carrying
// pelvis-relative position, contact, and a one-hot semantic label.
// ---------------------------------------------------------------------------

struct ModelInput {
    uint32_t frames = 0;
    uint32_t vertices = 0;
    uint32_t features = 0;
    std::vector<double> data;  // [frame][vertex][feature]

    double& at(size_t f, size_t v, size_t k) {
        return data[(f * vertices + v) * features + k];
    }
    double at(size_t f, size_t v, size_t k) const {
        return data[(f * vertices + v) * features + k];
    }
};

// Linear resample of a per-frame series to n entries (endpoints pinned).
inline std::vector<double> resample_series(const std::vector<double>& s, size_t n) {
    if (s.empty() || n == 0) return {};
    std::vector<double> out(n);
    if (s.size() == 1) {
        std::fill(out.begin(), out.end(), s[0]);
        return out;
    }
    for (size_t j = 0; j < n; ++j) {
        const double t = n == 1 ? 0.0
                                : static_cast<double>(j) * static_cast<double>(s.size() - 1) /
                                      static_cast<double>(n - 1);
        const auto i0 = std::min(static_cast<size_t>(t), s.size() - 2);
        const double frac = t - static_cast<double>(i0);
        out[j] = s[i0] * (1.0 - frac) + s[i0 + 1] * frac;
    }
    return out;
}

// Resample the animation+features to the model window by linear time
// interpolation. Positions and contact interpolate; semantic labels take
// the nearer source frame.
inline ModelInput build_model_input(const Animation& anim, const FeatureMap& fm,
                                    const SemanticVocabulary& vocab, uint32_t window) {
    const size_t src_n = anim.frame_count();
    const size_t v = anim.vertex_count();
    const auto c = static_cast<uint32_t>(vocab.size());

    ModelInput in;
    in.frames = window;
    in.vertices = static_cast<uint32_t>(v);
    in.features = 3 + 1 + c;
    in.data.assign(static_cast<size_t>(window) * v * in.features, 0.0);

    for (uint32_t j = 0; j < window; ++j) {
        const double t = window == 1 ? 0.0
                                     : static_cast<double>(j) * static_cast<double>(src_n - 1) /
                                           static_cast<double>(window - 1);
        const auto i0 = std::min(static_cast<size_t>(t), src_n - 2);
        const size_t i1 = i0 + 1;
        const double frac = t - static_cast<double>(i0);
        const size_t nearer = frac < 0.5 ? i0 : i1;

        const auto& f0 = anim.frames[i0];
        const auto& f1 = anim.frames[i1];
        const Vec3 pelvis = f0.pelvis * (1.0 - frac) + f1.pelvis * frac;

        for (size_t k = 0; k < v; ++k) {
            const Vec3 p = f0.vertices[k] * (1.0 - frac) + f1.vertices[k] * frac;
            const Vec3 rel = p - pelvis;
            const double contact = fm.contact_at(i0, k) * (1.0 - frac) + fm.contact_at(i1, k) * frac;
            const uint16_t sem = fm.semantic_at(nearer, k);
            in.at(j, k, 0) = rel.x;
            in.at(j, k, 1) = rel.y;
            in.at(j, k, 2) = rel.z;
            in.at(j, k, 3) = contact;
            if (sem < c) in.at(j, k, 4 + sem) = 1.0;
        }
    }
    return in;
}

// ---------------------------------------------------------------------------
// Forward pass. The trace keeps every activation so the backward pass and
// the diversity embeddings can reuse it.
// ---------------------------------------------------------------------------

struct ForwardTrace {
    std::vector<double> z1, a1;      // [n*v*m1]
    std::vector<double> z2, hidden;  // [n*m2]; hidden = relu(z2), per-frame embedding
    std::vector<double> z3, a3;      // [m3]
    std::vector<double> z4, k_hat_g; // [n]; k_hat_g = sigmoid(z4)
};

inline ForwardTrace model_forward(const KeyframeModel& model, const ModelInput& in) {
    const ModelConfig& c = model.cfg;
    if (in.frames != c.window || in.vertices != c.vertices || in.features != c.features)
        throw StructuralError("model_forward: input shape " + std::to_string(in.frames) + "x" +
                              std::to_string(in.vertices) + "x" + std::to_string(in.features) +
                              " does not match model config");

    ForwardTrace t;
    const size_t n = c.window, v = c.vertices, f = c.features;
    const size_t m1 = c.m1, m2 = c.m2, m3 = c.m3;

    t.z1.resize(n * v * m1);
    t.a1.resize(n * v * m1);
    for (size_t fv = 0; fv < n * v; ++fv) {
        const double* x = &in.data[fv * f];
        for (size_t o = 0; o < m1; ++o) {
            double acc = model.b1[o];
            const double* w = &model.w1[o * f];
            for (size_t i = 0; i < f; ++i) acc += w[i] * x[i];
            t.z1[fv * m1 + o] = acc;
            t.a1[fv * m1 + o] = acc > 0.0 ? acc : 0.0;
        }
    }

    const size_t frame_in = v * m1;
    t.z2.resize(n * m2);
    t.hidden.resize(n * m2);
    for (size_t fr = 0; fr < n; ++fr) {
        const double* x = &t.a1[fr * frame_in];
        for (size_t o = 0; o < m2; ++o) {
            double acc = model.b2[o];
            const double* w = &model.w2[o * frame_in];
            for (size_t i = 0; i < frame_in; ++i) acc += w[i] * x[i];
            t.z2[fr * m2 + o] = acc;
            t.hidden[fr * m2 + o] = acc > 0.0 ? acc : 0.0;
        }
    }

    const size_t anim_in = n * m2;
    t.z3.resize(m3);
    t.a3.resize(m3);
    for (size_t o = 0; o < m3; ++o) {
        double acc = model.b3[o];
        const double* w = &model.w3[o * anim_in];
        for (size_t i = 0; i < anim_in; ++i) acc += w[i] * t.hidden[i];
        t.z3[o] = acc;
        t.a3[o] = acc > 0.0 ? acc : 0.0;
    }

    t.z4.resize(n);
    t.k_hat_g.resize(n);
    for (size_t o = 0; o < n; ++o) {
        double acc = model.b4[o];
        const double* w = &model.w4[o * m3];
        for (size_t i = 0; i < m3; ++i) acc += w[i] * t.a3[i];
        t.z4[o] = acc;
        t.k_hat_g[o] = 1.0 / (1.0 + std::exp(-acc));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Training: MSE against max-normalized geometric targets, mini-batch SGD.
// ---------------------------------------------------------------------------

struct ModelGrad {
    std::vector<double> w1, b1, w2, b2, w3, b3, w4, b4;

    explicit ModelGrad(const KeyframeModel& m)
        : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0),
          b2(m.b2.size(), 0.0), w3(m.w3.size(), 0.0), b3(m.b3.size(), 0.0),
          w4(m.w4.size(), 0.0), b4(m.b4.size(), 0.0) {}

    void scale(double s) {
        for (auto* v : {&w1, &b1, &w2, &b2, &w3, &b3, &w4, &b4})
            for (auto& x : *v) x *= s;
    }
};

// Accumulates d(MSE)/d(params) for one sample into `grad`; returns the loss.
inline double model_backward(const KeyframeModel& model, const ModelInput& in,
                             const std::vector<double>& target, const ForwardTrace& t,
                             ModelGrad& grad) {
    const ModelConfig& c = model.cfg;
    const size_t n = c.window, v = c.vertices, f = c.features;
    const size_t m1 = c.m1, m2 = c.m2, m3 = c.m3;
    if (target.size() != n)
        throw StructuralError("model_backward: target length does not match window");

    double loss = 0.0;
    std::vector<double> dz4(n);
    for (size_t i = 0; i < n; ++i) {
        const double diff = t.k_hat_g[i] - target[i];
        loss += diff * diff;
        // d(mse)/dz4 = 2*diff/n * sigmoid'(z4)
        dz4[i] = 2.0 * diff / static_cast<double>(n) * t.k_hat_g[i] * (1.0 - t.k_hat_g[i]);
    }
    loss /= static_cast<double>(n);

    std::vector<double> da3(m3, 0.0);
    for (size_t o = 0; o < n; ++o) {
        grad.b4[o] += dz4[o];
        for (size_t i = 0; i < m3; ++i) {
            grad.w4[o * m3 + i] += dz4[o] * t.a3[i];
            da3[i] += model.w4[o * m3 + i] * dz4[o];
        }
    }

    const size_t anim_in = n * m2;
    std::vector<double> dhidden(anim_in, 0.0);
    for (size_t o = 0; o < m3; ++o) {
        const double dz3 = t.z3[o] > 0.0 ? da3[o] : 0.0;
        if (dz3 == 0.0) continue;
        grad.b3[o] += dz3;
        double* gw = &grad.w3[o * anim_in];
        const double* w = &model.w3[o * anim_in];
        for (size_t i = 0; i < anim_in; ++i) {
            gw[i] += dz3 * t.hidden[i];
            dhidden[i] += w[i] * dz3;
        }
    }

    const size_t frame_in = v * m1;
    std::vector<double> da1(n * v * m1, 0.0);
    for (size_t fr = 0; fr < n; ++fr) {
        const double* x = &t.a1[fr * frame_in];
        for (size_t o = 0; o < m2; ++o) {
            const double dz2 = t.z2[fr * m2 + o] > 0.0 ? dhidden[fr * m2 + o] : 0.0;
            if (dz2 == 0.0) continue;
            grad.b2[o] += dz2;
            double* gw = &grad.w2[o * frame_in];
            const double* w = &model.w2[o * frame_in];
            double* da = &da1[fr * frame_in];
            for (size_t i = 0; i < frame_in; ++i) {
                gw[i] += dz2 * x[i];
                da[i] += w[i] * dz2;
            }
        }
    }

    for (size_t fv = 0; fv < n * v; ++fv) {
        const double* x = &in.data[fv * f];
        for (size_t o = 0; o < m1; ++o) {
            const double dz1 = t.z1[fv * m1 + o] > 0.0 ? da1[fv * m1 + o] : 0.0;
            if (dz1 == 0.0) continue;
            grad.b1[o] += dz1;
            double* gw = &grad.w1[o * f];
            for (size_t i = 0; i < f; ++i) gw[i] += dz1 * x[i];
        }
    }
    return loss;
}

struct TrainSample {
    ModelInput input;
    std::vector<double> target;  // length n, in [0,1]
};

struct TrainOptions {
    uint32_t epochs = 200;
    double learning_rate = 0.05;
    uint32_t batch_size = 4;
    uint64_t seed = 0;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean MSE per epoch
};

inline TrainResult train_model(KeyframeModel& model, const std::vector<TrainSample>& dataset,
                               const TrainOptions& opt = {}) {
    if (dataset.empty()) throw StructuralError("train_model: empty dataset");
    model.validate();
    Rng rng(opt.seed);
    TrainResult result;
    result.epoch_loss.reserve(opt.epochs);

    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0u);

    const auto apply = [](std::vector<double>& param, const std::vector<double>& g, double lr) {
        for (size_t i = 0; i < param.size(); ++i) param[i] -= lr * g[i];
    };

    for (uint32_t epoch = 0; epoch < opt.epochs; ++epoch) {
        // Fisher-Yates with the deterministic stream.
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.index(i)]);

        double epoch_loss = 0.0;
        const size_t batch = std::max<uint32_t>(1, opt.batch_size);
        for (size_t begin = 0; begin < order.size(); begin += batch) {
            const size_t end = std::min(order.size(), begin + batch);
            ModelGrad grad(model);
            for (size_t s = begin; s < end; ++s) {
                const TrainSample& sample = dataset[order[s]];
                const ForwardTrace t = model_forward(model, sample.input);
                epoch_loss += model_backward(model, sample.input, sample.target, t, grad);
            }
            grad.scale(1.0 / static_cast<double>(end - begin));
            apply(model.w1, grad.w1, opt.learning_rate);
            apply(model.b1, grad.b1, opt.learning_rate);
            apply(model.w2, grad.w2, opt.learning_rate);
            apply(model.b2, grad.b2, opt.learning_rate);
            apply(model.w3, grad.w3, opt.learning_rate);
            apply(model.b3, grad.b3, opt.learning_rate);
            apply(model.w4, grad.w4, opt.learning_rate);
            apply(model.b4, grad.b4, opt.learning_rate);
        }
        epoch_loss /= static_cast<double>(dataset.size());
        if (!std::isfinite(epoch_loss))
            throw TrainingError("train_model: loss diverged at epoch " + std::to_string(epoch));
        result.epoch_loss.push_back(epoch_loss);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Gradient-diversity scores. Each frame's embedding is its hidden vector
// scaled by its predicted weight; frames are then ranked by deterministic
// farthest-point traversal (first pick: largest magnitude; every next pick:
// largest distance to the picked set; ties to the lowest index). Early
// picks are the most diverse and get the highest score.
// ---------------------------------------------------------------------------

// Deterministic farthest-point ordering of n points in R^dim. First pick is
// the largest-magnitude point; every following pick maximizes the distance
// to the picked set; all ties break to the lowest index. Returns the pick
// order per point (0 = picked first).
inline std::vector<size_t> farthest_point_ranks(const std::vector<double>& emb, size_t n,
                                                size_t dim) {
    if (emb.size() != n * dim)
        throw StructuralError("farthest_point_ranks: embedding size mismatch");
    std::vector<size_t> rank(n, 0);
    if (n <= 1) return rank;

    const auto dist2 = [&](size_t a, size_t b) {
        double d = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            const double diff = emb[a * dim + i] - emb[b * dim + i];
            d += diff * diff;
        }
        return d;
    };

    std::vector<bool> picked(n, false);
    std::vector<double> min_d2(n, std::numeric_limits<double>::max());

    size_t first = 0;
    double best_mag = -1.0;
    for (size_t i = 0; i < n; ++i) {
        double mag = 0.0;
        for (size_t k = 0; k < dim; ++k) mag += emb[i * dim + k] * emb[i * dim + k];
        if (mag > best_mag) {
            best_mag = mag;
            first = i;
        }
    }
    picked[first] = true;
    rank[first] = 0;

    size_t last = first;
    for (size_t step = 1; step < n; ++step) {
        size_t next = n;
        double best = -1.0;
        for (size_t i = 0; i < n; ++i) {
            if (picked[i]) continue;
            min_d2[i] = std::min(min_d2[i], dist2(i, last));
            if (min_d2[i] > best) {
                best = min_d2[i];
                next = i;
            }
        }
        picked[next] = true;
        rank[next] = step;
        last = next;
    }
    return rank;
}

inline std::vector<double> diversity_scores(const KeyframeModel& model, const ModelInput& in) {
    const ForwardTrace t = model_forward(model, in);
    const size_t n = model.cfg.window;
    const size_t m2 = model.cfg.m2;
    if (n == 1) return {1.0};

    // Gradient proxy: the frame's hidden vector scaled by its predicted
    // weight, keeping BADGE's magnitude-times-diversity structure at frame
    // granularity.
    std::vector<double> emb(n * m2);
    for (size_t fr = 0; fr < n; ++fr)
        for (size_t i = 0; i < m2; ++i) emb[fr * m2 + i] = t.k_hat_g[fr] * t.hidden[fr * m2 + i];

    const std::vector<size_t> rank = farthest_point_ranks(emb, n, m2);
    std::vector<double> w_d(n);
    for (size_t i = 0; i < n; ++i)
        w_d[i] = static_cast<double>(n - 1 - rank[i]) / static_cast<double>(n - 1);
    return w_d;
}

// ---------------------------------------------------------------------------
// Model file: "PAAKMDL1", six u32 dims, then all parameters as f64 in
// layer order.
// ---------------------------------------------------------------------------

inline void save_model(const KeyframeModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    write_magic(out, "PAAKMDL1");
    write_pod(out, model.cfg.window);
    write_pod(out, model.cfg.vertices);
    write_pod(out, model.cfg.features);
    write_pod(out, model.cfg.m1);
    write_pod(out, model.cfg.m2);
    write_pod(out, model.cfg.m3);
    for (const auto* v : {&model.w1, &model.b1, &model.w2, &model.b2, &model.w3, &model.b3,
                          &model.w4, &model.b4})
        write_array(out, *v);
    if (!out) throw FormatError("write failed: " + path);
}

inline KeyframeModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    expect_magic(in, "PAAKMDL1", path);
    KeyframeModel m;
    m.cfg.window = read_pod<uint32_t>(in, "model window");
    m.cfg.vertices = read_pod<uint32_t>(in, "model vertices");
    m.cfg.features = read_pod<uint32_t>(in, "model features");
    m.cfg.m1 = read_pod<uint32_t>(in, "model m1");
    m.cfg.m2 = read_pod<uint32_t>(in, "model m2");
    m.cfg.m3 = read_pod<uint32_t>(in, "model m3");
    const ModelConfig& c = m.cfg;
    read_array(in, m.w1, static_cast<size_t>(c.m1) * c.features, "w1");
    read_array(in, m.b1, c.m1, "b1");
    read_array(in, m.w2, static_cast<size_t>(c.m2) * c.vertices * c.m1, "w2");
    read_array(in, m.b2, c.m2, "b2");
    read_array(in, m.w3, static_cast<size_t>(c.m3) * c.window * c.m2, "w3");
    read_array(in, m.b3, c.m3, "b3");
    read_array(in, m.w4, static_cast<size_t>(c.window) * c.m3, "w4");
    read_array(in, m.b4, c.window, "b4");
    m.validate();
    return m;
}

}  // namespace paak
