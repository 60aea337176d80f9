// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "paak/bvh.hpp"
#include "paak/core.hpp"
#include "paak/io.hpp"
#include "paak/mesh.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Dense signed distance grid. Samples live at voxel centers,
// origin + (i + 0.5) * cell_size, stored row-major with x fastest. Sign
// convention: negative inside closed geometry, positive outside.
// semantic_ids carries the face label of the nearest surface at bake time.
// ---------------------------------------------------------------------------

struct SdfGrid {
    Vec3 origin;
    double cell_size = 0.0;
    uint32_t dims[3] = {0, 0, 0};
    std::vector<float> values;
    std::vector<uint16_t> semantic_ids;

    size_t voxel_count() const {
        return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
    }

    size_t index(uint32_t i, uint32_t j, uint32_t k) const {
        return static_cast<size_t>(i) + dims[0] * (static_cast<size_t>(j) + static_cast<size_t>(dims[1]) * k);
    }

    Vec3 voxel_center(uint32_t i, uint32_t j, uint32_t k) const {
        return {origin.x + (i + 0.5) * cell_size,
                origin.y + (j + 0.5) * cell_size,
                origin.z + (k + 0.5) * cell_size};
    }

    void validate() const {
        if (cell_size <= 0.0) throw ValidationError("sdf: cell_size must be > 0");
        if (values.size() != voxel_count() || semantic_ids.size() != voxel_count())
            throw ValidationError("sdf: array lengths do not match dims product");
    }
};

struct SdfSample {
    double value = 0.0;
    int32_t semantic = 0;
};

// Trilinear sample. Outside the sampled region the value clamps to the
// boundary and grows by the Euclidean distance to it, so leaving the grid
// always reads as moving away from the scene.
inline SdfSample sample_sdf(const SdfGrid& g, const Vec3& p) {
    const double inv = 1.0 / g.cell_size;
    const int di = static_cast<int>(g.dims[0]);
    const int dj = static_cast<int>(g.dims[1]);
    const int dk = static_cast<int>(g.dims[2]);

    double u = (p.x - g.origin.x) * inv - 0.5;
    double v = (p.y - g.origin.y) * inv - 0.5;
    double w = (p.z - g.origin.z) * inv - 0.5;

    const double uc = std::clamp(u, 0.0, static_cast<double>(di - 1));
    const double vc = std::clamp(v, 0.0, static_cast<double>(dj - 1));
    const double wc = std::clamp(w, 0.0, static_cast<double>(dk - 1));

    const double ox = (u - uc) * g.cell_size;
    const double oy = (v - vc) * g.cell_size;
    const double oz = (w - wc) * g.cell_size;
    const double outside = std::sqrt(ox * ox + oy * oy + oz * oz);

    int i0 = std::min(static_cast<int>(uc), di - 1);
    int j0 = std::min(static_cast<int>(vc), dj - 1);
    int k0 = std::min(static_cast<int>(wc), dk - 1);
    const int i1 = std::min(i0 + 1, di - 1);
    const int j1 = std::min(j0 + 1, dj - 1);
    const int k1 = std::min(k0 + 1, dk - 1);
    const double fx = uc - i0;
    const double fy = vc - j0;
    const double fz = wc - k0;

    const auto at = [&](int i, int j, int k) -> double {
        return g.values[g.index(static_cast<uint32_t>(i), static_cast<uint32_t>(j),
                                static_cast<uint32_t>(k))];
    };
    const double c00 = at(i0, j0, k0) * (1.0 - fx) + at(i1, j0, k0) * fx;
    const double c10 = at(i0, j1, k0) * (1.0 - fx) + at(i1, j1, k0) * fx;
    const double c01 = at(i0, j0, k1) * (1.0 - fx) + at(i1, j0, k1) * fx;
    const double c11 = at(i0, j1, k1) * (1.0 - fx) + at(i1, j1, k1) * fx;
    const double c0 = c00 * (1.0 - fy) + c10 * fy;
    const double c1 = c01 * (1.0 - fy) + c11 * fy;
    const double value = c0 * (1.0 - fz) + c1 * fz + outside;

    const int ni = std::clamp(static_cast<int>(std::lround(uc)), 0, di - 1);
    const int nj = std::clamp(static_cast<int>(std::lround(vc)), 0, dj - 1);
    const int nk = std::clamp(static_cast<int>(std::lround(wc)), 0, dk - 1);
    const int32_t sem = g.semantic_ids[g.index(static_cast<uint32_t>(ni), static_cast<uint32_t>(nj),
                                               static_cast<uint32_t>(nk))];
    return {value, sem};
}

// ---------------------------------------------------------------------------
// Generalized winding number. Sum of signed solid angles over all
// triangles divided by 4*pi; ~1 inside watertight geometry, ~0 outside,
// and degrades gracefully for meshes with small holes.
// ---------------------------------------------------------------------------

inline double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
    const Vec3 va = a - p, vb = b - p, vc = c - p;
    const double la = norm(va), lb = norm(vb), lc = norm(vc);
    const double det = dot(va, cross(vb, vc));
    const double denom = la * lb * lc + dot(va, vb) * lc + dot(vb, vc) * la + dot(vc, va) * lb;
    return 2.0 * std::atan2(det, denom);
}

inline double winding_number(const TriangleMesh& mesh, const Vec3& p) {
    double total = 0.0;
    for (size_t t = 0; t < mesh.triangle_count(); ++t)
        total += solid_angle(mesh.tri_vertex(t, 0), mesh.tri_vertex(t, 1), mesh.tri_vertex(t, 2), p);
    return total / (4.0 * kPi);
}

// ---------------------------------------------------------------------------
// Baking. Distance magnitude from the BVH nearest-surface query, sign from
// the winding number (> 0.5 means inside), semantic from the nearest face's
// label. Voxels are independent, so the loop parallelizes freely.
// ---------------------------------------------------------------------------

constexpr uint64_t kDefaultMaxVoxels = 64ull * 1024 * 1024;

inline SdfGrid bake_sdf(const TriangleMesh& mesh, const Bvh& bvh, const Aabb& bounds,
                        double cell_size, uint64_t max_voxels = kDefaultMaxVoxels,
                        int jobs = 1) {
    if (bounds.empty()) throw ValidationError("bake_sdf: empty bounds");
    if (cell_size <= 0.0) throw ValidationError("bake_sdf: cell_size must be > 0");

    SdfGrid g;
    g.origin = bounds.lo;
    g.cell_size = cell_size;
    const Vec3 ext = bounds.extent();
    uint64_t total = 1;
    for (int a = 0; a < 3; ++a) {
        const auto d = static_cast<uint32_t>(
            std::max(1.0, std::ceil(ext[a] / cell_size - 1e-9)));
        g.dims[a] = d;
        total *= d;
    }
    if (total > max_voxels)
        throw ResourceError("bake_sdf: " + std::to_string(total) + " voxels exceeds budget of " +
                            std::to_string(max_voxels));

    g.values.resize(total);
    g.semantic_ids.resize(total);

    const size_t slice = static_cast<size_t>(g.dims[0]) * g.dims[1];
    parallel_for(g.dims[2], jobs, [&](size_t k_begin, size_t k_end) {
        for (size_t k = k_begin; k < k_end; ++k) {
            for (uint32_t j = 0; j < g.dims[1]; ++j) {
                for (uint32_t i = 0; i < g.dims[0]; ++i) {
                    const Vec3 p = g.voxel_center(i, j, static_cast<uint32_t>(k));
                    const NearestHit hit = nearest_surface(bvh, mesh, p);
                    const bool inside = winding_number(mesh, p) > 0.5;
                    const size_t idx = k * slice + j * g.dims[0] + i;
                    g.values[idx] = static_cast<float>(inside ? -hit.distance : hit.distance);
                    const int32_t label = mesh.has_face_ids() ? mesh.face_ids[hit.face] : 0;
                    g.semantic_ids[idx] = static_cast<uint16_t>(std::clamp(label, 0, 65535));
                }
            }
        }
    });
    return g;
}

// ---------------------------------------------------------------------------
// Cache file: magic "PAAKSDF1", origin 3xf64, cell_size f64, dims 3xu32,
// values f32 array, semantic_ids u16 array, row-major x-fastest.
// ---------------------------------------------------------------------------

inline void save_sdf(const SdfGrid& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    write_magic(out, "PAAKSDF1");
    write_pod(out, g.origin.x);
    write_pod(out, g.origin.y);
    write_pod(out, g.origin.z);
    write_pod(out, g.cell_size);
    write_pod(out, g.dims[0]);
    write_pod(out, g.dims[1]);
    write_pod(out, g.dims[2]);
    write_array(out, g.values);
    write_array(out, g.semantic_ids);
    if (!out) throw FormatError("write failed: " + path);
}

inline SdfGrid load_sdf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    expect_magic(in, "PAAKSDF1", path);
    SdfGrid g;
    g.origin.x = read_pod<double>(in, "sdf origin");
    g.origin.y = read_pod<double>(in, "sdf origin");
    g.origin.z = read_pod<double>(in, "sdf origin");
    g.cell_size = read_pod<double>(in, "sdf cell_size");
    g.dims[0] = read_pod<uint32_t>(in, "sdf dims");
    g.dims[1] = read_pod<uint32_t>(in, "sdf dims");
    g.dims[2] = read_pod<uint32_t>(in, "sdf dims");
    const size_t n = g.voxel_count();
    read_array(in, g.values, n, path + " values");
    read_array(in, g.semantic_ids, n, path + " semantic ids");
    g.validate();
    return g;
}

}  // namespace paak
