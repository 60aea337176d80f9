// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "paak/core.hpp"
#include "paak/mesh.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Bounding volume hierarchy over mesh triangles, for closest-surface
// queries. Binary tree, longest-axis median split, small leaves. The tree
// stores a permutation of triangle indices; every triangle lands in exactly
// one leaf. Immutable after build.
// ---------------------------------------------------------------------------

struct BvhNode {
    Aabb box;
    int32_t left = -1;   // internal: child node indices
    int32_t right = -1;
    uint32_t first = 0;  // leaf: range into Bvh::order
    uint32_t count = 0;

    bool is_leaf() const { return count > 0; }
};

struct Bvh {
    std::vector<BvhNode> nodes;
    std::vector<uint32_t> order;  // triangle indices, leaf-contiguous

    bool empty() const { return nodes.empty(); }
};

namespace detail {

inline Aabb triangle_bounds(const TriangleMesh& mesh, uint32_t t) {
    Aabb b;
    b.expand(mesh.tri_vertex(t, 0));
    b.expand(mesh.tri_vertex(t, 1));
    b.expand(mesh.tri_vertex(t, 2));
    return b;
}

inline int32_t build_bvh_node(const TriangleMesh& mesh, Bvh& bvh,
                              std::vector<Vec3>& centroids, size_t begin, size_t end,
                              uint32_t leaf_size) {
    BvhNode node;
    Aabb centroid_bounds;
    for (size_t i = begin; i < end; ++i) {
        node.box.expand(triangle_bounds(mesh, bvh.order[i]));
        centroid_bounds.expand(centroids[bvh.order[i]]);
    }

    const size_t count = end - begin;
    const auto node_index = static_cast<int32_t>(bvh.nodes.size());
    bvh.nodes.push_back(node);

    const Vec3 ext = centroid_bounds.extent();
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;

    if (count <= leaf_size || ext[axis] <= 0.0) {
        bvh.nodes[static_cast<size_t>(node_index)].first = static_cast<uint32_t>(begin);
        bvh.nodes[static_cast<size_t>(node_index)].count = static_cast<uint32_t>(count);
        return node_index;
    }

    // Median split. Sorting by (coordinate, index) keeps the build
    // deterministic when centroids coincide.
    const size_t mid = begin + count / 2;
    std::sort(bvh.order.begin() + static_cast<long>(begin), bvh.order.begin() + static_cast<long>(end),
              [&](uint32_t a, uint32_t b) {
                  const double ca = centroids[a][axis], cb = centroids[b][axis];
                  return ca < cb || (ca == cb && a < b);
              });

    const int32_t left = build_bvh_node(mesh, bvh, centroids, begin, mid, leaf_size);
    const int32_t right = build_bvh_node(mesh, bvh, centroids, mid, end, leaf_size);
    bvh.nodes[static_cast<size_t>(node_index)].left = left;
    bvh.nodes[static_cast<size_t>(node_index)].right = right;
    return node_index;
}

}  // namespace detail

inline Bvh build_bvh(const TriangleMesh& mesh, uint32_t leaf_size = 4) {
    if (mesh.triangle_count() == 0)
        throw StructuralError("build_bvh: mesh has no triangles");
    Bvh bvh;
    bvh.order.resize(mesh.triangle_count());
    std::iota(bvh.order.begin(), bvh.order.end(), 0u);
    std::vector<Vec3> centroids(mesh.triangle_count());
    for (size_t t = 0; t < mesh.triangle_count(); ++t) centroids[t] = mesh.tri_centroid(t);
    bvh.nodes.reserve(2 * mesh.triangle_count());
    detail::build_bvh_node(mesh, bvh, centroids, 0, mesh.triangle_count(), leaf_size);
    return bvh;
}

struct NearestHit {
    double distance = 0.0;
    Vec3 point;
    uint32_t face = 0;
};

// Global closest surface point. Equivalent to brute force over all
// triangles; ties resolve to the first triangle reached in traversal order.
inline NearestHit nearest_surface(const Bvh& bvh, const TriangleMesh& mesh, const Vec3& p) {
    if (bvh.empty()) throw StructuralError("nearest_surface: empty bvh");

    double best_d2 = std::numeric_limits<double>::max();
    NearestHit best;

    // Manual stack; nearer child visited first to tighten the bound early.
    int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const BvhNode& node = bvh.nodes[static_cast<size_t>(stack[--top])];
        if (node.box.dist2(p) >= best_d2) continue;
        if (node.is_leaf()) {
            for (uint32_t i = node.first; i < node.first + node.count; ++i) {
                const uint32_t t = bvh.order[i];
                const Vec3 q = closest_point_on_triangle(p, mesh.tri_vertex(t, 0),
                                                         mesh.tri_vertex(t, 1), mesh.tri_vertex(t, 2));
                const double d2 = norm2(p - q);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best.point = q;
                    best.face = t;
                }
            }
        } else {
            const double dl = bvh.nodes[static_cast<size_t>(node.left)].box.dist2(p);
            const double dr = bvh.nodes[static_cast<size_t>(node.right)].box.dist2(p);
            // Push farther child first so the nearer one pops next.
            if (dl <= dr) {
                if (dr < best_d2) stack[top++] = node.right;
                if (dl < best_d2) stack[top++] = node.left;
            } else {
                if (dl < best_d2) stack[top++] = node.left;
                if (dr < best_d2) stack[top++] = node.right;
            }
        }
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

}  // namespace paak
