// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "paak/core.hpp"

namespace paak {

// ---------------------------------------------------------------------------
// Triangle mesh. Carrier for scene and body surfaces. face_ids is an
// optional per-face integer attribute (semantic label for scenes); empty
// means absent.
// ---------------------------------------------------------------------------

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<uint32_t, 3>> triangles;
    std::vector<int32_t> face_ids;

    size_t vertex_count() const { return vertices.size(); }
    size_t triangle_count() const { return triangles.size(); }
    bool has_face_ids() const { return !face_ids.empty(); }

    Vec3 tri_vertex(size_t t, int corner) const { return vertices[triangles[t][static_cast<size_t>(corner) % 3]]; }

    Vec3 tri_centroid(size_t t) const {
        return (tri_vertex(t, 0) + tri_vertex(t, 1) + tri_vertex(t, 2)) / 3.0;
    }

    double tri_area(size_t t) const {
        return 0.5 * norm(cross(tri_vertex(t, 1) - tri_vertex(t, 0), tri_vertex(t, 2) - tri_vertex(t, 0)));
    }

    Vec3 tri_normal(size_t t) const {
        return normalized(cross(tri_vertex(t, 1) - tri_vertex(t, 0), tri_vertex(t, 2) - tri_vertex(t, 0)));
    }

    Aabb aabb() const {
        Aabb b;
        for (const auto& v : vertices) b.expand(v);
        return b;
    }

    // Index range and degeneracy checks. Degenerate faces are rejected at
    // load rather than silently skipped; they break closest-point queries.
    void validate(double min_area = 1e-12) const {
        for (size_t t = 0; t < triangles.size(); ++t) {
            for (int c = 0; c < 3; ++c) {
                if (triangles[t][static_cast<size_t>(c)] >= vertices.size())
                    throw ValidationError("mesh: triangle " + std::to_string(t) +
                                          " references vertex " +
                                          std::to_string(triangles[t][static_cast<size_t>(c)]) +
                                          " >= vertex count " + std::to_string(vertices.size()));
            }
            if (tri_area(t) < min_area)
                throw ValidationError("mesh: triangle " + std::to_string(t) +
                                      " is degenerate (area < 1e-12 m^2)");
        }
        if (!face_ids.empty() && face_ids.size() != triangles.size())
            throw ValidationError("mesh: face_ids length " + std::to_string(face_ids.size()) +
                                  " != triangle count " + std::to_string(triangles.size()));
    }
};

// Closest point on triangle (a,b,c) to p. Voronoi-region walk; exact for
// all vertex/edge/face cases.
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// ---------------------------------------------------------------------------
// Primitive builders.
// ---------------------------------------------------------------------------

// Watertight box: center, half extents, yaw about +z, outward normals.
inline TriangleMesh make_box(const Vec3& center, const Vec3& half, double yaw = 0.0,
                             int32_t face_id = -1) {
    TriangleMesh m;
    const double c = std::cos(yaw), s = std::sin(yaw);
    for (int i = 0; i < 8; ++i) {
        const double lx = (i & 1) ? half.x : -half.x;
        const double ly = (i & 2) ? half.y : -half.y;
        const double lz = (i & 4) ? half.z : -half.z;
        m.vertices.push_back({center.x + c * lx - s * ly, center.y + s * lx + c * ly, center.z + lz});
    }
    // Two triangles per face, wound counterclockwise seen from outside.
    static const uint32_t faces[12][3] = {
        {0, 2, 1}, {1, 2, 3},  // -z
        {4, 5, 6}, {5, 7, 6},  // +z
        {0, 1, 4}, {1, 5, 4},  // -y
        {2, 6, 3}, {3, 6, 7},  // +y
        {0, 4, 2}, {2, 4, 6},  // -x
        {1, 3, 5}, {3, 7, 5},  // +x
    };
    for (const auto& f : faces) m.triangles.push_back({f[0], f[1], f[2]});
    if (face_id >= 0) m.face_ids.assign(12, face_id);
    return m;
}

// Open rectangle in the z = height plane, normal +z. Two triangles.
inline TriangleMesh make_floor_rect(double width, double depth, double height = 0.0,
                                    const Vec3& center = {0, 0, 0}, int32_t face_id = -1) {
    TriangleMesh m;
    const double hx = width * 0.5, hy = depth * 0.5;
    m.vertices = {
        {center.x - hx, center.y - hy, height},
        {center.x + hx, center.y - hy, height},
        {center.x + hx, center.y + hy, height},
        {center.x - hx, center.y + hy, height},
    };
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    if (face_id >= 0) m.face_ids.assign(2, face_id);
    return m;
}

// Icosphere with the given radius, subdivided `subdiv` times. Used as an
// analytic oracle shape: every vertex lies exactly on the sphere.
inline TriangleMesh make_icosphere(double radius, int subdiv = 2) {
    TriangleMesh m;
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> vs = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (auto& v : vs) m.vertices.push_back(normalized(v));
    std::vector<std::array<uint32_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int level = 0; level < subdiv; ++level) {
        std::vector<std::array<uint32_t, 3>> next;
        std::vector<std::pair<uint64_t, uint32_t>> edge_cache;
        auto midpoint = [&](uint32_t a, uint32_t b) -> uint32_t {
            const uint64_t key = (static_cast<uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
            for (const auto& e : edge_cache)
                if (e.first == key) return e.second;
            const auto idx = static_cast<uint32_t>(m.vertices.size());
            m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
            edge_cache.emplace_back(key, idx);
            return idx;
        };
        for (const auto& f : faces) {
            const uint32_t ab = midpoint(f[0], f[1]);
            const uint32_t bc = midpoint(f[1], f[2]);
            const uint32_t ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    for (auto& v : m.vertices) v *= radius;
    m.triangles = faces;
    return m;
}

// Merge b into a, offsetting indices. Face ids are kept when both sides
// carry them (missing side fills with fill_id).
inline void append_mesh(TriangleMesh& a, const TriangleMesh& b, int32_t fill_id = 0) {
    const auto base = static_cast<uint32_t>(a.vertices.size());
    const bool want_ids = a.has_face_ids() || b.has_face_ids();
    if (want_ids && !a.has_face_ids()) a.face_ids.assign(a.triangles.size(), fill_id);
    a.vertices.insert(a.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const auto& t : b.triangles)
        a.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    if (want_ids) {
        if (b.has_face_ids())
            a.face_ids.insert(a.face_ids.end(), b.face_ids.begin(), b.face_ids.end());
        else
            a.face_ids.insert(a.face_ids.end(), b.triangles.size(), fill_id);
    }
}

// ---------------------------------------------------------------------------
// Wavefront OBJ. Only v/f records; doubles printed with %.17g so a
// write/read round trip is bit-exact.
// ---------------------------------------------------------------------------

inline void save_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!out) throw FormatError("write failed: " + path);
}

inline TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path);
    TriangleMesh mesh;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ss >> v.x >> v.y >> v.z))
                throw FormatError(path + ":" + std::to_string(lineno) + ": bad vertex record");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<uint32_t> idx;
            std::string tok;
            while (ss >> tok) {
                // "i", "i/j", "i/j/k" all start with the vertex index.
                long v = std::strtol(tok.c_str(), nullptr, 10);
                if (v == 0)
                    throw FormatError(path + ":" + std::to_string(lineno) + ": bad face index");
                if (v < 0) v = static_cast<long>(mesh.vertices.size()) + v + 1;
                idx.push_back(static_cast<uint32_t>(v - 1));
            }
            if (idx.size() < 3)
                throw FormatError(path + ":" + std::to_string(lineno) + ": face with <3 vertices");
            // Fan-triangulate polygons.
            for (size_t i = 2; i < idx.size(); ++i)
                mesh.triangles.push_back({idx[0], idx[i - 1], idx[i]});
        }
        // Everything else (vn, vt, usemtl, comments) is ignored.
    }
    return mesh;
}

}  // namespace paak
