// Copyright (c) 2026 The paak Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "paak/core.hpp"

namespace paak {

// Little-endian binary readers/writers. The host is assumed little-endian
// (x86/ARM64); a static check below keeps the assumption honest.

namespace detail {
inline bool host_is_little_endian() {
    const uint32_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}
}  // namespace detail

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& what) {
    static_assert(std::is_trivially_copyable_v<T>);
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("unexpected end of file while reading " + what);
    return v;
}

template <typename T>
void write_array(std::ostream& out, const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void read_array(std::istream& in, std::vector<T>& v, size_t count, const std::string& what) {
    static_assert(std::is_trivially_copyable_v<T>);
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw FormatError("unexpected end of file while reading " + what);
}

inline void write_magic(std::ostream& out, const char magic[9]) {
    out.write(magic, 8);
}

inline void expect_magic(std::istream& in, const char magic[9], const std::string& path) {
    char buf[8];
    in.read(buf, 8);
    if (!in || std::memcmp(buf, magic, 8) != 0)
        throw FormatError(path + ": bad magic, expected " + std::string(magic, 8));
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    in.seekg(0, std::ios::end);
    const auto size = static_cast<size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw FormatError("read failed: " + path);
    return bytes;
}

inline std::string file_hash_hex(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    return hex64(fnv1a64(bytes.data(), bytes.size()));
}

}  // namespace paak
