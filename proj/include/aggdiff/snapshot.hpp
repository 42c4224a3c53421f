#pragma once

#include <string>

#include "aggdiff/grid.hpp"

namespace aggdiff {

// Binary snapshot format AGD1, shared project-wide:
//   magic "AGD1", u32 d, u32 n, f64 L, f64 t, then n^d f64 values row-major,
// all little-endian.
void write_snapshot(const std::string& path, const Field& f, double t);

struct Snapshot {
  Field field;
  double t = 0.0;
};

Snapshot read_snapshot(const std::string& path);

// FNV-1a over the serialized bytes; used to fingerprint initial data in run
// metadata.
std::string content_hash(const Field& f);

} // namespace aggdiff
