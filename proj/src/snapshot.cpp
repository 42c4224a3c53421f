#include "aggdiff/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "AGD1 I/O assumes a little-endian host");

namespace aggdiff {

namespace {
constexpr char kMagic[4] = {'A', 'G', 'D', '1'};
}

void write_snapshot(const std::string& path, const Field& f, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path);
  const std::uint32_t d = static_cast<std::uint32_t>(f.spec.d);
  const std::uint32_t n = static_cast<std::uint32_t>(f.spec.n);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&f.spec.L), 8);
  out.write(reinterpret_cast<const char*>(&t), 8);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write on snapshot: " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  char magic[4];
  std::uint32_t d = 0, n = 0;
  double L = 0.0, t = 0.0;
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad AGD1 magic in " + path);
  in.read(reinterpret_cast<char*>(&d), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&L), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  if (!in) throw std::runtime_error("truncated AGD1 header in " + path);
  GridSpec g(static_cast<int>(d), static_cast<int>(n), L);
  Snapshot s{Field(g), t};
  in.read(reinterpret_cast<char*>(s.field.values.data()),
          static_cast<std::streamsize>(s.field.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated AGD1 payload in " + path);
  return s;
}

std::string content_hash(const Field& f) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(kMagic, 4);
  mix(&f.spec.d, sizeof(f.spec.d));
  mix(&f.spec.n, sizeof(f.spec.n));
  mix(&f.spec.L, sizeof(f.spec.L));
  mix(f.values.data(), f.values.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

} // namespace aggdiff
