#include "gaitdict/seeding.hpp"

#include <cstdio>

namespace gaitdict {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> parts) {
  std::uint64_t h = mix64(master);
  for (auto part : parts) {
    // Length prefix keeps ("ab","c") and ("a","bc") apart.
    const std::uint64_t len = part.size();
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&len), sizeof len), h);
    h = fnv1a64(part, h);
  }
  return mix64(h);
}

std::string hex_digest(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

}  // namespace gaitdict
