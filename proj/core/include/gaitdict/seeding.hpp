#pragma once

#include <cstdint>
#include <string_view>
#include <initializer_list>
#include <string>

namespace gaitdict {

// 64-bit FNV-1a over raw bytes. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives a task seed from a master seed and an ordered list of identifying
// parts, e.g. derive_seed(master, {"train", user, combo, kind}).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> parts);

// Hex digest of a byte string (FNV-1a 64, 16 lowercase hex chars).
std::string hex_digest(std::string_view bytes);

}  // namespace gaitdict
