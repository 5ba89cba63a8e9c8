#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace capqe {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// FNV-1a over bytes; stable across platforms, used for mock seeding.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

// splitmix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace capqe
