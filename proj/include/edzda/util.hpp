// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edzda {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a, used for cache keys and content digests.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

/// "domain-slot" key helpers. Slot names may themselves contain '-' is not
/// a concern here: domain names never do, so the first '-' splits.
struct SlotId {
    std::string domain;
    std::string slot;

    std::string key() const { return domain + "-" + slot; }
    bool operator==(const SlotId&) const = default;
    auto operator<=>(const SlotId&) const = default;
};

/// Splits "taxi-arriveby" into {"taxi", "arriveby"}. Throws on a key with
/// no '-' separator.
SlotId split_slot_key(std::string_view key);

void log_warn(const std::string& msg);
void log_info(const std::string& msg);

}  // namespace edzda
