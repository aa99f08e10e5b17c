// SPDX-License-Identifier: Apache-2.0
#include "edzda/util.hpp"

#include <cstdio>
#include <mutex>

namespace edzda {

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

SlotId split_slot_key(std::string_view key) {
    auto pos = key.find('-');
    if (pos == std::string_view::npos || pos == 0 || pos + 1 == key.size()) {
        throw ValidationError("malformed domain-slot key: '" + std::string(key) + "'");
    }
    return SlotId{std::string(key.substr(0, pos)), std::string(key.substr(pos + 1))};
}

namespace {
std::mutex log_mutex;
}

void log_warn(const std::string& msg) {
    std::lock_guard lock(log_mutex);
    std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}

void log_info(const std::string& msg) {
    std::lock_guard lock(log_mutex);
    std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

}  // namespace edzda
