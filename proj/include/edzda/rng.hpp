// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

#include "edzda/util.hpp"

namespace edzda {

/// Deterministic splitmix64 generator. The standard <random> distributions
/// are implementation-defined, which would break byte-stable artifacts
/// across toolchains; this keeps every sampled value reproducible from the
/// configured seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    std::size_t pick_index(std::size_t n) { return static_cast<std::size_t>(bounded(n)); }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Derives an independent stream, e.g. one per seed or per expansion
    /// attempt, so parallel tasks stay reproducible.
    Rng fork(std::string_view label) const {
        return Rng(fnv1a64(label, state_ ^ 0xa0761d6478bd642fULL));
    }

    Rng fork(std::uint64_t n) const {
        return Rng(state_ ^ (0xe7037ed1a0b428dbULL * (n + 1)));
    }

private:
    std::uint64_t state_;
};

}  // namespace edzda
