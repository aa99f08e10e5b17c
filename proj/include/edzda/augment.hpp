// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edzda/complicator.hpp"
#include "edzda/rng.hpp"
#include "edzda/schema.hpp"

namespace edzda {

inline constexpr const char* kValueSeparator = " | ";

struct TrainingSample {
    enum class Kind { ValueGeneration, DomainSlotGeneration };

    std::vector<std::pair<std::string, std::string>> history;  // prior (system, user) pairs
    std::pair<std::string, std::string> current;
    std::vector<std::string> target_values;  // value-generation targets in schema order
    std::string target_text;                 // join(target_values, " | ")
    std::string input_value;                 // domain-slot-generation: the probed value
    Kind kind = Kind::ValueGeneration;
    std::string state_id;
    std::string variant;
    std::size_t turn_index = 0;
};

struct AugmentConfig {
    std::string none_marker = "none";
    std::size_t full_permutation_max = 6;  // k! for k <= this
    std::size_t sampled_permutations = 720;
    std::uint64_t rng_seed = 1;
};

/// One value-generation sample per turn (targets in schema order) plus one
/// domain-slot sample per (value, slot) pair.
std::vector<TrainingSample> to_samples(const LabeledDialogue& ld, const Schema& schema,
                                       const AugmentConfig& config = {});

/// One sample per permutation of the target values. Full k! up to the cap,
/// then a fixed-size uniform sample of distinct permutations.
std::vector<TrainingSample> permute_values(const TrainingSample& sample,
                                           const AugmentConfig& config = {});

struct ExportResult {
    std::size_t value_samples = 0;
    std::size_t domainslot_samples = 0;
};

/// Writes train-values.jsonl, train-domainslots.jsonl and manifest.json.
/// Byte-stable given the same inputs.
ExportResult export_training(const std::vector<TrainingSample>& samples,
                             const std::filesystem::path& dir, const std::string& split,
                             const AugmentConfig& config = {});

Json sample_to_json(const TrainingSample& sample);

}  // namespace edzda
