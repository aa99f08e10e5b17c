// SPDX-License-Identifier: Apache-2.0
#include "edzda/augment.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace edzda {

namespace {

std::string join_values(const std::vector<std::string>& values, const std::string& none_marker) {
    if (values.empty()) return none_marker;
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += kValueSeparator;
        out += values[i];
    }
    return out;
}

}  // namespace

std::vector<TrainingSample> to_samples(const LabeledDialogue& ld, const Schema& schema,
                                       const AugmentConfig& config) {
    std::vector<TrainingSample> out;
    std::vector<std::pair<std::string, std::string>> history;

    for (std::size_t i = 0; i < ld.turns.size(); ++i) {
        const LabeledTurn& turn = ld.turns[i];

        // Turn-state pairs in schema order.
        std::vector<std::pair<std::string, std::string>> ordered(turn.turn_state.begin(),
                                                                 turn.turn_state.end());
        std::stable_sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
            auto ra = schema.slot_rank(split_slot_key(a.first));
            auto rb = schema.slot_rank(split_slot_key(b.first));
            return ra.value_or(SIZE_MAX) < rb.value_or(SIZE_MAX);
        });

        TrainingSample value_sample;
        value_sample.history = history;
        value_sample.current = {turn.system_utterance, turn.user_utterance};
        value_sample.kind = TrainingSample::Kind::ValueGeneration;
        value_sample.state_id = ld.state_id;
        value_sample.variant = ld.variant;
        value_sample.turn_index = i;
        for (const auto& [_, value] : ordered) value_sample.target_values.push_back(value);
        value_sample.target_text = join_values(value_sample.target_values, config.none_marker);
        out.push_back(value_sample);

        for (const auto& [key, value] : ordered) {
            TrainingSample ds = value_sample;
            ds.kind = TrainingSample::Kind::DomainSlotGeneration;
            ds.target_values = {key};
            ds.target_text = key;
            ds.input_value = value;
            out.push_back(std::move(ds));
        }

        history.emplace_back(turn.system_utterance, turn.user_utterance);
    }
    return out;
}

std::vector<TrainingSample> permute_values(const TrainingSample& sample,
                                           const AugmentConfig& config) {
    if (sample.kind != TrainingSample::Kind::ValueGeneration) {
        throw ValidationError("permute_values applies to value-generation samples only");
    }
    const std::size_t k = sample.target_values.size();
    if (k <= 1) return {sample};

    auto emit = [&](const std::vector<std::string>& values) {
        TrainingSample s = sample;
        s.target_values = values;
        s.target_text = join_values(values, config.none_marker);
        return s;
    };

    std::vector<TrainingSample> out;
    if (k <= config.full_permutation_max) {
        std::vector<std::string> values = sample.target_values;
        std::sort(values.begin(), values.end());
        do {
            out.push_back(emit(values));
        } while (std::next_permutation(values.begin(), values.end()));
        return out;
    }

    // Factorial blowup guard: a fixed-size uniform sample of distinct orders.
    Rng rng(config.rng_seed ^ fnv1a64(sample.state_id + "#" + std::to_string(sample.turn_index)));
    std::set<std::string> seen;
    std::size_t guard = 0;
    while (out.size() < config.sampled_permutations && guard < config.sampled_permutations * 50) {
        ++guard;
        std::vector<std::string> values = sample.target_values;
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[rng.pick_index(i)]);
        }
        std::string fp = join_values(values, config.none_marker);
        if (seen.insert(fp).second) out.push_back(emit(values));
    }
    return out;
}

Json sample_to_json(const TrainingSample& sample) {
    Json history = Json::array();
    for (const auto& [system, user] : sample.history) {
        history.push_back(Json{{"system", system}, {"user", user}});
    }
    Json j{{"kind", sample.kind == TrainingSample::Kind::ValueGeneration
                        ? "value-generation"
                        : "domain-slot-generation"},
           {"state_id", sample.state_id},
           {"variant", sample.variant},
           {"turn_index", sample.turn_index},
           {"history", std::move(history)},
           {"system", sample.current.first},
           {"user", sample.current.second},
           {"target", sample.target_text}};
    if (sample.kind == TrainingSample::Kind::DomainSlotGeneration) {
        j["value"] = sample.input_value;
    }
    return j;
}

ExportResult export_training(const std::vector<TrainingSample>& samples,
                             const std::filesystem::path& dir, const std::string& split,
                             const AugmentConfig& config) {
    if (samples.empty()) throw ValidationError("nothing to export");

    std::vector<Json> values, domainslots;
    for (const TrainingSample& s : samples) {
        if (s.kind == TrainingSample::Kind::ValueGeneration) {
            values.push_back(sample_to_json(s));
        } else {
            domainslots.push_back(sample_to_json(s));
        }
    }
    std::filesystem::create_directories(dir);
    write_jsonl(dir / (split + "-values.jsonl"), values);
    write_jsonl(dir / (split + "-domainslots.jsonl"), domainslots);

    Json config_json{{"none_marker", config.none_marker},
                     {"full_permutation_max", config.full_permutation_max},
                     {"sampled_permutations", config.sampled_permutations},
                     {"rng_seed", config.rng_seed}};
    Json manifest{{"split", split},
                  {"value_samples", values.size()},
                  {"domainslot_samples", domainslots.size()},
                  {"total", samples.size()},
                  {"config", config_json},
                  {"config_digest", to_hex(fnv1a64(config_json.dump()))}};
    write_json_file(dir / "manifest.json", manifest);
    return ExportResult{values.size(), domainslots.size()};
}

}  // namespace edzda
