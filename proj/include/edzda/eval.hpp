// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edzda/jsonl.hpp"
#include "edzda/textnorm.hpp"

namespace edzda {

/// Canonical form used for all exact-match comparisons. Delegates to the
/// shared normalizer: lowercase, trim, collapse whitespace, strip a leading
/// "the ", zero-pad times.
inline std::string normalize(std::string_view value) { return normalize_value(value); }

struct GoldTurn {
    std::string dialogue_id;
    std::size_t turn_index = 0;
    std::map<std::string, std::string> belief;
};

struct PredictionRecord {
    std::string dialogue_id;
    std::size_t turn_index = 0;
    std::map<std::string, std::string> predicted_belief;
};

struct CorefAnnotation {
    std::string dialogue_id;
    std::size_t turn_index = 0;
    std::string slot;
};

struct JgaResult {
    double jga = 0.0;
    std::size_t total_turns = 0;
    std::size_t correct_turns = 0;
    std::size_t missing_predictions = 0;
};

/// Per-turn all-or-nothing exact match of the normalized belief maps.
/// Missing predictions count as incorrect. Duplicate prediction keys throw.
JgaResult joint_goal_accuracy(const std::vector<PredictionRecord>& preds,
                              const std::vector<GoldTurn>& golds);

struct CorefResult {
    std::optional<double> accuracy;              // empty when no annotations
    std::size_t annotated = 0;
    std::size_t correct = 0;
    std::optional<double> first_mention_accuracy;  // restricted to each slot's
    std::size_t first_mention_annotated = 0;       // first annotated turn
    std::size_t first_mention_correct = 0;
};

/// Fraction of annotated (turn, slot) pairs whose normalized predicted value
/// equals gold. Absent predictions are wrong. Annotations referencing a
/// missing gold turn throw.
CorefResult coref_slot_accuracy(const std::vector<PredictionRecord>& preds,
                                const std::vector<GoldTurn>& golds,
                                const std::vector<CorefAnnotation>& annotations);

/// Gold turns from the complicator's labeled.jsonl records.
std::vector<GoldTurn> gold_turns_from_labeled(const std::vector<Json>& labeled_records,
                                              const std::string& variant = "easy");

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
std::vector<CorefAnnotation> load_annotations(const std::filesystem::path& path);

Json evaluation_report(const JgaResult& jga, const CorefResult& coref);

}  // namespace edzda
