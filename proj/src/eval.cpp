// SPDX-License-Identifier: Apache-2.0
#include "edzda/eval.hpp"

#include <set>

namespace edzda {

namespace {

std::string turn_key(const std::string& dialogue_id, std::size_t turn_index) {
    return dialogue_id + "\x1f" + std::to_string(turn_index);
}

std::map<std::string, std::string> normalized_map(const std::map<std::string, std::string>& m) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : m) out[k] = normalize(v);
    return out;
}

}  // namespace

JgaResult joint_goal_accuracy(const std::vector<PredictionRecord>& preds,
                              const std::vector<GoldTurn>& golds) {
    std::map<std::string, const PredictionRecord*> by_key;
    for (const PredictionRecord& p : preds) {
        if (!by_key.emplace(turn_key(p.dialogue_id, p.turn_index), &p).second) {
            throw ValidationError("duplicate prediction for " + p.dialogue_id + " turn " +
                                  std::to_string(p.turn_index));
        }
    }

    JgaResult result;
    result.total_turns = golds.size();
    for (const GoldTurn& gold : golds) {
        auto it = by_key.find(turn_key(gold.dialogue_id, gold.turn_index));
        if (it == by_key.end()) {
            ++result.missing_predictions;
            continue;
        }
        if (normalized_map(it->second->predicted_belief) == normalized_map(gold.belief)) {
            ++result.correct_turns;
        }
    }
    if (result.total_turns > 0) {
        result.jga = static_cast<double>(result.correct_turns) /
                     static_cast<double>(result.total_turns);
    }
    return result;
}

CorefResult coref_slot_accuracy(const std::vector<PredictionRecord>& preds,
                                const std::vector<GoldTurn>& golds,
                                const std::vector<CorefAnnotation>& annotations) {
    std::map<std::string, const GoldTurn*> gold_by_key;
    for (const GoldTurn& g : golds) gold_by_key[turn_key(g.dialogue_id, g.turn_index)] = &g;
    std::map<std::string, const PredictionRecord*> pred_by_key;
    for (const PredictionRecord& p : preds) {
        pred_by_key[turn_key(p.dialogue_id, p.turn_index)] = &p;
    }

    CorefResult result;
    std::set<std::string> first_seen;  // dialogue + slot pairs already scored

    for (const CorefAnnotation& a : annotations) {
        auto git = gold_by_key.find(turn_key(a.dialogue_id, a.turn_index));
        if (git == gold_by_key.end()) {
            throw ValidationError("annotation references missing gold turn: " + a.dialogue_id +
                                  " turn " + std::to_string(a.turn_index));
        }
        auto gval = git->second->belief.find(a.slot);
        if (gval == git->second->belief.end()) {
            throw ValidationError("annotation names slot " + a.slot +
                                  " absent from the gold belief at " + a.dialogue_id + " turn " +
                                  std::to_string(a.turn_index));
        }

        bool correct = false;
        if (auto pit = pred_by_key.find(turn_key(a.dialogue_id, a.turn_index));
            pit != pred_by_key.end()) {
            auto pval = pit->second->predicted_belief.find(a.slot);
            if (pval != pit->second->predicted_belief.end() &&
                normalize(pval->second) == normalize(gval->second)) {
                correct = true;
            }
        }

        ++result.annotated;
        if (correct) ++result.correct;
        if (first_seen.insert(a.dialogue_id + "\x1f" + a.slot).second) {
            ++result.first_mention_annotated;
            if (correct) ++result.first_mention_correct;
        }
    }

    if (result.annotated > 0) {
        result.accuracy =
            static_cast<double>(result.correct) / static_cast<double>(result.annotated);
    }
    if (result.first_mention_annotated > 0) {
        result.first_mention_accuracy = static_cast<double>(result.first_mention_correct) /
                                        static_cast<double>(result.first_mention_annotated);
    }
    return result;
}

std::vector<GoldTurn> gold_turns_from_labeled(const std::vector<Json>& labeled_records,
                                              const std::string& variant) {
    std::vector<GoldTurn> out;
    for (const Json& record : labeled_records) {
        if (record.value("variant", std::string{}) != variant) continue;
        std::string id = record.at("state_id").get<std::string>();
        std::size_t idx = 0;
        for (const Json& jt : record.at("turns")) {
            GoldTurn g;
            g.dialogue_id = id;
            g.turn_index = idx++;
            for (auto it = jt.at("belief_state").begin(); it != jt.at("belief_state").end();
                 ++it) {
                g.belief[it.key()] = it.value().get<std::string>();
            }
            out.push_back(std::move(g));
        }
    }
    return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
    std::vector<PredictionRecord> out;
    for (const Json& record : read_jsonl(path)) {
        PredictionRecord p;
        p.dialogue_id = record.at("dialogue_id").get<std::string>();
        p.turn_index = record.at("turn_index").get<std::size_t>();
        for (auto it = record.at("predicted_belief").begin();
             it != record.at("predicted_belief").end(); ++it) {
            p.predicted_belief[it.key()] = it.value().get<std::string>();
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<CorefAnnotation> load_annotations(const std::filesystem::path& path) {
    std::vector<CorefAnnotation> out;
    for (const Json& record : read_jsonl(path)) {
        out.push_back(CorefAnnotation{record.at("dialogue_id").get<std::string>(),
                                      record.at("turn_index").get<std::size_t>(),
                                      record.at("slot").get<std::string>()});
    }
    return out;
}

Json evaluation_report(const JgaResult& jga, const CorefResult& coref) {
    Json report{{"jga", jga.jga},
                {"counts",
                 Json{{"total_turns", jga.total_turns},
                      {"correct_turns", jga.correct_turns},
                      {"missing_predictions", jga.missing_predictions},
                      {"coref_annotated", coref.annotated},
                      {"coref_correct", coref.correct}}}};
    if (coref.accuracy) {
        report["coref_acc"] = *coref.accuracy;
    } else {
        report["coref_acc"] = nullptr;
        report["coref_acc_note"] = "no co-reference annotations supplied";
    }
    if (coref.first_mention_accuracy) {
        report["coref_acc_first_mention"] = *coref.first_mention_accuracy;
    }
    return report;
}

}  // namespace edzda
