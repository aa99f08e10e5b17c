// SPDX-License-Identifier: Apache-2.0
#include "edzda/complicator.hpp"

#include <algorithm>
#include <set>

#include "edzda/textnorm.hpp"

namespace edzda {

LabeledDialogue assemble_labeled_dialogue(const Dialogue& dialogue, const Flow& flow,
                                          const std::vector<CorefLink>& coref) {
    if (dialogue.turns.size() != flow.turns.size()) {
        throw ValidationError("dialogue/flow turn count mismatch for " + flow.state_id);
    }
    if (dialogue.turns.size() % 2 != 0) {
        throw ValidationError("cannot pair an odd number of turns in " + flow.state_id);
    }

    std::set<std::string> targets;
    for (const CorefLink& link : coref) targets.insert(link.target.key());

    LabeledDialogue ld;
    ld.state_id = flow.state_id;
    ld.flow_id = flow.state_id;
    ld.variant = "easy";

    std::map<std::string, std::string> belief;
    for (std::size_t i = 0; i + 1 < dialogue.turns.size(); i += 2) {
        LabeledTurn turn;
        turn.system_utterance = dialogue.turns[i].content;
        turn.user_utterance = dialogue.turns[i + 1].content;
        for (const auto& [k, v] : flow.turns[i].turn_state) turn.turn_state[k] = v;
        for (const auto& [k, v] : flow.turns[i + 1].turn_state) turn.turn_state[k] = v;
        for (const auto& [k, v] : turn.turn_state) {
            belief[k] = v;
            if (targets.contains(k)) turn.coref_slots.push_back(k);
        }
        turn.belief_state = belief;
        ld.turns.push_back(std::move(turn));
    }
    return ld;
}

std::vector<std::size_t> find_coref_turns(const LabeledDialogue& ld,
                                          const std::vector<CorefLink>& coref) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ld.turns.size(); ++i) {
        bool flagged = false;
        for (const CorefLink& link : coref) {
            if (!ld.turns[i].turn_state.contains(link.target.key())) continue;
            // Source must have been stated in a strictly earlier turn.
            for (std::size_t j = 0; j < i && !flagged; ++j) {
                if (ld.turns[j].turn_state.contains(link.source.key())) flagged = true;
            }
            if (flagged) break;
        }
        if (flagged) out.push_back(i);
    }
    return out;
}

std::string complication_prompt(const std::vector<LabeledTurn>& history, const LabeledTurn& turn,
                                const std::vector<CorefLink>& coref_pairs) {
    std::string p = "## Dialogue History:\n";
    for (const LabeledTurn& h : history) {
        p += "system: " + h.system_utterance + "\n";
        p += "user: " + h.user_utterance + "\n";
    }
    p += "## Current Turn Utterances:\n";
    p += "system: " + turn.system_utterance + "\n";
    p += "user: " + turn.user_utterance + "\n";

    Json ts = Json::object();
    for (const auto& [k, v] : turn.turn_state) ts[k] = v;
    p += "## Turn State: " + ts.dump() + "\n";

    Json coref = Json::object();
    for (const CorefLink& link : coref_pairs) coref[link.target.key()] = link.source.key();
    p += "## Co-reference: " + coref.dump() + "\n";

    p += "## Instruction:\n"
         "Rewrite the current turn utterances so the co-reference information above is expressed "
         "implicitly instead of stating the full value. Every other value in the current turn "
         "state must stay explicit. The rewritten utterances must paraphrase the originals and "
         "keep their meaning; change only the expression of the co-reference values. If a "
         "co-reference value is already implicit, copy the utterances unchanged.\n"
         "## Output Format:\n"
         "{\"description\": <the co-reference relation in natural language>, \"system\": "
         "<modified system utterance>, \"user\": <modified user utterance>}\n";
    return p;
}

std::optional<ModifiedTurn> complicate_turn(LlmClient& llm,
                                            const std::vector<LabeledTurn>& history,
                                            const LabeledTurn& turn,
                                            const std::vector<CorefLink>& coref_pairs) {
    ChatRequest req = make_request(
        Stage::Complication,
        {ChatMessage{"user", complication_prompt(history, turn, coref_pairs)}});
    ChatResponse res = llm.complete(req);

    auto doc = extract_json(res.text);
    if (!doc || !doc->is_object() || !doc->contains("system") || !doc->contains("user")) {
        log_warn("unparseable complication response; keeping original turn");
        return std::nullopt;
    }
    return ModifiedTurn{doc->value("description", std::string{}),
                        (*doc)["system"].get<std::string>(), (*doc)["user"].get<std::string>()};
}

bool validate_complication(const LabeledTurn& original, const ModifiedTurn& modified,
                           const std::vector<std::string>& coref_targets,
                           const Lexicon& lexicon) {
    const std::string merged = modified.system_utterance + " " + modified.user_utterance;
    for (const auto& [key, value] : original.turn_state) {
        if (std::find(coref_targets.begin(), coref_targets.end(), key) != coref_targets.end()) {
            continue;
        }
        if (!value_appears(merged, split_slot_key(key), value, lexicon)) return false;
    }
    return true;
}

LabeledDialogue complicate_dialogue(LlmClient& llm, const LabeledDialogue& easy,
                                    const std::vector<CorefLink>& coref, const Lexicon& lexicon) {
    LabeledDialogue difficult = easy;
    difficult.variant = "difficult";

    for (std::size_t idx : find_coref_turns(easy, coref)) {
        const LabeledTurn& turn = difficult.turns[idx];

        std::vector<CorefLink> pairs;
        for (const CorefLink& link : coref) {
            if (turn.turn_state.contains(link.target.key())) pairs.push_back(link);
        }
        // History is the already-finalized text of earlier difficult turns.
        std::vector<LabeledTurn> history(difficult.turns.begin(),
                                         difficult.turns.begin() +
                                             static_cast<std::ptrdiff_t>(idx));

        auto modified = complicate_turn(llm, history, turn, pairs);
        if (!modified) continue;
        if (!validate_complication(turn, *modified, turn.coref_slots, lexicon)) {
            log_warn("complication of " + easy.state_id + " turn " + std::to_string(idx) +
                     " dropped a non-coref value; restoring the original turn");
            continue;
        }
        difficult.turns[idx].system_utterance = modified->system_utterance;
        difficult.turns[idx].user_utterance = modified->user_utterance;
    }
    return difficult;
}

}  // namespace edzda
