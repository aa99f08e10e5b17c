// SPDX-License-Identifier: Apache-2.0
#include "edzda/dialogue_gen.hpp"

#include <algorithm>
#include <set>

#include "edzda/planner.hpp"
#include "edzda/textnorm.hpp"

namespace edzda {

// ---------------------------------------------------------------------------
// Lexicon

Lexicon Lexicon::standard() {
    Lexicon lex;
    lex.add("internet", "yes",
            {"with internet", "has internet", "internet included", "free internet", "with wifi",
             "free wifi", "offers internet", "internet access"});
    lex.add("internet", "no", {"without internet", "no internet", "no wifi"});
    lex.add("parking", "yes",
            {"with parking", "has parking", "free parking", "parking included", "offers parking",
             "parking available"});
    lex.add("parking", "no", {"without parking", "no parking"});

    const char* words[] = {"one", "two", "three", "four", "five", "six", "seven", "eight"};
    for (int i = 0; i < 8; ++i) {
        lex.by_value_[std::to_string(i + 1)].push_back(words[i]);
    }
    lex.by_value_["centre"].push_back("center");
    lex.by_value_["centre"].push_back("city centre");
    lex.by_value_["centre"].push_back("city center");
    lex.by_value_["guest house"].push_back("guesthouse");

    for (const char* p :
         {"dontcare", "do not care", "don t care", "does not matter", "doesn t matter",
          "do not mind", "don t mind", "no preference", "any is fine", "is fine", "any area",
          "any price", "any time", "anything", "not particular"}) {
        lex.add_dontcare_phrase(p);
    }
    return lex;
}

void Lexicon::add(const std::string& slot_key, const std::string& value,
                  std::vector<std::string> phrases) {
    auto& dst = by_slot_value_[slot_key + "|" + value];
    for (std::string& p : phrases) dst.push_back(normalize_phrase(p));
}

void Lexicon::add_dontcare_phrase(std::string phrase) {
    dontcare_phrases_.push_back(normalize_phrase(phrase));
}

std::vector<std::string> Lexicon::surface_phrases(const SlotId& slot,
                                                  const std::string& value) const {
    std::vector<std::string> out;
    std::string nv = normalize_value(value);
    if (nv == "dontcare") return dontcare_phrases_;
    if (auto it = by_slot_value_.find(slot.slot + "|" + nv); it != by_slot_value_.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    if (auto it = by_value_.find(nv); it != by_value_.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
}

bool value_appears(const std::string& utterance, const SlotId& slot, const std::string& value,
                   const Lexicon& lexicon) {
    const std::string haystack = normalize_utterance(utterance);
    const std::string nv = normalize_value(value);

    std::vector<std::string> candidates;
    if (nv != "dontcare") {
        if (looks_like_time(nv)) {
            candidates = time_surface_forms(nv);
        } else {
            candidates.push_back(normalize_phrase(nv));
        }
    }
    for (std::string& p : lexicon.surface_phrases(slot, value)) {
        candidates.push_back(std::move(p));
    }
    for (const std::string& c : candidates) {
        if (contains_token_phrase(haystack, c)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Flow validation

std::vector<Violation> validate_flow(const Flow& flow, const DialogueState& state) {
    std::vector<Violation> out;
    if (flow.turns.empty()) {
        out.push_back({"endpoints", "flow has no turns"});
        return out;
    }
    if (flow.turns.front().role != "agent") {
        out.push_back({"endpoints", "flow must start with the agent"});
    }
    if (flow.turns.back().role != "user") {
        out.push_back({"endpoints", "flow must end with the user"});
    }
    for (std::size_t i = 0; i < flow.turns.size(); ++i) {
        const std::string expected = i % 2 == 0 ? "agent" : "user";
        if (flow.turns[i].role != expected) {
            out.push_back({"alternation", "turn " + std::to_string(i) + " has role '" +
                                              flow.turns[i].role + "', expected '" + expected +
                                              "'"});
            break;
        }
    }

    std::set<std::string> mentioned;
    for (std::size_t i = 0; i < flow.turns.size(); ++i) {
        const FlowTurn& turn = flow.turns[i];
        std::size_t fresh = 0;
        for (const auto& [key, value] : turn.turn_state) {
            auto it = state.entries.find(key);
            if (it == state.entries.end()) {
                out.push_back({"extra", "turn " + std::to_string(i) + " mentions slot " + key +
                                            " absent from the dialogue state"});
            } else if (normalize_value(it->second) != normalize_value(value)) {
                out.push_back({"inconsistent", "turn " + std::to_string(i) + " gives " + key +
                                                   " = '" + value + "' but the state says '" +
                                                   it->second + "'"});
            }
            if (mentioned.insert(key).second) ++fresh;
        }
        if (turn.role == "user" && fresh > 6) {
            out.push_back({"cardinality", "user turn " + std::to_string(i) + " introduces " +
                                              std::to_string(fresh) + " new constraints (max 6)"});
        }
    }
    for (const auto& [key, _] : state.entries) {
        if (!mentioned.contains(key)) {
            out.push_back({"coverage", "state slot " + key + " never appears in any turn state"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dialogue validation (retention gate)

RetentionDecision validate_dialogue(const Dialogue& dialogue, const Flow& flow,
                                    const Lexicon& lexicon) {
    RetentionDecision decision;
    if (dialogue.turns.size() != flow.turns.size()) {
        decision.reasons.push_back("turn-count-mismatch");
        return decision;
    }
    for (std::size_t i = 0; i < flow.turns.size(); ++i) {
        if (dialogue.turns[i].role != flow.turns[i].role) {
            decision.reasons.push_back("role-mismatch@" + std::to_string(i));
            continue;
        }
        for (const auto& [key, value] : flow.turns[i].turn_state) {
            SlotId slot = split_slot_key(key);
            if (!value_appears(dialogue.turns[i].content, slot, value, lexicon)) {
                decision.reasons.push_back("missing-value@" + std::to_string(i) + ":" + key);
            }
        }
    }
    decision.retained = decision.reasons.empty();
    return decision;
}

Json RetentionReport::to_json() const {
    Json reasons = Json::object();
    for (const auto& [reason, count] : reason_counts) reasons[reason] = count;
    return Json{{"generated", generated},
                {"retained", retained},
                {"deleted", generated - retained},
                {"retention_rate", retention_rate()},
                {"reasons", std::move(reasons)}};
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

Json state_to_json(const DialogueState& state) {
    Json out = Json::object();
    for (const auto& [key, value] : state.entries) out[key] = value;
    return out;
}

}  // namespace

Json build_db_info(const DialogueState& state) {
    Json out = Json::object();
    for (const auto& [domain, entity] : state.chosen_entities) {
        Json attrs = Json::object();
        for (const auto& [attr, value] : entity) attrs[attr] = value;
        out[domain] = std::move(attrs);
    }
    return out;
}

std::string user_goal_prompt(const DialogueState& state) {
    std::string p = "Given the following dialogue state:\n\n";
    p += state_to_json(state).dump(2);
    p += "\n\nWrite the user's overall goal for the upcoming conversation, using only the "
         "information in the state. Guidelines:\n"
         "- Do not include specific names of restaurants, hotels or attractions from the state; "
         "those are for the agent to suggest during the conversation.\n"
         "- Do not add or infer anything beyond the slots given.\n"
         "- The ordering of the slots carries no meaning; choose a sensible flow yourself.\n"
         "- The goal should leave room for the agent to make recommendations that the user can "
         "confirm.\n\n"
         "Reply with the goal as a short paragraph of plain text.\n";
    return p;
}

std::string flow_prompt(const DialogueState& state, const UserGoal& goal, const Json& db_info) {
    std::string p;
    p += "## Dialogue State: " + state_to_json(state).dump() + "\n";
    p += "## User Goal: " + goal.text + "\n";
    p += "## Information for the Agent: " + db_info.dump() + "\n";
    p += "## Instruction:\n"
         "Plan the flow of a dialogue between an agent and a user that realizes the dialogue "
         "state above. Output a JSON list; each element is {\"description\": <what happens in "
         "that turn>, \"turn state\": <the subset of the dialogue state the user mentions or "
         "confirms in that turn>}.\n"
         "The dialogue starts with the agent, ends with the user, and strictly alternates.\n"
         "Every entry of the dialogue state must be used in some turn state and nothing may be "
         "added.\n"
         "After a successful booking the agent provides a synthetic reference number of 8 random "
         "characters.\n"
         "The user must introduce at most six new domain-slot restrictions in any single turn; "
         "split constraints over multiple turns when needed.\n"
         "A value of 'dontcare' means the user has no preference for that slot, and the user "
         "must say so.\n"
         "You may plan turns where the user asks for extra details (phone number, address) "
         "using the agent information above.\n";
    return p;
}

std::string dialogue_prompt(const Flow& flow, const Json& db_info) {
    Json turns = Json::array();
    for (const FlowTurn& t : flow.turns) {
        Json ts = Json::object();
        for (const auto& [k, v] : t.turn_state) ts[k] = v;
        turns.push_back(Json{{"role", t.role}, {"description", t.description},
                             {"turn state", std::move(ts)}});
    }
    std::string p;
    p += "## Information for the Agent: " + db_info.dump() + "\n";
    p += "## Dialogue Flow: " + turns.dump() + "\n";
    p += "## Instruction:\n"
         "Write the dialogue following this flow. Each turn must realize its description and "
         "express every value of its turn state explicitly in the utterance. Booking reference "
         "numbers are strings of 8 random characters. No flow turn may be omitted and no turn "
         "may be added; the output must correspond one-to-one with the flow.\n"
         "## Output Format: a JSON list of {\"role\": <agent|user>, \"description\": <copied "
         "from the flow>, \"content\": <the utterance>}\n";
    return p;
}

// ---------------------------------------------------------------------------
// LLM operations

std::vector<std::string> recommendable_names(const DialogueState& state, const Schema& schema) {
    std::vector<std::string> names;
    for (const auto& [key, value] : state.entries) {
        SlotId id = split_slot_key(key);
        if (id.slot != "name") continue;
        const SlotSpec* spec = schema.find_slot(id.domain, id.slot);
        if (spec) names.push_back(value);
    }
    return names;
}

std::optional<UserGoal> generate_user_goal(LlmClient& llm, const DialogueState& state,
                                           const Schema& schema) {
    const std::vector<std::string> names = recommendable_names(state, schema);
    auto leaks = [&](const std::string& text) {
        const std::string haystack = normalize_utterance(text);
        for (const std::string& name : names) {
            if (contains_token_phrase(haystack, normalize_phrase(name))) return true;
        }
        return false;
    };

    std::vector<ChatMessage> messages{ChatMessage{"user", user_goal_prompt(state)}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse res = llm.complete(make_request(Stage::UserGoal, messages));
        std::string text = res.text;
        if (text.empty()) {
            log_warn("empty user goal for state " + state.state_id);
            return std::nullopt;
        }
        if (!leaks(text)) return UserGoal{std::move(text), state.state_id};
        log_warn("user goal for state " + state.state_id + " leaked a venue name; regenerating");
        messages.push_back(ChatMessage{"assistant", text});
        messages.push_back(ChatMessage{
            "user", "The goal mentioned a specific venue name. Rewrite it without naming any "
                    "restaurant, hotel or attraction."});
    }
    log_warn("rejecting state " + state.state_id + ": user goal keeps leaking names");
    return std::nullopt;
}

namespace {

std::optional<std::vector<FlowTurn>> parse_flow_turns(const Json& doc) {
    if (!doc.is_array() || doc.empty()) return std::nullopt;
    std::vector<FlowTurn> turns;
    std::size_t idx = 0;
    for (const Json& jt : doc) {
        if (!jt.is_object() || !jt.contains("description")) return std::nullopt;
        FlowTurn turn;
        turn.role = jt.value("role", idx % 2 == 0 ? std::string("agent") : std::string("user"));
        turn.description = jt["description"].get<std::string>();
        const Json* ts = nullptr;
        if (jt.contains("turn state")) {
            ts = &jt["turn state"];
        } else if (jt.contains("turn_state")) {
            ts = &jt["turn_state"];
        }
        if (ts) {
            if (!ts->is_object()) return std::nullopt;
            for (auto it = ts->begin(); it != ts->end(); ++it) {
                if (!it.value().is_string()) return std::nullopt;
                auto id = parse_domain_slot(it.key());
                turn.turn_state[id ? id->key() : it.key()] = it.value().get<std::string>();
            }
        }
        turns.push_back(std::move(turn));
        ++idx;
    }
    return turns;
}

}  // namespace

std::optional<Flow> plan_flow(LlmClient& llm, const DialogueState& state, const UserGoal& goal,
                              const Json& db_info) {
    std::vector<ChatMessage> messages{ChatMessage{"user", flow_prompt(state, goal, db_info)}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse res = llm.complete(make_request(Stage::Flow, messages));
        auto doc = extract_json(res.text);
        if (doc) {
            if (auto turns = parse_flow_turns(*doc)) {
                return Flow{state.state_id, std::move(*turns)};
            }
        }
        log_warn("unparseable flow for state " + state.state_id +
                 (attempt == 0 ? "; retrying" : "; skipping"));
        messages.push_back(ChatMessage{"assistant", res.text});
        messages.push_back(ChatMessage{
            "user", "That was not a valid JSON list of {description, turn state} elements. "
                    "Output only the JSON list."});
    }
    return std::nullopt;
}

std::optional<Dialogue> generate_dialogue(LlmClient& llm, const Flow& flow, const Json& db_info) {
    std::vector<ChatMessage> messages{ChatMessage{"user", dialogue_prompt(flow, db_info)}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse res = llm.complete(make_request(Stage::DialogueGen, messages));
        auto doc = extract_json(res.text);
        if (doc && doc->is_array() && !doc->empty()) {
            Dialogue dialogue;
            dialogue.flow_id = flow.state_id;
            bool ok = true;
            for (const Json& jt : *doc) {
                if (!jt.is_object() || !jt.contains("role") || !jt.contains("content")) {
                    ok = false;
                    break;
                }
                dialogue.turns.push_back(DialogueTurn{jt["role"].get<std::string>(),
                                                      jt.value("description", std::string{}),
                                                      jt["content"].get<std::string>()});
            }
            if (ok) return dialogue;
        }
        log_warn("unparseable dialogue for flow " + flow.state_id +
                 (attempt == 0 ? "; retrying" : "; skipping"));
        messages.push_back(ChatMessage{"assistant", res.text});
        messages.push_back(ChatMessage{
            "user", "That was not a valid JSON list of {role, description, content} turns. "
                    "Output only the JSON list."});
    }
    return std::nullopt;
}

}  // namespace edzda
