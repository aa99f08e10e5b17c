// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edzda/llm.hpp"
#include "edzda/schema.hpp"
#include "edzda/state_synth.hpp"

namespace edzda {

struct UserGoal {
    std::string text;
    std::string state_id;
};

struct FlowTurn {
    std::string role;  // agent | user
    std::string description;
    std::map<std::string, std::string> turn_state;
};

struct Flow {
    std::string state_id;
    std::vector<FlowTurn> turns;
};

struct DialogueTurn {
    std::string role;
    std::string description;
    std::string content;
};

struct Dialogue {
    std::string flow_id;  // = state_id of the flow
    std::vector<DialogueTurn> turns;
};

struct Violation {
    std::string code;  // alternation | endpoints | coverage | extra | cardinality | inconsistent
    std::string message;
};

/// Surface forms for values that cannot be substring-matched: boolean slots
/// ("internet: yes" -> "with internet"), dontcare, and small counts.
class Lexicon {
public:
    static Lexicon standard();

    /// Phrases whose presence counts as expressing (slot, value).
    std::vector<std::string> surface_phrases(const SlotId& slot, const std::string& value) const;

    void add(const std::string& slot_key, const std::string& value,
             std::vector<std::string> phrases);
    void add_dontcare_phrase(std::string phrase);

private:
    std::map<std::string, std::vector<std::string>> by_slot_value_;  // "slot|value" -> phrases
    std::map<std::string, std::vector<std::string>> by_value_;       // value -> phrases
    std::vector<std::string> dontcare_phrases_;
};

/// True when `value` for `slot` is explicitly expressed in `utterance`:
/// normalized token-boundary substring match, extended by time surface forms
/// and the lexicon for booleans / dontcare / number words.
bool value_appears(const std::string& utterance, const SlotId& slot, const std::string& value,
                   const Lexicon& lexicon);

/// Alternation, endpoints, exact union coverage, per-user-turn new-constraint
/// cardinality (<= 6), and value consistency with the dialogue state.
std::vector<Violation> validate_flow(const Flow& flow, const DialogueState& state);

struct RetentionDecision {
    bool retained = false;
    std::vector<std::string> reasons;
};

/// Retained iff turn/role sequences correspond one-to-one with the flow and
/// every turn-state value is explicit in its turn's utterance.
RetentionDecision validate_dialogue(const Dialogue& dialogue, const Flow& flow,
                                    const Lexicon& lexicon);

struct RetentionReport {
    std::size_t generated = 0;
    std::size_t retained = 0;
    std::map<std::string, std::size_t> reason_counts;

    double retention_rate() const {
        return generated == 0 ? 0.0 : static_cast<double>(retained) / static_cast<double>(generated);
    }
    Json to_json() const;
};

// --- prompts + LLM-facing operations ---

std::string user_goal_prompt(const DialogueState& state);
std::string flow_prompt(const DialogueState& state, const UserGoal& goal, const Json& db_info);
std::string dialogue_prompt(const Flow& flow, const Json& db_info);

/// Chosen entities' full attribute maps, the agent-side knowledge handed to
/// the flow and dialogue prompts.
Json build_db_info(const DialogueState& state);

/// Name-leak check: the goal must not mention any venue name the agent is
/// supposed to recommend. Leaking goals are regenerated once, then rejected.
std::optional<UserGoal> generate_user_goal(LlmClient& llm, const DialogueState& state,
                                           const Schema& schema);

/// Names of restaurant/hotel/attraction entities the state pins down.
std::vector<std::string> recommendable_names(const DialogueState& state, const Schema& schema);

std::optional<Flow> plan_flow(LlmClient& llm, const DialogueState& state, const UserGoal& goal,
                              const Json& db_info);

std::optional<Dialogue> generate_dialogue(LlmClient& llm, const Flow& flow, const Json& db_info);

}  // namespace edzda
