// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edzda/dialogue_gen.hpp"

namespace edzda {

struct LabeledTurn {
    std::string system_utterance;
    std::string user_utterance;
    std::map<std::string, std::string> turn_state;
    std::map<std::string, std::string> belief_state;  // fold of turn states so far
    std::vector<std::string> coref_slots;             // coref targets in this turn
};

struct LabeledDialogue {
    std::string state_id;
    std::string flow_id;
    std::string variant;  // easy | difficult
    std::vector<LabeledTurn> turns;
};

/// Pairs agent turn i with user turn i+1 into DST-style exchanges. The turn
/// state of an exchange is the union of both flow turns' states. Throws on an
/// odd turn count.
LabeledDialogue assemble_labeled_dialogue(const Dialogue& dialogue, const Flow& flow,
                                          const std::vector<CorefLink>& coref);

/// Indices of turns whose turn_state holds a coref target whose source value
/// was stated in an earlier turn. Same-turn sources are excluded: there is
/// nothing earlier to refer back to.
std::vector<std::size_t> find_coref_turns(const LabeledDialogue& ld,
                                          const std::vector<CorefLink>& coref);

struct ModifiedTurn {
    std::string description;
    std::string system_utterance;
    std::string user_utterance;
};

std::string complication_prompt(const std::vector<LabeledTurn>& history, const LabeledTurn& turn,
                                const std::vector<CorefLink>& coref_pairs);

/// Best-effort rewrite making coref values implicit; parse failures keep the
/// original turn.
std::optional<ModifiedTurn> complicate_turn(LlmClient& llm,
                                            const std::vector<LabeledTurn>& history,
                                            const LabeledTurn& turn,
                                            const std::vector<CorefLink>& coref_pairs);

/// True iff every non-coref turn-state value is still explicit in the
/// modified utterances. Coref targets are exempt.
bool validate_complication(const LabeledTurn& original, const ModifiedTurn& modified,
                           const std::vector<std::string>& coref_targets,
                           const Lexicon& lexicon);

/// Produces the difficult variant: every flagged turn complicated in order,
/// validation failures restored to the easy turn. Annotations never change.
LabeledDialogue complicate_dialogue(LlmClient& llm, const LabeledDialogue& easy,
                                    const std::vector<CorefLink>& coref, const Lexicon& lexicon);

}  // namespace edzda
