// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "edzda/llm.hpp"
#include "edzda/schema.hpp"

namespace edzda {

struct DomainCombo {
    std::vector<std::string> domains;  // size 2 or 3, in enumeration order

    std::string id() const;
    bool contains(const std::string& domain) const;
};

/// All size-2 and size-3 subsets in lexicographic index order (pairs first),
/// following the input domain order.
std::vector<DomainCombo> enumerate_combos(const std::vector<std::string>& domains);

struct Judgment {
    DomainCombo combo;
    bool is_reasonable = false;
    std::string explanation;
    bool parse_ok = false;
};

struct ValueSpec {
    enum class Kind { Literal, Blank, Reference };
    Kind kind = Kind::Blank;
    std::string literal;  // Kind::Literal
    SlotId source;        // Kind::Reference

    static ValueSpec make_literal(std::string v);
    static ValueSpec make_blank();
    static ValueSpec make_reference(SlotId source);
    bool operator==(const ValueSpec&) const = default;
};

struct CorefLink {
    SlotId target;
    SlotId source;
    bool operator==(const CorefLink&) const = default;
};

struct SeedState {
    std::string seed_id;
    std::string combo_id;
    std::vector<std::string> domains;
    std::map<std::string, ValueSpec> entries;  // key = "domain-slot"

    /// One link per Reference entry, in entry-key order.
    std::vector<CorefLink> coref() const;
};

struct RemovedLink {
    CorefLink link;
    std::string rule_id;
};

struct FilterOutcome {
    SeedState seed;
    std::vector<RemovedLink> removed;
    bool rejected = false;        // structurally illegal (unknown slot key)
    bool flagged = false;         // had references, all removed
    std::string reject_reason;
};

struct Rule {
    std::string id;
    std::string summary;
    /// True when the link violates this rule.
    std::function<bool(const CorefLink&, const Schema&)> violates;
};

class RuleSet {
public:
    static RuleSet standard();

    const std::vector<Rule>& rules() const { return rules_; }
    /// First violated rule id, if any.
    std::optional<std::string> check(const CorefLink& link, const Schema& schema) const;

private:
    explicit RuleSet(std::vector<Rule> rules);
    std::vector<Rule> rules_;
};

/// Removes every Reference violating a rule (the entry becomes Blank).
/// Seeds whose entry keys name unknown slots are rejected outright.
FilterOutcome filter_seed_state(const SeedState& seed, const RuleSet& rules, const Schema& schema);

// --- prompt construction + LLM-facing operations ---

std::string judgment_prompt(const Schema& schema, const DomainCombo& combo);
std::string seed_state_prompt(const Judgment& judgment);

Judgment judge_combo(LlmClient& llm, const Schema& schema, const DomainCombo& combo);

/// Parses each returned dictionary into a SeedState: "" -> Blank, a value of
/// the form "domain-slot" naming a legal slot of a combo domain -> Reference,
/// anything else -> Literal. Unparseable responses yield an empty list.
std::vector<SeedState> generate_seed_states(LlmClient& llm, const Schema& schema,
                                            const Judgment& judgment);

/// Splits a "domain-slot" string, folding the slot-name spelling variants the
/// model emits ("leave at", "booktime", ...) onto schema names.
std::optional<SlotId> parse_domain_slot(const std::string& raw);

/// Seed parsing helper, exposed for tests: builds a SeedState from a JSON
/// dictionary, normalizing slot-name spelling variants the model emits
/// ("leave at", "booktime", ...).
std::optional<SeedState> parse_seed_state(const Json& dict, const Schema& schema,
                                          const DomainCombo& combo, const std::string& seed_id);

}  // namespace edzda
