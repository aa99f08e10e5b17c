// SPDX-License-Identifier: Apache-2.0
#include "edzda/planner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace edzda {

std::string DomainCombo::id() const {
    std::string out;
    for (const std::string& d : domains) {
        if (!out.empty()) out += "+";
        out += d;
    }
    return out;
}

bool DomainCombo::contains(const std::string& domain) const {
    return std::find(domains.begin(), domains.end(), domain) != domains.end();
}

std::vector<DomainCombo> enumerate_combos(const std::vector<std::string>& domains) {
    const std::size_t n = domains.size();
    if (n < 2) throw ValidationError("need at least 2 domains to combine");
    std::vector<DomainCombo> out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            out.push_back(DomainCombo{{domains[i], domains[j]}});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                out.push_back(DomainCombo{{domains[i], domains[j], domains[k]}});
            }
        }
    }
    return out;
}

ValueSpec ValueSpec::make_literal(std::string v) {
    ValueSpec s;
    s.kind = Kind::Literal;
    s.literal = std::move(v);
    return s;
}

ValueSpec ValueSpec::make_blank() {
    return ValueSpec{};
}

ValueSpec ValueSpec::make_reference(SlotId source) {
    ValueSpec s;
    s.kind = Kind::Reference;
    s.source = std::move(source);
    return s;
}

std::vector<CorefLink> SeedState::coref() const {
    std::vector<CorefLink> out;
    for (const auto& [key, value] : entries) {
        if (value.kind == ValueSpec::Kind::Reference) {
            out.push_back(CorefLink{split_slot_key(key), value.source});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rules

namespace {

bool slot_in(const std::string& slot, std::initializer_list<const char*> set) {
    for (const char* s : set) {
        if (slot == s) return true;
    }
    return false;
}

bool is_trip_endpoint(const std::string& slot) {
    return slot == "departure" || slot == "destination";
}

bool is_clock_slot(const std::string& slot) {
    return slot_in(slot, {"arriveby", "leaveat", "book time"});
}

bool is_day_slot(const std::string& slot) {
    return slot == "day" || slot == "book day";
}

}  // namespace

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
    std::set<std::string> ids;
    for (const Rule& r : rules_) {
        if (!ids.insert(r.id).second) throw ValidationError("duplicate rule id: " + r.id);
    }
}

RuleSet RuleSet::standard() {
    std::vector<Rule> rules;
    rules.push_back(Rule{"R1", "departure/destination cannot come from an area slot",
                         [](const CorefLink& l, const Schema&) {
                             return is_trip_endpoint(l.target.slot) && l.source.slot == "area";
                         }});
    rules.push_back(Rule{"R2", "clock slots and day slots cannot infer each other",
                         [](const CorefLink& l, const Schema&) {
                             return (is_clock_slot(l.target.slot) && is_day_slot(l.source.slot)) ||
                                    (is_day_slot(l.target.slot) && is_clock_slot(l.source.slot));
                         }});
    rules.push_back(Rule{"R3", "area pairs only with area",
                         [](const CorefLink& l, const Schema&) {
                             return (l.target.slot == "area") != (l.source.slot == "area");
                         }});
    rules.push_back(Rule{"R4", "train departure/destination cannot reference another domain",
                         [](const CorefLink& l, const Schema&) {
                             return l.target.domain == "train" && is_trip_endpoint(l.target.slot);
                         }});
    rules.push_back(Rule{"R5", "reference endpoints must be in different domains",
                         [](const CorefLink& l, const Schema&) {
                             return l.target.domain == l.source.domain;
                         }});
    rules.push_back(Rule{"R6", "both endpoints must be schema-legal slots",
                         [](const CorefLink& l, const Schema& schema) {
                             return !schema.has_slot(l.target) || !schema.has_slot(l.source);
                         }});
    rules.push_back(Rule{"R7", "a taxi cannot leave at the reservation time",
                         [](const CorefLink& l, const Schema&) {
                             return l.target == SlotId{"taxi", "leaveat"} &&
                                    l.source.slot == "book time";
                         }});
    return RuleSet(std::move(rules));
}

std::optional<std::string> RuleSet::check(const CorefLink& link, const Schema& schema) const {
    for (const Rule& r : rules_) {
        if (r.violates(link, schema)) return r.id;
    }
    return std::nullopt;
}

FilterOutcome filter_seed_state(const SeedState& seed, const RuleSet& rules,
                                const Schema& schema) {
    FilterOutcome out;
    out.seed = seed;

    for (const auto& [key, value] : seed.entries) {
        SlotId id;
        try {
            id = split_slot_key(key);
        } catch (const ValidationError&) {
            out.rejected = true;
            out.reject_reason = "malformed slot key: " + key;
            return out;
        }
        if (!schema.has_slot(id)) {
            out.rejected = true;
            out.reject_reason = "unknown slot: " + key;
            return out;
        }
        (void)value;
    }

    bool had_reference = false;
    for (auto& [key, value] : out.seed.entries) {
        if (value.kind != ValueSpec::Kind::Reference) continue;
        had_reference = true;
        CorefLink link{split_slot_key(key), value.source};
        if (auto rule_id = rules.check(link, schema)) {
            out.removed.push_back(RemovedLink{link, *rule_id});
            value = ValueSpec::make_blank();
        }
    }
    if (had_reference && out.seed.coref().empty()) out.flagged = true;
    return out;
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

std::string schema_listing(const Schema& schema) {
    std::string out = "Supported domains and their slots:\n";
    int idx = 1;
    for (const DomainSpec& d : schema.domains()) {
        out += std::to_string(idx++) + ". " + d.name + ": {";
        for (std::size_t i = 0; i < d.slots.size(); ++i) {
            if (i) out += ", ";
            out += d.slots[i].name;
        }
        out += "}\n";
    }
    out += "Categorical slots and their possible values:\n";
    for (const DomainSpec& d : schema.domains()) {
        for (const SlotSpec& s : d.slots) {
            if (s.pool.empty()) continue;
            out += "- " + d.name + " " + s.name + ": ";
            for (std::size_t i = 0; i < s.pool.size(); ++i) {
                if (i) out += ", ";
                out += s.pool[i];
            }
            out += "\n";
        }
    }
    out += "Time slots (book time, arriveby, leaveat) take values like \"13:00\".\n";
    return out;
}

std::string combo_listing(const DomainCombo& combo) {
    std::string out;
    for (std::size_t i = 0; i < combo.domains.size(); ++i) {
        if (i) out += ", ";
        out += combo.domains[i];
    }
    return out;
}

}  // namespace

std::string judgment_prompt(const Schema& schema, const DomainCombo& combo) {
    std::string p = schema_listing(schema);
    p += "\nYour task: decide whether the following domains can plausibly be combined "
         "in one task-oriented dialogue. The order of the domains does not matter.\n"
         "Answer in JSON: {\"is_reasonable\": <1 if reasonable, 0 otherwise>, "
         "\"explanation\": <why you judged it this way>}\n\n";
    p += "# domains: " + combo_listing(combo) + "\n";
    return p;
}

std::string seed_state_prompt(const Judgment& judgment) {
    std::string p;
    p += "Based on this judgment about combining the domains [" + combo_listing(judgment.combo) +
         "]:\n" + judgment.explanation + "\n\n";
    p += "Generate several dialogue states with different inferable information. Each state is "
         "a dictionary mapping \"domain-slot\" to a value, summarizing a user's goal. Decide the "
         "number of states yourself and output a JSON list of dictionaries.\n\n"
         "Choose values for categorical slots yourself. Leave other slots blank (an empty "
         "string); they will be filled later. Values must stay logical across domains. When one "
         "slot shares the value of a slot in another domain, express that as "
         "\"domain1-slot\": \"domain2-slot\". Never refer to a domain outside the given set.\n\n"
         "Restrictions:\n"
         "1) 'departure' and 'destination' cannot be inferred from an 'area' slot.\n"
         "2) 'arriveby', 'leaveat' and 'book time' cannot be inferred from 'day' or 'book day', "
         "and vice versa.\n"
         "3) 'area' can only be inferred from 'area'.\n"
         "4) train-destination and train-departure cannot be inferred from another domain.\n"
         "5) inferable slot pairs must belong to different domains.\n"
         "6) only slots that are legal for a domain may be used or inferred.\n"
         "7) inferring from a blank slot is allowed; blanks are filled later.\n";
    return p;
}

Judgment judge_combo(LlmClient& llm, const Schema& schema, const DomainCombo& combo) {
    ChatRequest req = make_request(
        Stage::Judgment, {ChatMessage{"user", judgment_prompt(schema, combo)}});
    ChatResponse res = llm.complete(req);

    Judgment j;
    j.combo = combo;
    auto doc = extract_json(res.text);
    if (!doc || !doc->is_object() || !doc->contains("is_reasonable")) {
        log_warn("unparseable judgment for combo " + combo.id() + "; skipping");
        return j;
    }
    const Json& flag = (*doc)["is_reasonable"];
    if (flag.is_boolean()) {
        j.is_reasonable = flag.get<bool>();
    } else if (flag.is_number()) {
        j.is_reasonable = flag.get<int>() != 0;
    } else {
        log_warn("judgment flag for combo " + combo.id() + " is neither bool nor number");
        return j;
    }
    j.explanation = doc->value("explanation", std::string{});
    j.parse_ok = !j.explanation.empty();
    if (!j.parse_ok) log_warn("judgment for combo " + combo.id() + " lacks an explanation");
    return j;
}

namespace {

/// The model spells slot names loosely ("leave at", "booktime"); map the
/// variants back onto schema names.
std::string canonical_slot_name(std::string slot) {
    for (char& c : slot) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    static const std::array<std::pair<const char*, const char*>, 8> aliases{{
        {"leave at", "leaveat"},
        {"arrive by", "arriveby"},
        {"booktime", "book time"},
        {"bookday", "book day"},
        {"bookpeople", "book people"},
        {"bookstay", "book stay"},
        {"price range", "pricerange"},
        {"food type", "food"},
    }};
    for (const auto& [from, to] : aliases) {
        if (slot == from) return to;
    }
    return slot;
}

}  // namespace

std::optional<SlotId> parse_domain_slot(const std::string& raw) {
    auto pos = raw.find('-');
    if (pos == std::string::npos || pos == 0 || pos + 1 == raw.size()) return std::nullopt;
    SlotId id{raw.substr(0, pos), canonical_slot_name(raw.substr(pos + 1))};
    for (char& c : id.domain) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return id;
}

std::optional<SeedState> parse_seed_state(const Json& dict, const Schema& schema,
                                          const DomainCombo& combo, const std::string& seed_id) {
    if (!dict.is_object()) return std::nullopt;
    SeedState seed;
    seed.seed_id = seed_id;
    seed.combo_id = combo.id();
    seed.domains = combo.domains;
    for (auto it = dict.begin(); it != dict.end(); ++it) {
        if (!it.value().is_string()) return std::nullopt;
        auto key_id = parse_domain_slot(it.key());
        std::string key = key_id ? key_id->key() : it.key();

        const std::string value = it.value().get<std::string>();
        if (value.empty()) {
            seed.entries[key] = ValueSpec::make_blank();
            continue;
        }
        if (auto src = parse_domain_slot(value);
            src && combo.contains(src->domain) && schema.has_slot(*src)) {
            seed.entries[key] = ValueSpec::make_reference(*src);
            continue;
        }
        seed.entries[key] = ValueSpec::make_literal(value);
    }
    return seed;
}

std::vector<SeedState> generate_seed_states(LlmClient& llm, const Schema& schema,
                                            const Judgment& judgment) {
    if (!judgment.is_reasonable) {
        throw ValidationError("seed generation requires a reasonable judgment");
    }
    ChatRequest req = make_request(
        Stage::SeedState, {ChatMessage{"user", judgment_prompt(schema, judgment.combo)},
                           ChatMessage{"assistant", judgment.explanation},
                           ChatMessage{"user", seed_state_prompt(judgment)}});
    ChatResponse res = llm.complete(req);

    auto doc = extract_json(res.text);
    if (!doc || !doc->is_array()) {
        log_warn("no parseable seed-state list for combo " + judgment.combo.id());
        return {};
    }
    std::vector<SeedState> out;
    std::size_t idx = 0;
    for (const Json& dict : *doc) {
        std::string seed_id = judgment.combo.id() + "#" + std::to_string(idx++);
        if (auto seed = parse_seed_state(dict, schema, judgment.combo, seed_id)) {
            out.push_back(std::move(*seed));
        } else {
            log_warn("skipping unparseable seed dictionary in combo " + judgment.combo.id());
        }
    }
    return out;
}

}  // namespace edzda
