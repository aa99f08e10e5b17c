// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks for the augmentation pipeline. Each criterion prints one
// pass/fail line; the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edzda/augment.hpp"
#include "edzda/complicator.hpp"
#include "edzda/dialogue_gen.hpp"
#include "edzda/eval.hpp"
#include "edzda/pipeline.hpp"
#include "edzda/planner.hpp"
#include "edzda/state_synth.hpp"

namespace fs = std::filesystem;
using namespace edzda;

namespace {

const fs::path kFixtures = EDZDA_FIXTURES_DIR;

int g_failures = 0;

struct Criterion {
    int number;
    std::string title;
    std::vector<std::string> errors;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void expect(bool ok, const std::string& what) {
        if (!ok) errors.push_back(what);
    }
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    void finish(double time_limit_s = 0.0) {
        double elapsed = seconds();
        if (time_limit_s > 0 && elapsed > time_limit_s) {
            errors.push_back("took " + std::to_string(elapsed) + "s, limit " +
                             std::to_string(time_limit_s) + "s");
        }
        if (errors.empty()) {
            std::printf("PASS criterion %d: %s (%.2fs)\n", number, title.c_str(), elapsed);
        } else {
            ++g_failures;
            std::printf("FAIL criterion %d: %s\n", number, title.c_str());
            for (const std::string& e : errors) std::printf("       - %s\n", e.c_str());
        }
    }
};

Schema fixture_schema() { return load_schema(kFixtures / "schema.json"); }

Database fixture_db() {
    std::map<std::string, fs::path> paths;
    for (const char* d : {"restaurant", "hotel", "attraction", "train"}) {
        paths[d] = kFixtures / "db" / (std::string(d) + ".json");
    }
    return load_database(paths);
}

// --------------------------------------------------------------------------
// 1. combination enumeration vs a binomial oracle

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

void criterion_combos() {
    Criterion c{1, "combination enumeration matches the binomial oracle"};
    for (std::size_t n = 3; n <= 6; ++n) {
        std::vector<std::string> domains;
        for (std::size_t i = 0; i < n; ++i) domains.push_back("d" + std::to_string(i));
        std::vector<DomainCombo> combos = enumerate_combos(domains);
        std::size_t expected = binomial(n, 2) + binomial(n, 3);
        c.expect(combos.size() == expected,
                 "n=" + std::to_string(n) + ": got " + std::to_string(combos.size()) +
                     " combos, oracle says " + std::to_string(expected));
        std::set<std::string> ids;
        for (const DomainCombo& combo : combos) {
            c.expect(combo.domains.size() == 2 || combo.domains.size() == 3,
                     "combo " + combo.id() + " has bad size");
            c.expect(ids.insert(combo.id()).second, "duplicate combo " + combo.id());
        }
    }
    std::vector<DomainCombo> five = enumerate_combos(fixture_schema().domain_names());
    c.expect(five.size() == 20, "5 fixture domains should give 20 combos, got " +
                                    std::to_string(five.size()));
    c.finish(1.0);
}

// --------------------------------------------------------------------------
// 2. rule filter on a 12-seed fixture

SeedState make_seed(const std::string& id, std::vector<std::string> domains,
                    std::map<std::string, ValueSpec> entries) {
    SeedState s;
    s.seed_id = id;
    s.domains = std::move(domains);
    s.combo_id = id;
    s.entries = std::move(entries);
    return s;
}

ValueSpec ref(const std::string& key) { return ValueSpec::make_reference(split_slot_key(key)); }

void criterion_rule_filter() {
    Criterion c{2, "rule filter removes all and only the violating links"};
    Schema schema = fixture_schema();
    RuleSet rules = RuleSet::standard();

    struct Case {
        SeedState seed;
        std::map<std::string, std::string> expected_removed;  // entry key -> rule id
    };
    std::vector<Case> cases;

    auto add = [&](const std::string& id, std::vector<std::string> domains,
                   std::map<std::string, ValueSpec> entries,
                   std::map<std::string, std::string> removed) {
        cases.push_back({make_seed(id, std::move(domains), std::move(entries)),
                         std::move(removed)});
    };

    add("s1", {"restaurant", "taxi"},
        {{"restaurant-area", ValueSpec::make_literal("centre")},
         {"taxi-destination", ref("restaurant-area")}},
        {{"taxi-destination", "R1"}});
    add("s2", {"hotel", "taxi"},
        {{"hotel-area", ValueSpec::make_literal("north")},
         {"taxi-departure", ref("hotel-area")}},
        {{"taxi-departure", "R1"}});
    add("s3", {"restaurant", "train"},
        {{"restaurant-book day", ValueSpec::make_literal("friday")},
         {"train-leaveat", ref("restaurant-book day")}},
        {{"train-leaveat", "R2"}});
    add("s4", {"restaurant", "taxi"},
        {{"taxi-arriveby", ValueSpec::make_blank()},
         {"restaurant-book day", ref("taxi-arriveby")}},
        {{"restaurant-book day", "R2"}});
    add("s5", {"restaurant", "hotel"},
        {{"restaurant-food", ValueSpec::make_literal("british")},
         {"hotel-area", ref("restaurant-food")}},
        {{"hotel-area", "R3"}});
    add("s6", {"restaurant", "hotel"},
        {{"hotel-area", ValueSpec::make_literal("centre")},
         {"restaurant-pricerange", ref("hotel-area")}},
        {{"restaurant-pricerange", "R3"}});
    add("s7", {"attraction", "train"},
        {{"attraction-name", ValueSpec::make_blank()},
         {"train-destination", ref("attraction-name")}},
        {{"train-destination", "R4"}});
    add("s8", {"hotel", "attraction"},
        {{"hotel-star", ValueSpec::make_literal("4")},
         {"hotel-book people", ref("hotel-star")}},
        {{"hotel-book people", "R5"}});
    add("s9", {"restaurant", "taxi"},
        {{"taxi-destination", ref("restaurant-star")}},  // restaurant has no star slot
        {{"taxi-destination", "R6"}});
    // The two worked transport-time cases: a taxi cannot leave at the
    // reservation time, but arriving by it is fine.
    add("s10", {"restaurant", "taxi"},
        {{"restaurant-book time", ValueSpec::make_blank()},
         {"taxi-leaveat", ref("restaurant-book time")}},
        {{"taxi-leaveat", "R7"}});
    add("s11", {"restaurant", "taxi"},
        {{"restaurant-book time", ValueSpec::make_blank()},
         {"taxi-arriveby", ref("restaurant-book time")}},
        {});
    add("s12", {"restaurant", "hotel", "taxi"},
        {{"restaurant-area", ValueSpec::make_literal("centre")},
         {"restaurant-name", ValueSpec::make_blank()},
         {"hotel-area", ref("restaurant-area")},
         {"taxi-destination", ref("restaurant-name")}},
        {});

    c.expect(cases.size() == 12, "fixture must hold 12 seeds");
    std::set<std::string> rules_hit;
    for (const Case& cs : cases) {
        FilterOutcome out = filter_seed_state(cs.seed, rules, schema);
        c.expect(!out.rejected, cs.seed.seed_id + " unexpectedly rejected: " + out.reject_reason);
        std::map<std::string, std::string> removed;
        for (const RemovedLink& r : out.removed) {
            removed[r.link.target.key()] = r.rule_id;
            rules_hit.insert(r.rule_id);
        }
        c.expect(removed == cs.expected_removed,
                 cs.seed.seed_id + ": removed set differs from expectation");
        // Removed links become blanks; kept references survive verbatim.
        for (const auto& [key, spec] : cs.seed.entries) {
            bool was_removed = cs.expected_removed.contains(key);
            const ValueSpec& after = out.seed.entries.at(key);
            if (was_removed) {
                c.expect(after.kind == ValueSpec::Kind::Blank,
                         cs.seed.seed_id + ": " + key + " not blanked");
            } else {
                c.expect(after == spec, cs.seed.seed_id + ": " + key + " was altered");
            }
        }
        // Idempotence: a second pass removes nothing.
        FilterOutcome again = filter_seed_state(out.seed, rules, schema);
        c.expect(again.removed.empty() && again.seed.entries == out.seed.entries,
                 cs.seed.seed_id + ": filter is not idempotent");
    }
    for (const char* rule : {"R1", "R2", "R3", "R4", "R5", "R6", "R7"}) {
        c.expect(rules_hit.contains(rule), std::string("fixture never triggers ") + rule);
    }

    // A structurally illegal entry key rejects the whole seed.
    SeedState bad = make_seed("sx", {"restaurant", "hotel"},
                              {{"restaurant-phase", ValueSpec::make_literal("full")}});
    c.expect(filter_seed_state(bad, rules, schema).rejected,
             "seed with an unknown slot key must be rejected");
    c.finish(1.0);
}

// --------------------------------------------------------------------------
// 3. topological ordering on random acyclic graphs

void criterion_topological() {
    Criterion c{3, "dependency order respects every reference edge"};
    Rng rng(97);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.pick_index(4);  // 2..5 domains
        std::vector<std::string> domains;
        for (std::size_t i = 0; i < n; ++i) {
            domains.push_back("d" + std::to_string(trial) + "_" + std::to_string(i));
        }
        // Edges only from a lower to a higher index, so the graph is acyclic
        // by construction. Shuffle the seed's domain list afterwards.
        SeedState seed;
        seed.seed_id = "topo" + std::to_string(trial);
        std::vector<CorefLink> edges;
        int slot_counter = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (rng.uniform01() < 0.5) {
                    SlotId target{domains[j], "t" + std::to_string(slot_counter)};
                    SlotId source{domains[i], "s" + std::to_string(slot_counter)};
                    ++slot_counter;
                    seed.entries[target.key()] = ValueSpec::make_reference(source);
                    edges.push_back({target, source});
                }
            }
        }
        seed.domains = domains;
        for (std::size_t i = domains.size(); i > 1; --i) {
            std::swap(seed.domains[i - 1], seed.domains[rng.pick_index(i)]);
        }

        std::vector<std::string> order = dependency_order(seed);
        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        c.expect(order.size() == n, "trial " + std::to_string(trial) + ": wrong length");
        for (const std::string& d : domains) {
            c.expect(pos.contains(d), "trial " + std::to_string(trial) + ": lost domain " + d);
        }
        for (const CorefLink& e : edges) {  // edge-check oracle
            if (!pos.contains(e.source.domain) || !pos.contains(e.target.domain)) continue;
            c.expect(pos[e.source.domain] < pos[e.target.domain],
                     "trial " + std::to_string(trial) + ": edge " + e.source.key() + " -> " +
                         e.target.key() + " violated");
        }
    }

    for (int cycle_len : {2, 3}) {
        SeedState seed;
        seed.seed_id = "cycle";
        for (int i = 0; i < cycle_len; ++i) {
            seed.domains.push_back("c" + std::to_string(i));
            SlotId target{"c" + std::to_string(i), "t"};
            SlotId source{"c" + std::to_string((i + 1) % cycle_len), "s"};
            seed.entries[target.key()] = ValueSpec::make_reference(source);
        }
        bool threw = false;
        try {
            dependency_order(seed);
        } catch (const CycleError&) {
            threw = true;
        }
        c.expect(threw, std::to_string(cycle_len) + "-cycle not rejected");
    }
    c.finish(5.0);
}

// --------------------------------------------------------------------------
// 4. state filling invariants over 500 sampled states

void criterion_state_filling() {
    Criterion c{4, "sampled states satisfy coref, closure and pool membership"};
    Schema schema = fixture_schema();
    Database db = fixture_db();

    std::vector<SeedState> seeds;
    seeds.push_back(make_seed(
        "f1", {"restaurant", "taxi"},
        {{"restaurant-area", ValueSpec::make_literal("centre")},
         {"restaurant-food", ValueSpec::make_blank()},
         {"restaurant-name", ValueSpec::make_blank()},
         {"restaurant-book time", ValueSpec::make_blank()},
         {"restaurant-book people", ValueSpec::make_blank()},
         {"taxi-destination", ref("restaurant-name")},
         {"taxi-arriveby", ref("restaurant-book time")},
         {"taxi-departure", ValueSpec::make_blank()}}));
    seeds.push_back(make_seed(
        "f2", {"restaurant", "hotel"},
        {{"restaurant-area", ValueSpec::make_literal("centre")},
         {"hotel-area", ref("restaurant-area")},
         {"hotel-type", ValueSpec::make_blank()},
         {"hotel-internet", ValueSpec::make_literal("yes")},
         {"hotel-name", ValueSpec::make_blank()},
         {"restaurant-pricerange", ValueSpec::make_blank()}}));
    seeds.push_back(make_seed(
        "f3", {"attraction", "train"},
        {{"attraction-area", ValueSpec::make_blank()},
         {"attraction-type", ValueSpec::make_blank()},
         {"attraction-name", ValueSpec::make_blank()},
         {"train-day", ValueSpec::make_literal("friday")},
         {"train-departure", ValueSpec::make_blank()},
         {"train-destination", ValueSpec::make_blank()},
         {"train-leaveat", ValueSpec::make_blank()},
         {"train-book people", ValueSpec::make_blank()}}));
    seeds.push_back(make_seed(
        "f4", {"hotel", "taxi"},
        {{"hotel-area", ValueSpec::make_literal("north")},
         {"hotel-type", ValueSpec::make_literal("guest house")},
         {"hotel-name", ValueSpec::make_blank()},
         {"hotel-book day", ValueSpec::make_blank()},
         {"taxi-destination", ref("hotel-name")},
         {"taxi-leaveat", ValueSpec::make_blank()},
         {"taxi-arriveby", ValueSpec::make_blank()}}));

    SynthConfig cfg;
    cfg.dontcare_probability = 0.15;

    std::size_t checked = 0;
    for (std::uint64_t round = 0; checked < 500; ++round) {
        if (round > 200) {
            c.expect(false, "could not sample 500 states");
            break;
        }
        for (const SeedState& seed : seeds) {
            Rng rng(1000 + round);
            for (const DialogueState& st : expand_seed(seed, schema, db, 5, rng, cfg)) {
                ++checked;
                // co-reference equality
                for (const CorefLink& link : st.coref) {
                    c.expect(normalize_value(st.entries.at(link.target.key())) ==
                                 normalize_value(st.entries.at(link.source.key())),
                             st.state_id + ": coref " + link.target.key() + " != " +
                                 link.source.key());
                }
                // schema closure: exactly the seed's keys, all schema-legal
                c.expect(st.entries.size() == seed.entries.size(),
                         st.state_id + ": entry set diverged from the seed");
                for (const auto& [key, value] : st.entries) {
                    SlotId id = split_slot_key(key);
                    const SlotSpec* spec = schema.find_slot(id.domain, id.slot);
                    c.expect(seed.entries.contains(key) && spec != nullptr,
                             st.state_id + ": unexpected key " + key);
                    c.expect(!value.empty(), st.state_id + ": empty value for " + key);
                    if (spec && (spec->kind == SlotKind::Categorical ||
                                 spec->kind == SlotKind::Boolean)) {
                        bool in_pool = value == "dontcare" ||
                                       std::count(spec->pool.begin(), spec->pool.end(), value) > 0;
                        c.expect(in_pool, st.state_id + ": " + key + " = '" + value +
                                              "' outside the pool");
                    }
                }
                // chosen entities exist in the DB (brute-force scan oracle)
                for (const auto& [domain, entity] : st.chosen_entities) {
                    const std::vector<Entity>& table = db.table(domain);
                    c.expect(std::count(table.begin(), table.end(), entity) == 1,
                             st.state_id + ": chosen " + domain + " entity not in the DB");
                }
            }
        }
    }
    c.expect(checked >= 500, "only " + std::to_string(checked) + " states sampled");

    // identical rng seed => identical states
    for (const SeedState& seed : seeds) {
        Rng a(42), b(42);
        auto sa = expand_seed(seed, schema, db, 5, a, cfg);
        auto sb = expand_seed(seed, schema, db, 5, b, cfg);
        bool same = sa.size() == sb.size();
        for (std::size_t i = 0; same && i < sa.size(); ++i) {
            same = sa[i].entries == sb[i].entries && sa[i].state_id == sb[i].state_id;
        }
        c.expect(same, seed.seed_id + ": replay with the same seed diverged");
    }
    c.finish();
}

// --------------------------------------------------------------------------
// 5. flow/dialogue validation suite + retention-rate echo

std::map<std::string, std::string> ts(std::initializer_list<std::pair<std::string, std::string>> kv) {
    return {kv.begin(), kv.end()};
}

Flow flow_of(const std::string& id, std::vector<FlowTurn> turns) {
    return Flow{id, std::move(turns)};
}

void criterion_flow_dialogue() {
    Criterion c{5, "flow/dialogue validation and the retention-rate echo"};
    Lexicon lexicon = Lexicon::standard();

    // A booking state with a taxi to the chosen restaurant, arriving by 12:30.
    DialogueState state;
    state.state_id = "v0";
    state.entries = {{"restaurant-area", "centre"},
                     {"restaurant-food", "british"},
                     {"restaurant-book people", "1"},
                     {"restaurant-pricerange", "expensive"},
                     {"restaurant-name", "midsummer house restaurant"},
                     {"taxi-destination", "midsummer house restaurant"},
                     {"taxi-arriveby", "12:30"}};

    FlowTurn greet{"agent", "the agent greets the user and asks what they can assist with", {}};
    FlowTurn ask_rest{"user",
                      "the user requests a table at a high-end british restaurant in the centre "
                      "for one person",
                      ts({{"restaurant-area", "centre"},
                          {"restaurant-food", "british"},
                          {"restaurant-book people", "1"},
                          {"restaurant-pricerange", "expensive"}})};
    FlowTurn suggest{"agent", "the agent recommends midsummer house restaurant", {}};
    FlowTurn confirm{"user", "the user confirms the recommended restaurant",
                     ts({{"restaurant-name", "midsummer house restaurant"}})};
    FlowTurn booked{"agent", "the agent books the table and gives reference QX81Kd2P", {}};
    FlowTurn taxi{"user",
                  "the user asks for a taxi to the restaurant arriving by 12:30",
                  ts({{"taxi-destination", "midsummer house restaurant"},
                      {"taxi-arriveby", "12:30"}})};

    struct FlowCase {
        std::string name;
        Flow flow;
        std::set<std::string> expected;  // violation codes
    };
    std::vector<FlowCase> flow_cases;
    // 1: the transcription above, fully valid
    flow_cases.push_back({"transcribed", flow_of("v0", {greet, ask_rest, suggest, confirm,
                                                        booked, taxi}), {}});
    // 2: starts with a user turn
    flow_cases.push_back({"user-first", flow_of("v0", {ask_rest, suggest, confirm, booked,
                                                       taxi, greet}),
                          {"endpoints", "alternation"}});
    // 3: ends on the agent
    flow_cases.push_back({"agent-last", flow_of("v0", {greet, ask_rest, suggest, confirm,
                                                       taxi, booked}),
                          {"endpoints", "alternation"}});
    // 4: two agent turns in a row
    flow_cases.push_back({"double-agent", flow_of("v0", {greet, suggest, ask_rest, confirm,
                                                         booked, taxi}),
                          {"alternation"}});
    // 5: a state slot never mentioned
    flow_cases.push_back({"uncovered", flow_of("v0", {greet, ask_rest, suggest, confirm}),
                          {"coverage"}});
    // 6: mentions a slot outside the state
    {
        FlowTurn extra = taxi;
        extra.turn_state["taxi-leaveat"] = "11:00";
        flow_cases.push_back({"extra-slot", flow_of("v0", {greet, ask_rest, suggest, confirm,
                                                           booked, extra}), {"extra"}});
    }
    // 7: value contradicts the state
    {
        FlowTurn wrong = ask_rest;
        wrong.turn_state["restaurant-food"] = "chinese";
        flow_cases.push_back({"inconsistent", flow_of("v0", {greet, wrong, suggest, confirm,
                                                             booked, taxi}), {"inconsistent"}});
    }
    // 8: seven fresh constraints in one user turn
    {
        DialogueState big;
        big.state_id = "v1";
        FlowTurn heavy{"user", "the user lists every hotel requirement at once", {}};
        for (const char* kv : {"hotel-area=north", "hotel-type=hotel", "hotel-internet=yes",
                               "hotel-parking=yes", "hotel-pricerange=cheap", "hotel-star=4",
                               "hotel-book day=monday"}) {
            std::string s(kv);
            auto eq = s.find('=');
            big.entries[s.substr(0, eq)] = s.substr(eq + 1);
            heavy.turn_state[s.substr(0, eq)] = s.substr(eq + 1);
        }
        Flow f = flow_of("v1", {greet, heavy});
        std::vector<Violation> v = validate_flow(f, big);
        std::set<std::string> got;
        for (const Violation& x : v) got.insert(x.code);
        c.expect(got == std::set<std::string>{"cardinality"},
                 "cardinality case produced the wrong violation set");
    }
    // 9: empty flow
    flow_cases.push_back({"empty", flow_of("v0", {}), {"endpoints"}});
    // 10: repeated mention of a covered slot is fine
    {
        FlowTurn re_confirm = confirm;
        re_confirm.turn_state["restaurant-area"] = "centre";
        flow_cases.push_back({"re-mention", flow_of("v0", {greet, ask_rest, suggest, re_confirm,
                                                           booked, taxi}), {}});
    }

    for (const FlowCase& fc : flow_cases) {
        std::set<std::string> got;
        for (const Violation& v : validate_flow(fc.flow, state)) got.insert(v.code);
        c.expect(got == fc.expected, "flow case '" + fc.name + "' produced the wrong set");
    }

    // Dialogue-side cases against the valid transcription.
    Flow good_flow = flow_of("v0", {greet, ask_rest, suggest, confirm, booked, taxi});
    auto make_dialogue = [&](const std::vector<std::string>& contents) {
        Dialogue d;
        d.flow_id = "v0";
        for (std::size_t i = 0; i < contents.size(); ++i) {
            d.turns.push_back({good_flow.turns[i].role, good_flow.turns[i].description,
                               contents[i]});
        }
        return d;
    };
    std::vector<std::string> good_contents{
        "hello, how can i help you today?",
        "i would like to book a table at an expensive british restaurant in the centre for 1.",
        "i recommend midsummer house restaurant, a lovely spot.",
        "midsummer house restaurant sounds perfect, please book it.",
        "done! your reference is QX81Kd2P.",
        "great. i also need a taxi to midsummer house restaurant arriving by 12:30."};

    struct DialogueCase {
        std::string name;
        Dialogue dialogue;
        std::vector<std::string> expected_reasons;  // prefixes
        bool retained;
    };
    std::vector<DialogueCase> dlg_cases;
    dlg_cases.push_back({"valid", make_dialogue(good_contents), {}, true});
    {
        auto broken = good_contents;
        broken[5] = "great. i also need a taxi there arriving by 12:30.";
        dlg_cases.push_back({"missing-destination", make_dialogue(broken),
                             {"missing-value@5:taxi-destination"}, false});
    }
    {
        auto broken = good_contents;
        broken[1] = "i would like a table at a nice restaurant in the centre for 1.";
        dlg_cases.push_back({"missing-two", make_dialogue(broken),
                             {"missing-value@1:restaurant-food",
                              "missing-value@1:restaurant-pricerange"},
                             false});
    }
    {
        Dialogue short_d = make_dialogue(good_contents);
        short_d.turns.pop_back();
        dlg_cases.push_back({"short", short_d, {"turn-count-mismatch"}, false});
    }
    {
        Dialogue swapped = make_dialogue(good_contents);
        swapped.turns[2].role = "user";
        dlg_cases.push_back({"role-swap", swapped, {"role-mismatch@2"}, false});
    }
    {
        auto worded = good_contents;
        worded[1] = "i would like an expensive british place in the city center for one person.";
        dlg_cases.push_back({"lexicon-forms", make_dialogue(worded), {}, true});
    }
    {
        auto timey = good_contents;
        timey[5] = "great. i need a taxi to midsummer house restaurant arriving by 12:30 pm.";
        dlg_cases.push_back({"time-form", make_dialogue(timey), {}, true});
    }
    {
        auto cased = good_contents;
        cased[3] = "Midsummer House Restaurant it is, book it please.";
        dlg_cases.push_back({"case-insensitive", make_dialogue(cased), {}, true});
    }
    {
        auto wrong_val = good_contents;
        wrong_val[1] = "i want a cheap british restaurant in the centre for 1.";
        dlg_cases.push_back({"wrong-value", make_dialogue(wrong_val),
                             {"missing-value@1:restaurant-pricerange"}, false});
    }

    for (const DialogueCase& dc : dlg_cases) {
        RetentionDecision d = validate_dialogue(dc.dialogue, good_flow, lexicon);
        c.expect(d.retained == dc.retained, "dialogue case '" + dc.name + "' retention flipped");
        c.expect(d.reasons == dc.expected_reasons,
                 "dialogue case '" + dc.name + "' produced the wrong reasons");
    }
    c.expect(flow_cases.size() + dlg_cases.size() + 2 == 20, "suite must hold 20 cases");

    // Retention echo: 24 dialogues, one planted failure -> 23/24.
    RetentionReport report;
    for (int i = 0; i < 24; ++i) {
        Dialogue d = make_dialogue(good_contents);
        if (i == 7) d.turns[5].content = "great. i also need a taxi, please.";
        RetentionDecision decision = validate_dialogue(d, good_flow, lexicon);
        ++report.generated;
        if (decision.retained) {
            ++report.retained;
        } else {
            for (const std::string& r : decision.reasons) ++report.reason_counts[r];
        }
    }
    c.expect(report.generated == 24 && report.retained == 23,
             "expected 23 of 24 dialogues retained");
    c.expect(report.retention_rate() == 23.0 / 24.0, "retention rate is not exactly 23/24");
    c.finish();
}

// --------------------------------------------------------------------------
// 6. slot-value permutation vs the factorial oracle

void criterion_permutation() {
    Criterion c{6, "permutation counts match the factorial oracle"};
    const std::vector<std::string> values{"Chinese", "centre", "expensive", "2", "18:00"};

    for (std::size_t k = 0; k <= 5; ++k) {
        TrainingSample base;
        base.state_id = "p" + std::to_string(k);
        base.kind = TrainingSample::Kind::ValueGeneration;
        base.target_values.assign(values.begin(), values.begin() + k);
        base.target_text = "none";

        std::vector<TrainingSample> perms = permute_values(base);
        std::size_t factorial = 1;
        for (std::size_t i = 2; i <= k; ++i) factorial *= i;
        c.expect(perms.size() == std::max<std::size_t>(1, factorial),
                 "k=" + std::to_string(k) + ": got " + std::to_string(perms.size()) +
                     " samples, oracle says " + std::to_string(std::max<std::size_t>(1, factorial)));
        std::set<std::string> texts;
        for (const TrainingSample& p : perms) {
            texts.insert(p.target_text);
            std::multiset<std::string> a(p.target_values.begin(), p.target_values.end());
            std::multiset<std::string> b(base.target_values.begin(), base.target_values.end());
            c.expect(a == b, "k=" + std::to_string(k) + ": a permutation changed the values");
        }
        c.expect(texts.size() == perms.size(), "k=" + std::to_string(k) + ": duplicate orders");

        if (k == 2) {
            c.expect(texts == std::set<std::string>{"Chinese | centre", "centre | Chinese"},
                     "k=2 must yield exactly 'Chinese | centre' and 'centre | Chinese'");
        }
        if (k == 3) {
            c.expect(perms.size() == 6, "k=3 must yield 6 samples");
        }
    }
    c.finish(1.0);
}

// --------------------------------------------------------------------------
// 7. metrics fixtures

void criterion_metrics() {
    Criterion c{7, "JGA and coref accuracy fixtures score exactly"};

    // Four turns, one with a wrong value: JGA = 3/4.
    std::vector<GoldTurn> golds;
    std::vector<PredictionRecord> preds;
    for (std::size_t t = 0; t < 4; ++t) {
        GoldTurn g{"dlg", t, {{"restaurant-food", "chinese"},
                              {"restaurant-area", "centre"}}};
        if (t >= 1) g.belief["hotel-area"] = "centre";
        golds.push_back(g);
        PredictionRecord p{"dlg", t, g.belief};
        if (t == 2) p.predicted_belief["restaurant-area"] = "north";
        preds.push_back(p);
    }
    JgaResult jga = joint_goal_accuracy(preds, golds);
    c.expect(jga.jga == 0.75, "4-turn fixture JGA must be exactly 0.75");
    c.expect(jga.total_turns == 4 && jga.correct_turns == 3, "turn counts wrong");

    // JGA(x, x) = 1, independent of map insertion order or surface form.
    std::vector<PredictionRecord> perfect;
    for (const GoldTurn& g : golds) {
        PredictionRecord p{g.dialogue_id, g.turn_index, {}};
        std::vector<std::pair<std::string, std::string>> kv(g.belief.begin(), g.belief.end());
        std::reverse(kv.begin(), kv.end());
        for (auto& [k, v] : kv) p.predicted_belief[k] = " The " + v + " ";
        perfect.push_back(p);
    }
    c.expect(joint_goal_accuracy(perfect, golds).jga == 1.0, "JGA(x,x) must be 1");

    // Coref fixture: 10 annotated (turn, slot) pairs, 6 predicted correctly.
    std::vector<GoldTurn> cg;
    std::vector<PredictionRecord> cp;
    std::vector<CorefAnnotation> ann;
    for (std::size_t t = 0; t < 10; ++t) {
        cg.push_back({"cd", t, {{"taxi-destination", "alpha"}}});
        PredictionRecord p{"cd", t, {{"taxi-destination", t < 6 ? "alpha" : "beta"}}};
        cp.push_back(p);
        ann.push_back({"cd", t, "taxi-destination"});
    }
    CorefResult coref = coref_slot_accuracy(cp, cg, ann);
    c.expect(coref.accuracy.has_value() && *coref.accuracy == 0.6,
             "coref fixture must score exactly 0.6");
    c.expect(coref.annotated == 10 && coref.correct == 6, "coref counts wrong");
    c.finish();
}

// --------------------------------------------------------------------------
// 8. end-to-end determinism with the shipped cassette

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = body.str();
    }
    return files;
}

void criterion_end_to_end() {
    Criterion c{8, "run-all replay is byte-identical and annotation-stable"};

    PipelineConfig cfg;
    cfg.schema_path = kFixtures / "schema.json";
    for (const char* d : {"restaurant", "hotel", "attraction", "train"}) {
        cfg.database_paths[d] = kFixtures / "db" / (std::string(d) + ".json");
    }
    cfg.backend = "replay";
    cfg.cassette_path = kFixtures / "cassette.jsonl";
    cfg.rng_seed = 20260826;
    cfg.rng_seed_set = true;

    fs::path base = fs::temp_directory_path() / "edzda-acceptance";
    fs::remove_all(base);
    for (const char* run : {"a", "b"}) {
        cfg.out_dir = base / run;
        Pipeline pipeline(cfg);
        pipeline.run_all();
    }

    auto tree_a = read_tree(base / "a");
    auto tree_b = read_tree(base / "b");
    c.expect(!tree_a.empty(), "first run produced no files");
    c.expect(tree_a == tree_b, "the two runs differ byte-wise");

    // Easy/difficult pairs: annotations identical turn by turn, and at least
    // one pair whose utterances actually changed.
    std::map<std::string, std::map<std::string, Json>> by_state;  // state -> variant -> record
    for (const Json& rec : read_jsonl(base / "a" / "labeled.jsonl")) {
        by_state[rec.at("state_id").get<std::string>()]
                [rec.at("variant").get<std::string>()] = rec;
    }
    std::size_t pairs = 0, stable = 0, complicated = 0;
    for (const auto& [state_id, variants] : by_state) {
        auto easy = variants.find("easy");
        auto difficult = variants.find("difficult");
        if (easy == variants.end() || difficult == variants.end()) continue;
        ++pairs;
        const Json& et = easy->second.at("turns");
        const Json& dt = difficult->second.at("turns");
        if (et.size() != dt.size()) continue;
        bool annotations_equal = true;
        bool text_changed = false;
        for (std::size_t i = 0; i < et.size(); ++i) {
            for (const char* field : {"turn_state", "belief_state", "coref_slots"}) {
                if (et[i].at(field) != dt[i].at(field)) annotations_equal = false;
            }
            if (et[i].at("user") != dt[i].at("user") ||
                et[i].at("system") != dt[i].at("system")) {
                text_changed = true;
            }
        }
        if (annotations_equal) ++stable;
        if (annotations_equal && text_changed) ++complicated;
    }
    c.expect(pairs > 0, "no easy/difficult pairs in labeled.jsonl");
    c.expect(stable == pairs, "some pair's annotations drifted during complication");
    c.expect(complicated >= 1, "no pair shows an actually complicated utterance");

    for (const char* artifact :
         {"judgments.jsonl", "seeds.jsonl", "states.jsonl", "goals.jsonl", "flows.jsonl",
          "dialogues.jsonl", "labeled.jsonl", "retention-report.json",
          "dataset/train-values.jsonl", "dataset/train-domainslots.jsonl",
          "dataset/manifest.json"}) {
        c.expect(tree_a.contains(artifact), std::string("missing artifact ") + artifact);
    }
    c.finish(60.0);
}

}  // namespace

int main() {
    criterion_combos();
    criterion_rule_filter();
    criterion_topological();
    criterion_state_filling();
    criterion_flow_dialogue();
    criterion_permutation();
    criterion_metrics();
    criterion_end_to_end();
    if (g_failures == 0) {
        std::printf("all 8 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
