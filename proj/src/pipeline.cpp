// SPDX-License-Identifier: Apache-2.0
#include "edzda/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <set>
#include <thread>

namespace edzda {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
    return from_json(read_json_file(path), path.parent_path());
}

PipelineConfig PipelineConfig::from_json(const Json& doc, const fs::path& base_dir) {
    auto resolve = [&](const std::string& p) -> fs::path {
        fs::path fp(p);
        return fp.is_absolute() || base_dir.empty() ? fp : base_dir / fp;
    };

    PipelineConfig cfg;
    cfg.schema_path = resolve(doc.at("schema").get<std::string>());
    for (auto it = doc.at("databases").begin(); it != doc.at("databases").end(); ++it) {
        cfg.database_paths[it.key()] = resolve(it.value().get<std::string>());
    }
    cfg.backend = doc.value("backend", std::string("replay"));
    if (doc.contains("cassette")) cfg.cassette_path = resolve(doc["cassette"].get<std::string>());
    if (doc.contains("cache_dir")) cfg.cache_dir = resolve(doc["cache_dir"].get<std::string>());
    cfg.out_dir = resolve(doc.value("out_dir", std::string("out")));
    if (doc.contains("rng_seed")) {
        cfg.rng_seed = doc["rng_seed"].get<std::uint64_t>();
        cfg.rng_seed_set = true;
    }
    cfg.states_per_seed = doc.value("states_per_seed", 5);
    cfg.seeds_per_combo_cap = doc.value("seeds_per_combo_cap", 8);
    cfg.synth.retry_cap = doc.value("retry_cap", 10);
    cfg.synth.dontcare_probability = doc.value("dontcare_probability", 0.0);
    cfg.variant = doc.value("variant", std::string("both"));
    cfg.permute = doc.value("permute", true);
    if (doc.contains("permutation")) {
        cfg.augment.full_permutation_max = doc["permutation"].value("full_max", std::size_t{6});
        cfg.augment.sampled_permutations = doc["permutation"].value("sampled", std::size_t{720});
    }
    cfg.augment.none_marker = doc.value("none_marker", std::string("none"));
    cfg.workers = doc.value("workers", 1);
    cfg.resume = doc.value("resume", true);
    if (doc.contains("http")) {
        const Json& h = doc["http"];
        cfg.http.base_url = h.value("base_url", cfg.http.base_url);
        cfg.http.path = h.value("path", cfg.http.path);
        cfg.http.model = h.value("model", cfg.http.model);
        cfg.http.token_env = h.value("token_env", cfg.http.token_env);
        cfg.http.timeout_seconds = h.value("timeout_seconds", cfg.http.timeout_seconds);
    }
    if (doc.contains("retry")) {
        cfg.retry.max_attempts = doc["retry"].value("max_attempts", cfg.retry.max_attempts);
        cfg.retry.base_delay =
            std::chrono::milliseconds(doc["retry"].value("base_delay_ms", 250));
        cfg.retry.max_delay = std::chrono::milliseconds(doc["retry"].value("max_delay_ms", 8000));
    }
    if (doc.contains("decoding")) {
        for (auto it = doc["decoding"].begin(); it != doc["decoding"].end(); ++it) {
            cfg.decoding[it.key()] = StageDecoding{it.value().value("temperature", 0.0),
                                                   it.value().value("top_p", 1.0)};
        }
    }
    cfg.validate();
    return cfg;
}

void PipelineConfig::validate() const {
    if (!rng_seed_set) throw ConfigError("rng_seed is mandatory for reproducible runs");
    if (backend != "http" && backend != "replay") {
        throw ConfigError("backend must be 'http' or 'replay', got '" + backend + "'");
    }
    if (backend == "replay" && cassette_path.empty()) {
        throw ConfigError("replay backend requires a cassette path");
    }
    if (variant != "easy" && variant != "difficult" && variant != "both") {
        throw ConfigError("variant must be easy, difficult or both");
    }
    if (states_per_seed < 1) throw ConfigError("states_per_seed must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

/// Order-preserving parallel map over indices [0, n).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

Json value_spec_to_json(const ValueSpec& v) {
    switch (v.kind) {
        case ValueSpec::Kind::Literal:
            return Json{{"kind", "literal"}, {"value", v.literal}};
        case ValueSpec::Kind::Blank:
            return Json{{"kind", "blank"}};
        case ValueSpec::Kind::Reference:
            return Json{{"kind", "reference"}, {"source", v.source.key()}};
    }
    return Json{{"kind", "blank"}};
}

ValueSpec value_spec_from_json(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "literal") return ValueSpec::make_literal(j.at("value").get<std::string>());
    if (kind == "reference") {
        return ValueSpec::make_reference(split_slot_key(j.at("source").get<std::string>()));
    }
    return ValueSpec::make_blank();
}

Json seed_to_json(const SeedState& seed, const std::vector<RemovedLink>& removed, bool flagged) {
    Json entries = Json::object();
    for (const auto& [k, v] : seed.entries) entries[k] = value_spec_to_json(v);
    Json removals = Json::array();
    for (const RemovedLink& r : removed) {
        removals.push_back(Json{{"target", r.link.target.key()},
                                {"source", r.link.source.key()},
                                {"rule", r.rule_id}});
    }
    return Json{{"seed_id", seed.seed_id}, {"combo_id", seed.combo_id},
                {"domains", seed.domains}, {"entries", std::move(entries)},
                {"removed_links", std::move(removals)}, {"flagged", flagged}};
}

SeedState seed_from_json(const Json& j) {
    SeedState seed;
    seed.seed_id = j.at("seed_id").get<std::string>();
    seed.combo_id = j.at("combo_id").get<std::string>();
    seed.domains = j.at("domains").get<std::vector<std::string>>();
    for (auto it = j.at("entries").begin(); it != j.at("entries").end(); ++it) {
        seed.entries[it.key()] = value_spec_from_json(it.value());
    }
    return seed;
}

Json state_to_json(const DialogueState& s) {
    Json entries = Json::object();
    for (const auto& [k, v] : s.entries) entries[k] = v;
    Json coref = Json::array();
    for (const CorefLink& link : s.coref) {
        coref.push_back(Json{{"target", link.target.key()}, {"source", link.source.key()}});
    }
    Json entities = Json::object();
    for (const auto& [domain, entity] : s.chosen_entities) {
        Json attrs = Json::object();
        for (const auto& [a, v] : entity) attrs[a] = v;
        entities[domain] = std::move(attrs);
    }
    return Json{{"state_id", s.state_id}, {"seed_id", s.seed_id},
                {"entries", std::move(entries)}, {"coref", std::move(coref)},
                {"entities", std::move(entities)}};
}

DialogueState state_from_json(const Json& j) {
    DialogueState s;
    s.state_id = j.at("state_id").get<std::string>();
    s.seed_id = j.at("seed_id").get<std::string>();
    for (auto it = j.at("entries").begin(); it != j.at("entries").end(); ++it) {
        s.entries[it.key()] = it.value().get<std::string>();
    }
    for (const Json& link : j.at("coref")) {
        s.coref.push_back(CorefLink{split_slot_key(link.at("target").get<std::string>()),
                                    split_slot_key(link.at("source").get<std::string>())});
    }
    for (auto it = j.at("entities").begin(); it != j.at("entities").end(); ++it) {
        Entity e;
        for (auto a = it.value().begin(); a != it.value().end(); ++a) {
            e[a.key()] = a.value().get<std::string>();
        }
        s.chosen_entities[it.key()] = std::move(e);
    }
    return s;
}

Json flow_to_json(const Flow& f) {
    Json turns = Json::array();
    for (const FlowTurn& t : f.turns) {
        Json ts = Json::object();
        for (const auto& [k, v] : t.turn_state) ts[k] = v;
        turns.push_back(Json{{"role", t.role}, {"description", t.description},
                             {"turn_state", std::move(ts)}});
    }
    return Json{{"state_id", f.state_id}, {"turns", std::move(turns)}};
}

Flow flow_from_json(const Json& j) {
    Flow f;
    f.state_id = j.at("state_id").get<std::string>();
    for (const Json& jt : j.at("turns")) {
        FlowTurn t;
        t.role = jt.at("role").get<std::string>();
        t.description = jt.at("description").get<std::string>();
        for (auto it = jt.at("turn_state").begin(); it != jt.at("turn_state").end(); ++it) {
            t.turn_state[it.key()] = it.value().get<std::string>();
        }
        f.turns.push_back(std::move(t));
    }
    return f;
}

Json dialogue_to_json(const Dialogue& d, const RetentionDecision& decision) {
    Json turns = Json::array();
    for (const DialogueTurn& t : d.turns) {
        turns.push_back(
            Json{{"role", t.role}, {"description", t.description}, {"content", t.content}});
    }
    return Json{{"state_id", d.flow_id}, {"retained", decision.retained},
                {"reasons", decision.reasons}, {"turns", std::move(turns)}};
}

Dialogue dialogue_from_json(const Json& j) {
    Dialogue d;
    d.flow_id = j.at("state_id").get<std::string>();
    for (const Json& jt : j.at("turns")) {
        d.turns.push_back(DialogueTurn{jt.at("role").get<std::string>(),
                                       jt.value("description", std::string{}),
                                       jt.at("content").get<std::string>()});
    }
    return d;
}

Json labeled_to_json(const LabeledDialogue& ld) {
    Json turns = Json::array();
    for (const LabeledTurn& t : ld.turns) {
        Json ts = Json::object();
        for (const auto& [k, v] : t.turn_state) ts[k] = v;
        Json bs = Json::object();
        for (const auto& [k, v] : t.belief_state) bs[k] = v;
        turns.push_back(Json{{"system", t.system_utterance}, {"user", t.user_utterance},
                             {"turn_state", std::move(ts)}, {"belief_state", std::move(bs)},
                             {"coref_slots", t.coref_slots}});
    }
    return Json{{"state_id", ld.state_id}, {"flow_id", ld.flow_id}, {"variant", ld.variant},
                {"turns", std::move(turns)}};
}

LabeledDialogue labeled_from_json(const Json& j) {
    LabeledDialogue ld;
    ld.state_id = j.at("state_id").get<std::string>();
    ld.flow_id = j.at("flow_id").get<std::string>();
    ld.variant = j.at("variant").get<std::string>();
    for (const Json& jt : j.at("turns")) {
        LabeledTurn t;
        t.system_utterance = jt.at("system").get<std::string>();
        t.user_utterance = jt.at("user").get<std::string>();
        for (auto it = jt.at("turn_state").begin(); it != jt.at("turn_state").end(); ++it) {
            t.turn_state[it.key()] = it.value().get<std::string>();
        }
        for (auto it = jt.at("belief_state").begin(); it != jt.at("belief_state").end(); ++it) {
            t.belief_state[it.key()] = it.value().get<std::string>();
        }
        t.coref_slots = jt.at("coref_slots").get<std::vector<std::string>>();
        ld.turns.push_back(std::move(t));
    }
    return ld;
}

std::map<std::string, Json> index_by(const std::vector<Json>& records, const std::string& field) {
    std::map<std::string, Json> out;
    for (const Json& r : records) out[r.at(field).get<std::string>()] = r;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(PipelineConfig config) : Pipeline(std::move(config), nullptr) {}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<LlmBackend> backend)
    : config_(std::move(config)) {
    if (!backend) config_.validate();
    schema_ = load_schema(config_.schema_path);
    db_ = load_database(config_.database_paths);
    validate_database(schema_, db_);

    if (backend) {
        backend_ = std::move(backend);
    } else if (config_.backend == "http") {
        backend_ = std::make_shared<HttpBackend>(config_.http);
    } else {
        backend_ = std::make_shared<ReplayBackend>(Cassette::load(config_.cassette_path));
    }
    ClientConfig client_config;
    client_config.cache_dir = config_.cache_dir;
    client_config.retry = config_.retry;
    for (const auto& [name, decoding] : config_.decoding) {
        client_config.decoding[stage_from_name(name)] = decoding;
    }
    llm_ = std::make_unique<LlmClient>(backend_, client_config);
    lexicon_ = Lexicon::standard();
}

const std::vector<std::string>& Pipeline::stage_order() {
    static const std::vector<std::string> order{"judge",    "seed",       "synth",
                                                "goal",     "flow",       "dialogue",
                                                "complicate", "augment"};
    return order;
}

void Pipeline::record_to(const fs::path& cassette_path) {
    record_path_ = cassette_path;
    llm_->start_recording();
}

void Pipeline::maybe_save_cassette() {
    if (record_path_) llm_->save_cassette(*record_path_);
}

std::vector<Json> Pipeline::require_artifact(const std::string& file,
                                             const std::string& needed_by) {
    fs::path path = config_.out_dir / file;
    if (!fs::exists(path)) {
        throw ConfigError("stage '" + needed_by + "' requires " + path.string() +
                          "; run the prerequisite stage first");
    }
    return read_jsonl(path);
}

void Pipeline::write_summary(const StageSummary& summary) {
    write_json_file(config_.out_dir / ("summary-" + summary.stage + ".json"), summary.data);
}

StageSummary Pipeline::run_stage(const std::string& name) {
    fs::create_directories(config_.out_dir);
    StageSummary summary;
    if (name == "judge") summary = run_judge();
    else if (name == "seed") summary = run_seed();
    else if (name == "synth") summary = run_synth();
    else if (name == "goal") summary = run_goal();
    else if (name == "flow") summary = run_flow();
    else if (name == "dialogue") summary = run_dialogue();
    else if (name == "complicate") summary = run_complicate();
    else if (name == "augment") summary = run_augment();
    else throw ConfigError("unknown stage: " + name);
    write_summary(summary);
    maybe_save_cassette();
    return summary;
}

std::vector<StageSummary> Pipeline::run_all() {
    std::vector<StageSummary> out;
    for (const std::string& stage : stage_order()) {
        try {
            out.push_back(run_stage(stage));
        } catch (const std::exception& e) {
            throw ConfigError("stage '" + stage + "' failed: " + e.what());
        }
    }
    return out;
}

StageSummary Pipeline::run_judge() {
    std::vector<DomainCombo> combos = enumerate_combos(schema_.domain_names());

    std::map<std::string, Json> existing;
    fs::path artifact = config_.out_dir / "judgments.jsonl";
    if (config_.resume && fs::exists(artifact)) existing = index_by(read_jsonl(artifact), "combo_id");

    std::vector<Json> records(combos.size());
    std::atomic<std::size_t> reasonable{0}, unparseable{0}, reused{0};
    parallel_for(combos.size(), config_.workers, [&](std::size_t i) {
        const DomainCombo& combo = combos[i];
        if (auto it = existing.find(combo.id()); it != existing.end()) {
            records[i] = it->second;
            ++reused;
        } else {
            Judgment j = judge_combo(*llm_, schema_, combo);
            records[i] = Json{{"combo_id", combo.id()}, {"domains", combo.domains},
                              {"is_reasonable", j.is_reasonable},
                              {"explanation", j.explanation}, {"parse_ok", j.parse_ok}};
        }
        if (records[i].value("is_reasonable", false)) ++reasonable;
        if (!records[i].value("parse_ok", false)) ++unparseable;
    });

    write_jsonl(artifact, records);
    return StageSummary{"judge", Json{{"combos", combos.size()},
                                      {"reasonable", reasonable.load()},
                                      {"unparseable", unparseable.load()},
                                      {"reused", reused.load()}}};
}

StageSummary Pipeline::run_seed() {
    std::vector<Json> judgments = require_artifact("judgments.jsonl", "seed");
    RuleSet rules = RuleSet::standard();

    std::vector<Json> kept;
    std::size_t generated = 0, rejected = 0, removed_links = 0, flagged = 0;
    for (const Json& jr : judgments) {
        if (!jr.value("is_reasonable", false) || !jr.value("parse_ok", false)) continue;
        Judgment judgment;
        judgment.combo = DomainCombo{jr.at("domains").get<std::vector<std::string>>()};
        judgment.is_reasonable = true;
        judgment.parse_ok = true;
        judgment.explanation = jr.at("explanation").get<std::string>();

        std::vector<SeedState> seeds = generate_seed_states(*llm_, schema_, judgment);
        if (seeds.size() > static_cast<std::size_t>(config_.seeds_per_combo_cap)) {
            seeds.resize(static_cast<std::size_t>(config_.seeds_per_combo_cap));
        }
        for (const SeedState& seed : seeds) {
            ++generated;
            FilterOutcome outcome = filter_seed_state(seed, rules, schema_);
            if (outcome.rejected) {
                ++rejected;
                log_warn("rejecting seed " + seed.seed_id + ": " + outcome.reject_reason);
                continue;
            }
            removed_links += outcome.removed.size();
            if (outcome.flagged) ++flagged;
            kept.push_back(seed_to_json(outcome.seed, outcome.removed, outcome.flagged));
        }
    }

    write_jsonl(config_.out_dir / "seeds.jsonl", kept);
    return StageSummary{"seed", Json{{"generated", generated}, {"kept", kept.size()},
                                     {"rejected", rejected}, {"removed_links", removed_links},
                                     {"flagged", flagged}}};
}

StageSummary Pipeline::run_synth() {
    std::vector<Json> seeds = require_artifact("seeds.jsonl", "synth");
    Rng root(config_.rng_seed);

    std::vector<Json> records;
    std::size_t cycles = 0;
    for (const Json& js : seeds) {
        SeedState seed = seed_from_json(js);
        Rng seed_rng = root.fork(seed.seed_id);
        try {
            dependency_order(seed);
        } catch (const CycleError& e) {
            ++cycles;
            log_warn(std::string("rejecting seed ") + seed.seed_id + ": " + e.what());
            continue;
        }
        for (DialogueState& state :
             expand_seed(seed, schema_, db_, config_.states_per_seed, seed_rng, config_.synth)) {
            records.push_back(state_to_json(state));
        }
    }

    write_jsonl(config_.out_dir / "states.jsonl", records);
    return StageSummary{"synth", Json{{"seeds", seeds.size()}, {"states", records.size()},
                                      {"cyclic_seeds", cycles},
                                      {"rng_seed", config_.rng_seed}}};
}

StageSummary Pipeline::run_goal() {
    std::vector<Json> states = require_artifact("states.jsonl", "goal");

    std::map<std::string, Json> existing;
    fs::path artifact = config_.out_dir / "goals.jsonl";
    if (config_.resume && fs::exists(artifact)) existing = index_by(read_jsonl(artifact), "state_id");

    std::vector<Json> records(states.size());
    std::atomic<std::size_t> rejected{0};
    parallel_for(states.size(), config_.workers, [&](std::size_t i) {
        DialogueState state = state_from_json(states[i]);
        if (auto it = existing.find(state.state_id); it != existing.end()) {
            records[i] = it->second;
            return;
        }
        auto goal = generate_user_goal(*llm_, state, schema_);
        if (!goal) {
            ++rejected;
            return;
        }
        records[i] = Json{{"state_id", state.state_id}, {"text", goal->text}};
    });

    std::vector<Json> kept;
    for (Json& r : records) {
        if (!r.is_null()) kept.push_back(std::move(r));
    }
    write_jsonl(artifact, kept);
    return StageSummary{"goal", Json{{"states", states.size()}, {"goals", kept.size()},
                                     {"rejected", rejected.load()}}};
}

StageSummary Pipeline::run_flow() {
    std::vector<Json> states = require_artifact("states.jsonl", "flow");
    std::vector<Json> goals = require_artifact("goals.jsonl", "flow");
    std::map<std::string, Json> goal_by_state = index_by(goals, "state_id");

    std::map<std::string, Json> existing;
    fs::path artifact = config_.out_dir / "flows.jsonl";
    if (config_.resume && fs::exists(artifact)) existing = index_by(read_jsonl(artifact), "state_id");

    std::vector<Json> records(states.size());
    std::atomic<std::size_t> skipped{0}, invalid{0};
    parallel_for(states.size(), config_.workers, [&](std::size_t i) {
        DialogueState state = state_from_json(states[i]);
        auto git = goal_by_state.find(state.state_id);
        if (git == goal_by_state.end()) {
            ++skipped;
            return;
        }
        if (auto it = existing.find(state.state_id); it != existing.end()) {
            records[i] = it->second;
            return;
        }
        UserGoal goal{git->second.at("text").get<std::string>(), state.state_id};
        auto flow = plan_flow(*llm_, state, goal, build_db_info(state));
        if (!flow) {
            ++skipped;
            return;
        }
        std::vector<Violation> violations = validate_flow(*flow, state);
        if (!violations.empty()) {
            ++invalid;
            std::string detail;
            for (const Violation& v : violations) detail += v.code + "; ";
            log_warn("invalid flow for state " + state.state_id + ": " + detail);
            return;
        }
        records[i] = flow_to_json(*flow);
    });

    std::vector<Json> kept;
    for (Json& r : records) {
        if (!r.is_null()) kept.push_back(std::move(r));
    }
    write_jsonl(artifact, kept);
    return StageSummary{"flow", Json{{"states", states.size()}, {"flows", kept.size()},
                                     {"skipped", skipped.load()}, {"invalid", invalid.load()}}};
}

StageSummary Pipeline::run_dialogue() {
    std::vector<Json> flows = require_artifact("flows.jsonl", "dialogue");
    std::vector<Json> states = require_artifact("states.jsonl", "dialogue");
    std::map<std::string, Json> state_by_id = index_by(states, "state_id");

    std::map<std::string, Json> existing;
    fs::path artifact = config_.out_dir / "dialogues.jsonl";
    if (config_.resume && fs::exists(artifact)) existing = index_by(read_jsonl(artifact), "state_id");

    std::vector<Json> records(flows.size());
    std::atomic<std::size_t> parse_failures{0};
    parallel_for(flows.size(), config_.workers, [&](std::size_t i) {
        Flow flow = flow_from_json(flows[i]);
        if (auto it = existing.find(flow.state_id); it != existing.end()) {
            records[i] = it->second;
            return;
        }
        auto sit = state_by_id.find(flow.state_id);
        Json db_info = Json::object();
        if (sit != state_by_id.end()) db_info = build_db_info(state_from_json(sit->second));
        auto dialogue = generate_dialogue(*llm_, flow, db_info);
        if (!dialogue) {
            ++parse_failures;
            return;
        }
        RetentionDecision decision = validate_dialogue(*dialogue, flow, lexicon_);
        records[i] = dialogue_to_json(*dialogue, decision);
    });

    RetentionReport report;
    std::vector<Json> kept;
    for (Json& r : records) {
        if (r.is_null()) continue;
        ++report.generated;
        if (r.value("retained", false)) {
            ++report.retained;
        } else {
            for (const Json& reason : r.at("reasons")) {
                ++report.reason_counts[reason.get<std::string>()];
            }
        }
        kept.push_back(std::move(r));
    }
    write_jsonl(artifact, kept);
    write_json_file(config_.out_dir / "retention-report.json", report.to_json());
    Json summary = report.to_json();
    summary["parse_failures"] = parse_failures.load();
    return StageSummary{"dialogue", std::move(summary)};
}

StageSummary Pipeline::run_complicate() {
    std::vector<Json> dialogues = require_artifact("dialogues.jsonl", "complicate");
    std::vector<Json> flows = require_artifact("flows.jsonl", "complicate");
    std::vector<Json> states = require_artifact("states.jsonl", "complicate");
    std::map<std::string, Json> flow_by_id = index_by(flows, "state_id");
    std::map<std::string, Json> state_by_id = index_by(states, "state_id");

    const bool want_easy = config_.variant == "easy" || config_.variant == "both";
    const bool want_difficult = config_.variant == "difficult" || config_.variant == "both";

    struct Item {
        LabeledDialogue easy;
        std::vector<CorefLink> coref;
    };
    std::vector<Item> items;
    std::size_t assembly_errors = 0;
    for (const Json& jd : dialogues) {
        if (!jd.value("retained", false)) continue;
        std::string id = jd.at("state_id").get<std::string>();
        auto fit = flow_by_id.find(id);
        auto sit = state_by_id.find(id);
        if (fit == flow_by_id.end() || sit == state_by_id.end()) continue;
        DialogueState state = state_from_json(sit->second);
        try {
            Item item;
            item.easy = assemble_labeled_dialogue(dialogue_from_json(jd),
                                                  flow_from_json(fit->second), state.coref);
            item.coref = state.coref;
            items.push_back(std::move(item));
        } catch (const ValidationError& e) {
            ++assembly_errors;
            log_warn(std::string("assembly failed for ") + id + ": " + e.what());
        }
    }

    std::vector<Json> easy_records(items.size()), difficult_records(items.size());
    std::atomic<std::size_t> complicated_turns{0};
    parallel_for(items.size(), config_.workers, [&](std::size_t i) {
        const Item& item = items[i];
        if (want_easy) easy_records[i] = labeled_to_json(item.easy);
        if (want_difficult) {
            LabeledDialogue difficult =
                complicate_dialogue(*llm_, item.easy, item.coref, lexicon_);
            complicated_turns += find_coref_turns(item.easy, item.coref).size();
            difficult_records[i] = labeled_to_json(difficult);
        }
    });

    std::vector<Json> records;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (want_easy && !easy_records[i].is_null()) records.push_back(std::move(easy_records[i]));
        if (want_difficult && !difficult_records[i].is_null()) {
            records.push_back(std::move(difficult_records[i]));
        }
    }
    write_jsonl(config_.out_dir / "labeled.jsonl", records);
    return StageSummary{"complicate",
                        Json{{"retained_dialogues", items.size()},
                             {"assembly_errors", assembly_errors},
                             {"labeled_records", records.size()},
                             {"coref_turns", complicated_turns.load()},
                             {"variant", config_.variant}}};
}

StageSummary Pipeline::run_augment() {
    std::vector<Json> labeled = require_artifact("labeled.jsonl", "augment");

    AugmentConfig acfg = config_.augment;
    acfg.rng_seed = config_.rng_seed;

    std::vector<TrainingSample> all;
    for (const Json& jl : labeled) {
        LabeledDialogue ld = labeled_from_json(jl);
        for (const TrainingSample& base : to_samples(ld, schema_, acfg)) {
            if (config_.permute && base.kind == TrainingSample::Kind::ValueGeneration) {
                for (TrainingSample& p : permute_values(base, acfg)) all.push_back(std::move(p));
            } else {
                all.push_back(base);
            }
        }
    }
    if (all.empty()) throw ValidationError("augment produced no samples; upstream is empty");

    ExportResult exported = export_training(all, config_.out_dir / "dataset", "train", acfg);
    return StageSummary{"augment", Json{{"labeled_records", labeled.size()},
                                        {"value_samples", exported.value_samples},
                                        {"domainslot_samples", exported.domainslot_samples},
                                        {"permute", config_.permute}}};
}

Json evaluate_files(const fs::path& gold_labeled, const fs::path& predictions,
                    const std::optional<fs::path>& annotations, const std::string& variant) {
    std::vector<GoldTurn> golds = gold_turns_from_labeled(read_jsonl(gold_labeled), variant);
    std::vector<PredictionRecord> preds = load_predictions(predictions);
    JgaResult jga = joint_goal_accuracy(preds, golds);
    CorefResult coref;
    if (annotations) coref = coref_slot_accuracy(preds, golds, load_annotations(*annotations));
    return evaluation_report(jga, coref);
}

}  // namespace edzda
