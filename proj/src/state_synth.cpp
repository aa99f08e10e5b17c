// SPDX-License-Identifier: Apache-2.0
#include "edzda/state_synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "edzda/textnorm.hpp"

namespace edzda {

namespace {
constexpr const char* kDontcare = "dontcare";
}

std::vector<std::string> dependency_order(const SeedState& seed) {
    const std::vector<std::string>& domains = seed.domains;
    // edges: source domain -> target domain
    std::map<std::string, std::set<std::string>> succ;
    std::map<std::string, int> indegree;
    for (const std::string& d : domains) indegree[d] = 0;
    for (const CorefLink& link : seed.coref()) {
        if (!indegree.contains(link.source.domain) || !indegree.contains(link.target.domain)) {
            throw ValidationError("reference endpoint outside seed domains: " +
                                  link.source.key() + " -> " + link.target.key());
        }
        if (link.source.domain == link.target.domain) continue;  // filtered upstream (R5)
        if (succ[link.source.domain].insert(link.target.domain).second) {
            ++indegree[link.target.domain];
        }
    }

    std::vector<std::string> order;
    std::vector<bool> used(domains.size(), false);
    while (order.size() < domains.size()) {
        bool advanced = false;
        for (std::size_t i = 0; i < domains.size(); ++i) {
            if (used[i] || indegree[domains[i]] != 0) continue;
            used[i] = true;
            order.push_back(domains[i]);
            for (const std::string& next : succ[domains[i]]) --indegree[next];
            advanced = true;
            break;  // restart scan so ties always resolve in input order
        }
        if (!advanced) {
            std::string stuck;
            for (std::size_t i = 0; i < domains.size(); ++i) {
                if (!used[i]) stuck += (stuck.empty() ? "" : ", ") + domains[i];
            }
            throw CycleError("cyclic domain references among: " + stuck);
        }
    }
    return order;
}

namespace {

std::string sample_grid_time(Rng& rng, const SynthConfig& cfg) {
    int steps = (cfg.time_grid_end_minutes - cfg.time_grid_start_minutes) /
                    cfg.time_grid_step_minutes + 1;
    int minutes = cfg.time_grid_start_minutes +
                  static_cast<int>(rng.bounded(static_cast<std::uint64_t>(steps))) *
                      cfg.time_grid_step_minutes;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

struct FillAttemptFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

DialogueState fill_once(const SeedState& seed, const Schema& schema, const Database& db,
                        Rng& rng, const SynthConfig& cfg) {
    // Working copy with optional dontcare injection into categorical literals.
    std::map<std::string, ValueSpec> entries = seed.entries;
    if (cfg.dontcare_probability > 0) {
        for (auto& [key, value] : entries) {
            if (value.kind != ValueSpec::Kind::Literal) continue;
            SlotId id = split_slot_key(key);
            const SlotSpec* spec = schema.find_slot(id.domain, id.slot);
            bool categorical =
                spec && (spec->kind == SlotKind::Categorical || spec->kind == SlotKind::Boolean);
            if (categorical && rng.uniform01() < cfg.dontcare_probability) {
                value = ValueSpec::make_literal(kDontcare);
            }
        }
    }

    DialogueState state;
    state.seed_id = seed.seed_id;
    std::map<std::string, std::string>& resolved = state.entries;

    auto resolve_reference = [&](const std::string& key, const SlotId& source) {
        auto it = resolved.find(source.key());
        if (it == resolved.end()) {
            throw ValidationError("reference source " + source.key() +
                                  " unresolved when filling " + key);
        }
        resolved[key] = it->second;
    };

    for (const std::string& domain : dependency_order(seed)) {
        const DomainSpec* dspec = schema.find_domain(domain);
        if (!dspec) throw ValidationError("seed names unknown domain: " + domain);

        // Slots of this domain present in the seed, in schema order.
        std::vector<std::pair<std::string, const SlotSpec*>> present;
        for (const SlotSpec& slot : dspec->slots) {
            std::string key = domain + "-" + slot.name;
            if (entries.contains(key)) present.emplace_back(key, &slot);
        }

        if (db.has_table(domain)) {
            std::map<std::string, std::string> filters;
            for (const auto& [key, slot] : present) {
                if (!slot->db_field) continue;
                const ValueSpec& v = entries.at(key);
                if (v.kind == ValueSpec::Kind::Literal && v.literal != kDontcare) {
                    filters[slot->name] = v.literal;
                } else if (v.kind == ValueSpec::Kind::Reference) {
                    auto it = resolved.find(v.source.key());
                    if (it != resolved.end() && it->second != kDontcare) {
                        filters[slot->name] = it->second;
                    }
                }
            }
            std::vector<Entity> matches = query_entities(db, schema, domain, filters);
            if (matches.empty()) {
                throw FillAttemptFailed("no " + domain + " entity satisfies the constraints");
            }
            const Entity& chosen = matches[rng.pick_index(matches.size())];
            state.chosen_entities[domain] = chosen;
            for (const auto& [key, slot] : present) {
                const ValueSpec& v = entries.at(key);
                if (v.kind == ValueSpec::Kind::Blank && slot->db_field) {
                    resolved[key] = chosen.at(*slot->db_field);
                } else if (v.kind == ValueSpec::Kind::Literal) {
                    resolved[key] = v.literal;
                } else if (v.kind == ValueSpec::Kind::Reference) {
                    resolve_reference(key, v.source);
                }
            }
        } else {
            for (const auto& [key, slot] : present) {
                const ValueSpec& v = entries.at(key);
                if (v.kind == ValueSpec::Kind::Literal) {
                    resolved[key] = v.literal;
                } else if (v.kind == ValueSpec::Kind::Reference) {
                    resolve_reference(key, v.source);
                }
            }
        }

        // Remaining blanks: times off the grid, categoricals from the pool,
        // open slots (taxi endpoints) from already-chosen entity names.
        std::vector<std::string> blank_times;
        for (const auto& [key, slot] : present) {
            if (resolved.contains(key)) continue;
            const ValueSpec& v = entries.at(key);
            if (v.kind != ValueSpec::Kind::Blank) continue;
            switch (slot->kind) {
                case SlotKind::Time:
                    blank_times.push_back(key);
                    break;
                case SlotKind::Categorical:
                case SlotKind::Boolean:
                    resolved[key] = slot->pool[rng.pick_index(slot->pool.size())];
                    break;
                case SlotKind::Open: {
                    std::set<std::string> used;
                    for (const auto& [k2, val] : resolved) {
                        if (split_slot_key(k2).domain == domain) used.insert(val);
                    }
                    std::vector<std::string> candidates;
                    for (const auto& [d2, entity] : state.chosen_entities) {
                        auto it = entity.find("name");
                        if (it != entity.end() && !used.contains(it->second)) {
                            candidates.push_back(it->second);
                        }
                    }
                    if (candidates.empty()) {
                        for (const std::string& table : db.table_names()) {
                            for (const Entity& e : db.table(table)) {
                                auto it = e.find("name");
                                if (it != e.end() && !used.contains(it->second)) {
                                    candidates.push_back(it->second);
                                }
                            }
                        }
                    }
                    if (candidates.empty()) {
                        throw FillAttemptFailed("no candidate place name for " + key);
                    }
                    resolved[key] = candidates[rng.pick_index(candidates.size())];
                    break;
                }
            }
        }
        // leaveat must precede arriveby when both were sampled freely.
        if (blank_times.size() >= 2) {
            bool has_leave = false, has_arrive = false;
            for (const std::string& k : blank_times) {
                SlotId id = split_slot_key(k);
                has_leave |= id.slot == "leaveat";
                has_arrive |= id.slot == "arriveby";
            }
            if (has_leave && has_arrive) {
                std::string a = sample_grid_time(rng, cfg);
                std::string b = sample_grid_time(rng, cfg);
                while (a == b) b = sample_grid_time(rng, cfg);
                if (a > b) std::swap(a, b);
                for (const std::string& k : blank_times) {
                    SlotId id = split_slot_key(k);
                    if (id.slot == "leaveat") {
                        resolved[k] = a;
                    } else if (id.slot == "arriveby") {
                        resolved[k] = b;
                    } else {
                        resolved[k] = sample_grid_time(rng, cfg);
                    }
                }
                blank_times.clear();
            }
        }
        for (const std::string& k : blank_times) resolved[k] = sample_grid_time(rng, cfg);
    }

    state.coref = seed.coref();
    for (const CorefLink& link : state.coref) {
        if (normalize_value(resolved.at(link.target.key())) !=
            normalize_value(resolved.at(link.source.key()))) {
            throw ValidationError("coref mismatch after fill: " + link.target.key());
        }
    }
    return state;
}

}  // namespace

DialogueState fill_state(const SeedState& seed, const Schema& schema, const Database& db,
                         Rng& rng, const SynthConfig& config) {
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, config.retry_cap); ++attempt) {
        Rng attempt_rng = rng.fork(static_cast<std::uint64_t>(attempt));
        try {
            return fill_once(seed, schema, db, attempt_rng, config);
        } catch (const FillAttemptFailed& e) {
            last_error = e.what();
        }
    }
    throw UnsatisfiableError("seed " + seed.seed_id + " unsatisfiable after " +
                             std::to_string(config.retry_cap) + " attempts: " + last_error);
}

std::vector<DialogueState> expand_seed(const SeedState& seed, const Schema& schema,
                                       const Database& db, int n, Rng& rng,
                                       const SynthConfig& config) {
    if (n < 1) throw ValidationError("expand_seed needs n >= 1");
    std::vector<DialogueState> out;
    std::set<std::string> fingerprints;
    for (int i = 0; i < n; ++i) {
        Rng task_rng = rng.fork("expand#" + std::to_string(i));
        DialogueState state;
        try {
            state = fill_state(seed, schema, db, task_rng, config);
        } catch (const UnsatisfiableError& e) {
            log_warn(e.what());
            continue;
        } catch (const CycleError& e) {
            log_warn(std::string("rejecting seed ") + seed.seed_id + ": " + e.what());
            return out;
        }
        std::string fp;
        for (const auto& [k, v] : state.entries) fp += k + "=" + v + ";";
        if (!fingerprints.insert(fp).second) continue;
        state.state_id = seed.seed_id + "#" + std::to_string(out.size());
        out.push_back(std::move(state));
    }
    return out;
}

}  // namespace edzda
