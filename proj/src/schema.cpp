// SPDX-License-Identifier: Apache-2.0
#include "edzda/schema.hpp"

#include <set>

#include "edzda/jsonl.hpp"
#include "edzda/textnorm.hpp"

namespace edzda {

std::string slot_kind_name(SlotKind kind) {
    switch (kind) {
        case SlotKind::Categorical: return "categorical";
        case SlotKind::Open: return "open";
        case SlotKind::Time: return "time";
        case SlotKind::Boolean: return "boolean";
    }
    return "open";
}

SlotKind slot_kind_from_name(const std::string& name) {
    if (name == "categorical") return SlotKind::Categorical;
    if (name == "open") return SlotKind::Open;
    if (name == "time") return SlotKind::Time;
    if (name == "boolean") return SlotKind::Boolean;
    throw ValidationError("unknown slot kind: " + name);
}

const SlotSpec* DomainSpec::find_slot(const std::string& slot) const {
    for (const SlotSpec& s : slots) {
        if (s.name == slot) return &s;
    }
    return nullptr;
}

Schema::Schema(std::vector<DomainSpec> domains) : domains_(std::move(domains)) {
    if (domains_.empty()) throw ValidationError("schema has no domains");
    std::set<std::string> seen;
    for (const DomainSpec& d : domains_) {
        if (!seen.insert(d.name).second) {
            throw ValidationError("duplicate domain: " + d.name);
        }
        std::set<std::string> slot_seen;
        for (const SlotSpec& s : d.slots) {
            if (!slot_seen.insert(s.name).second) {
                throw ValidationError("duplicate slot " + d.name + "-" + s.name);
            }
            bool needs_pool = s.kind == SlotKind::Categorical || s.kind == SlotKind::Boolean;
            if (needs_pool && s.pool.empty()) {
                throw ValidationError("slot " + d.name + "-" + s.name + " has an empty value pool");
            }
        }
    }
}

const DomainSpec* Schema::find_domain(const std::string& name) const {
    for (const DomainSpec& d : domains_) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

const SlotSpec* Schema::find_slot(const std::string& domain, const std::string& slot) const {
    const DomainSpec* d = find_domain(domain);
    return d ? d->find_slot(slot) : nullptr;
}

std::vector<std::string> Schema::domain_names() const {
    std::vector<std::string> out;
    out.reserve(domains_.size());
    for (const DomainSpec& d : domains_) out.push_back(d.name);
    return out;
}

std::optional<std::size_t> Schema::slot_rank(const SlotId& id) const {
    std::size_t rank = 0;
    for (const DomainSpec& d : domains_) {
        for (const SlotSpec& s : d.slots) {
            if (d.name == id.domain && s.name == id.slot) return rank;
            ++rank;
        }
    }
    return std::nullopt;
}

void Database::add_table(const std::string& domain, std::vector<Entity> entities) {
    tables_[domain] = std::move(entities);
}

bool Database::has_table(const std::string& domain) const {
    return tables_.contains(domain);
}

const std::vector<Entity>& Database::table(const std::string& domain) const {
    auto it = tables_.find(domain);
    if (it == tables_.end()) throw ValidationError("no entity table for domain: " + domain);
    return it->second;
}

std::vector<std::string> Database::table_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : tables_) out.push_back(name);
    return out;
}

Schema load_schema(const std::filesystem::path& path) {
    Json doc = read_json_file(path);
    if (!doc.is_object() || !doc.contains("domains") || !doc["domains"].is_array()) {
        throw ValidationError(path.string() + ": expected {\"domains\": [...]}");
    }
    std::vector<DomainSpec> domains;
    for (const Json& jd : doc["domains"]) {
        DomainSpec d;
        d.name = jd.at("name").get<std::string>();
        for (const Json& js : jd.at("slots")) {
            SlotSpec s;
            s.name = js.at("name").get<std::string>();
            s.kind = slot_kind_from_name(js.value("kind", std::string("open")));
            if (js.contains("pool")) s.pool = js["pool"].get<std::vector<std::string>>();
            if (js.contains("db_field")) s.db_field = js["db_field"].get<std::string>();
            d.slots.push_back(std::move(s));
        }
        domains.push_back(std::move(d));
    }
    return Schema(std::move(domains));
}

Database load_database(const std::map<std::string, std::filesystem::path>& paths) {
    Database db;
    for (const auto& [domain, path] : paths) {
        Json doc = read_json_file(path);
        if (!doc.is_array()) throw ValidationError(path.string() + ": expected a JSON array");
        std::vector<Entity> entities;
        for (const Json& je : doc) {
            Entity e;
            for (auto it = je.begin(); it != je.end(); ++it) {
                if (it.value().is_string()) {
                    e[it.key()] = it.value().get<std::string>();
                } else {
                    e[it.key()] = it.value().dump();
                }
            }
            entities.push_back(std::move(e));
        }
        db.add_table(domain, std::move(entities));
    }
    return db;
}

void validate_database(const Schema& schema, const Database& db) {
    for (const DomainSpec& d : schema.domains()) {
        if (!db.has_table(d.name)) continue;  // taxi has no table
        for (const SlotSpec& s : d.slots) {
            if (!s.db_field) continue;
            for (const Entity& e : db.table(d.name)) {
                if (!e.contains(*s.db_field)) {
                    throw ValidationError("entity in domain " + d.name + " lacks field " +
                                          *s.db_field + " required by slot " + s.name);
                }
            }
        }
    }
}

std::vector<Entity> query_entities(const Database& db, const Schema& schema,
                                   const std::string& domain,
                                   const std::map<std::string, std::string>& filters) {
    const DomainSpec* dspec = schema.find_domain(domain);
    if (!dspec) throw ValidationError("unknown domain: " + domain);

    // Resolve filter slots to entity attributes up front.
    std::vector<std::pair<std::string, std::string>> attr_filters;
    for (const auto& [slot, value] : filters) {
        const SlotSpec* sspec = dspec->find_slot(slot);
        if (!sspec) throw ValidationError("unknown slot " + domain + "-" + slot);
        if (!sspec->db_field) {
            throw ValidationError("slot " + domain + "-" + slot + " has no db field to filter on");
        }
        attr_filters.emplace_back(*sspec->db_field, normalize_value(value));
    }

    std::vector<Entity> out;
    for (const Entity& e : db.table(domain)) {
        bool match = true;
        for (const auto& [attr, want] : attr_filters) {
            auto it = e.find(attr);
            if (it == e.end() || normalize_value(it->second) != want) {
                match = false;
                break;
            }
        }
        if (match) out.push_back(e);
    }
    return out;
}

}  // namespace edzda
