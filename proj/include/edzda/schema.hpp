// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edzda/util.hpp"

namespace edzda {

enum class SlotKind { Categorical, Open, Time, Boolean };

std::string slot_kind_name(SlotKind kind);
SlotKind slot_kind_from_name(const std::string& name);

struct SlotSpec {
    std::string name;
    SlotKind kind = SlotKind::Open;
    std::vector<std::string> pool;        // non-empty iff categorical/boolean
    std::optional<std::string> db_field;  // entity attribute backing this slot
};

struct DomainSpec {
    std::string name;
    std::vector<SlotSpec> slots;

    const SlotSpec* find_slot(const std::string& slot) const;
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<DomainSpec> domains);

    const std::vector<DomainSpec>& domains() const { return domains_; }
    const DomainSpec* find_domain(const std::string& name) const;
    const SlotSpec* find_slot(const std::string& domain, const std::string& slot) const;
    bool has_slot(const SlotId& id) const { return find_slot(id.domain, id.slot) != nullptr; }

    std::vector<std::string> domain_names() const;

    /// Position of a domain-slot in schema order (domain order, then slot
    /// order within the domain). Used as the canonical value ordering.
    std::optional<std::size_t> slot_rank(const SlotId& id) const;

private:
    std::vector<DomainSpec> domains_;
};

using Entity = std::map<std::string, std::string>;

class Database {
public:
    Database() = default;

    void add_table(const std::string& domain, std::vector<Entity> entities);
    bool has_table(const std::string& domain) const;
    const std::vector<Entity>& table(const std::string& domain) const;
    std::vector<std::string> table_names() const;

private:
    std::map<std::string, std::vector<Entity>> tables_;
};

Schema load_schema(const std::filesystem::path& path);

/// One JSON file per domain, each an array of flat string-valued objects.
Database load_database(const std::map<std::string, std::filesystem::path>& paths);

/// Checks that every db_field named by the schema exists on every entity of
/// that domain. Throws ValidationError on a gap.
void validate_database(const Schema& schema, const Database& db);

/// All entities of `domain` matching every filter (slot name -> value) under
/// value normalization, in table order. Filters on slots without a db_field
/// are an error.
std::vector<Entity> query_entities(const Database& db, const Schema& schema,
                                   const std::string& domain,
                                   const std::map<std::string, std::string>& filters);

}  // namespace edzda
