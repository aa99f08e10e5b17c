// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>

#include "edzda/schema.hpp"

using namespace edzda;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = EDZDA_FIXTURES_DIR;

Schema fixture_schema() { return load_schema(kFixtures / "schema.json"); }

Database fixture_db() {
    std::map<std::string, fs::path> paths;
    for (const char* d : {"restaurant", "hotel", "attraction", "train"}) {
        paths[d] = kFixtures / "db" / (std::string(d) + ".json");
    }
    return load_database(paths);
}

}  // namespace

TEST_CASE("fixture schema loads with five domains and consistent slots") {
    Schema schema = fixture_schema();
    CHECK(schema.domains().size() == 5);
    CHECK(schema.find_domain("taxi") != nullptr);
    CHECK(schema.find_slot("restaurant", "book time") != nullptr);
    CHECK(schema.find_slot("restaurant", "star") == nullptr);
    CHECK(schema.has_slot(SlotId{"hotel", "internet"}));

    const SlotSpec* area = schema.find_slot("hotel", "area");
    REQUIRE(area != nullptr);
    CHECK(area->kind == SlotKind::Categorical);
    CHECK(area->pool.size() == 5);
    const SlotSpec* leave = schema.find_slot("taxi", "leaveat");
    REQUIRE(leave != nullptr);
    CHECK(leave->kind == SlotKind::Time);
    CHECK_FALSE(leave->db_field.has_value());
}

TEST_CASE("slot_rank follows schema declaration order") {
    Schema schema = fixture_schema();
    auto r1 = schema.slot_rank(SlotId{"restaurant", "area"});
    auto r2 = schema.slot_rank(SlotId{"restaurant", "food"});
    auto r3 = schema.slot_rank(SlotId{"hotel", "area"});
    REQUIRE(r1.has_value());
    REQUIRE(r2.has_value());
    REQUIRE(r3.has_value());
    CHECK(*r1 < *r2);  // area declared before food within restaurant
    CHECK(*r2 < *r3);  // restaurant precedes hotel
    CHECK_FALSE(schema.slot_rank(SlotId{"taxi", "area"}).has_value());
}

TEST_CASE("schema rejects duplicates and empty categorical pools") {
    DomainSpec d{"x", {{"a", SlotKind::Categorical, {"v"}, std::nullopt},
                       {"a", SlotKind::Open, {}, std::nullopt}}};
    CHECK_THROWS_AS(Schema({d}), ValidationError);
    DomainSpec e{"x", {{"a", SlotKind::Categorical, {}, std::nullopt}}};
    CHECK_THROWS_AS(Schema({e}), ValidationError);
    CHECK_THROWS_AS(Schema({DomainSpec{"x", {}}, DomainSpec{"x", {}}}), ValidationError);
}

TEST_CASE("query_entities filters match a brute-force scan") {
    Schema schema = fixture_schema();
    Database db = fixture_db();

    std::map<std::string, std::string> filters{
        {"area", "centre"}, {"food", "british"}, {"pricerange", "expensive"}};
    std::vector<Entity> got = query_entities(db, schema, "restaurant", filters);

    // independent scan over the raw table
    std::vector<Entity> oracle;
    for (const Entity& e : db.table("restaurant")) {
        if (e.at("area") == "centre" && e.at("food") == "british" &&
            e.at("pricerange") == "expensive") {
            oracle.push_back(e);
        }
    }
    CHECK(got == oracle);
    REQUIRE(!got.empty());
    bool has_midsummer = false;
    for (const Entity& e : got) has_midsummer |= e.at("name") == "midsummer house restaurant";
    CHECK(has_midsummer);
}

TEST_CASE("query_entities normalizes values and validates slots") {
    Schema schema = fixture_schema();
    Database db = fixture_db();
    auto a = query_entities(db, schema, "restaurant", {{"area", "Centre"}});
    auto b = query_entities(db, schema, "restaurant", {{"area", "centre"}});
    CHECK(a == b);
    CHECK_THROWS_AS(query_entities(db, schema, "restaurant", {{"book time", "12:00"}}),
                    ValidationError);  // no db field behind booking slots
    CHECK_THROWS_AS(query_entities(db, schema, "nowhere", {}), ValidationError);
}

TEST_CASE("database validation requires backing fields") {
    Schema schema = fixture_schema();
    Database db;
    db.add_table("restaurant", {{{"name", "x"}}});  // lacks area/food/pricerange
    CHECK_THROWS_AS(validate_database(schema, db), ValidationError);
    CHECK_NOTHROW(validate_database(schema, fixture_db()));
}
