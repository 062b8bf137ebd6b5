#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rosesql/dataset.hpp"
#include "rosesql/schema.hpp"
#include "support.hpp"

using namespace rosesql;

namespace {

Schema small_schema() {
    // 3 tables, 12 columns, 2 foreign keys
    Schema s;
    s.db_id = "shop";
    s.tables = {
        TableDef{"customer", {{"id", ColType::Number}, {"name", ColType::Text},
                              {"city", ColType::Text}, {"age", ColType::Number}}},
        TableDef{"orders", {{"order_id", ColType::Number}, {"customer_id", ColType::Number},
                            {"total", ColType::Number}, {"placed_at", ColType::Time}}},
        TableDef{"item", {{"item_id", ColType::Number}, {"order_id", ColType::Number},
                          {"sku", ColType::Text}, {"qty", ColType::Number}}},
    };
    s.primary_keys = {{"customer", "id"}, {"orders", "order_id"}, {"item", "item_id"}};
    s.foreign_keys = {{"orders", "customer_id", "customer", "id"},
                      {"item", "order_id", "orders", "order_id"}};
    s.validate();
    return s;
}

}  // namespace

TEST_CASE("schema_scale counts collections") {
    Schema s = small_schema();
    SchemaScale scale = schema_scale(s);
    CHECK(scale.n_tables == 3);
    CHECK(scale.n_columns == 12);
    CHECK(scale.n_foreign_keys == 2);
}

TEST_CASE("schema_scale minimal schema") {
    Schema s;
    s.db_id = "tiny";
    s.tables = {TableDef{"t", {{"c", ColType::Text}}}};
    CHECK(schema_scale(s) == SchemaScale{1, 1, 0});
}

TEST_CASE("schema_scale field independence") {
    Schema a = small_schema();
    Schema b = a;
    b.foreign_keys.push_back({"item", "order_id", "orders", "order_id"});
    SchemaScale sa = schema_scale(a), sb = schema_scale(b);
    CHECK(sa.n_tables == sb.n_tables);
    CHECK(sa.n_columns == sb.n_columns);
    CHECK(sb.n_foreign_keys == sa.n_foreign_keys + 1);
}

TEST_CASE("schema_scale is monotone in each dimension") {
    Schema s = small_schema();
    SchemaScale base = schema_scale(s);

    Schema with_table = s;
    with_table.tables.push_back(TableDef{"extra", {{"x", ColType::Text}}});
    CHECK(schema_scale(with_table).n_tables == base.n_tables + 1);

    Schema with_col = s;
    with_col.tables[0].columns.push_back({"extra_col", ColType::Text});
    CHECK(schema_scale(with_col).n_columns == base.n_columns + 1);
    CHECK(schema_scale(with_col).n_tables == base.n_tables);
}

TEST_CASE("schema validation rejects bad inputs") {
    Schema dup = small_schema();
    dup.tables.push_back(TableDef{"Customer", {{"z", ColType::Text}}});
    CHECK_THROWS_AS(dup.validate(), ValidationError);

    Schema empty_cols = small_schema();
    empty_cols.tables.push_back(TableDef{"ghost", {}});
    CHECK_THROWS_AS(empty_cols.validate(), ValidationError);

    Schema bad_fk = small_schema();
    bad_fk.foreign_keys.push_back({"orders", "nope", "customer", "id"});
    CHECK_THROWS_AS(bad_fk.validate(), ValidationError);
}

TEST_CASE("case-insensitive lookups keep schema casing") {
    Schema s = small_schema();
    REQUIRE(s.find_table("ORDERS") != nullptr);
    CHECK(s.find_table("ORDERS")->name == "orders");
    REQUIRE(s.find_column("Customer", "NAME") != nullptr);
    CHECK(s.find_column("Customer", "NAME")->name == "name");
    CHECK(s.table_of_column("sku")->name == "item");
    CHECK(s.table_of_column("order_id") == nullptr);  // ambiguous
}

TEST_CASE("mschema serialization matches the golden file") {
    Corpus corpus = load_dataset(testsup::dataset_dir(), "dev");
    std::string rendered = serialize_mschema(corpus.schemas.at("world_1"));
    std::string golden = read_text_file(testsup::golden_dir() / "mschema_world_1.txt");
    CHECK(rendered == normalize_newlines(golden));
}

TEST_CASE("mschema is deterministic and total") {
    Schema s = small_schema();
    CHECK(serialize_mschema(s) == serialize_mschema(s));

    Schema no_fk = s;
    no_fk.foreign_keys.clear();
    std::string text = serialize_mschema(no_fk);
    // empty FK list still emits the section header, per the fixed template
    CHECK(text.find("【Foreign keys】") != std::string::npos);
    CHECK(text.find("orders.customer_id") == std::string::npos);
}
