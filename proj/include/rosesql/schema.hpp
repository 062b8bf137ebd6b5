#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rosesql/util.hpp"

namespace rosesql {

enum class ColType { Text, Number, Time, Boolean, Others };

inline ColType col_type_from_string(std::string_view s) {
    std::string t = to_lower(s);
    if (t == "text") return ColType::Text;
    if (t == "number") return ColType::Number;
    if (t == "time") return ColType::Time;
    if (t == "boolean") return ColType::Boolean;
    return ColType::Others;  // anything unknown maps to others
}

inline std::string col_type_name(ColType t) {
    switch (t) {
        case ColType::Text: return "TEXT";
        case ColType::Number: return "NUMBER";
        case ColType::Time: return "TIME";
        case ColType::Boolean: return "BOOLEAN";
        case ColType::Others: return "OTHERS";
    }
    return "OTHERS";
}

struct ColumnDef {
    std::string name;
    ColType type = ColType::Others;
};

struct TableDef {
    std::string name;
    std::vector<ColumnDef> columns;
};

struct ForeignKey {
    std::string table, column, ref_table, ref_column;
};

struct PrimaryKey {
    std::string table, column;
};

struct SchemaScale {
    std::size_t n_tables = 0;
    std::size_t n_columns = 0;
    std::size_t n_foreign_keys = 0;

    bool operator==(const SchemaScale&) const = default;
};

class Schema {
public:
    std::string db_id;
    std::vector<TableDef> tables;
    std::vector<ForeignKey> foreign_keys;
    std::vector<PrimaryKey> primary_keys;

    // Case-insensitive table lookup; returns the stored (schema-cased) def.
    const TableDef* find_table(std::string_view name) const {
        for (const auto& t : tables)
            if (iequals(t.name, name)) return &t;
        return nullptr;
    }

    const ColumnDef* find_column(std::string_view table, std::string_view column) const {
        const TableDef* t = find_table(table);
        if (!t) return nullptr;
        for (const auto& c : t->columns)
            if (iequals(c.name, column)) return &c;
        return nullptr;
    }

    // Finds the unique table owning a column; nullptr when absent or ambiguous.
    const TableDef* table_of_column(std::string_view column) const {
        const TableDef* found = nullptr;
        for (const auto& t : tables) {
            for (const auto& c : t.columns) {
                if (iequals(c.name, column)) {
                    if (found && found != &t) return nullptr;
                    found = &t;
                }
            }
        }
        return found;
    }

    bool is_primary_key(std::string_view table, std::string_view column) const {
        for (const auto& pk : primary_keys)
            if (iequals(pk.table, table) && iequals(pk.column, column)) return true;
        return false;
    }

    void validate() const {
        for (std::size_t i = 0; i < tables.size(); ++i) {
            if (tables[i].columns.empty())
                throw ValidationError("table '" + tables[i].name + "' has no columns");
            for (std::size_t j = i + 1; j < tables.size(); ++j)
                if (iequals(tables[i].name, tables[j].name))
                    throw ValidationError("duplicate table name '" + tables[i].name + "'");
            const auto& cols = tables[i].columns;
            for (std::size_t a = 0; a < cols.size(); ++a)
                for (std::size_t b = a + 1; b < cols.size(); ++b)
                    if (iequals(cols[a].name, cols[b].name))
                        throw ValidationError("duplicate column '" + cols[a].name +
                                              "' in table '" + tables[i].name + "'");
        }
        for (const auto& fk : foreign_keys) {
            if (!find_column(fk.table, fk.column))
                throw ValidationError("foreign key references unknown " + fk.table + "." + fk.column);
            if (!find_column(fk.ref_table, fk.ref_column))
                throw ValidationError("foreign key references unknown " + fk.ref_table + "." + fk.ref_column);
        }
    }
};

inline SchemaScale schema_scale(const Schema& schema) {
    SchemaScale s;
    s.n_tables = schema.tables.size();
    for (const auto& t : schema.tables) s.n_columns += t.columns.size();
    s.n_foreign_keys = schema.foreign_keys.size();
    return s;
}

// M-schema serialization: one deterministic text block per database, used in
// prompts and question rewriting. Field order is frozen by the golden test.
inline std::string serialize_mschema(const Schema& schema) {
    std::string out;
    out += "【DB_ID】 " + schema.db_id + "\n";
    out += "【Schema】\n";
    for (const auto& t : schema.tables) {
        out += "# Table: " + t.name + "\n[\n";
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            const auto& c = t.columns[i];
            out += "(" + c.name + ":" + col_type_name(c.type);
            if (schema.is_primary_key(t.name, c.name)) out += ", Primary Key";
            out += ")";
            if (i + 1 < t.columns.size()) out += ",";
            out += "\n";
        }
        out += "]\n";
    }
    out += "【Foreign keys】\n";
    for (const auto& fk : schema.foreign_keys)
        out += fk.table + "." + fk.column + "=" + fk.ref_table + "." + fk.ref_column + "\n";
    return out;
}

}  // namespace rosesql
