#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rosesql/schema.hpp"
#include "rosesql/util.hpp"

namespace rosesql {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Turn {
    int index = 1;  // 1-based
    std::string utterance;
    std::optional<std::string> rewritten_utterance;
    std::optional<std::string> gold_sql;
    std::optional<std::string> gold_reasoning;

    // Utterance used for similarity / perplexity when rewrites exist.
    const std::string& effective_utterance() const {
        return rewritten_utterance ? *rewritten_utterance : utterance;
    }
};

struct Interaction {
    std::string interaction_id;
    std::string db_id;
    std::vector<Turn> turns;

    std::size_t length() const { return turns.size(); }
};

inline json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IngestionError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError("cannot write " + path.string());
    out << text;
}

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open " + path.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

// Parses the Spider-family `tables.json` schema list.
inline std::map<std::string, Schema> load_schemas(const fs::path& tables_file) {
    json j = read_json_file(tables_file);
    std::map<std::string, Schema> out;
    for (const auto& entry : j) {
        Schema s;
        s.db_id = entry.at("db_id").get<std::string>();
        const auto& table_names = entry.at("table_names_original");
        const auto& column_names = entry.at("column_names_original");
        const auto& column_types = entry.value("column_types", json::array());
        for (const auto& name : table_names)
            s.tables.push_back(TableDef{name.get<std::string>(), {}});
        // Column index 0 is the dataset's synthetic "*"; we skip it but keep
        // the dataset's global column indices for FK/PK resolution.
        std::vector<std::pair<int, std::string>> flat;  // (table idx, name)
        for (std::size_t ci = 0; ci < column_names.size(); ++ci) {
            int ti = column_names[ci][0].get<int>();
            std::string cname = column_names[ci][1].get<std::string>();
            flat.emplace_back(ti, cname);
            if (ti < 0) continue;
            ColType ct = ColType::Others;
            if (ci < column_types.size())
                ct = col_type_from_string(column_types[ci].get<std::string>());
            s.tables[static_cast<std::size_t>(ti)].columns.push_back(ColumnDef{cname, ct});
        }
        auto col_ref = [&](int idx) -> std::pair<std::string, std::string> {
            auto [ti, cname] = flat.at(static_cast<std::size_t>(idx));
            if (ti < 0) throw ValidationError("key references the '*' column in " + s.db_id);
            return {s.tables[static_cast<std::size_t>(ti)].name, cname};
        };
        for (const auto& pk : entry.value("primary_keys", json::array())) {
            auto [t, c] = col_ref(pk.get<int>());
            s.primary_keys.push_back(PrimaryKey{t, c});
        }
        for (const auto& fk : entry.value("foreign_keys", json::array())) {
            auto [t, c] = col_ref(fk[0].get<int>());
            auto [rt, rc] = col_ref(fk[1].get<int>());
            s.foreign_keys.push_back(ForeignKey{t, c, rt, rc});
        }
        s.validate();
        out[s.db_id] = std::move(s);
    }
    return out;
}

struct Corpus {
    std::map<std::string, Schema> schemas;
    std::vector<Interaction> interactions;

    const Schema& schema_of(const Interaction& it) const {
        auto found = schemas.find(it.db_id);
        if (found == schemas.end())
            throw ValidationError("unknown db_id '" + it.db_id + "'");
        return found->second;
    }
};

// Loads a SParC/CoSQL split. Both benchmarks share the shape
// {database_id, interaction: [{utterance, query}, ...]}.
inline Corpus load_dataset(const fs::path& dir, const std::string& split) {
    if (!fs::is_directory(dir))
        throw IngestionError("dataset directory missing: " + dir.string());
    fs::path tables_file = dir / "tables.json";
    if (!fs::exists(tables_file))
        throw IngestionError("schema file missing: " + tables_file.string());

    fs::path split_file;
    for (const auto& cand : {split + ".json", split == "dev" ? "sparc_dev.json" : split + "_other.json"}) {
        if (fs::exists(dir / cand)) { split_file = dir / cand; break; }
    }
    if (split_file.empty())
        throw IngestionError("split file missing: " + (dir / (split + ".json")).string());

    Corpus corpus;
    corpus.schemas = load_schemas(tables_file);

    json j = read_json_file(split_file);
    std::size_t serial = 0;
    for (const auto& entry : j) {
        Interaction it;
        it.db_id = entry.at("database_id").get<std::string>();
        it.interaction_id = split + "-" + std::to_string(serial++);
        if (!corpus.schemas.count(it.db_id))
            throw ValidationError("interaction " + it.interaction_id +
                                  " references unknown db_id '" + it.db_id + "'");
        int idx = 1;
        for (const auto& t : entry.at("interaction")) {
            Turn turn;
            turn.index = idx++;
            turn.utterance = trim(t.at("utterance").get<std::string>());
            if (turn.utterance.empty())
                throw ValidationError("empty utterance in interaction " + it.interaction_id);
            if (t.contains("query") && !t.at("query").is_null()) {
                std::string q = trim(t.at("query").get<std::string>());
                if (!q.empty()) turn.gold_sql = q;
            }
            it.turns.push_back(std::move(turn));
        }
        if (it.turns.empty()) continue;  // some CoSQL entries carry goal-only blocks
        corpus.interactions.push_back(std::move(it));
    }
    return corpus;
}

// ---- cache round-trip -------------------------------------------------

inline json interaction_to_json(const Interaction& it) {
    json turns = json::array();
    for (const auto& t : it.turns) {
        json tj;
        tj["index"] = t.index;
        tj["utterance"] = t.utterance;
        if (t.rewritten_utterance) tj["rewritten_utterance"] = *t.rewritten_utterance;
        if (t.gold_sql) tj["gold_sql"] = *t.gold_sql;
        if (t.gold_reasoning) tj["gold_reasoning"] = *t.gold_reasoning;
        turns.push_back(tj);
    }
    return json{{"interaction_id", it.interaction_id}, {"db_id", it.db_id}, {"turns", turns}};
}

inline Interaction interaction_from_json(const json& j) {
    Interaction it;
    it.interaction_id = j.at("interaction_id").get<std::string>();
    it.db_id = j.at("db_id").get<std::string>();
    for (const auto& tj : j.at("turns")) {
        Turn t;
        t.index = tj.at("index").get<int>();
        t.utterance = tj.at("utterance").get<std::string>();
        if (tj.contains("rewritten_utterance"))
            t.rewritten_utterance = tj.at("rewritten_utterance").get<std::string>();
        if (tj.contains("gold_sql")) t.gold_sql = tj.at("gold_sql").get<std::string>();
        if (tj.contains("gold_reasoning")) t.gold_reasoning = tj.at("gold_reasoning").get<std::string>();
        it.turns.push_back(std::move(t));
    }
    return it;
}

constexpr const char* kCacheFormatVersion = "rosesql-cache-v1";

inline void write_interaction_cache(const fs::path& file, const std::vector<Interaction>& its) {
    json j;
    j["format"] = kCacheFormatVersion;
    j["interactions"] = json::array();
    for (const auto& it : its) j["interactions"].push_back(interaction_to_json(it));
    write_text_file(file, j.dump(2) + "\n");
}

inline std::vector<Interaction> read_interaction_cache(const fs::path& file) {
    json j = read_json_file(file);
    if (j.value("format", "") != kCacheFormatVersion)
        throw IngestionError("unrecognized cache format in " + file.string());
    std::vector<Interaction> out;
    for (const auto& ij : j.at("interactions")) out.push_back(interaction_from_json(ij));
    return out;
}

}  // namespace rosesql
