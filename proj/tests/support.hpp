#pragma once

// Shared fixture helpers for the test suite.

#include <sqlite3.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <string>

#include "rosesql/dataset.hpp"
#include "rosesql/llm.hpp"
#include "rosesql/rolestate.hpp"

namespace testsup {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(ROSESQL_SOURCE_DIR); }
inline fs::path fixture_dir() { return source_dir() / "tests" / "fixtures"; }
inline fs::path dataset_dir() { return fixture_dir() / "dataset"; }
inline fs::path golden_dir() { return fixture_dir() / "golden"; }
inline fs::path templates_dir() { return source_dir() / "templates"; }

inline fs::path make_temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    fs::path p = fs::temp_directory_path() /
                 ("rosesql-" + tag + "-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter.fetch_add(1)));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

inline void exec_sqlite(const fs::path& db_path, const std::string& script) {
    sqlite3* db = nullptr;
    if (sqlite3_open(db_path.string().c_str(), &db) != SQLITE_OK)
        throw std::runtime_error("cannot create " + db_path.string());
    char* err = nullptr;
    if (sqlite3_exec(db, script.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "exec failed";
        sqlite3_free(err);
        sqlite3_close(db);
        throw std::runtime_error("sqlite script failed: " + msg);
    }
    sqlite3_close(db);
}

// 5-table toy database matching the concert_singer fixture schema.
inline void build_concert_db(const fs::path& db_path) {
    exec_sqlite(db_path, R"sql(
CREATE TABLE stadium (Stadium_ID INTEGER PRIMARY KEY, Location TEXT, Name TEXT, Capacity INTEGER);
CREATE TABLE singer (Singer_ID INTEGER PRIMARY KEY, Name TEXT, Country TEXT, Age INTEGER);
CREATE TABLE concert (concert_ID INTEGER PRIMARY KEY, concert_Name TEXT, Stadium_ID INTEGER, Year INTEGER);
CREATE TABLE singer_in_concert (concert_ID INTEGER, Singer_ID INTEGER);
CREATE TABLE song (Song_ID INTEGER PRIMARY KEY, Title TEXT, Singer_ID INTEGER, Sales INTEGER);
INSERT INTO stadium VALUES (1,'London','Olympic',80000),(2,'Paris','Stade',60000),(3,'Lyon','Parc',4000);
INSERT INTO singer VALUES (1,'Edith','France',35),(2,'John','USA',42),(3,'Hans','Germany',28),(4,'Yoko','Japan',31),(5,'Marie','France',25);
INSERT INTO concert VALUES (1,'Week1',1,2014),(2,'Week2',2,2014),(3,'Best',2,2015);
INSERT INTO singer_in_concert VALUES (1,1),(1,2),(2,3);
INSERT INTO song VALUES (1,'Hit',1,100),(2,'Flop',2,5),(3,'Mid',3,50);
)sql");
}

// Oracle generate handler: extracts the current question from the rendered
// user prompt and replies with a well-formed tagged answer carrying the
// query scripted for that question.
inline rosesql::MockBackend::GenerateFn scripted_generator(
    std::map<std::string, std::string> question_to_reply) {
    return [m = std::move(question_to_reply)](const std::string&, const std::string& user) {
        // the current question is the last "question" field; earlier matches
        // can occur inside quoted exemplar material
        const std::string key = "\"question\": \"";
        std::size_t pos = user.rfind(key);
        if (pos == std::string::npos) return std::string("no scripted reply");
        std::size_t start = pos + key.size();
        std::size_t end = user.find("\",\n", start);
        if (end == std::string::npos) end = user.find('"', start);
        std::string q = user.substr(start, end - start);
        auto it = m.find(q);
        return it != m.end() ? it->second : std::string("no scripted reply");
    };
}

// Tagged reply carrying a Role-State block derived from the SQL itself.
inline std::string tagged_reply(const std::string& sql, const rosesql::Schema& schema) {
    rosesql::RoleState rs = rosesql::extract_rolestate(sql, schema);
    return "<step>Step 1: link the schema and build the query.</step>\n<Roles>" +
           rosesql::render_rolestate(rs) + "</Roles>\n<SQL>" + sql + "</SQL>";
}

}  // namespace testsup
