#pragma once

// Evaluation: structural exact match (EM) via clause canonicalization,
// execution accuracy (EX) against SQLite, test-suite accuracy (TS) across
// database variants, difficulty classification, and QM/IM reporting.

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rosesql/schema.hpp"
#include "rosesql/sql.hpp"
#include "rosesql/util.hpp"

namespace rosesql {

// ---- exact match ---------------------------------------------------------

namespace canon {

// Scope mapping aliases to base table names for one core.
struct AliasScope {
    std::map<std::string, std::string> names;  // lowercased alias/table -> base (lowercased)
    std::vector<std::string> tables;           // lowercased base names in FROM order
    const Schema* schema = nullptr;
    const AliasScope* parent = nullptr;

    std::string resolve(const std::string& qualifier) const {
        auto it = names.find(to_lower(qualifier));
        if (it != names.end()) return it->second;
        if (parent) return parent->resolve(qualifier);
        return to_lower(qualifier);  // best effort: unknown qualifiers kept as written
    }
    std::string owner_of(const std::string& column) const {
        if (schema) {
            for (const auto& t : tables)
                if (schema->find_column(t, column)) return t;
            if (parent) {
                std::string up = parent->owner_of(column);
                if (!up.empty()) return up;
            }
            if (const TableDef* t = schema->table_of_column(column)) return to_lower(t->name);
        }
        if (tables.size() == 1) return tables[0];
        return "";
    }
};

std::string canon_stmt(const sql::SelectStmt& stmt, const Schema* schema,
                       const AliasScope* parent);

// Canonical expression text: lowercased, alias-resolved, columns qualified
// when resolvable. Literals become '?' when placeholders is set.
inline std::string canon_expr(const sql::ExprPtr& e, const AliasScope& scope,
                              bool placeholders) {
    using K = sql::ExprKind;
    if (!e) return "";
    switch (e->kind) {
        case K::Star:
            return "*";
        case K::Column: {
            std::string col = to_lower(e->column);
            if (col == "*") return scope.resolve(e->table) + ".*";
            std::string owner = e->table.empty() ? scope.owner_of(col) : scope.resolve(e->table);
            return owner.empty() ? col : owner + "." + col;
        }
        case K::Number:
            return placeholders ? "?" : to_lower(e->literal);
        case K::String:
            return placeholders ? "?" : "'" + to_lower(e->literal) + "'";
        case K::Null:
            return "null";
        case K::Func: {
            std::string inner;
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) inner += ",";
                inner += canon_expr(e->args[i], scope, placeholders);
            }
            return e->func + "(" + (e->distinct ? "distinct " : "") + inner + ")";
        }
        case K::Binary: {
            std::string a = canon_expr(e->args[0], scope, placeholders);
            std::string b = canon_expr(e->args[1], scope, placeholders);
            // symmetric operators compare order-insensitively
            if ((e->op == "=" || e->op == "!=" || e->op == "and" || e->op == "or" ||
                 e->op == "+" || e->op == "*") && b < a)
                std::swap(a, b);
            std::string neg = e->negated ? "not " : "";
            return "(" + a + " " + neg + e->op + " " + b + ")";
        }
        case K::Not:
            return "(not " + canon_expr(e->args[0], scope, placeholders) + ")";
        case K::In: {
            std::string lhs = canon_expr(e->args[0], scope, placeholders);
            std::string rhs;
            if (e->subquery) {
                rhs = canon_stmt(*e->subquery, scope.schema, &scope);
            } else {
                std::vector<std::string> items;
                for (const auto& item : e->in_list)
                    items.push_back(canon_expr(item, scope, placeholders));
                std::sort(items.begin(), items.end());
                rhs = join(items, ",");
            }
            return "(" + lhs + (e->negated ? " not in " : " in ") + "(" + rhs + "))";
        }
        case K::Between:
            return "(" + canon_expr(e->args[0], scope, placeholders) +
                   (e->negated ? " not between " : " between ") +
                   canon_expr(e->args[1], scope, placeholders) + " and " +
                   canon_expr(e->args[2], scope, placeholders) + ")";
        case K::IsNull:
            return "(" + canon_expr(e->args[0], scope, placeholders) +
                   (e->negated ? " is not null" : " is null") + ")";
        case K::Subquery:
            return canon_stmt(*e->subquery, scope.schema, &scope);
    }
    return "";
}

// Splits top-level ANDs into conjuncts.
inline void collect_conjuncts(const sql::ExprPtr& e, std::vector<sql::ExprPtr>& out) {
    if (!e) return;
    if (e->kind == sql::ExprKind::Binary && e->op == "and") {
        collect_conjuncts(e->args[0], out);
        collect_conjuncts(e->args[1], out);
        return;
    }
    out.push_back(e);
}

inline std::string canon_core(const sql::SelectCore& core, const Schema* schema,
                              const AliasScope* parent) {
    AliasScope scope;
    scope.schema = schema;
    scope.parent = parent;
    for (const auto& item : core.from) {
        if (item.subquery) continue;
        std::string base = to_lower(item.table);
        scope.names[base] = base;
        if (!item.alias.empty()) scope.names[to_lower(item.alias)] = base;
        scope.tables.push_back(base);
    }

    // projection set: order-insensitive
    std::vector<std::string> proj;
    for (const auto& p : core.projections) proj.push_back(canon_expr(p, scope, false));
    std::sort(proj.begin(), proj.end());

    // sources: base tables plus derived tables, with join conditions
    std::vector<std::string> sources;
    for (const auto& item : core.from) {
        if (item.subquery)
            sources.push_back(canon_stmt(*item.subquery, schema, &scope));
        else
            sources.push_back(to_lower(item.table));
    }
    std::sort(sources.begin(), sources.end());
    std::vector<std::string> joins;
    for (const auto& j : core.join_conds) {
        std::vector<sql::ExprPtr> conjuncts;
        collect_conjuncts(j, conjuncts);
        for (const auto& c : conjuncts) joins.push_back(canon_expr(c, scope, false));
    }
    std::sort(joins.begin(), joins.end());

    // condition conjunct multiset with literal placeholders (WHERE + HAVING)
    std::vector<std::string> conds;
    for (const auto& clause : {core.where, core.having}) {
        std::vector<sql::ExprPtr> conjuncts;
        collect_conjuncts(clause, conjuncts);
        for (const auto& c : conjuncts) conds.push_back(canon_expr(c, scope, true));
    }
    std::sort(conds.begin(), conds.end());

    std::vector<std::string> groups;
    for (const auto& g : core.group_by) groups.push_back(canon_expr(g, scope, false));
    std::sort(groups.begin(), groups.end());

    // order list stays order-sensitive, with direction
    std::vector<std::string> orders;
    for (const auto& o : core.order_by)
        orders.push_back(canon_expr(o.expr, scope, false) + (o.desc ? " desc" : " asc"));

    std::string out;
    out += "select[" + std::string(core.distinct ? "distinct|" : "") + join(proj, ";") + "]";
    out += "from[" + join(sources, ";") + "]";
    out += "join[" + join(joins, ";") + "]";
    out += "cond[" + join(conds, ";") + "]";
    out += "group[" + join(groups, ";") + "]";
    out += "order[" + join(orders, ";") + "]";
    out += "limit[" + (core.limit ? std::to_string(*core.limit) : std::string()) + "]";
    return out;
}

inline std::string canon_stmt(const sql::SelectStmt& stmt, const Schema* schema,
                              const AliasScope* parent) {
    std::string out = "(" + canon_core(stmt.core, schema, parent);
    for (const auto& [op, rhs] : stmt.compounds) {
        const char* name = "";
        switch (op) {
            case sql::SetOp::Union: name = "union"; break;
            case sql::SetOp::UnionAll: name = "union all"; break;
            case sql::SetOp::Except: name = "except"; break;
            case sql::SetOp::Intersect: name = "intersect"; break;
        }
        out += " " + std::string(name) + " " + canon_stmt(*rhs, schema, parent);
    }
    return out + ")";
}

}  // namespace canon

// Structural match over canonical clause components after alias resolution
// and case folding. A reimplementation, not a byte port of the official
// evaluator; predictions are exported in the official format for external
// cross-checks.
inline bool exact_match(const std::string& pred, const std::string& gold, const Schema& schema,
                        bool* parse_failure = nullptr) {
    if (parse_failure) *parse_failure = false;
    try {
        auto p = sql::parse_select(pred);
        auto g = sql::parse_select(gold);
        return canon::canon_stmt(*p, &schema, nullptr) == canon::canon_stmt(*g, &schema, nullptr);
    } catch (const Error&) {
        if (parse_failure) *parse_failure = true;
        return false;
    }
}

// ---- execution match -------------------------------------------------------

namespace exec {

struct QueryTimeout : Error {
    using Error::Error;
};

struct Deadline {
    std::chrono::steady_clock::time_point at;
};

inline int progress_cb(void* ctx) {
    auto* d = static_cast<Deadline*>(ctx);
    return std::chrono::steady_clock::now() > d->at ? 1 : 0;
}

// Rows are serialized to comparable strings. Floats round to 1e-6 so that
// numerically equal results from different expressions compare equal.
inline std::vector<std::string> run_query(const std::string& db_path, const std::string& sql_text,
                                          double timeout_s) {
    sqlite3* db = nullptr;
    if (sqlite3_open_v2(db_path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
        std::string msg = db ? sqlite3_errmsg(db) : "open failed";
        sqlite3_close(db);
        throw IngestionError("cannot open database " + db_path + ": " + msg);
    }
    Deadline deadline{std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(timeout_s))};
    sqlite3_progress_handler(db, 1000, progress_cb, &deadline);

    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db, sql_text.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
        std::string msg = sqlite3_errmsg(db);
        sqlite3_close(db);
        throw DomainError("query failed to prepare: " + msg);
    }
    std::vector<std::string> rows;
    int rc;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
        std::string row;
        int n = sqlite3_column_count(stmt);
        for (int i = 0; i < n; ++i) {
            if (i) row += '\x1f';
            switch (sqlite3_column_type(stmt, i)) {
                case SQLITE_NULL:
                    row += "~null";
                    break;
                case SQLITE_INTEGER:
                case SQLITE_FLOAT: {
                    double v = sqlite3_column_double(stmt, i);
                    double rounded = std::round(v * 1e6) / 1e6;
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "n:%.6f", rounded);
                    row += buf;
                    break;
                }
                default: {
                    const unsigned char* text = sqlite3_column_text(stmt, i);
                    row += "s:";
                    if (text) row += reinterpret_cast<const char*>(text);
                    break;
                }
            }
        }
        rows.push_back(std::move(row));
    }
    bool interrupted = (rc == SQLITE_INTERRUPT);
    bool ok = (rc == SQLITE_DONE);
    std::string msg = ok ? "" : sqlite3_errmsg(db);
    sqlite3_finalize(stmt);
    sqlite3_close(db);
    if (interrupted) throw QueryTimeout("query timed out after " + std::to_string(timeout_s) + "s");
    if (!ok) throw DomainError("query failed: " + msg);
    return rows;
}

}  // namespace exec

inline bool gold_has_order_by(const std::string& gold) {
    try {
        auto stmt = sql::parse_select(gold);
        return !stmt->core.order_by.empty();
    } catch (const Error&) {
        return to_lower(gold).find("order by") != std::string::npos;
    }
}

// Compares execution results on one database. Row order is significant only
// when `ordered` is set (callers derive it from the gold ORDER BY). A failing
// or timed-out prediction scores false; a failing gold query is a dataset
// error and surfaces.
inline bool execution_match(const std::string& pred, const std::string& gold,
                            const std::string& db_path, bool ordered,
                            double timeout_s = 30.0, bool* timeout_flag = nullptr) {
    if (timeout_flag) *timeout_flag = false;
    std::vector<std::string> gold_rows;
    try {
        gold_rows = exec::run_query(db_path, gold, timeout_s);
    } catch (const IngestionError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(std::string("gold query failed: ") + e.what());
    }
    std::vector<std::string> pred_rows;
    try {
        pred_rows = exec::run_query(db_path, pred, timeout_s);
    } catch (const exec::QueryTimeout&) {
        if (timeout_flag) *timeout_flag = true;
        return false;
    } catch (const IngestionError&) {
        throw;
    } catch (const Error&) {
        return false;
    }
    if (!ordered) {
        std::sort(gold_rows.begin(), gold_rows.end());
        std::sort(pred_rows.begin(), pred_rows.end());
    }
    return gold_rows == pred_rows;
}

// TS: execution match across every database variant; absent when the schema
// has no variant directory.
inline std::optional<bool> test_suite_match(const std::string& pred, const std::string& gold,
                                            const std::vector<std::string>& db_variants,
                                            bool ordered, double timeout_s = 30.0) {
    if (db_variants.empty()) return std::nullopt;
    for (const auto& db : db_variants)
        if (!execution_match(pred, gold, db, ordered, timeout_s)) return false;
    return true;
}

// ---- difficulty ------------------------------------------------------------

enum class Difficulty { Easy, Medium, Hard, Extra };

inline std::string difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
        case Difficulty::Extra: return "extra";
    }
    return "extra";
}

// Component-count heuristic approximating the published Spider hardness
// rules, counted over the whole statement (set-op branches and subqueries
// included). Classifier version: rosesql-hardness-1.
//   comp1: clause count (where, group, order, limit), extra FROM items,
//          ORs and LIKEs
//   comp2: number of additional select cores (nesting + set operations)
//   others: >1 aggregate, >1 projection, >1 where conjunct, >1 group column
inline Difficulty classify_difficulty(const std::string& sql_text, bool* parse_failure = nullptr) {
    if (parse_failure) *parse_failure = false;
    sql::SelectPtr stmt;
    try {
        stmt = sql::parse_select(sql_text);
    } catch (const Error&) {
        if (parse_failure) *parse_failure = true;
        return Difficulty::Extra;
    }

    int comp1 = 0, cores = 0, agg_total = 0;
    bool multi_proj = false, multi_where = false, multi_group = false;

    // counts ORs/LIKEs/aggregates in an expression without descending into
    // subqueries (each subquery is its own core)
    auto count_expr = [&](const sql::ExprPtr& root, int& ors, int& likes, int& aggs) {
        std::vector<const sql::Expr*> stack;
        if (root) stack.push_back(root.get());
        while (!stack.empty()) {
            const sql::Expr* e = stack.back();
            stack.pop_back();
            if (e->kind == sql::ExprKind::Binary && e->op == "or") ++ors;
            if (e->kind == sql::ExprKind::Binary && e->op == "like") ++likes;
            if (e->kind == sql::ExprKind::Func &&
                (e->func == "count" || e->func == "sum" || e->func == "avg" ||
                 e->func == "min" || e->func == "max"))
                ++aggs;
            for (const auto& a : e->args) stack.push_back(a.get());
            for (const auto& a : e->in_list) stack.push_back(a.get());
        }
    };

    sql::walk_cores(*stmt, [&](const sql::SelectCore& core, int) {
        ++cores;
        if (core.where) ++comp1;
        if (!core.group_by.empty()) ++comp1;
        if (!core.order_by.empty()) ++comp1;
        if (core.limit) ++comp1;
        if (core.from.size() > 1) comp1 += static_cast<int>(core.from.size()) - 1;
        int ors = 0, likes = 0, aggs = 0;
        for (const auto& p : core.projections) count_expr(p, ors, likes, aggs);
        for (const auto& j : core.join_conds) count_expr(j, ors, likes, aggs);
        count_expr(core.where, ors, likes, aggs);
        count_expr(core.having, ors, likes, aggs);
        for (const auto& g : core.group_by) count_expr(g, ors, likes, aggs);
        for (const auto& o : core.order_by) count_expr(o.expr, ors, likes, aggs);
        comp1 += ors + likes;
        agg_total += aggs;
        if (core.projections.size() > 1) multi_proj = true;
        std::vector<sql::ExprPtr> conjuncts;
        canon::collect_conjuncts(core.where, conjuncts);
        if (conjuncts.size() > 1) multi_where = true;
        if (core.group_by.size() > 1) multi_group = true;
    });

    int comp2 = cores - 1;
    int others = (agg_total > 1 ? 1 : 0) + (multi_proj ? 1 : 0) + (multi_where ? 1 : 0) +
                 (multi_group ? 1 : 0);

    if (comp1 <= 1 && others == 0 && comp2 == 0) return Difficulty::Easy;
    if ((others <= 2 && comp1 <= 1 && comp2 == 0) || (comp1 <= 2 && others < 2 && comp2 == 0))
        return Difficulty::Medium;
    if ((others > 2 && comp1 <= 2 && comp2 == 0) ||
        (comp1 > 2 && comp1 <= 3 && others <= 2 && comp2 == 0) ||
        (comp1 <= 1 && others == 0 && comp2 <= 1))
        return Difficulty::Hard;
    return Difficulty::Extra;
}

constexpr const char* kDifficultyClassifierVersion = "rosesql-hardness-1";

// ---- scoring and reports -----------------------------------------------------

inline std::string turn_bucket(int turn_index) {
    return turn_index <= 4 ? std::to_string(turn_index) : std::string(">4");
}

struct TurnScore {
    std::string interaction_id;
    int turn_index = 1;
    bool em = false;
    bool ex = false;
    std::optional<bool> ts;
    Difficulty difficulty = Difficulty::Easy;
    std::string bucket = "1";  // 1,2,3,4,">4"
    bool excluded = false;     // gold failed to execute; not counted
};

struct MetricRates {
    double em = 0.0, ex = 0.0;
    std::optional<double> ts;
};

struct Efficiency {
    double avg_latency_s = 0.0;
    double throughput_qps = 0.0;
    double avg_input_tokens = 0.0;
    double avg_output_tokens = 0.0;
};

struct Report {
    MetricRates qm;
    MetricRates im;
    std::map<std::string, MetricRates> by_difficulty;
    std::map<std::string, std::size_t> difficulty_counts;
    std::map<std::string, MetricRates> by_turn;
    std::map<std::string, std::size_t> turn_counts;
    Efficiency efficiency;
    std::size_t total_questions = 0;
    std::size_t total_interactions = 0;
    std::size_t excluded_turns = 0;
};

namespace detail {

inline MetricRates rates_over(const std::vector<const TurnScore*>& turns) {
    MetricRates r;
    if (turns.empty()) return r;
    double n = static_cast<double>(turns.size());
    std::size_t ts_n = 0, ts_true = 0;
    for (const TurnScore* t : turns) {
        r.em += t->em ? 1.0 : 0.0;
        r.ex += t->ex ? 1.0 : 0.0;
        if (t->ts) {
            ++ts_n;
            if (*t->ts) ++ts_true;
        }
    }
    r.em /= n;
    r.ex /= n;
    if (ts_n > 0) r.ts = static_cast<double>(ts_true) / static_cast<double>(ts_n);
    return r;
}

}  // namespace detail

// QM: fraction of questions matching per metric. IM: fraction of
// interactions where every turn matches. IM <= QM by construction.
inline Report interaction_scores(const std::vector<std::vector<TurnScore>>& by_interaction) {
    Report rep;
    std::vector<const TurnScore*> all;
    std::size_t im_em = 0, im_ex = 0, im_ts_n = 0, im_ts_true = 0, counted_interactions = 0;

    for (const auto& turns : by_interaction) {
        std::vector<const TurnScore*> live;
        for (const auto& t : turns) {
            if (t.excluded) {
                ++rep.excluded_turns;
                continue;
            }
            live.push_back(&t);
            all.push_back(&t);
        }
        if (live.empty()) continue;
        ++counted_interactions;
        bool all_em = true, all_ex = true, all_ts = true, any_ts = false;
        for (const TurnScore* t : live) {
            all_em = all_em && t->em;
            all_ex = all_ex && t->ex;
            if (t->ts) {
                any_ts = true;
                all_ts = all_ts && *t->ts;
            }
        }
        if (all_em) ++im_em;
        if (all_ex) ++im_ex;
        if (any_ts) {
            ++im_ts_n;
            if (all_ts) ++im_ts_true;
        }
    }

    rep.total_questions = all.size();
    rep.total_interactions = counted_interactions;
    rep.qm = detail::rates_over(all);
    if (counted_interactions > 0) {
        rep.im.em = static_cast<double>(im_em) / static_cast<double>(counted_interactions);
        rep.im.ex = static_cast<double>(im_ex) / static_cast<double>(counted_interactions);
        if (im_ts_n > 0) rep.im.ts = static_cast<double>(im_ts_true) / static_cast<double>(im_ts_n);
    }

    std::map<std::string, std::vector<const TurnScore*>> by_diff, by_turn;
    for (const TurnScore* t : all) {
        by_diff[difficulty_name(t->difficulty)].push_back(t);
        by_turn[t->bucket].push_back(t);
    }
    for (const auto& [k, v] : by_diff) {
        rep.by_difficulty[k] = detail::rates_over(v);
        rep.difficulty_counts[k] = v.size();
    }
    for (const auto& [k, v] : by_turn) {
        rep.by_turn[k] = detail::rates_over(v);
        rep.turn_counts[k] = v.size();
    }
    return rep;
}

inline nlohmann::ordered_json report_to_json(const Report& r) {
    auto rates = [](const MetricRates& m) {
        nlohmann::ordered_json j{{"em", m.em}, {"ex", m.ex}};
        if (m.ts) j["ts"] = *m.ts;
        return j;
    };
    nlohmann::ordered_json j;
    j["qm"] = rates(r.qm);
    j["im"] = rates(r.im);
    j["total_questions"] = r.total_questions;
    j["total_interactions"] = r.total_interactions;
    j["excluded_turns"] = r.excluded_turns;
    j["difficulty_classifier"] = kDifficultyClassifierVersion;
    nlohmann::ordered_json diff;
    for (const auto& [k, v] : r.by_difficulty) {
        diff[k] = rates(v);
        diff[k]["count"] = r.difficulty_counts.at(k);
    }
    j["by_difficulty"] = diff;
    nlohmann::ordered_json turn;
    for (const auto& [k, v] : r.by_turn) {
        turn[k] = rates(v);
        turn[k]["count"] = r.turn_counts.at(k);
    }
    j["by_turn"] = turn;
    j["efficiency"] = {{"avg_latency_s", r.efficiency.avg_latency_s},
                       {"throughput_qps", r.efficiency.throughput_qps},
                       {"avg_input_tokens", r.efficiency.avg_input_tokens},
                       {"avg_output_tokens", r.efficiency.avg_output_tokens}};
    return j;
}

inline std::string report_to_text(const Report& r) {
    char buf[256];
    std::string out;
    auto line = [&](const std::string& label, const MetricRates& m, std::size_t count) {
        char ts[16];
        if (m.ts)
            std::snprintf(ts, sizeof(ts), "%6.2f", *m.ts * 100.0);
        else
            std::snprintf(ts, sizeof(ts), "    --");
        std::snprintf(buf, sizeof(buf), "%-12s  EM %6.2f  EX %6.2f  TS %s  (n=%zu)\n",
                      label.c_str(), m.em * 100.0, m.ex * 100.0, ts, count);
        out += buf;
    };
    out += "== question-level (QM) ==\n";
    line("overall", r.qm, r.total_questions);
    out += "== interaction-level (IM) ==\n";
    line("overall", r.im, r.total_interactions);
    out += "== by difficulty ==\n";
    for (const auto& [k, v] : r.by_difficulty) line(k, v, r.difficulty_counts.at(k));
    out += "== by turn ==\n";
    for (const auto& [k, v] : r.by_turn) line("turn " + k, v, r.turn_counts.at(k));
    std::snprintf(buf, sizeof(buf),
                  "== efficiency ==\navg latency %.3fs  throughput %.3f q/s  avg input tokens "
                  "%.1f  avg output tokens %.1f\n",
                  r.efficiency.avg_latency_s, r.efficiency.throughput_qps,
                  r.efficiency.avg_input_tokens, r.efficiency.avg_output_tokens);
    out += buf;
    if (r.excluded_turns > 0)
        out += "warning: " + std::to_string(r.excluded_turns) + " turns excluded (gold failed)\n";
    return out;
}

}  // namespace rosesql
