#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "rosesql/schema.hpp"
#include "rosesql/sql.hpp"
#include "rosesql/util.hpp"

namespace rosesql {

// Fixed role order for the 10-bit digitization.
inline const std::array<std::string, 10>& role_names() {
    static const std::array<std::string, 10> names = {
        "selected", "join", "condition", "order", "group",
        "union",    "except", "intersect", "in",  "nin"};
    return names;
}

constexpr std::size_t kElementRoles = 5;  // roles carrying schema elements

struct RoleVector {
    std::array<int, 10> bits{};

    bool operator==(const RoleVector&) const = default;

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(bits[i]);
        }
        return s + ")";
    }
};

inline bool is_isomorphic(const RoleVector& a, const RoleVector& b) { return a == b; }

struct RoleState {
    RoleVector vector;
    // Element roles (selected..group): lists of `table.column` / `table` refs.
    std::map<std::string, std::vector<std::string>> assignments;
    // Set-operation / membership roles (union..nin): Exist (true) or None.
    std::map<std::string, bool> markers;
    std::string source_sql;
    bool has_unlinked = false;

    void recompute_vector() {
        for (std::size_t i = 0; i < 10; ++i) {
            const std::string& r = role_names()[i];
            if (i < kElementRoles) {
                auto it = assignments.find(r);
                vector.bits[i] = (it != assignments.end() && !it->second.empty()) ? 1 : 0;
            } else {
                auto it = markers.find(r);
                vector.bits[i] = (it != markers.end() && it->second) ? 1 : 0;
            }
        }
    }
};

namespace detail {

inline void add_unique(std::vector<std::string>& v, const std::string& s) {
    for (const auto& e : v)
        if (e == s) return;
    v.push_back(s);
}

// Per-core name scope: alias or table name (lowercased) -> base table name
// in schema casing.
struct Scope {
    std::map<std::string, std::string> names;
    std::vector<std::string> base_tables;  // in FROM order
    const Schema* schema = nullptr;
    const Scope* parent = nullptr;

    std::string resolve_table(const std::string& qualifier) const {
        auto it = names.find(to_lower(qualifier));
        if (it != names.end()) return it->second;
        if (parent) return parent->resolve_table(qualifier);
        // a bare schema table name used without being in FROM
        if (const TableDef* t = schema->find_table(qualifier)) return t->name;
        throw LinkingError("unknown table or alias '" + qualifier + "'");
    }

    // Resolves an unqualified column against the FROM scope, falling back to
    // a schema-wide unique owner.
    std::string resolve_column_owner(const std::string& column) const {
        for (const auto& t : base_tables)
            if (schema->find_column(t, column)) return t;
        if (parent) {
            try {
                return parent->resolve_column_owner(column);
            } catch (const LinkingError&) {}
        }
        if (const TableDef* t = schema->table_of_column(column)) return t->name;
        throw LinkingError("unknown column '" + column + "'");
    }
};

class RoleExtractor {
public:
    RoleExtractor(const Schema& schema) : schema_(schema) {
        for (std::size_t i = 0; i < kElementRoles; ++i)
            state_.assignments[role_names()[i]] = {};
        for (std::size_t i = kElementRoles; i < 10; ++i)
            state_.markers[role_names()[i]] = false;
    }

    RoleState run(const sql::SelectStmt& stmt) {
        visit_stmt(stmt, nullptr);
        state_.recompute_vector();
        return std::move(state_);
    }

private:
    const Schema& schema_;
    RoleState state_;

    void add(const std::string& role, const std::string& element) {
        add_unique(state_.assignments[role], element);
    }

    void visit_stmt(const sql::SelectStmt& stmt, const Scope* parent) {
        visit_core(stmt.core, parent);
        for (const auto& [op, rhs] : stmt.compounds) {
            switch (op) {
                case sql::SetOp::Union:
                case sql::SetOp::UnionAll: state_.markers["union"] = true; break;
                case sql::SetOp::Except: state_.markers["except"] = true; break;
                case sql::SetOp::Intersect: state_.markers["intersect"] = true; break;
            }
            visit_stmt(*rhs, parent);
        }
    }

    void visit_core(const sql::SelectCore& core, const Scope* parent) {
        Scope scope;
        scope.schema = &schema_;
        scope.parent = parent;
        for (const auto& item : core.from) {
            if (item.subquery) continue;  // derived tables resolved by their own scope
            const TableDef* t = schema_.find_table(item.table);
            if (!t) throw LinkingError("unknown table '" + item.table + "'");
            scope.names[to_lower(t->name)] = t->name;
            if (!item.alias.empty()) scope.names[to_lower(item.alias)] = t->name;
            scope.base_tables.push_back(t->name);
        }

        for (const auto& p : core.projections) collect_projection(p, scope);

        // join fires whenever more than one FROM item exists (self-joins
        // included); assignments prefer the ON-condition columns.
        if (core.from.size() > 1) {
            bool any = false;
            for (const auto& cond : core.join_conds) {
                for (const auto& el : column_refs(cond, scope)) {
                    add("join", el);
                    any = true;
                }
            }
            if (!any)
                for (const auto& t : scope.base_tables) add("join", t);
        }

        if (core.where) collect_condition(core.where, scope);
        if (core.having) collect_condition(core.having, scope);
        for (const auto& g : core.group_by)
            for (const auto& el : column_refs(g, scope)) add("group", el);
        for (const auto& o : core.order_by)
            for (const auto& el : column_refs(o.expr, scope)) add("order", el);

        // nested statements in FROM and expressions
        for (const auto& item : core.from)
            if (item.subquery) visit_stmt(*item.subquery, &scope);
        for (const auto& p : core.projections) visit_subqueries(p, scope);
        for (const auto& j : core.join_conds) visit_subqueries(j, scope);
        visit_subqueries(core.where, scope);
        visit_subqueries(core.having, scope);
        for (const auto& o : core.order_by) visit_subqueries(o.expr, scope);
    }

    void collect_projection(const sql::ExprPtr& e, const Scope& scope) {
        if (!e) return;
        using K = sql::ExprKind;
        if (e->kind == K::Star) {
            for (const auto& t : scope.base_tables) add("selected", t + ".*");
            return;
        }
        if (e->kind == K::Column && e->column == "*") {
            add("selected", scope.resolve_table(e->table) + ".*");
            return;
        }
        if (e->kind == K::Func && e->func == "count" && !e->args.empty() &&
            e->args[0]->kind == K::Star) {
            // COUNT(*) is recorded as table.count(*); multi-table counts
            // attach to the first FROM table.
            if (!scope.base_tables.empty())
                add("selected", scope.base_tables.front() + ".count(*)");
            return;
        }
        for (const auto& el : column_refs(e, scope)) add("selected", el);
    }

    void collect_condition(const sql::ExprPtr& e, const Scope& scope) {
        if (!e) return;
        for (const auto& el : column_refs(e, scope)) add("condition", el);
        mark_membership(e);
    }

    void mark_membership(const sql::ExprPtr& e) {
        if (!e) return;
        if (e->kind == sql::ExprKind::In)
            state_.markers[e->negated ? "nin" : "in"] = true;
        if (e->kind == sql::ExprKind::Not && !e->args.empty() &&
            e->args[0]->kind == sql::ExprKind::In)
            state_.markers["nin"] = true;
        for (const auto& a : e->args) mark_membership(a);
    }

    // Column references in an expression, not descending into subqueries.
    std::vector<std::string> column_refs(const sql::ExprPtr& e, const Scope& scope) {
        std::vector<std::string> out;
        collect_refs(e, scope, out);
        return out;
    }

    void collect_refs(const sql::ExprPtr& e, const Scope& scope, std::vector<std::string>& out) {
        if (!e) return;
        if (e->kind == sql::ExprKind::Func && e->func == "count" && !e->args.empty() &&
            e->args[0]->kind == sql::ExprKind::Star) {
            // count(*) participates as table.count(*) so clauses like
            // HAVING count(*) or ORDER BY count(*) carry an assignment
            if (!scope.base_tables.empty())
                add_unique(out, scope.base_tables.front() + ".count(*)");
            return;
        }
        if (e->kind == sql::ExprKind::Column) {
            if (e->column == "*") {
                add_unique(out, scope.resolve_table(e->table) + ".*");
                return;
            }
            std::string owner = e->table.empty() ? scope.resolve_column_owner(e->column)
                                                 : scope.resolve_table(e->table);
            const ColumnDef* c = schema_.find_column(owner, e->column);
            if (!c) throw LinkingError("unknown column '" + owner + "." + e->column + "'");
            add_unique(out, owner + "." + c->name);
            return;
        }
        for (const auto& a : e->args) collect_refs(a, scope, out);
        for (const auto& a : e->in_list) collect_refs(a, scope, out);
        // subqueries handled by their own core visit
    }

    void visit_subqueries(const sql::ExprPtr& e, const Scope& scope) {
        if (!e) return;
        if (e->subquery) visit_stmt(*e->subquery, &scope);
        for (const auto& a : e->args) visit_subqueries(a, scope);
        for (const auto& a : e->in_list) visit_subqueries(a, scope);
    }
};

}  // namespace detail

// Parses one SELECT statement and assigns schema elements to roles. The
// vector reflects the global statement structure: roles in nested queries
// propagate upward.
inline RoleState extract_rolestate(const std::string& sql_text, const Schema& schema) {
    sql::SelectPtr stmt = sql::parse_select(sql_text);
    detail::RoleExtractor ex(schema);
    RoleState rs = ex.run(*stmt);
    rs.source_sql = collapse_whitespace(sql_text);
    return rs;
}

inline std::string render_rolestate(const RoleState& rs) {
    std::string out;
    for (std::size_t i = 0; i < 10; ++i) {
        const std::string& r = role_names()[i];
        out += r + ": ";
        if (i < kElementRoles) {
            auto it = rs.assignments.find(r);
            if (it == rs.assignments.end() || it->second.empty()) out += "None";
            else out += join(it->second, ", ");
        } else {
            auto it = rs.markers.find(r);
            out += (it != rs.markers.end() && it->second) ? "Exist" : "None";
        }
        if (i + 1 < 10) out += "\n";
    }
    return out;
}

// Parses a model-emitted `<Roles>...</Roles>` block. Unknown elements are
// kept verbatim with has_unlinked set rather than rejected.
inline RoleState parse_rolestate_block(const std::string& text, const Schema& schema) {
    std::size_t open = text.find("<Roles>");
    if (open == std::string::npos) throw FormatError("missing <Roles> block");
    if (text.find("<Roles>", open + 1) != std::string::npos)
        throw FormatError("duplicated <Roles> block");
    std::size_t close = text.find("</Roles>", open);
    if (close == std::string::npos) throw FormatError("unterminated <Roles> block");
    std::string body = trim(text.substr(open + 7, close - open - 7));
    if (body.empty()) throw FormatError("empty <Roles> block");

    RoleState rs;
    for (std::size_t i = 0; i < kElementRoles; ++i) rs.assignments[role_names()[i]] = {};
    for (std::size_t i = kElementRoles; i < 10; ++i) rs.markers[role_names()[i]] = false;

    for (const auto& raw_line : split(body, '\n')) {
        std::string line = trim(raw_line);
        if (line.empty()) continue;
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string role = to_lower(trim(line.substr(0, colon)));
        std::string value = trim(line.substr(colon + 1));
        std::size_t role_idx = 10;
        for (std::size_t i = 0; i < 10; ++i)
            if (role_names()[i] == role) { role_idx = i; break; }
        if (role_idx == 10) continue;  // unknown role line, skip

        if (role_idx >= kElementRoles) {
            rs.markers[role] = iequals(value, "exist") ||
                               (!iequals(value, "none") && !value.empty());
            continue;
        }
        if (iequals(value, "none") || value.empty()) continue;
        for (const auto& piece : split(value, ',')) {
            std::string el = trim(piece);
            if (el.empty()) continue;
            // link: restore schema casing; keep pseudo-columns `*` / count(*)
            std::size_t dot = el.find('.');
            std::string linked = el;
            bool ok = false;
            if (dot == std::string::npos) {
                if (const TableDef* t = schema.find_table(el)) { linked = t->name; ok = true; }
            } else {
                std::string tpart = el.substr(0, dot);
                std::string cpart = el.substr(dot + 1);
                if (const TableDef* t = schema.find_table(tpart)) {
                    if (cpart == "*" || iequals(cpart, "count(*)")) {
                        linked = t->name + "." + cpart;
                        ok = true;
                    } else if (const ColumnDef* c = schema.find_column(t->name, cpart)) {
                        linked = t->name + "." + c->name;
                        ok = true;
                    }
                }
            }
            if (!ok) rs.has_unlinked = true;
            detail::add_unique(rs.assignments[role], linked);
        }
    }
    rs.recompute_vector();
    return rs;
}

// ---- cache serialization ----------------------------------------------

inline nlohmann::ordered_json rolestate_to_json(const RoleState& rs) {
    nlohmann::ordered_json j;
    j["vector"] = rs.vector.bits;
    nlohmann::ordered_json a;
    for (std::size_t i = 0; i < kElementRoles; ++i) {
        const std::string& r = role_names()[i];
        auto it = rs.assignments.find(r);
        a[r] = (it != rs.assignments.end()) ? it->second : std::vector<std::string>{};
    }
    j["assignments"] = a;
    nlohmann::ordered_json m;
    for (std::size_t i = kElementRoles; i < 10; ++i) {
        const std::string& r = role_names()[i];
        auto it = rs.markers.find(r);
        m[r] = (it != rs.markers.end() && it->second);
    }
    j["markers"] = m;
    j["source_sql"] = rs.source_sql;
    return j;
}

inline RoleState rolestate_from_json(const nlohmann::ordered_json& j) {
    RoleState rs;
    for (std::size_t i = 0; i < 10; ++i)
        rs.vector.bits[i] = j.at("vector")[i].get<int>();
    for (auto& [k, v] : j.at("assignments").items())
        rs.assignments[k] = v.get<std::vector<std::string>>();
    for (auto& [k, v] : j.at("markers").items()) rs.markers[k] = v.get<bool>();
    rs.source_sql = j.value("source_sql", "");
    return rs;
}

}  // namespace rosesql
