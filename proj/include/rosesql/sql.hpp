#pragma once

// Recursive-descent parser for the SELECT dialect used by the Spider-family
// datasets: single SELECT statements with joins, subqueries, set operations,
// IN/NOT IN, BETWEEN, LIKE, aggregates, GROUP BY / HAVING, ORDER BY, LIMIT.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rosesql/util.hpp"

namespace rosesql::sql {

enum class SetOp { Union, UnionAll, Except, Intersect };

struct SelectStmt;
using SelectPtr = std::shared_ptr<SelectStmt>;

enum class ExprKind {
    Star,       // bare *
    Column,     // [table.]column or table.*
    Number,
    String,
    Null,
    Func,       // name(args), possibly DISTINCT
    Binary,     // op over args[0], args[1]; also AND/OR/LIKE/arithmetic
    Not,        // NOT args[0]
    In,         // args[0] [NOT] IN (subquery | in_list)
    Between,    // args[0] [NOT] BETWEEN args[1] AND args[2]
    IsNull,     // args[0] IS [NOT] NULL
    Subquery,   // scalar subquery operand
};

struct Expr {
    ExprKind kind;
    std::string table;    // Column: qualifier as written (may be alias, may be empty)
    std::string column;   // Column: name, or "*" for table.*
    std::string literal;  // Number/String: source text (string without quotes)
    std::string func;     // Func: lowercased function name
    std::string op;       // Binary: lowercased operator ("=", "<", "and", "like", "+", ...)
    bool distinct = false;
    bool negated = false;  // In / Between / IsNull / Binary-like
    std::vector<std::shared_ptr<Expr>> args;
    std::vector<std::shared_ptr<Expr>> in_list;
    SelectPtr subquery;
};
using ExprPtr = std::shared_ptr<Expr>;

struct TableItem {
    std::string table;  // empty when subquery
    std::string alias;  // as written, possibly empty
    SelectPtr subquery;
};

struct OrderItem {
    ExprPtr expr;
    bool desc = false;
};

struct SelectCore {
    bool distinct = false;
    std::vector<ExprPtr> projections;
    std::vector<TableItem> from;
    std::vector<ExprPtr> join_conds;  // ON expressions, in join order
    ExprPtr where;                    // may be null
    std::vector<ExprPtr> group_by;
    ExprPtr having;                   // may be null
    std::vector<OrderItem> order_by;
    std::optional<long long> limit;
};

struct SelectStmt {
    SelectCore core;
    std::vector<std::pair<SetOp, SelectPtr>> compounds;
};

// ---- lexer -------------------------------------------------------------

enum class TokKind { Ident, Number, String, Op, End };

struct Token {
    TokKind kind;
    std::string text;  // idents kept as written; ops verbatim
    std::size_t offset = 0;

    bool is_kw(std::string_view kw) const { return kind == TokKind::Ident && iequals(text, kw); }
};

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto push = [&](TokKind k, std::string t, std::size_t off) {
        out.push_back(Token{k, std::move(t), off});
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                ++i;
            push(TokKind::Ident, std::string(src.substr(start, i - start)), start);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            while (i < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.'))
                ++i;
            push(TokKind::Number, std::string(src.substr(start, i - start)), start);
        } else if (c == '\'' || c == '"') {
            char quote = c;
            ++i;
            std::string value;
            while (i < src.size() && src[i] != quote) {
                if (src[i] == '\\' && i + 1 < src.size()) ++i;
                value += src[i++];
            }
            if (i >= src.size()) throw ParseError("unterminated string literal", start);
            ++i;
            push(TokKind::String, std::move(value), start);
        } else if (c == '`' || c == '[') {
            char close = (c == '`') ? '`' : ']';
            ++i;
            std::string value;
            while (i < src.size() && src[i] != close) value += src[i++];
            if (i >= src.size()) throw ParseError("unterminated quoted identifier", start);
            ++i;
            push(TokKind::Ident, std::move(value), start);
        } else if (c == '<' || c == '>' || c == '!' || c == '=') {
            ++i;
            if (i < src.size() && (src[i] == '=' || (c == '<' && src[i] == '>'))) ++i;
            push(TokKind::Op, std::string(src.substr(start, i - start)), start);
        } else if (std::string_view("(),.*+-/;").find(c) != std::string_view::npos) {
            ++i;
            push(TokKind::Op, std::string(1, c), start);
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", start);
        }
    }
    out.push_back(Token{TokKind::End, "", src.size()});
    return out;
}

// ---- parser ------------------------------------------------------------

class Parser {
public:
    static SelectPtr parse(std::string_view src) {
        Parser p(src);
        SelectPtr stmt = p.parse_statement();
        if (p.cur().is_kw("") || p.cur().kind != TokKind::End) {
            if (p.cur().kind == TokKind::Op && p.cur().text == ";") p.advance();
            if (p.cur().kind != TokKind::End)
                throw ParseError("trailing tokens after statement", p.cur().offset);
        }
        return stmt;
    }

private:
    explicit Parser(std::string_view src) : tokens_(lex(src)) {}

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token& cur() const { return tokens_[pos_]; }
    const Token& peek(std::size_t n = 1) const {
        return tokens_[std::min(pos_ + n, tokens_.size() - 1)];
    }
    void advance() { if (pos_ + 1 < tokens_.size()) ++pos_; }

    bool accept_kw(std::string_view kw) {
        if (cur().is_kw(kw)) { advance(); return true; }
        return false;
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw))
            throw ParseError("expected '" + std::string(kw) + "', got '" + cur().text + "'",
                             cur().offset);
    }
    bool accept_op(std::string_view op) {
        if (cur().kind == TokKind::Op && cur().text == op) { advance(); return true; }
        return false;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op))
            throw ParseError("expected '" + std::string(op) + "', got '" + cur().text + "'",
                             cur().offset);
    }
    std::string expect_ident() {
        if (cur().kind != TokKind::Ident)
            throw ParseError("expected identifier, got '" + cur().text + "'", cur().offset);
        std::string s = cur().text;
        advance();
        return s;
    }

    static bool is_keyword(std::string_view s) {
        static const char* kws[] = {
            "select", "from",  "where",  "group",  "by",    "having", "order",
            "limit",  "union", "except", "intersect", "join", "on",   "as",
            "and",    "or",    "not",    "in",     "like",  "between", "is",
            "null",   "distinct", "asc", "desc",   "inner", "left",  "right",
            "full",   "outer", "all",    "exists", "cross"};
        for (const char* k : kws)
            if (iequals(s, k)) return true;
        return false;
    }

    SelectPtr parse_statement() {
        auto stmt = std::make_shared<SelectStmt>();
        stmt->core = parse_core();
        while (true) {
            SetOp op;
            if (accept_kw("union")) {
                op = accept_kw("all") ? SetOp::UnionAll : SetOp::Union;
            } else if (accept_kw("except")) {
                op = SetOp::Except;
            } else if (accept_kw("intersect")) {
                op = SetOp::Intersect;
            } else {
                break;
            }
            auto rhs = std::make_shared<SelectStmt>();
            rhs->core = parse_core();
            stmt->compounds.emplace_back(op, std::move(rhs));
        }
        return stmt;
    }

    SelectCore parse_core() {
        expect_kw("select");
        SelectCore core;
        core.distinct = accept_kw("distinct");
        core.projections.push_back(parse_expr());
        while (accept_op(",")) core.projections.push_back(parse_expr());

        if (accept_kw("from")) {
            parse_table_item(core);
            while (true) {
                if (accept_op(",")) {
                    parse_table_item(core);
                } else if (cur().is_kw("join") || cur().is_kw("inner") || cur().is_kw("left") ||
                           cur().is_kw("right") || cur().is_kw("full") || cur().is_kw("cross")) {
                    accept_kw("inner") || accept_kw("left") || accept_kw("right") ||
                        accept_kw("full") || accept_kw("cross");
                    accept_kw("outer");
                    expect_kw("join");
                    parse_table_item(core);
                    if (accept_kw("on")) core.join_conds.push_back(parse_expr());
                } else {
                    break;
                }
            }
        }
        if (accept_kw("where")) core.where = parse_expr();
        if (accept_kw("group")) {
            expect_kw("by");
            core.group_by.push_back(parse_expr());
            while (accept_op(",")) core.group_by.push_back(parse_expr());
        }
        if (accept_kw("having")) core.having = parse_expr();
        if (accept_kw("order")) {
            expect_kw("by");
            do {
                OrderItem item;
                item.expr = parse_expr();
                if (accept_kw("desc")) item.desc = true;
                else accept_kw("asc");
                core.order_by.push_back(std::move(item));
            } while (accept_op(","));
        }
        if (accept_kw("limit")) {
            if (cur().kind != TokKind::Number)
                throw ParseError("expected number after LIMIT", cur().offset);
            core.limit = std::stoll(cur().text);
            advance();
        }
        return core;
    }

    void parse_table_item(SelectCore& core) {
        TableItem item;
        if (accept_op("(")) {
            item.subquery = parse_statement();
            expect_op(")");
        } else {
            item.table = expect_ident();
        }
        if (accept_kw("as")) {
            item.alias = expect_ident();
        } else if (cur().kind == TokKind::Ident && !is_keyword(cur().text)) {
            item.alias = expect_ident();
        }
        core.from.push_back(std::move(item));
    }

    // Precedence: OR < AND < NOT < comparison/membership < add < mul < primary.
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (accept_kw("or")) lhs = binary("or", lhs, parse_and());
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_not();
        while (accept_kw("and")) lhs = binary("and", lhs, parse_not());
        return lhs;
    }

    ExprPtr parse_not() {
        if (accept_kw("not")) {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Not;
            e->args.push_back(parse_not());
            return e;
        }
        return parse_comparison();
    }

    ExprPtr parse_comparison() {
        ExprPtr lhs = parse_additive();
        bool negated = accept_kw("not");
        if (accept_kw("in")) return parse_in(lhs, negated);
        if (accept_kw("like")) {
            auto e = binary("like", lhs, parse_additive());
            e->negated = negated;
            return e;
        }
        if (accept_kw("between")) {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Between;
            e->negated = negated;
            e->args.push_back(lhs);
            e->args.push_back(parse_additive());
            expect_kw("and");
            e->args.push_back(parse_additive());
            return e;
        }
        if (negated)
            throw ParseError("expected IN, LIKE, or BETWEEN after NOT", cur().offset);
        if (accept_kw("is")) {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::IsNull;
            e->negated = accept_kw("not");
            expect_kw("null");
            e->args.push_back(lhs);
            return e;
        }
        if (cur().kind == TokKind::Op) {
            std::string op = cur().text;
            if (op == "=" || op == "==" || op == "!=" || op == "<>" || op == "<" ||
                op == ">" || op == "<=" || op == ">=") {
                advance();
                if (op == "==") op = "=";
                if (op == "<>") op = "!=";
                return binary(op, lhs, parse_additive());
            }
        }
        return lhs;
    }

    ExprPtr parse_in(ExprPtr lhs, bool negated) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::In;
        e->negated = negated;
        e->args.push_back(lhs);
        expect_op("(");
        if (cur().is_kw("select")) {
            e->subquery = parse_statement();
        } else {
            e->in_list.push_back(parse_additive());
            while (accept_op(",")) e->in_list.push_back(parse_additive());
        }
        expect_op(")");
        return e;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        while (cur().kind == TokKind::Op && (cur().text == "+" || cur().text == "-")) {
            std::string op = cur().text;
            advance();
            lhs = binary(op, lhs, parse_multiplicative());
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_primary();
        while (cur().kind == TokKind::Op && (cur().text == "/" ||
               (cur().text == "*" && is_mul_context()))) {
            std::string op = cur().text;
            advance();
            lhs = binary(op, lhs, parse_primary());
        }
        return lhs;
    }

    // '*' after a value expression is multiplication only when followed by
    // the start of another operand; otherwise it's a projection separator.
    bool is_mul_context() const {
        const Token& next = peek();
        if (next.kind == TokKind::Number || next.kind == TokKind::String) return true;
        if (next.kind == TokKind::Op && next.text == "(") return true;
        return next.kind == TokKind::Ident && !is_keyword(next.text);
    }

    ExprPtr parse_primary() {
        auto e = std::make_shared<Expr>();
        if (accept_op("(")) {
            if (cur().is_kw("select")) {
                e->kind = ExprKind::Subquery;
                e->subquery = parse_statement();
                expect_op(")");
                return e;
            }
            ExprPtr inner = parse_expr();
            expect_op(")");
            return inner;
        }
        if (accept_op("*")) {
            e->kind = ExprKind::Star;
            return e;
        }
        if (cur().kind == TokKind::Number) {
            e->kind = ExprKind::Number;
            e->literal = cur().text;
            advance();
            return e;
        }
        if (cur().kind == TokKind::String) {
            e->kind = ExprKind::String;
            e->literal = cur().text;
            advance();
            return e;
        }
        if (cur().is_kw("null")) {
            advance();
            e->kind = ExprKind::Null;
            return e;
        }
        if (cur().kind == TokKind::Ident) {
            std::string first = cur().text;
            // function call
            if (peek().kind == TokKind::Op && peek().text == "(" && !is_keyword(first)) {
                advance();
                advance();
                e->kind = ExprKind::Func;
                e->func = to_lower(first);
                e->distinct = accept_kw("distinct");
                if (!accept_op(")")) {
                    if (accept_op("*")) {
                        auto star = std::make_shared<Expr>();
                        star->kind = ExprKind::Star;
                        e->args.push_back(star);
                    } else {
                        e->args.push_back(parse_expr());
                        while (accept_op(",")) e->args.push_back(parse_expr());
                    }
                    expect_op(")");
                }
                return e;
            }
            advance();
            e->kind = ExprKind::Column;
            if (accept_op(".")) {
                e->table = first;
                if (accept_op("*")) {
                    e->column = "*";
                } else {
                    e->column = expect_ident();
                }
            } else {
                e->column = first;
            }
            return e;
        }
        throw ParseError("unexpected token '" + cur().text + "'", cur().offset);
    }

    static ExprPtr binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Binary;
        e->op = std::move(op);
        e->args.push_back(std::move(lhs));
        e->args.push_back(std::move(rhs));
        return e;
    }
};

inline SelectPtr parse_select(std::string_view src) { return Parser::parse(src); }

// Visits every select core in the statement, including set-op branches and
// subqueries nested anywhere in expressions or FROM items.
template <typename Fn>
void walk_cores(const SelectStmt& stmt, Fn&& fn, int depth = 0) {
    auto walk_expr = [&](auto&& self, const ExprPtr& e) -> void {
        if (!e) return;
        if (e->subquery) walk_cores(*e->subquery, fn, depth + 1);
        for (const auto& a : e->args) self(self, a);
        for (const auto& a : e->in_list) self(self, a);
    };
    const SelectCore& c = stmt.core;
    fn(c, depth);
    for (const auto& p : c.projections) walk_expr(walk_expr, p);
    for (const auto& t : c.from)
        if (t.subquery) walk_cores(*t.subquery, fn, depth + 1);
    for (const auto& j : c.join_conds) walk_expr(walk_expr, j);
    walk_expr(walk_expr, c.where);
    for (const auto& g : c.group_by) walk_expr(walk_expr, g);
    walk_expr(walk_expr, c.having);
    for (const auto& o : c.order_by) walk_expr(walk_expr, o.expr);
    for (const auto& [op, rhs] : stmt.compounds) walk_cores(*rhs, fn, depth + 1);
}

}  // namespace rosesql::sql
