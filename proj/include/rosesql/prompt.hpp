#pragma once

// Prompt assembly for the hierarchical-reasoning inference call and the
// offline reasoning-construction call, plus structured output parsing.
// Templates live as versioned text files; golden tests freeze the layout.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rosesql/dataset.hpp"
#include "rosesql/llm.hpp"
#include "rosesql/retrieval.hpp"
#include "rosesql/rolestate.hpp"
#include "rosesql/schema.hpp"

namespace rosesql {

struct TemplateSet {
    std::string inference_system;
    std::string base_system;
    std::string inference_user;
    std::string construction_system;
    std::string construction_user;
    std::string rewrite_system;
    std::string rewrite_user;

    static TemplateSet load(const fs::path& dir) {
        auto read = [&](const char* name) {
            return normalize_newlines(read_text_file(dir / name));
        };
        TemplateSet t;
        t.inference_system = read("inference_system.txt");
        t.base_system = read("base_system.txt");
        t.inference_user = read("inference_user.txt");
        t.construction_system = read("construction_system.txt");
        t.construction_user = read("construction_user.txt");
        t.rewrite_system = read("rewrite_system.txt");
        t.rewrite_user = read("rewrite_user.txt");
        return t;
    }

    std::string content_hash() const {
        return hash_hex(inference_system + base_system + inference_user + construction_system +
                        construction_user + rewrite_system + rewrite_user);
    }
};

struct AblationFlags {
    bool rolestate_reasoning = true;
    bool rki = true;
    bool trajectories = true;
    bool ctx_anchor = true;

    bool operator==(const AblationFlags&) const = default;
};

struct PromptManifest {
    bool schema_present = false;
    bool rolestate_instructions = false;
    bool ctx_present = false;
    std::size_t trajectory_count = 0;
    std::size_t rki_size = 0;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    PromptManifest manifest;
    long token_estimate = 0;
};

struct ParsedOutput {
    std::vector<std::string> steps;
    std::string rolestate_block;  // inner text of <Roles>, empty when absent
    std::string sql;              // single line
    std::string raw;
    bool multiple_sql_warning = false;
};

namespace detail {

inline void replace_placeholder(std::string& text, const std::string& key,
                                const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
}

inline std::string render_rki(const RoleExemplarSet& rki) {
    std::string out = "[Role Knowledge]\nschema:\n" + rki.shared_schema_text;
    for (std::size_t i = 0; i < rki.exemplars.size(); ++i) {
        const RoleExemplar& e = rki.exemplars[i];
        out += "--- exemplar " + std::to_string(i + 1) + " ---\n";
        out += "question: " + e.question + "\n";
        out += "reasoning: " + e.reasoning + "\n";
        out += "Roles:\n" + render_rolestate(e.roles) + "\n";
        out += "SQL: " + e.sql + "\n";
    }
    return out;
}

// Quadruple order: anchor question, anchor reasoning, target question,
// target reasoning.
inline std::string render_trajectory(const Trajectory& t, std::size_t number) {
    std::string out = "--- trajectory " + std::to_string(number) + " ---\n";
    out += "anchor question: " + t.anchor_question + "\n";
    out += "anchor reasoning: " + t.anchor_reasoning + "\n";
    out += "target question: " + t.target_question + "\n";
    out += "target reasoning: " + t.target_reasoning + "\n";
    return out;
}

}  // namespace detail

inline PromptBundle assemble_inference_prompt(const Schema& schema, const Turn& q,
                                              const std::optional<ContextualAnchor>& ctx,
                                              const std::vector<Trajectory>& trajectories,
                                              const RoleExemplarSet& rki,
                                              const AblationFlags& flags,
                                              const TemplateSet& templates) {
    PromptBundle bundle;
    bundle.system_text =
        flags.rolestate_reasoning ? templates.inference_system : templates.base_system;
    bundle.manifest.rolestate_instructions = flags.rolestate_reasoning;

    // RKI exemplars first, then trajectories.
    std::string exemplars;
    if (flags.rki && !rki.exemplars.empty()) {
        exemplars += detail::render_rki(rki);
        bundle.manifest.rki_size = rki.exemplars.size();
    }
    if (flags.trajectories) {
        for (std::size_t i = 0; i < trajectories.size(); ++i)
            exemplars += detail::render_trajectory(trajectories[i], i + 1);
        bundle.manifest.trajectory_count = trajectories.size();
    }
    if (exemplars.empty()) exemplars = "None";

    std::string pre_question = "None";
    std::string pre_rser = "None";
    if (flags.ctx_anchor && ctx) {
        pre_question = ctx->anchor_question;
        pre_rser = ctx->anchor_reasoning.empty() ? "None" : ctx->anchor_reasoning;
        bundle.manifest.ctx_present = true;
    }

    std::string user = templates.inference_user;
    detail::replace_placeholder(user, "{exemplars}", exemplars);
    detail::replace_placeholder(user, "{pre_question}", pre_question);
    detail::replace_placeholder(user, "{pre_rser}", pre_rser);
    detail::replace_placeholder(user, "{question}", q.utterance);
    detail::replace_placeholder(user, "{database}", serialize_mschema(schema));
    bundle.user_text = user;
    bundle.manifest.schema_present = true;
    bundle.token_estimate = estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text);
    return bundle;
}

inline PromptBundle assemble_construction_prompt(const Schema& schema, const Turn& q,
                                                 const RoleState& roles,
                                                 const TemplateSet& templates) {
    if (!q.gold_sql)
        throw DomainError("construction prompt requires gold SQL for turn " +
                          std::to_string(q.index));
    PromptBundle bundle;
    bundle.system_text = templates.construction_system;
    std::string user = templates.construction_user;
    detail::replace_placeholder(user, "{question}", q.utterance);
    detail::replace_placeholder(user, "{database}", serialize_mschema(schema));
    detail::replace_placeholder(user, "{Roles}", render_rolestate(roles));
    detail::replace_placeholder(user, "{SQL}", *q.gold_sql);
    bundle.user_text = user;
    bundle.manifest.schema_present = true;
    bundle.manifest.rolestate_instructions = true;
    bundle.token_estimate = estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text);
    return bundle;
}

// Extracts <step> blocks, the <Roles> block, and the <SQL> block. Preamble
// text before the first tag (hidden reasoning) is ignored. The last <SQL>
// block wins when several appear; missing <SQL> is an extraction error.
inline ParsedOutput parse_output(const std::string& raw) {
    ParsedOutput out;
    out.raw = raw;

    std::size_t pos = 0;
    while ((pos = raw.find("<step>", pos)) != std::string::npos) {
        std::size_t close = raw.find("</step>", pos);
        if (close == std::string::npos) break;
        out.steps.push_back(trim(raw.substr(pos + 6, close - pos - 6)));
        pos = close + 7;
    }

    std::size_t roles_open = raw.find("<Roles>");
    if (roles_open != std::string::npos) {
        std::size_t roles_close = raw.find("</Roles>", roles_open);
        if (roles_close != std::string::npos)
            out.rolestate_block = trim(raw.substr(roles_open + 7, roles_close - roles_open - 7));
    }

    std::size_t sql_open = std::string::npos;
    std::size_t search = 0;
    std::size_t count = 0;
    while ((search = raw.find("<SQL>", search)) != std::string::npos) {
        sql_open = search;
        ++count;
        search += 5;
    }
    if (sql_open == std::string::npos) throw FormatError("missing <SQL> block in model output");
    out.multiple_sql_warning = count > 1;
    std::size_t sql_close = raw.find("</SQL>", sql_open);
    std::string sql = (sql_close == std::string::npos)
                          ? raw.substr(sql_open + 5)
                          : raw.substr(sql_open + 5, sql_close - sql_open - 5);
    out.sql = collapse_whitespace(sql);  // single-line rule
    if (out.sql.empty()) throw FormatError("empty <SQL> block in model output");
    return out;
}

}  // namespace rosesql
