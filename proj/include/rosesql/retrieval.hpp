#pragma once

// Evolutionary trajectory retrieval: dual-stage candidate filtering
// (schema scale + dependency footprint band), semantic best-turn location,
// Role-State isomorphism verification, and RKI exemplar selection.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rosesql/dataset.hpp"
#include "rosesql/gda.hpp"
#include "rosesql/rolestate.hpp"
#include "rosesql/schema.hpp"

namespace rosesql {

// Scores two texts in [-1, 1]. The default offline implementation is
// term-frequency cosine over lowercased word tokens; an embedding-endpoint
// implementation is drop-in.
class SimilarityBackend {
public:
    virtual ~SimilarityBackend() = default;
    virtual double score(const std::string& a, const std::string& b) = 0;
};

class TfCosineSimilarity : public SimilarityBackend {
public:
    double score(const std::string& a, const std::string& b) override {
        auto ta = term_freqs(a);
        auto tb = term_freqs(b);
        if (ta.empty() || tb.empty()) return 0.0;
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (const auto& [w, f] : ta) {
            na += f * f;
            auto it = tb.find(w);
            if (it != tb.end()) dot += f * it->second;
        }
        for (const auto& [w, f] : tb) nb += f * f;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    }

private:
    static std::map<std::string, double> term_freqs(const std::string& text) {
        std::map<std::string, double> freqs;
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) { freqs[cur] += 1.0; cur.clear(); }
        };
        for (char c : text) {
            if (std::isalnum(static_cast<unsigned char>(c)))
                cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            else
                flush();
        }
        flush();
        return freqs;
    }
};

struct TurnAnalysis {
    RoleState rolestate;
    DependencyProfile profile;
    std::string reasoning;  // hierarchical reasoning trace R
};

struct IndexRecord {
    std::string interaction_id;
    std::string db_id;
    SchemaScale scale;
    std::vector<Turn> turns;
    std::vector<TurnAnalysis> analyses;  // one per turn
};

struct TrainingIndex {
    std::vector<IndexRecord> records;

    const IndexRecord* find(const std::string& interaction_id) const {
        for (const auto& r : records)
            if (r.interaction_id == interaction_id) return &r;
        return nullptr;
    }
};

struct Trajectory {
    std::string anchor_question;
    std::string anchor_reasoning;
    std::string target_question;
    std::string target_reasoning;
    std::string interaction_id;
    int target_index = 0;   // idx
    int anchor_index = 0;   // idx_dep < idx
    double similarity_score = 0.0;
};

struct ContextualAnchor {
    int anchor_turn_index = 0;  // i_dep, < current turn index
    std::string anchor_question;
    std::string anchor_reasoning;
    RoleState anchor_rolestate;
};

struct RoleExemplar {
    std::string question;
    std::string reasoning;
    RoleState roles;
    std::string sql;
    std::string db_id;
};

struct RoleExemplarSet {
    std::vector<RoleExemplar> exemplars;
    std::map<std::string, int> role_coverage;
    std::string shared_schema_text;  // single M-schema reused across the set
    bool incomplete_pool = false;    // some role could not reach per_role coverage
};

struct FilterConfig {
    double scale_tolerance = 0.5;  // rho
    double tau1 = 0.05;            // aggregate-GDS band edges
    double tau2 = 0.2;
};

inline TrainingIndex build_index(
    const Corpus& corpus,
    const std::map<std::string, std::vector<TurnAnalysis>>& analyses) {
    TrainingIndex index;
    for (const auto& it : corpus.interactions) {
        auto found = analyses.find(it.interaction_id);
        if (found == analyses.end() || found->second.size() != it.turns.size()) {
            std::size_t have = (found == analyses.end()) ? 0 : found->second.size();
            throw BuildError("analysis coverage gap for interaction " + it.interaction_id +
                             ": have " + std::to_string(have) + " of " +
                             std::to_string(it.turns.size()) + " turns");
        }
        IndexRecord rec;
        rec.interaction_id = it.interaction_id;
        rec.db_id = it.db_id;
        rec.scale = schema_scale(corpus.schema_of(it));
        rec.turns = it.turns;
        rec.analyses = found->second;
        index.records.push_back(std::move(rec));
    }
    std::sort(index.records.begin(), index.records.end(),
              [](const IndexRecord& a, const IndexRecord& b) {
                  return a.interaction_id < b.interaction_id;
              });
    return index;
}

namespace detail {

inline int gds_band(double gds, const FilterConfig& cfg) {
    if (gds <= cfg.tau1) return 0;
    if (gds <= cfg.tau2) return 1;
    return 2;
}

inline bool within_tolerance(std::size_t cand, std::size_t cur, double rho) {
    if (std::isinf(rho)) return true;
    double base = std::max<double>(static_cast<double>(cur), 1.0);
    return std::abs(static_cast<double>(cand) - static_cast<double>(cur)) <= rho * base;
}

}  // namespace detail

// Candidate dialogues whose schema scale and dependency footprint are
// compatible with the current turn.
inline std::vector<const IndexRecord*> filter_candidates(const TrainingIndex& index,
                                                         const SchemaScale& current_scale,
                                                         const DependencyProfile& current_profile,
                                                         const FilterConfig& cfg = {}) {
    std::vector<const IndexRecord*> out;
    int cur_band = detail::gds_band(current_profile.aggregate_gds, cfg);
    for (const auto& rec : index.records) {
        if (!detail::within_tolerance(rec.scale.n_tables, current_scale.n_tables, cfg.scale_tolerance) ||
            !detail::within_tolerance(rec.scale.n_columns, current_scale.n_columns, cfg.scale_tolerance) ||
            !detail::within_tolerance(rec.scale.n_foreign_keys, current_scale.n_foreign_keys,
                                      cfg.scale_tolerance))
            continue;
        bool footprint_ok = false;
        for (const auto& a : rec.analyses) {
            if (detail::gds_band(a.profile.aggregate_gds, cfg) == cur_band) {
                footprint_ok = true;
                break;
            }
        }
        if (footprint_ok) out.push_back(&rec);
    }
    return out;
}

// For each candidate: locate the most similar turn idx, take its strongest
// dependency idx_dep, and keep the transition only when the training
// anchor's Role-State vector is isomorphic to the current anchor's. Each
// surviving candidate contributes exactly one trajectory.
inline std::vector<Trajectory> search_trajectories(const std::string& current_question,
                                                   const ContextualAnchor& anchor,
                                                   const std::vector<const IndexRecord*>& candidates,
                                                   std::size_t max_trajectories,
                                                   SimilarityBackend& sim) {
    std::vector<Trajectory> out;
    if (max_trajectories == 0) return out;
    for (const IndexRecord* rec : candidates) {
        // idx = argmax_j Sim(Q_i, Q_train_{m,j}); ties to the earlier turn
        std::size_t idx = 0;
        double best_sim = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < rec->turns.size(); ++j) {
            double s = sim.score(current_question, rec->turns[j].effective_utterance());
            if (s > best_sim) { best_sim = s; idx = j; }
        }
        if (idx == 0) continue;  // first turn has no history to evolve from

        const DependencyProfile& profile = rec->analyses[idx].profile;
        if (profile.pairwise_gds.empty()) continue;
        std::size_t dep = 0;
        for (std::size_t j = 1; j < profile.pairwise_gds.size(); ++j)
            if (profile.pairwise_gds[j] >= profile.pairwise_gds[dep]) dep = j;

        if (!is_isomorphic(rec->analyses[dep].rolestate.vector, anchor.anchor_rolestate.vector))
            continue;  // non-isomorphic transitions are discarded

        Trajectory t;
        t.anchor_question = rec->turns[dep].utterance;
        t.anchor_reasoning = rec->analyses[dep].reasoning;
        t.target_question = rec->turns[idx].utterance;
        t.target_reasoning = rec->analyses[idx].reasoning;
        t.interaction_id = rec->interaction_id;
        t.target_index = static_cast<int>(idx) + 1;
        t.anchor_index = static_cast<int>(dep) + 1;
        t.similarity_score = best_sim;
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(), [](const Trajectory& a, const Trajectory& b) {
        if (a.similarity_score != b.similarity_score) return a.similarity_score > b.similarity_score;
        if (a.interaction_id != b.interaction_id) return a.interaction_id < b.interaction_id;
        return a.target_index < b.target_index;
    });
    if (out.size() > max_trajectories) out.resize(max_trajectories);
    return out;
}

// Greedy similarity-ranked selection until every role has `per_role`
// exemplars: entries covering more under-covered roles win, then higher
// similarity, then pool order. No (question, sql) pair is duplicated.
inline RoleExemplarSet select_rki(const std::vector<RoleExemplar>& pool,
                                  const std::string& current_question, SimilarityBackend& sim,
                                  int per_role = 2) {
    RoleExemplarSet set;
    for (const auto& r : role_names()) set.role_coverage[r] = 0;
    if (per_role <= 0) return set;

    struct Ranked {
        const RoleExemplar* entry;
        double sim_score;
        std::size_t order;
        bool taken = false;
    };
    std::vector<Ranked> ranked;
    for (std::size_t i = 0; i < pool.size(); ++i)
        ranked.push_back(Ranked{&pool[i], sim.score(current_question, pool[i].question), i});

    auto roles_of = [](const RoleExemplar& e) {
        std::vector<std::string> roles;
        for (std::size_t i = 0; i < 10; ++i)
            if (e.roles.vector.bits[i]) roles.push_back(role_names()[i]);
        return roles;
    };
    auto is_duplicate = [&](const RoleExemplar& e) {
        for (const auto& chosen : set.exemplars)
            if (chosen.question == e.question && chosen.sql == e.sql) return true;
        return false;
    };

    while (true) {
        Ranked* best = nullptr;
        int best_gain = 0;
        for (auto& r : ranked) {
            if (r.taken) continue;
            int gain = 0;
            for (const auto& role : roles_of(*r.entry))
                if (set.role_coverage[role] < per_role) ++gain;
            if (gain == 0) continue;
            if (!best || gain > best_gain ||
                (gain == best_gain && (r.sim_score > best->sim_score ||
                                       (r.sim_score == best->sim_score && r.order < best->order)))) {
                best = &r;
                best_gain = gain;
            }
        }
        if (!best) break;
        best->taken = true;
        if (is_duplicate(*best->entry)) continue;
        set.exemplars.push_back(*best->entry);
        for (const auto& role : roles_of(*best->entry)) ++set.role_coverage[role];
    }

    for (const auto& [role, count] : set.role_coverage)
        if (count < per_role) set.incomplete_pool = true;  // warning, not an error
    return set;
}

// ---- index serialization -------------------------------------------------

inline nlohmann::ordered_json index_to_json(const TrainingIndex& index) {
    nlohmann::ordered_json j;
    j["format"] = "rosesql-index-v1";
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& rec : index.records) {
        nlohmann::ordered_json rj;
        rj["interaction_id"] = rec.interaction_id;
        rj["db_id"] = rec.db_id;
        rj["scale"] = {{"n_tables", rec.scale.n_tables},
                       {"n_columns", rec.scale.n_columns},
                       {"n_foreign_keys", rec.scale.n_foreign_keys}};
        rj["turns"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < rec.turns.size(); ++i) {
            nlohmann::ordered_json tj;
            tj["index"] = rec.turns[i].index;
            tj["utterance"] = rec.turns[i].utterance;
            if (rec.turns[i].rewritten_utterance)
                tj["rewritten_utterance"] = *rec.turns[i].rewritten_utterance;
            if (rec.turns[i].gold_sql) tj["gold_sql"] = *rec.turns[i].gold_sql;
            tj["rolestate"] = rolestate_to_json(rec.analyses[i].rolestate);
            tj["profile"] = profile_to_json(rec.analyses[i].profile);
            tj["reasoning"] = rec.analyses[i].reasoning;
            rj["turns"].push_back(tj);
        }
        j["records"].push_back(rj);
    }
    return j;
}

inline TrainingIndex index_from_json(const nlohmann::ordered_json& j) {
    if (j.value("format", "") != "rosesql-index-v1")
        throw IngestionError("unrecognized index format");
    TrainingIndex index;
    for (const auto& rj : j.at("records")) {
        IndexRecord rec;
        rec.interaction_id = rj.at("interaction_id").get<std::string>();
        rec.db_id = rj.at("db_id").get<std::string>();
        rec.scale.n_tables = rj.at("scale").at("n_tables").get<std::size_t>();
        rec.scale.n_columns = rj.at("scale").at("n_columns").get<std::size_t>();
        rec.scale.n_foreign_keys = rj.at("scale").at("n_foreign_keys").get<std::size_t>();
        for (const auto& tj : rj.at("turns")) {
            Turn t;
            t.index = tj.at("index").get<int>();
            t.utterance = tj.at("utterance").get<std::string>();
            if (tj.contains("rewritten_utterance"))
                t.rewritten_utterance = tj.at("rewritten_utterance").get<std::string>();
            if (tj.contains("gold_sql")) t.gold_sql = tj.at("gold_sql").get<std::string>();
            rec.turns.push_back(std::move(t));
            TurnAnalysis a;
            a.rolestate = rolestate_from_json(tj.at("rolestate"));
            a.profile = profile_from_json(tj.at("profile"));
            a.reasoning = tj.at("reasoning").get<std::string>();
            rec.analyses.push_back(std::move(a));
        }
        index.records.push_back(std::move(rec));
    }
    return index;
}

}  // namespace rosesql
