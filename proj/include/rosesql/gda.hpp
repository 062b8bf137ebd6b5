#pragma once

// Gain Dependency Analysis: dependency strength via normalized perplexity
// reduction, temporal distance weighting h/i, and the pairwise/aggregate
// Gain Dependency Score with anchor selection.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rosesql/dataset.hpp"
#include "rosesql/llm.hpp"
#include "rosesql/util.hpp"

namespace rosesql {

struct PerplexityProbe {
    double standalone_ppl = 1.0;
    std::map<int, double> conditional_ppl;  // history index h -> PPL(Q_i | Q_h)
};

enum class AnchorSelection { Full, StrengthOnly, DistanceOnly };

struct DependencyProfile {
    int turn_index = 1;
    std::vector<double> strengths;     // s_{h,i}, h = 1..i-1
    std::vector<double> distances;     // d_{h,i} = h/i
    std::vector<double> pairwise_gds;  // s_{h,i} * d_{h,i}
    double aggregate_gds = 0.0;        // dot product
    std::optional<int> anchor_index;   // 1-based i_dep; absent for i = 1
    bool weak_dependency = false;      // all pairwise GDS <= 0

    // Ablation variants: argmax over strengths / distances alone. The
    // distance-only anchor is always turn i-1.
    std::optional<int> anchor(AnchorSelection sel) const {
        const std::vector<double>* v = nullptr;
        switch (sel) {
            case AnchorSelection::Full: return anchor_index;
            case AnchorSelection::StrengthOnly: v = &strengths; break;
            case AnchorSelection::DistanceOnly: v = &distances; break;
        }
        if (v->empty()) return std::nullopt;
        std::size_t best = 0;
        for (std::size_t h = 1; h < v->size(); ++h)
            if ((*v)[h] >= (*v)[best]) best = h;  // ties go to the most recent turn
        return static_cast<int>(best) + 1;
    }
};

inline double dependency_strength(double ppl_alone, double ppl_cond) {
    if (!(ppl_alone > 0.0) || !std::isfinite(ppl_alone) ||
        !(ppl_cond > 0.0) || !std::isfinite(ppl_cond))
        throw DomainError("perplexities must be positive and finite");
    return (ppl_alone - ppl_cond) / ppl_alone;
}

inline DependencyProfile compute_profile(const PerplexityProbe& probe, int turn_index) {
    if (turn_index < 1) throw DomainError("turn index must be >= 1");
    DependencyProfile p;
    p.turn_index = turn_index;
    if (turn_index == 1) return p;

    for (int h = 1; h < turn_index; ++h) {
        auto it = probe.conditional_ppl.find(h);
        if (it == probe.conditional_ppl.end())
            throw DomainError("incomplete probe: missing conditional perplexity for turn " +
                              std::to_string(h));
        p.strengths.push_back(dependency_strength(probe.standalone_ppl, it->second));
        p.distances.push_back(static_cast<double>(h) / static_cast<double>(turn_index));
    }
    double aggregate = 0.0;
    std::size_t best = 0;
    for (std::size_t h = 0; h < p.strengths.size(); ++h) {
        double gds = p.strengths[h] * p.distances[h];
        p.pairwise_gds.push_back(gds);
        aggregate += gds;
        if (gds >= p.pairwise_gds[best]) best = h;  // ties go to the most recent turn
    }
    p.aggregate_gds = aggregate;
    if (p.pairwise_gds[best] <= 0.0) {
        // degenerate case: no positive gain anywhere; recency is the
        // distance vector's own prior
        p.weak_dependency = true;
        best = p.pairwise_gds.size() - 1;
    }
    p.anchor_index = static_cast<int>(best) + 1;
    return p;
}

inline double perplexity_from_logprobs(const std::vector<double>& logprobs) {
    if (logprobs.empty()) throw DomainError("empty continuation");
    double sum = 0.0;
    for (double lp : logprobs) sum += lp;
    return std::exp(-sum / static_cast<double>(logprobs.size()));
}

// Scores the standalone and conditional perplexities of one turn against
// every history turn. Only the current utterance's tokens are scored; the
// conditioning prefix is the history utterance plus a newline.
inline PerplexityProbe probe_perplexities(const Turn& turn, const std::vector<Turn>& history,
                                          Backend& scorer) {
    if (!scorer.can_score())
        throw CapabilityError("backend does not support log-probability scoring");
    const std::string& text = turn.effective_utterance();
    PerplexityProbe probe;
    probe.standalone_ppl = perplexity_from_logprobs(scorer.score_logprobs("", text));
    for (const auto& h : history) {
        std::string prefix = h.effective_utterance() + "\n";
        probe.conditional_ppl[h.index] =
            perplexity_from_logprobs(scorer.score_logprobs(prefix, text));
    }
    return probe;
}

// Self-contained restatement of the utterance via the M-schema rewrite
// prompt. Returns the cached rewrite when present; pass-through when
// disabled or when the generator returns nothing usable.
inline std::string rewrite_question(Turn& turn, const Schema& schema, Backend* generator,
                                    bool enabled, const std::string& system_template,
                                    const std::string& user_template) {
    if (turn.rewritten_utterance) return *turn.rewritten_utterance;
    if (!enabled || !generator) return turn.utterance;

    auto fill = [&](std::string text) {
        auto replace_all = [&](const std::string& key, const std::string& value) {
            std::size_t pos = 0;
            while ((pos = text.find(key, pos)) != std::string::npos) {
                text.replace(pos, key.size(), value);
                pos += value.size();
            }
        };
        replace_all("{database}", serialize_mschema(schema));
        replace_all("{question}", turn.utterance);
        return text;
    };
    GenerationResult r = generator->generate(fill(system_template), fill(user_template));
    std::string out = trim(r.text);
    if (out.empty()) return turn.utterance;  // warning path: keep the raw question
    turn.rewritten_utterance = out;
    return out;
}

// ---- cache serialization ----------------------------------------------

inline nlohmann::ordered_json profile_to_json(const DependencyProfile& p) {
    nlohmann::ordered_json j;
    j["turn_index"] = p.turn_index;
    j["strengths"] = p.strengths;
    j["distances"] = p.distances;
    j["pairwise_gds"] = p.pairwise_gds;
    j["aggregate_gds"] = p.aggregate_gds;
    if (p.anchor_index) j["anchor_index"] = *p.anchor_index;
    j["weak_dependency"] = p.weak_dependency;
    return j;
}

inline DependencyProfile profile_from_json(const nlohmann::ordered_json& j) {
    DependencyProfile p;
    p.turn_index = j.at("turn_index").get<int>();
    p.strengths = j.at("strengths").get<std::vector<double>>();
    p.distances = j.at("distances").get<std::vector<double>>();
    p.pairwise_gds = j.at("pairwise_gds").get<std::vector<double>>();
    p.aggregate_gds = j.at("aggregate_gds").get<double>();
    if (j.contains("anchor_index")) p.anchor_index = j.at("anchor_index").get<int>();
    p.weak_dependency = j.value("weak_dependency", false);
    return p;
}

}  // namespace rosesql
