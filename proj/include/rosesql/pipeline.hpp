#pragma once

// End-to-end orchestration: training-corpus preparation, multi-turn
// inference with dependency analysis and trajectory retrieval, ablation
// ladders, and offline report re-derivation from persisted run records.

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "rosesql/dataset.hpp"
#include "rosesql/eval.hpp"
#include "rosesql/gda.hpp"
#include "rosesql/llm.hpp"
#include "rosesql/prompt.hpp"
#include "rosesql/retrieval.hpp"
#include "rosesql/rolestate.hpp"

namespace rosesql {

struct RunConfig {
    fs::path dataset_dir;
    std::string split = "dev";
    fs::path cache_dir = "cache";
    fs::path output_dir = "out";
    fs::path templates_dir = "templates";
    fs::path database_dir;       // <dir>/<db_id>/<db_id>.sqlite for EX scoring
    fs::path db_variants_dir;    // optional TS variant roots
    fs::path traces_file;        // operator-provided reasoning traces (JSON)

    BackendConfig backend;
    AblationFlags flags;
    int n_trajectories = 2;      // 2 for SParC, 1 for CoSQL
    int per_role = 2;
    FilterConfig filter;
    bool rewrite_enabled = false;
    bool gold_context = false;   // diagnostic: gold history instead of own predictions
    std::string rki_db_id = "college_2";
    AnchorSelection anchor_selection = AnchorSelection::Full;
    double exec_timeout_s = 30.0;
    int parallel_interactions = 1;

    void validate() const {
        if (n_trajectories < 0) throw ValidationError("n_trajectories must be >= 0");
        if (per_role < 0) throw ValidationError("per_role must be >= 0");
        if (filter.scale_tolerance < 0 || filter.tau1 < 0 || filter.tau2 < 0)
            throw ValidationError("retrieval thresholds must be >= 0");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["dataset_dir"] = dataset_dir.string();
        j["split"] = split;
        j["cache_dir"] = cache_dir.string();
        j["output_dir"] = output_dir.string();
        j["templates_dir"] = templates_dir.string();
        j["database_dir"] = database_dir.string();
        j["db_variants_dir"] = db_variants_dir.string();
        j["traces_file"] = traces_file.string();
        j["backend.base_url"] = backend.base_url;
        j["backend.model_name"] = backend.model_name;
        j["backend.temperature"] = backend.temperature;
        j["backend.max_output_tokens"] = backend.max_output_tokens;
        j["backend.parallelism_limit"] = backend.parallelism_limit;
        j["flags.rolestate_reasoning"] = flags.rolestate_reasoning;
        j["flags.rki"] = flags.rki;
        j["flags.trajectories"] = flags.trajectories;
        j["flags.ctx_anchor"] = flags.ctx_anchor;
        j["n_trajectories"] = n_trajectories;
        j["per_role"] = per_role;
        j["filter.scale_tolerance"] = filter.scale_tolerance;
        j["filter.tau1"] = filter.tau1;
        j["filter.tau2"] = filter.tau2;
        j["rewrite_enabled"] = rewrite_enabled;
        j["gold_context"] = gold_context;
        j["rki_db_id"] = rki_db_id;
        j["anchor_selection"] = static_cast<int>(anchor_selection);
        j["exec_timeout_s"] = exec_timeout_s;
        j["parallel_interactions"] = parallel_interactions;
        return j;
    }
};

struct TurnPrediction {
    std::string interaction_id;
    int turn_index = 1;
    std::string question;
    std::string sql;                 // empty when extraction failed
    std::string reasoning;           // joined <step> blocks
    std::string rolestate_block;     // raw <Roles> inner text
    bool parse_error = false;
    PromptManifest manifest;
    std::optional<int> anchor_index;
    std::size_t trajectory_count = 0;
    double latency_s = 0.0;
    long input_tokens = 0;
    long output_tokens = 0;
    bool usage_reported = false;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["interaction_id"] = interaction_id;
        j["turn_index"] = turn_index;
        j["question"] = question;
        j["sql"] = sql;
        j["reasoning"] = reasoning;
        j["rolestate_block"] = rolestate_block;
        j["parse_error"] = parse_error;
        j["manifest"] = {{"schema_present", manifest.schema_present},
                         {"rolestate_instructions", manifest.rolestate_instructions},
                         {"ctx_present", manifest.ctx_present},
                         {"trajectory_count", manifest.trajectory_count},
                         {"rki_size", manifest.rki_size}};
        if (anchor_index) j["anchor_index"] = *anchor_index;
        j["trajectory_count"] = trajectory_count;
        j["latency_s"] = latency_s;
        j["input_tokens"] = input_tokens;
        j["output_tokens"] = output_tokens;
        j["usage_reported"] = usage_reported;
        return j;
    }

    static TurnPrediction from_json(const nlohmann::ordered_json& j) {
        TurnPrediction p;
        p.interaction_id = j.at("interaction_id").get<std::string>();
        p.turn_index = j.at("turn_index").get<int>();
        p.question = j.value("question", "");
        p.sql = j.at("sql").get<std::string>();
        p.reasoning = j.value("reasoning", "");
        p.rolestate_block = j.value("rolestate_block", "");
        p.parse_error = j.value("parse_error", false);
        const auto& m = j.at("manifest");
        p.manifest.schema_present = m.value("schema_present", false);
        p.manifest.rolestate_instructions = m.value("rolestate_instructions", false);
        p.manifest.ctx_present = m.value("ctx_present", false);
        p.manifest.trajectory_count = m.value("trajectory_count", std::size_t{0});
        p.manifest.rki_size = m.value("rki_size", std::size_t{0});
        if (j.contains("anchor_index")) p.anchor_index = j.at("anchor_index").get<int>();
        p.trajectory_count = j.value("trajectory_count", std::size_t{0});
        p.latency_s = j.value("latency_s", 0.0);
        p.input_tokens = j.value("input_tokens", 0L);
        p.output_tokens = j.value("output_tokens", 0L);
        p.usage_reported = j.value("usage_reported", false);
        return p;
    }
};

struct RunRecord {
    nlohmann::ordered_json config_snapshot;
    std::string content_hash;  // templates + index
    std::vector<std::vector<TurnPrediction>> predictions;  // per interaction

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["format"] = "rosesql-run-v1";
        j["config"] = config_snapshot;
        j["content_hash"] = content_hash;
        j["interactions"] = nlohmann::ordered_json::array();
        for (const auto& preds : predictions) {
            nlohmann::ordered_json pj = nlohmann::ordered_json::array();
            for (const auto& p : preds) pj.push_back(p.to_json());
            j["interactions"].push_back(pj);
        }
        return j;
    }

    static RunRecord from_json(const nlohmann::ordered_json& j) {
        if (j.value("format", "") != "rosesql-run-v1")
            throw IngestionError("unrecognized run record format");
        RunRecord r;
        r.config_snapshot = j.at("config");
        r.content_hash = j.at("content_hash").get<std::string>();
        for (const auto& pj : j.at("interactions")) {
            std::vector<TurnPrediction> preds;
            for (const auto& p : pj) preds.push_back(TurnPrediction::from_json(p));
            r.predictions.push_back(std::move(preds));
        }
        return r;
    }
};

// ---- preparation ----------------------------------------------------------

struct PreparedCorpus {
    std::map<std::string, std::vector<TurnAnalysis>> analyses;
    TrainingIndex index;
    std::vector<RoleExemplar> rki_pool;
    std::string rki_schema_text;
};

namespace detail {

inline std::string turn_cache_key(const Interaction& it, const Turn& t) {
    return hash_hex(it.interaction_id + "|" + std::to_string(t.index) + "|" + t.utterance +
                    "|" + (t.gold_sql ? *t.gold_sql : ""));
}

}  // namespace detail

// Precomputes RoleStates, dependency profiles, and reasoning traces for a
// training corpus and assembles the retrieval index. Resumable: completed
// turns load from the cache and are not recomputed.
inline PreparedCorpus cmd_prepare(const RunConfig& cfg, Corpus& train, Backend& backend,
                                  const TemplateSet& templates) {
    cfg.validate();
    fs::path cache_file = cfg.cache_dir / "prepared.json";
    nlohmann::ordered_json cache;
    if (fs::exists(cache_file)) {
        cache = read_json_file(cache_file);
    } else {
        cache["format"] = "rosesql-prepared-v1";
        cache["turns"] = nlohmann::ordered_json::object();
    }

    // operator-provided traces: {"interaction_id": ["trace turn 1", ...]}
    nlohmann::ordered_json traces;
    if (!cfg.traces_file.empty() && fs::exists(cfg.traces_file))
        traces = read_json_file(cfg.traces_file);

    PreparedCorpus out;
    bool dirty = false;
    for (auto& it : train.interactions) {
        const Schema& schema = train.schema_of(it);
        std::vector<TurnAnalysis> analyses;
        std::vector<Turn> history;
        for (auto& turn : it.turns) {
            std::string key = detail::turn_cache_key(it, turn);
            TurnAnalysis a;
            if (cache["turns"].contains(key)) {
                const auto& cj = cache["turns"][key];
                a.rolestate = rolestate_from_json(cj.at("rolestate"));
                a.profile = profile_from_json(cj.at("profile"));
                a.reasoning = cj.at("reasoning").get<std::string>();
            } else {
                if (!turn.gold_sql)
                    throw ValidationError("training turn without gold SQL: " +
                                          it.interaction_id + " turn " +
                                          std::to_string(turn.index));
                a.rolestate = extract_rolestate(*turn.gold_sql, schema);
                if (cfg.rewrite_enabled)
                    rewrite_question(turn, schema, &backend, true, templates.rewrite_system,
                                     templates.rewrite_user);
                PerplexityProbe probe = probe_perplexities(turn, history, backend);
                a.profile = compute_profile(probe, turn.index);
                if (traces.contains(it.interaction_id) &&
                    static_cast<std::size_t>(turn.index - 1) < traces[it.interaction_id].size()) {
                    a.reasoning = traces[it.interaction_id][turn.index - 1].get<std::string>();
                } else {
                    PromptBundle bundle =
                        assemble_construction_prompt(schema, turn, a.rolestate, templates);
                    GenerationResult r = backend.generate(bundle.system_text, bundle.user_text);
                    try {
                        ParsedOutput parsed = parse_output(r.text);
                        a.reasoning = join(parsed.steps, " ");
                    } catch (const FormatError&) {
                        a.reasoning = trim(r.text);
                    }
                }
                nlohmann::ordered_json cj;
                cj["rolestate"] = rolestate_to_json(a.rolestate);
                cj["profile"] = profile_to_json(a.profile);
                cj["reasoning"] = a.reasoning;
                cache["turns"][key] = cj;
                dirty = true;
            }
            history.push_back(turn);
            analyses.push_back(std::move(a));
        }
        out.analyses[it.interaction_id] = std::move(analyses);
    }
    if (dirty) write_text_file(cache_file, cache.dump(2) + "\n");

    out.index = build_index(train, out.analyses);
    write_text_file(cfg.cache_dir / "index.json", index_to_json(out.index).dump(2) + "\n");

    // RKI pool: all turns drawn from the single configured database
    for (const auto& rec : out.index.records) {
        if (rec.db_id != cfg.rki_db_id) continue;
        for (std::size_t i = 0; i < rec.turns.size(); ++i) {
            if (!rec.turns[i].gold_sql) continue;
            RoleExemplar e;
            e.question = rec.turns[i].utterance;
            e.reasoning = rec.analyses[i].reasoning;
            e.roles = rec.analyses[i].rolestate;
            e.sql = *rec.turns[i].gold_sql;
            e.db_id = rec.db_id;
            out.rki_pool.push_back(std::move(e));
        }
    }
    auto schema_it = train.schemas.find(cfg.rki_db_id);
    if (schema_it != train.schemas.end())
        out.rki_schema_text = serialize_mschema(schema_it->second);
    return out;
}

// ---- inference run ----------------------------------------------------------

struct RunOutputs {
    RunRecord record;
    std::vector<std::vector<TurnScore>> scores;  // empty when gold absent
    Report report;
    double wall_s = 0.0;
};

namespace detail {

inline fs::path db_path_for(const RunConfig& cfg, const std::string& db_id) {
    if (cfg.database_dir.empty()) return {};
    return cfg.database_dir / db_id / (db_id + ".sqlite");
}

inline std::vector<std::string> variant_paths_for(const RunConfig& cfg, const std::string& db_id) {
    std::vector<std::string> out;
    if (cfg.db_variants_dir.empty()) return out;
    fs::path dir = cfg.db_variants_dir / db_id;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".sqlite") out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

// Processes one interaction sequentially: each turn's own parsed reasoning
// becomes candidate anchor material for later turns.
inline std::vector<TurnPrediction> run_interaction(
    const RunConfig& cfg, const Corpus& corpus, Interaction& it, const TrainingIndex* index,
    const std::vector<RoleExemplar>& rki_pool, const std::string& rki_schema_text,
    Backend& backend, SimilarityBackend& sim, const TemplateSet& templates) {
    const Schema& schema = corpus.schema_of(it);
    SchemaScale scale = schema_scale(schema);
    std::vector<TurnPrediction> preds;
    std::vector<RoleState> predicted_states(it.turns.size());

    bool needs_gda = cfg.flags.ctx_anchor || cfg.flags.trajectories;

    for (auto& turn : it.turns) {
        TurnPrediction pred;
        pred.interaction_id = it.interaction_id;
        pred.turn_index = turn.index;
        pred.question = turn.utterance;

        if (cfg.rewrite_enabled)
            rewrite_question(turn, schema, &backend, true, templates.rewrite_system,
                             templates.rewrite_user);

        std::optional<ContextualAnchor> anchor;
        DependencyProfile profile;
        if (turn.index > 1 && needs_gda && backend.can_score()) {
            std::vector<Turn> history(it.turns.begin(), it.turns.begin() + (turn.index - 1));
            PerplexityProbe probe = probe_perplexities(turn, history, backend);
            profile = compute_profile(probe, turn.index);
            std::optional<int> dep = profile.anchor(cfg.anchor_selection);
            if (dep) {
                pred.anchor_index = dep;
                ContextualAnchor a;
                a.anchor_turn_index = *dep;
                const Turn& dep_turn = it.turns[static_cast<std::size_t>(*dep - 1)];
                a.anchor_question = dep_turn.utterance;
                if (cfg.gold_context && dep_turn.gold_sql) {
                    a.anchor_reasoning = *dep_turn.gold_sql;
                    a.anchor_rolestate = extract_rolestate(*dep_turn.gold_sql, schema);
                } else {
                    const TurnPrediction& dep_pred = preds[static_cast<std::size_t>(*dep - 1)];
                    a.anchor_reasoning = dep_pred.reasoning;
                    a.anchor_rolestate = predicted_states[static_cast<std::size_t>(*dep - 1)];
                }
                anchor = std::move(a);
            }
        }

        std::vector<Trajectory> trajectories;
        if (cfg.flags.trajectories && cfg.n_trajectories > 0 && anchor && index) {
            auto candidates = filter_candidates(*index, scale, profile, cfg.filter);
            trajectories = search_trajectories(turn.effective_utterance(), *anchor, candidates,
                                               static_cast<std::size_t>(cfg.n_trajectories), sim);
        }

        RoleExemplarSet rki;
        if (cfg.flags.rki && !rki_pool.empty()) {
            rki = select_rki(rki_pool, turn.effective_utterance(), sim, cfg.per_role);
            rki.shared_schema_text = rki_schema_text;
        }

        PromptBundle bundle =
            assemble_inference_prompt(schema, turn, anchor, trajectories, rki, cfg.flags, templates);
        pred.manifest = bundle.manifest;
        pred.trajectory_count = trajectories.size();

        GenerationResult gen = backend.generate(bundle.system_text, bundle.user_text);
        pred.latency_s = gen.latency_s;
        pred.input_tokens = gen.usage_reported ? gen.input_tokens : bundle.token_estimate;
        pred.output_tokens = gen.usage_reported ? gen.output_tokens : estimate_tokens(gen.text);
        pred.usage_reported = gen.usage_reported;

        try {
            ParsedOutput parsed = parse_output(gen.text);
            pred.sql = parsed.sql;
            pred.reasoning = join(parsed.steps, " ");
            pred.rolestate_block = parsed.rolestate_block;
            if (!parsed.rolestate_block.empty()) {
                try {
                    predicted_states[static_cast<std::size_t>(turn.index - 1)] =
                        parse_rolestate_block("<Roles>" + parsed.rolestate_block + "</Roles>",
                                              schema);
                } catch (const FormatError&) {}
            } else if (!pred.sql.empty()) {
                // no Roles block (base configuration): digitize the predicted SQL
                try {
                    predicted_states[static_cast<std::size_t>(turn.index - 1)] =
                        extract_rolestate(pred.sql, schema);
                } catch (const Error&) {}
            }
        } catch (const FormatError&) {
            pred.parse_error = true;  // scored incorrect, never aborts the run
        }
        preds.push_back(std::move(pred));
    }
    return preds;
}

}  // namespace detail

inline TurnScore score_turn(const RunConfig& cfg, const Schema& schema, const Turn& turn,
                            const TurnPrediction& pred) {
    TurnScore s;
    s.interaction_id = pred.interaction_id;
    s.turn_index = pred.turn_index;
    s.bucket = turn_bucket(pred.turn_index);
    if (!turn.gold_sql) {
        s.excluded = true;
        return s;
    }
    const std::string& gold = *turn.gold_sql;
    s.difficulty = classify_difficulty(gold);
    if (pred.parse_error || pred.sql.empty()) return s;  // scored false

    s.em = exact_match(pred.sql, gold, schema);
    fs::path db = detail::db_path_for(cfg, schema.db_id);
    if (!db.empty() && fs::exists(db)) {
        bool ordered = gold_has_order_by(gold);
        try {
            s.ex = execution_match(pred.sql, gold, db.string(), ordered, cfg.exec_timeout_s);
        } catch (const ValidationError&) {
            s.excluded = true;  // gold failed to execute; surfaced via report footer
            return s;
        }
        auto variants = detail::variant_paths_for(cfg, schema.db_id);
        if (!variants.empty()) s.ts = test_suite_match(pred.sql, gold, variants, ordered,
                                                       cfg.exec_timeout_s);
    }
    return s;
}

inline Report derive_report(const RunConfig& cfg, const Corpus& corpus, RunRecord& record,
                            std::vector<std::vector<TurnScore>>* scores_out = nullptr,
                            double wall_s = 0.0) {
    std::vector<std::vector<TurnScore>> scores;
    double total_latency = 0.0, total_in = 0.0, total_out = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < record.predictions.size(); ++i) {
        const Interaction& it = corpus.interactions[i];
        const Schema& schema = corpus.schema_of(it);
        std::vector<TurnScore> turn_scores;
        for (std::size_t t = 0; t < record.predictions[i].size(); ++t) {
            const TurnPrediction& pred = record.predictions[i][t];
            turn_scores.push_back(score_turn(cfg, schema, it.turns[t], pred));
            total_latency += pred.latency_s;
            total_in += static_cast<double>(pred.input_tokens);
            total_out += static_cast<double>(pred.output_tokens);
            ++n;
        }
        scores.push_back(std::move(turn_scores));
    }
    Report report = interaction_scores(scores);
    if (n > 0) {
        report.efficiency.avg_latency_s = total_latency / static_cast<double>(n);
        report.efficiency.avg_input_tokens = total_in / static_cast<double>(n);
        report.efficiency.avg_output_tokens = total_out / static_cast<double>(n);
        if (wall_s > 0.0)
            report.efficiency.throughput_qps = static_cast<double>(n) / wall_s;
    }
    if (scores_out) *scores_out = std::move(scores);
    return report;
}

// Full inference pass over a dev split. Interactions run in parallel up to
// the backend's parallelism limit; turns within one interaction are strictly
// sequential. Completed turns from a previous identical run are reused.
inline RunOutputs cmd_run(const RunConfig& cfg, Corpus& dev, const TrainingIndex* index,
                          const std::vector<RoleExemplar>& rki_pool,
                          const std::string& rki_schema_text, Backend& backend,
                          SimilarityBackend& sim, const TemplateSet& templates) {
    cfg.validate();
    auto start = std::chrono::steady_clock::now();

    RunOutputs out;
    out.record.config_snapshot = cfg.to_json();
    std::string index_hash = index ? hash_hex(index_to_json(*index).dump()) : "no-index";
    out.record.content_hash = hash_hex(templates.content_hash() + index_hash +
                                       out.record.config_snapshot.dump());

    // resumability: reuse a persisted record with the same content hash
    fs::path record_file = cfg.output_dir / "records.json";
    std::map<std::string, std::vector<TurnPrediction>> completed;
    if (fs::exists(record_file)) {
        try {
            RunRecord prev = RunRecord::from_json(read_json_file(record_file));
            if (prev.content_hash == out.record.content_hash)
                for (auto& preds : prev.predictions)
                    if (!preds.empty()) completed[preds.front().interaction_id] = preds;
        } catch (const Error&) {}  // unreadable previous record: recompute
    }

    out.record.predictions.resize(dev.interactions.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= dev.interactions.size()) break;
            try {
                Interaction& it = dev.interactions[i];
                auto done = completed.find(it.interaction_id);
                if (done != completed.end() && done->second.size() == it.turns.size()) {
                    out.record.predictions[i] = done->second;
                    continue;
                }
                out.record.predictions[i] =
                    detail::run_interaction(cfg, dev, it, index, rki_pool, rki_schema_text,
                                            backend, sim, templates);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    int workers = std::max(1, std::min(cfg.parallel_interactions, cfg.backend.parallelism_limit));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.report = derive_report(cfg, dev, out.record, &out.scores, out.wall_s);

    fs::create_directories(cfg.output_dir);
    write_text_file(record_file, out.record.to_json().dump(2) + "\n");
    write_text_file(cfg.output_dir / "report.json", report_to_json(out.report).dump(2) + "\n");
    write_text_file(cfg.output_dir / "report.txt", report_to_text(out.report));
    return out;
}

// Official prediction export: one SQL per line, interactions separated by a
// blank line.
inline std::string export_predictions(const RunRecord& record) {
    std::string out;
    for (std::size_t i = 0; i < record.predictions.size(); ++i) {
        if (i) out += "\n";
        for (const auto& pred : record.predictions[i])
            out += (pred.sql.empty() ? std::string("SELECT") : pred.sql) + "\n";
    }
    return out;
}

// ---- ablation ---------------------------------------------------------------

struct AblationRow {
    std::string label;
    nlohmann::ordered_json config_snapshot;
    Report report;
};

struct AblationOutputs {
    std::vector<AblationRow> ladder;  // base -> +Role-State -> +E_rki -> +P_i -> +C_ctx
    std::vector<AblationRow> sweep;   // N in {0..5}
};

// Cumulative flag ladder plus trajectory-count sweep; each row's snapshot
// differs from the previous in exactly one setting.
inline AblationOutputs cmd_ablate(RunConfig cfg, Corpus& dev, const TrainingIndex* index,
                                  const std::vector<RoleExemplar>& rki_pool,
                                  const std::string& rki_schema_text, Backend& backend,
                                  SimilarityBackend& sim, const TemplateSet& templates) {
    AblationOutputs out;
    fs::path base_out = cfg.output_dir;

    struct Step {
        std::string label;
        AblationFlags flags;
    };
    const std::vector<Step> ladder = {
        {"base", {false, false, false, false}},
        {"+rolestate", {true, false, false, false}},
        {"+rki", {true, true, false, false}},
        {"+trajectories", {true, true, true, false}},
        {"+ctx_anchor", {true, true, true, true}},
    };
    for (const auto& step : ladder) {
        RunConfig row_cfg = cfg;
        row_cfg.flags = step.flags;
        row_cfg.output_dir = base_out / ("ladder_" + step.label);
        RunOutputs r = cmd_run(row_cfg, dev, index, rki_pool, rki_schema_text, backend, sim,
                               templates);
        // per-row output locations are bookkeeping, not experimental settings
        r.record.config_snapshot.erase("output_dir");
        out.ladder.push_back(AblationRow{step.label, r.record.config_snapshot, r.report});
    }
    for (int n = 0; n <= 5; ++n) {
        RunConfig row_cfg = cfg;
        row_cfg.flags = AblationFlags{true, true, true, true};
        row_cfg.n_trajectories = n;
        row_cfg.output_dir = base_out / ("sweep_n" + std::to_string(n));
        RunOutputs r = cmd_run(row_cfg, dev, index, rki_pool, rki_schema_text, backend, sim,
                               templates);
        r.record.config_snapshot.erase("output_dir");
        out.sweep.push_back(AblationRow{"N=" + std::to_string(n), r.record.config_snapshot,
                                        r.report});
    }

    nlohmann::ordered_json summary;
    auto table = [](const std::vector<AblationRow>& rows) {
        nlohmann::ordered_json t = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json rj;
            rj["label"] = row.label;
            rj["config"] = row.config_snapshot;
            rj["report"] = report_to_json(row.report);
            t.push_back(rj);
        }
        return t;
    };
    summary["ladder"] = table(out.ladder);
    summary["n_sweep"] = table(out.sweep);
    write_text_file(base_out / "ablation.json", summary.dump(2) + "\n");
    return out;
}

}  // namespace rosesql
