// Command-line front end: prepare / run / ablate / report / export.

#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "rosesql/llm_http.hpp"
#include "rosesql/pipeline.hpp"

using namespace rosesql;

namespace {

void apply_config_file(RunConfig& cfg, const std::string& path) {
    auto j = read_json_file(path);
    auto s = [&](const char* k, auto& field) {
        if (j.contains(k)) field = j.at(k).template get<std::decay_t<decltype(field)>>();
    };
    std::string ds = cfg.dataset_dir.string(), cd = cfg.cache_dir.string(),
                od = cfg.output_dir.string(), td = cfg.templates_dir.string(),
                dd = cfg.database_dir.string(), vd = cfg.db_variants_dir.string(),
                tf = cfg.traces_file.string();
    s("dataset_dir", ds); s("cache_dir", cd); s("output_dir", od);
    s("templates_dir", td); s("database_dir", dd); s("db_variants_dir", vd);
    s("traces_file", tf); s("split", cfg.split);
    cfg.dataset_dir = ds; cfg.cache_dir = cd; cfg.output_dir = od;
    cfg.templates_dir = td; cfg.database_dir = dd; cfg.db_variants_dir = vd;
    cfg.traces_file = tf;
    s("base_url", cfg.backend.base_url);
    s("model_name", cfg.backend.model_name);
    s("temperature", cfg.backend.temperature);
    s("max_output_tokens", cfg.backend.max_output_tokens);
    s("parallelism_limit", cfg.backend.parallelism_limit);
    s("rolestate_reasoning", cfg.flags.rolestate_reasoning);
    s("rki", cfg.flags.rki);
    s("trajectories", cfg.flags.trajectories);
    s("ctx_anchor", cfg.flags.ctx_anchor);
    s("n_trajectories", cfg.n_trajectories);
    s("per_role", cfg.per_role);
    s("scale_tolerance", cfg.filter.scale_tolerance);
    s("tau1", cfg.filter.tau1);
    s("tau2", cfg.filter.tau2);
    s("rewrite_enabled", cfg.rewrite_enabled);
    s("gold_context", cfg.gold_context);
    s("rki_db_id", cfg.rki_db_id);
    s("exec_timeout_s", cfg.exec_timeout_s);
    s("parallel_interactions", cfg.parallel_interactions);
}

std::unique_ptr<Backend> make_backend(const RunConfig& cfg, bool mock) {
    if (mock) return std::make_unique<MockBackend>();
    return std::make_unique<HttpBackend>(cfg.backend);
}

PreparedCorpus load_prepared(const RunConfig& cfg, Corpus& train) {
    PreparedCorpus prepared;
    fs::path index_file = cfg.cache_dir / "index.json";
    if (!fs::exists(index_file))
        throw IngestionError("missing index; run prepare first: " + index_file.string());
    prepared.index = index_from_json(read_json_file(index_file));
    for (const auto& rec : prepared.index.records) {
        if (rec.db_id != cfg.rki_db_id) continue;
        for (std::size_t i = 0; i < rec.turns.size(); ++i) {
            if (!rec.turns[i].gold_sql) continue;
            RoleExemplar e;
            e.question = rec.turns[i].utterance;
            e.reasoning = rec.analyses[i].reasoning;
            e.roles = rec.analyses[i].rolestate;
            e.sql = *rec.turns[i].gold_sql;
            e.db_id = rec.db_id;
            prepared.rki_pool.push_back(std::move(e));
        }
    }
    auto it = train.schemas.find(cfg.rki_db_id);
    if (it != train.schemas.end()) prepared.rki_schema_text = serialize_mschema(it->second);
    return prepared;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rose-sql: training-free multi-turn text-to-SQL pipeline"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_file;
    bool use_mock = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "JSON config file");
        sub->add_option("--dataset-dir", cfg.dataset_dir, "dataset root");
        sub->add_option("--split", cfg.split, "split name (train/dev)");
        sub->add_option("--cache-dir", cfg.cache_dir, "preparation cache directory");
        sub->add_option("--output-dir", cfg.output_dir, "run output directory");
        sub->add_option("--templates-dir", cfg.templates_dir, "prompt template directory");
        sub->add_option("--database-dir", cfg.database_dir, "SQLite database root");
        sub->add_option("--db-variants-dir", cfg.db_variants_dir, "test-suite variant root");
        sub->add_option("--traces-file", cfg.traces_file, "operator reasoning traces (JSON)");
        sub->add_option("--base-url", cfg.backend.base_url, "backend base URL");
        sub->add_option("--model", cfg.backend.model_name, "model name");
        sub->add_option("--n", cfg.n_trajectories, "trajectory exemplar count");
        sub->add_option("--per-role", cfg.per_role, "RKI exemplars per role");
        sub->add_option("--rki-db", cfg.rki_db_id, "RKI pool database id");
        sub->add_option("--parallel", cfg.parallel_interactions, "parallel interactions");
        sub->add_flag("--mock", use_mock, "use the deterministic mock backend");
        sub->add_flag("--rewrite", cfg.rewrite_enabled, "enable question rewriting");
        sub->add_flag("--gold-context", cfg.gold_context, "use gold history (diagnostic)");
        sub->add_flag("--no-rolestate", [&](std::int64_t) { cfg.flags.rolestate_reasoning = false; },
                      "disable role-state reasoning");
        sub->add_flag("--no-rki", [&](std::int64_t) { cfg.flags.rki = false; },
                      "disable role knowledge injection");
        sub->add_flag("--no-trajectories", [&](std::int64_t) { cfg.flags.trajectories = false; },
                      "disable trajectory exemplars");
        sub->add_flag("--no-ctx", [&](std::int64_t) { cfg.flags.ctx_anchor = false; },
                      "disable the contextual anchor");
    };

    auto* prepare = app.add_subcommand("prepare", "analyze the training corpus, build the index");
    auto* run = app.add_subcommand("run", "run inference over a dev split");
    auto* ablate = app.add_subcommand("ablate", "run the ablation ladder and N sweep");
    auto* report = app.add_subcommand("report", "re-derive the report from persisted records");
    auto* exp = app.add_subcommand("export", "export predictions in the official format");
    for (auto* sub : {prepare, run, ablate, report, exp}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) apply_config_file(cfg, config_file);
        cfg.validate();
        TemplateSet templates = TemplateSet::load(cfg.templates_dir);
        TfCosineSimilarity sim;

        if (prepare->parsed()) {
            Corpus train = load_dataset(cfg.dataset_dir, "train");
            auto backend = make_backend(cfg, use_mock);
            fs::create_directories(cfg.cache_dir);
            PreparedCorpus prepared = cmd_prepare(cfg, train, *backend, templates);
            std::cout << "prepared " << prepared.index.records.size() << " interactions, rki pool "
                      << prepared.rki_pool.size() << " exemplars\n";
        } else if (run->parsed() || ablate->parsed()) {
            Corpus train = load_dataset(cfg.dataset_dir, "train");
            Corpus dev = load_dataset(cfg.dataset_dir, cfg.split);
            PreparedCorpus prepared = load_prepared(cfg, train);
            auto backend = make_backend(cfg, use_mock);
            if (run->parsed()) {
                RunOutputs out = cmd_run(cfg, dev, &prepared.index, prepared.rki_pool,
                                         prepared.rki_schema_text, *backend, sim, templates);
                std::cout << report_to_text(out.report);
            } else {
                AblationOutputs out = cmd_ablate(cfg, dev, &prepared.index, prepared.rki_pool,
                                                 prepared.rki_schema_text, *backend, sim,
                                                 templates);
                for (const auto& row : out.ladder)
                    std::cout << row.label << "  QM-EX " << row.report.qm.ex
                              << "  IM-EX " << row.report.im.ex << "\n";
                for (const auto& row : out.sweep)
                    std::cout << row.label << "  QM-EX " << row.report.qm.ex
                              << "  IM-EX " << row.report.im.ex << "\n";
            }
        } else if (report->parsed() || exp->parsed()) {
            fs::path record_file = cfg.output_dir / "records.json";
            if (!fs::exists(record_file))
                throw IngestionError("missing run record: " + record_file.string());
            RunRecord record = RunRecord::from_json(read_json_file(record_file));
            if (exp->parsed()) {
                std::string text = export_predictions(record);
                write_text_file(cfg.output_dir / "predictions.txt", text);
                std::cout << text;
            } else {
                Corpus dev = load_dataset(cfg.dataset_dir, cfg.split);
                Report rpt = derive_report(cfg, dev, record);
                std::string text = report_to_text(rpt);
                write_text_file(cfg.output_dir / "report.txt", text);
                write_text_file(cfg.output_dir / "report.json",
                                report_to_json(rpt).dump(2) + "\n");
                std::cout << text;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
