// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 (live backend smoke) is operator-run and only noted.

#include <chrono>
#include <iostream>
#include <random>
#include <sstream>

#include "rosesql/pipeline.hpp"
#include "support.hpp"

using namespace rosesql;
namespace chrono = std::chrono;

namespace {

int g_failures = 0;

void verdict(int n, const std::string& desc, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << desc;
    if (!ok && !detail.empty()) std::cout << " [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(int n, const std::string& desc, Fn fn) {
    try {
        std::string detail;
        bool ok = fn(detail);
        verdict(n, desc, ok, detail);
    } catch (const std::exception& e) {
        verdict(n, desc, false, std::string("exception: ") + e.what());
    }
}

std::string bits_of(const RoleVector& v) {
    std::string s;
    for (std::size_t i = 0; i < 10; ++i) s += static_cast<char>('0' + v.bits[i]);
    return s;
}

RoleState state_of(const std::string& bits) {
    RoleState rs;
    for (std::size_t i = 0; i < 10; ++i) rs.vector.bits[i] = bits.at(i) - '0';
    for (std::size_t i = 0; i < kElementRoles; ++i)
        if (rs.vector.bits[i]) rs.assignments[role_names()[i]] = {"t.c"};
    for (std::size_t i = kElementRoles; i < 10; ++i)
        rs.markers[role_names()[i]] = rs.vector.bits[i] == 1;
    return rs;
}

IndexRecord synthetic_record(const std::string& id, SchemaScale scale,
                             const std::vector<std::string>& questions,
                             const std::vector<std::string>& vectors) {
    IndexRecord rec;
    rec.interaction_id = id;
    rec.db_id = "synthetic";
    rec.scale = scale;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        Turn t;
        t.index = static_cast<int>(i) + 1;
        t.utterance = questions[i];
        t.gold_sql = "SELECT 1";
        rec.turns.push_back(std::move(t));
        TurnAnalysis a;
        a.rolestate = state_of(vectors[i]);
        a.profile.turn_index = t.index;
        for (std::size_t h = 1; h <= i; ++h) {
            a.profile.strengths.push_back(0.5);
            a.profile.distances.push_back(static_cast<double>(h) / (i + 1));
            a.profile.pairwise_gds.push_back(0.5 * static_cast<double>(h) / (i + 1));
        }
        if (i > 0) {
            a.profile.aggregate_gds = 0.0;
            a.profile.anchor_index = static_cast<int>(i);
        }
        a.reasoning = "reasoning for " + questions[i];
        rec.analyses.push_back(std::move(a));
    }
    return rec;
}

// Shared end-to-end harness for criteria 7 and 8.
struct RunEnv {
    Corpus train;
    Corpus dev;
    TemplateSet templates;
    TfCosineSimilarity sim;
    fs::path root;
    PreparedCorpus prep;

    RunEnv()
        : train(load_dataset(testsup::dataset_dir(), "train")),
          dev(load_dataset(testsup::dataset_dir(), "dev")),
          templates(TemplateSet::load(testsup::templates_dir())),
          root(testsup::make_temp_dir("accept")) {
        fs::create_directories(root / "db" / "concert_singer");
        testsup::build_concert_db(root / "db" / "concert_singer" / "concert_singer.sqlite");
        MockBackend prep_mock;
        prep = cmd_prepare(config("prep"), train, prep_mock, templates);
    }

    RunConfig config(const std::string& tag) {
        RunConfig cfg;
        cfg.dataset_dir = testsup::dataset_dir();
        cfg.cache_dir = root / (tag + "-cache");
        cfg.output_dir = root / (tag + "-out");
        cfg.templates_dir = testsup::templates_dir();
        cfg.database_dir = root / "db";
        cfg.flags = AblationFlags{true, true, true, true};
        fs::create_directories(cfg.cache_dir);
        return cfg;
    }

    std::map<std::string, std::string> oracle_map() const {
        std::map<std::string, std::string> m;
        const Schema& schema = dev.schemas.at("concert_singer");
        for (const auto& it : dev.interactions)
            for (const auto& t : it.turns)
                m[t.utterance] = testsup::tagged_reply(*t.gold_sql, schema);
        return m;
    }

    RunOutputs run(const std::string& tag, const std::map<std::string, std::string>& m) {
        MockBackend mock;
        mock.set_generate(testsup::scripted_generator(m));
        return cmd_run(config(tag), dev, &prep.index, prep.rki_pool, prep.rki_schema_text,
                       mock, sim, templates);
    }
};

}  // namespace

int main() {
    criterion(1, "role digitization oracle: 100% vector match in under 1s", [](std::string& d) {
        Corpus corpus = load_dataset(testsup::dataset_dir(), "dev");
        auto oracle = read_json_file(testsup::fixture_dir() / "rolestate_oracle.json");
        if (oracle.size() < 60) {
            d = "oracle has only " + std::to_string(oracle.size()) + " queries";
            return false;
        }
        auto start = chrono::steady_clock::now();
        std::size_t mismatches = 0;
        for (const auto& entry : oracle) {
            const Schema& schema = corpus.schemas.at(entry.at("db_id").get<std::string>());
            RoleState rs = extract_rolestate(entry.at("sql").get<std::string>(), schema);
            if (bits_of(rs.vector) != entry.at("vector").get<std::string>()) ++mismatches;
        }
        double secs = chrono::duration<double>(chrono::steady_clock::now() - start).count();
        std::ostringstream msg;
        msg << mismatches << " mismatches over " << oracle.size() << " queries in " << secs
            << "s";
        d = msg.str();
        return mismatches == 0 && secs < 1.0;
    });

    criterion(2, "dependency profiles: worked examples plus 1000 random tuples at 1e-9",
              [](std::string& d) {
        if (std::abs(dependency_strength(20.0, 10.0) - 0.5) > 1e-12) return false;
        if (std::abs(dependency_strength(10.0, 20.0) + 1.0) > 1e-12) return false;
        {
            PerplexityProbe probe;
            probe.standalone_ppl = 20.0;
            probe.conditional_ppl[1] = 10.0;
            DependencyProfile p = compute_profile(probe, 2);
            if (std::abs(p.aggregate_gds - 0.25) > 1e-9 || p.anchor_index != 1) return false;
        }
        {
            PerplexityProbe probe;
            probe.standalone_ppl = 10.0;
            probe.conditional_ppl[1] = 8.0;
            probe.conditional_ppl[2] = 4.0;
            DependencyProfile p = compute_profile(probe, 3);
            if (std::abs(p.aggregate_gds - (0.2 / 3.0 + 0.4)) > 1e-9 || p.anchor_index != 2)
                return false;
        }
        std::mt19937 rng(4242);
        std::uniform_real_distribution<double> ppl(0.25, 200.0);
        std::uniform_int_distribution<int> turn(2, 10);
        for (int k = 0; k < 1000; ++k) {
            int i = turn(rng);
            PerplexityProbe probe;
            probe.standalone_ppl = ppl(rng);
            for (int h = 1; h < i; ++h) probe.conditional_ppl[h] = ppl(rng);
            DependencyProfile p = compute_profile(probe, i);
            double dot = 0.0;
            for (std::size_t h = 0; h < p.strengths.size(); ++h) {
                if (std::abs(p.distances[h] - static_cast<double>(h + 1) / i) > 1e-9) {
                    d = "distance law violated";
                    return false;
                }
                if (std::abs(p.pairwise_gds[h] - p.strengths[h] * p.distances[h]) > 1e-9) {
                    d = "pairwise identity violated";
                    return false;
                }
                dot += p.strengths[h] * p.distances[h];
            }
            if (std::abs(p.aggregate_gds - dot) > 1e-9) {
                d = "aggregate is not the dot product";
                return false;
            }
            if (!p.anchor_index) return false;
            if (p.weak_dependency) {
                if (*p.anchor_index != i - 1) {
                    d = "weak dependency must anchor at i-1";
                    return false;
                }
            } else {
                double best = p.pairwise_gds[static_cast<std::size_t>(*p.anchor_index - 1)];
                for (double g : p.pairwise_gds)
                    if (g > best + 1e-15) {
                        d = "anchor is not the argmax";
                        return false;
                    }
            }
        }
        return true;
    });

    criterion(3, "planted trajectory retrieval over 50 interactions, deterministic across 10 runs",
              [](std::string& d) {
        SchemaScale scale{4, 20, 3};
        TrainingIndex index;
        for (int m = 0; m < 50; ++m) {
            bool planted = (m == 17);
            std::string turn2 = planted ? "show the singers from france please"
                                        : "unrelated query number " + std::to_string(m);
            // only the planted dialogue's anchor turn is isomorphic
            std::string anchor_bits = planted ? "1010000000" : "1100000000";
            index.records.push_back(synthetic_record(
                "syn-" + std::to_string(m), scale,
                {"opening question " + std::to_string(m), turn2},
                {anchor_bits, "1010000000"}));
        }
        ContextualAnchor anchor;
        anchor.anchor_turn_index = 1;
        anchor.anchor_question = "show all singers";
        anchor.anchor_rolestate = state_of("1010000000");
        DependencyProfile profile;
        profile.aggregate_gds = 0.0;
        TfCosineSimilarity sim;

        std::string first;
        for (int run = 0; run < 10; ++run) {
            auto candidates = filter_candidates(index, scale, profile, {});
            auto trajectories = search_trajectories("show the singers from france please",
                                                    anchor, candidates, 2, sim);
            if (trajectories.size() != 1 || trajectories[0].interaction_id != "syn-17" ||
                trajectories[0].target_index != 2 || trajectories[0].anchor_index != 1) {
                d = "planted match not retrieved (run " + std::to_string(run) + ")";
                return false;
            }
            std::ostringstream snap;
            snap << trajectories[0].interaction_id << "|" << trajectories[0].target_index << "|"
                 << trajectories[0].anchor_index << "|" << trajectories[0].similarity_score;
            if (run == 0)
                first = snap.str();
            else if (snap.str() != first) {
                d = "run " + std::to_string(run) + " diverged";
                return false;
            }
        }
        return true;
    });

    criterion(4, "role-aware exemplar selection: full coverage, zero duplicates, multi-role ties",
              [](std::string& d) {
        std::vector<RoleExemplar> pool;
        for (std::size_t r = 0; r < 10; ++r)
            for (int k = 0; k < 2; ++k) {
                RoleExemplar e;
                std::string bits(10, '0');
                bits[0] = '1';
                bits[r] = '1';
                e.question = "exemplar " + role_names()[r] + " " + std::to_string(k);
                e.sql = "SELECT " + std::to_string(r) + std::to_string(k);
                e.roles = state_of(bits);
                pool.push_back(std::move(e));
            }
        TfCosineSimilarity sim;
        RoleExemplarSet set = select_rki(pool, "completely unrelated words", sim, 2);
        for (const auto& [role, count] : set.role_coverage)
            if (count < 2) {
                d = "role " + role + " covered only " + std::to_string(count) + " times";
                return false;
            }
        for (std::size_t a = 0; a < set.exemplars.size(); ++a)
            for (std::size_t b = a + 1; b < set.exemplars.size(); ++b)
                if (set.exemplars[a].question == set.exemplars[b].question &&
                    set.exemplars[a].sql == set.exemplars[b].sql) {
                    d = "duplicate exemplar selected";
                    return false;
                }
        if (set.incomplete_pool) {
            d = "pool wrongly flagged incomplete";
            return false;
        }

        // multi-role tie: at equal similarity the entry covering more
        // under-covered roles is chosen first
        std::vector<RoleExemplar> tie_pool;
        RoleExemplar narrow;
        narrow.question = "alpha";
        narrow.sql = "SELECT narrow";
        narrow.roles = state_of("1000000000");
        RoleExemplar wide;
        wide.question = "alpha";
        wide.sql = "SELECT wide";
        wide.roles = state_of("1110000000");
        tie_pool.push_back(narrow);
        tie_pool.push_back(wide);
        RoleExemplarSet tie = select_rki(tie_pool, "beta", sim, 1);
        if (tie.exemplars.empty() || tie.exemplars.front().sql != "SELECT wide") {
            d = "multi-role entry not preferred at equal similarity";
            return false;
        }
        return true;
    });

    criterion(5, "prompt goldens byte-equal and render/parse round-trip", [](std::string& d) {
        Corpus corpus = load_dataset(testsup::dataset_dir(), "dev");
        TemplateSet templates = TemplateSet::load(testsup::templates_dir());
        const Schema& schema = corpus.schemas.at("concert_singer");

        Turn q;
        q.index = 2;
        q.utterance = "Only the ones from France.";
        q.gold_sql = "SELECT Name FROM singer WHERE Country = 'France'";

        ContextualAnchor anchor;
        anchor.anchor_turn_index = 1;
        anchor.anchor_question = "Show all singer names.";
        anchor.anchor_reasoning = "Step 1: the question selects every singer name.";
        anchor.anchor_rolestate = extract_rolestate("SELECT Name FROM singer", schema);

        Trajectory t1;
        t1.anchor_question = "Show all singer names.";
        t1.anchor_reasoning = "selected singer.Name";
        t1.target_question = "Which of them are from France?";
        t1.target_reasoning = "added condition singer.Country";
        t1.interaction_id = "train-8";
        t1.anchor_index = 1;
        t1.target_index = 2;
        t1.similarity_score = 0.9;
        Trajectory t2 = t1;
        t2.target_question = "Which of them are from Japan?";
        t2.interaction_id = "train-9";
        t2.similarity_score = 0.8;

        RoleExemplarSet rki;
        RoleExemplar e;
        e.question = "List instructor names ordered by salary.";
        e.reasoning = "Step 1: order instructors by salary.";
        e.roles = extract_rolestate("SELECT name FROM instructor ORDER BY salary DESC",
                                    corpus.schemas.at("college_2"));
        e.sql = "SELECT name FROM instructor ORDER BY salary DESC";
        e.db_id = "college_2";
        rki.exemplars.push_back(std::move(e));
        rki.shared_schema_text = serialize_mschema(corpus.schemas.at("college_2"));

        struct Golden {
            std::string name;
            AblationFlags flags;
            bool with_ctx, with_traj, with_rki;
        };
        const std::vector<Golden> goldens = {
            {"prompt_base.txt", {false, false, false, false}, false, false, false},
            {"prompt_rolestate.txt", {true, false, false, false}, false, false, false},
            {"prompt_rki.txt", {true, true, false, false}, false, false, true},
            {"prompt_traj.txt", {true, true, true, false}, false, true, true},
            {"prompt_full.txt", {true, true, true, true}, true, true, true},
        };
        for (const auto& g : goldens) {
            auto ctx = g.with_ctx ? std::optional<ContextualAnchor>(anchor) : std::nullopt;
            auto traj = g.with_traj ? std::vector<Trajectory>{t1, t2} : std::vector<Trajectory>{};
            auto exemplars = g.with_rki ? rki : RoleExemplarSet{};
            PromptBundle b =
                assemble_inference_prompt(schema, q, ctx, traj, exemplars, g.flags, templates);
            fs::path path = testsup::golden_dir() / g.name;
            if (!fs::exists(path)) {
                d = "missing golden " + g.name;
                return false;
            }
            std::string want = normalize_newlines(read_text_file(path));
            if (b.system_text + "\n==== user ====\n" + b.user_text != want) {
                d = "golden mismatch for " + g.name;
                return false;
            }
        }
        {
            RoleState roles = extract_rolestate(*q.gold_sql, schema);
            PromptBundle b = assemble_construction_prompt(schema, q, roles, templates);
            fs::path path = testsup::golden_dir() / "prompt_construction.txt";
            if (!fs::exists(path) ||
                b.system_text + "\n==== user ====\n" + b.user_text !=
                    normalize_newlines(read_text_file(path))) {
                d = "golden mismatch for prompt_construction.txt";
                return false;
            }
        }

        // render -> parse round-trip through the tagged output format
        for (const std::string& sql :
             {std::string("SELECT Name FROM singer"),
              std::string("SELECT Name FROM stadium EXCEPT SELECT Name FROM singer"),
              std::string("SELECT Country, count(*) FROM singer GROUP BY Country")}) {
            RoleState rs = extract_rolestate(sql, schema);
            ParsedOutput parsed = parse_output(testsup::tagged_reply(sql, schema));
            RoleState back =
                parse_rolestate_block("<Roles>" + parsed.rolestate_block + "</Roles>", schema);
            if (!is_isomorphic(rs.vector, back.vector) || parsed.sql != sql) {
                d = "round-trip failed for: " + sql;
                return false;
            }
        }
        return true;
    });

    criterion(6, "metrics: worked examples, IM<=QM over 1000 random matrices, execution filter",
              [](std::string& d) {
        auto turn = [](bool v) {
            TurnScore t;
            t.em = v;
            t.ex = v;
            return t;
        };
        Report a = interaction_scores({{turn(true), turn(true), turn(false)}});
        if (std::abs(a.qm.ex - 2.0 / 3.0) > 1e-12 || a.im.ex != 0.0) return false;
        Report b = interaction_scores({{turn(true), turn(true)}});
        if (b.qm.ex != 1.0 || b.im.ex != 1.0) return false;
        Report c = interaction_scores(
            {{turn(true), turn(true)}, {turn(true), turn(false)}});
        if (std::abs(c.qm.ex - 0.75) > 1e-12 || std::abs(c.im.ex - 0.5) > 1e-12) return false;

        std::mt19937 rng(7);
        std::uniform_int_distribution<int> nturns(1, 6), ninter(1, 8), coin(0, 1);
        for (int k = 0; k < 1000; ++k) {
            std::vector<std::vector<TurnScore>> scores;
            const int m = nturns(rng);  // one length per matrix: IM <= QM needs
                                        // rectangular score matrices
            for (int i = 0, n = ninter(rng); i < n; ++i) {
                std::vector<TurnScore> turns;
                for (int t = 0; t < m; ++t) turns.push_back(turn(coin(rng)));
                scores.push_back(std::move(turns));
            }
            Report r = interaction_scores(scores);
            if (r.im.em > r.qm.em + 1e-12 || r.im.ex > r.qm.ex + 1e-12) {
                d = "IM exceeded QM";
                return false;
            }
        }

        fs::path db = testsup::make_temp_dir("acceptdb") / "concert_singer.sqlite";
        testsup::build_concert_db(db);
        if (!execution_match("SELECT Name FROM singer", "SELECT Name FROM singer", db.string(),
                             false))
            return false;
        if (execution_match("SELECT Name FROM singer WHERE Country = 'Germany'",
                            "SELECT Name FROM singer WHERE Country = 'Japan'", db.string(),
                            false)) {
            d = "stale-filter prediction not discriminated";
            return false;
        }
        if (classify_difficulty("SELECT * FROM country") != Difficulty::Easy) return false;
        if (classify_difficulty(
                "SELECT stuid FROM student EXCEPT SELECT T1.stuid FROM student AS T1 JOIN "
                "has_pet AS T2 ON T1.stuid = T2.stuid JOIN pets AS T3 ON T3.petid = T2.petid "
                "WHERE T3.pettype = 'cat'") != Difficulty::Extra)
            return false;
        return true;
    });

    criterion(7, "end-to-end runs: oracle mock perfect, scripted mock exact fractions, under 60s",
              [](std::string& d) {
        auto start = chrono::steady_clock::now();
        RunEnv env;
        RunOutputs oracle = env.run("oracle", env.oracle_map());
        if (oracle.report.qm.ex != 1.0 || oracle.report.im.ex != 1.0) {
            d = "oracle run not perfect";
            return false;
        }
        auto m = env.oracle_map();
        const Schema& schema = env.dev.schemas.at("concert_singer");
        for (std::size_t i = 7; i < 10; ++i)
            for (const auto& t : env.dev.interactions[i].turns)
                m[t.utterance] = testsup::tagged_reply("SELECT Location FROM stadium", schema);
        RunOutputs partial = env.run("partial", m);
        if (std::abs(partial.report.qm.ex - 0.7) > 1e-12 ||
            std::abs(partial.report.im.ex - 0.7) > 1e-12) {
            std::ostringstream msg;
            msg << "expected 0.7/0.7, got " << partial.report.qm.ex << "/"
                << partial.report.im.ex;
            d = msg.str();
            return false;
        }
        double secs = chrono::duration<double>(chrono::steady_clock::now() - start).count();
        if (secs >= 60.0) {
            d = "took " + std::to_string(secs) + "s";
            return false;
        }
        return true;
    });

    criterion(8, "ablation ladder and trajectory-count sweep with single-setting deltas",
              [](std::string& d) {
        RunEnv env;
        MockBackend mock;
        mock.set_generate(testsup::scripted_generator(env.oracle_map()));
        AblationOutputs out =
            cmd_ablate(env.config("ablate"), env.dev, &env.prep.index, env.prep.rki_pool,
                       env.prep.rki_schema_text, mock, env.sim, env.templates);
        if (out.ladder.size() != 5 || out.sweep.size() != 6) {
            d = "wrong row counts";
            return false;
        }
        auto diff_count = [](const nlohmann::ordered_json& a, const nlohmann::ordered_json& b) {
            int n = 0;
            for (auto it = a.begin(); it != a.end(); ++it)
                if (b.at(it.key()) != it.value()) ++n;
            return n;
        };
        for (std::size_t i = 1; i < out.ladder.size(); ++i)
            if (diff_count(out.ladder[i - 1].config_snapshot, out.ladder[i].config_snapshot) !=
                1) {
                d = "ladder rows " + std::to_string(i - 1) + "->" + std::to_string(i) +
                    " differ in more than one setting";
                return false;
            }
        for (std::size_t i = 1; i < out.sweep.size(); ++i)
            if (diff_count(out.sweep[i - 1].config_snapshot, out.sweep[i].config_snapshot) != 1) {
                d = "sweep rows differ in more than one setting";
                return false;
            }
        for (int n = 0; n <= 5; ++n)
            if (out.sweep[static_cast<std::size_t>(n)].config_snapshot.at("n_trajectories") != n) {
                d = "sweep does not cover N=0..5 in order";
                return false;
            }
        return true;
    });

    std::cout << "SKIP criterion 9: live backend smoke test is operator-run (see README)\n";

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all automated criteria passed\n";
    return 0;
}
