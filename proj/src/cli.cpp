#include "rprae/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include <json.hpp>

#include "rprae/config.hpp"
#include "rprae/embedding.hpp"
#include "rprae/errors.hpp"
#include "rprae/evalkit.hpp"
#include "rprae/gradsuite.hpp"
#include "rprae/simdata.hpp"
#include "rprae/trainer.hpp"

namespace rprae {

namespace {

const char* kUsage = R"(rprae — paired recurrent autoencoder with a retrofit layer

usage: rprae <command> [flags]

commands:
  gen-data   build the paired dataset and write dataset.jsonl + manifest.json
  train      run the alternating training schedule, write checkpoint + log
  eval       score a checkpoint (act2dsc or dsc2act), write report files
  analyze    cosine/PCA analysis of input vs retrofitted embeddings
  gradcheck  finite-difference check of every op and loss

common flags:
  --config <path>       JSON config; later flags override its values
  --scale <desk|full>   size preset; as a flag it resets N and batch
  --fold <1..5>         cross-validation fold (held-out word set)
  --seed <u64>          master seed
  --out <dir>           output directory (default "out")
  --threads <n>         worker bound for evaluation
  --embeddings <src>    "synthetic" or a word2vec text file
  --data <path>         dataset file (default <out>/dataset.jsonl)
  --ckpt <path>         checkpoint file (default <out>/checkpoint.json)

training flags:
  --N --n-ini --n-ch --lr --batch --margin --checkpoint-every --hold-tail
  --prae                identity-retrofit ablation
  --resume <ckpt>       continue a run from its checkpoint

eval flags:
  --mode <act2dsc|dsc2act>

Every command writes <out>/config.json, the merged settings that replay it.
Exit codes: 0 ok, 1 runtime failure, 2 usage error.
)";

long long parse_ll(const std::string& flag, const std::string& v) {
    try {
        size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError(flag + ": not an integer: '" + v + "'");
    }
}

int parse_int(const std::string& flag, const std::string& v) {
    const long long x = parse_ll(flag, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw UsageError(flag + ": out of range: '" + v + "'");
    return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& flag, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size() || v[0] == '-') throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError(flag + ": not an unsigned integer: '" + v + "'");
    }
}

double parse_double(const std::string& flag, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError(flag + ": not a number: '" + v + "'");
    }
}

// Config file first, then flags in command-line order; flags win. The
// --scale flag re-applies the preset schedule (N, batch) so "--scale full
// --batch 60" keeps the override and "--batch 60 --scale full" loses it.
RunConfig parse_flags(const std::vector<std::string>& args, size_t from) {
    RunConfig cfg = RunConfig::preset("desk");
    for (size_t i = from; i + 1 < args.size(); ++i)
        if (args[i] == "--config") cfg = load_run_config(args[i + 1]);

    for (size_t i = from; i < args.size(); ++i) {
        const std::string& flag = args[i];
        if (flag == "--prae") {
            cfg.prae = true;
            continue;
        }
        if (flag.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + flag + "'");
        if (i + 1 >= args.size()) throw UsageError(flag + ": missing value");
        const std::string& v = args[++i];

        if (flag == "--config") {
            // consumed above
        } else if (flag == "--scale") {
            const RunConfig p = RunConfig::preset(v);
            cfg.scale = p.scale;
            cfg.N = p.N;
            cfg.batch = p.batch;
        } else if (flag == "--fold") {
            cfg.fold = parse_int(flag, v);
        } else if (flag == "--seed") {
            cfg.seed = parse_u64(flag, v);
        } else if (flag == "--out") {
            cfg.out = v;
        } else if (flag == "--threads") {
            cfg.threads = parse_int(flag, v);
        } else if (flag == "--embeddings") {
            cfg.embeddings = v;
        } else if (flag == "--data") {
            cfg.dataset = v;
        } else if (flag == "--ckpt") {
            cfg.checkpoint = v;
        } else if (flag == "--N") {
            cfg.N = parse_ll(flag, v);
        } else if (flag == "--n-ini") {
            cfg.n_ini = parse_int(flag, v);
        } else if (flag == "--n-ch") {
            cfg.n_ch = parse_int(flag, v);
        } else if (flag == "--lr") {
            cfg.lr = parse_double(flag, v);
        } else if (flag == "--batch") {
            cfg.batch = parse_int(flag, v);
        } else if (flag == "--margin") {
            cfg.margin = parse_double(flag, v);
        } else if (flag == "--checkpoint-every") {
            cfg.checkpoint_every = parse_ll(flag, v);
        } else if (flag == "--hold-tail") {
            cfg.hold_tail = parse_int(flag, v);
        } else if (flag == "--resume") {
            cfg.resume = v;
        } else if (flag == "--mode") {
            cfg.mode = v;
        } else {
            throw UsageError("unknown flag '" + flag + "'");
        }
    }
    return cfg;
}

void prepare_out(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw Error("cannot create output directory " + cfg.out + ": " + ec.message());
    save_run_config(cfg, cfg.out + "/config.json");
}

void require_file(const std::string& what, const std::string& path) {
    if (!std::filesystem::exists(path)) throw Error(what + " file not found: " + path);
}

EmbeddingTable load_table(const RunConfig& cfg, int embed_dim, const SynonymLexicon& lex) {
    if (cfg.embeddings == "synthetic") return synth_pretrained(lex, embed_dim, cfg.seed);
    require_file("embeddings", cfg.embeddings);
    return load_embedding_file(cfg.embeddings);
}

int cmd_gen_data(const RunConfig& cfg, std::ostream& out) {
    const SynonymLexicon lex = SynonymLexicon::builtin();
    const DataConfig dc = cfg.data_config();
    const BuiltDataset built = build_dataset(dc, lex);
    save_dataset_jsonl(cfg.dataset_path(), built);

    nlohmann::json cells = nlohmann::json::object();
    for (int c = 0; c < 4; ++c) {
        const Cell cell = static_cast<Cell>(c);
        cells[to_string(cell)] = {
            {"patterns", built.split.pattern_count(cell)},
            {"samples", built.split.cell(cell).size()},
        };
    }
    nlohmann::json manifest = {
        {"cells", cells},
        {"fold", cfg.fold},
        {"repetitions", dc.repetitions},
        {"scale", cfg.scale},
        {"seed", cfg.seed},
        {"sequences", built.data.sequences.size()},
        {"test_actions", built.test_pattern_ids.size()},
        {"train_actions", built.train_pattern_ids.size()},
        {"training_sequences", built.split.cell(Cell::TrainActTrainDsc).size()},
    };
    std::ofstream mf(cfg.out + "/manifest.json", std::ios::binary);
    if (!mf) throw Error("cannot write " + cfg.out + "/manifest.json");
    mf << manifest.dump(2) << "\n";

    out << "dataset: " << cfg.dataset_path() << "\n";
    out << "patterns per cell:";
    for (int c = 0; c < 4; ++c)
        out << " " << to_string(static_cast<Cell>(c)) << "="
            << built.split.pattern_count(static_cast<Cell>(c));
    out << "\ntraining sequences: " << built.split.cell(Cell::TrainActTrainDsc).size() << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
    const SynonymLexicon lex = SynonymLexicon::builtin();
    require_file("dataset", cfg.dataset_path());
    const BuiltDataset built = load_dataset_jsonl(cfg.dataset_path());

    TrainConfig tc = cfg.train_config();
    ModelParams m = [&] {
        if (cfg.resume.empty()) return ModelParams::init(cfg.model_config(), cfg.seed);
        require_file("checkpoint", cfg.resume);
        ModelParams loaded = load_checkpoint(cfg.resume);
        tc.start = load_train_meta(cfg.resume);
        return loaded;
    }();
    const EmbeddingTable table = load_table(cfg, m.config().embed_dim, lex);

    const std::string ckpt = cfg.checkpoint_path();
    const std::string log_path = cfg.out + "/train_log.csv";
    const CheckpointFn save = [&](long long next, const ModelParams& mm, const TrainLog& lg) {
        save_checkpoint(mm, ckpt);
        save_train_meta(ckpt, next);
        write_train_log_csv(lg, log_path);
    };

    const TrainLog log =
        train(m, table, lex, built.data, built.split.cell(Cell::TrainActTrainDsc), tc, save);

    out << "trained iterations " << tc.start << ".." << tc.N << " ("
        << (m.config().identity_retrofit ? "prae" : "rprae") << ")\n";
    if (!log.records.empty()) {
        const TrainRecord& r = log.records.back();
        char buf[160];
        std::snprintf(buf, sizeof(buf), "final losses: dsc %.6g act %.6g shr %.6g all %.6g\n",
                      r.dsc, r.act, r.shr, r.all);
        out << buf;
    }
    out << "checkpoint: " << ckpt << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
    const SynonymLexicon lex = SynonymLexicon::builtin();
    require_file("checkpoint", cfg.checkpoint_path());
    const ModelParams m = load_checkpoint(cfg.checkpoint_path());
    require_file("dataset", cfg.dataset_path());
    const BuiltDataset built = load_dataset_jsonl(cfg.dataset_path());
    const EmbeddingTable table = load_table(cfg, m.config().embed_dim, lex);

    const EvalMode mode = cfg.mode == "act2dsc" ? EvalMode::ActToDsc : EvalMode::DscToAct;
    const EvalReport report = evaluate(m, table, lex, built, mode, cfg.eval_config());

    write_report_json(report, cfg.out + "/report_" + cfg.mode + ".json");
    write_report_csv(report, cfg.out + "/report_" + cfg.mode + ".csv");

    out << "mode: " << report.mode << "\n";
    size_t width = 0;
    for (const auto& [key, agg] : report.metrics) width = std::max(width, key.size());
    for (const auto& [key, agg] : report.metrics) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-*s  mean %10.4f  sd %9.4f  n %5d\n",
                      static_cast<int>(width), key.c_str(), agg.mean, agg.stdev, agg.n);
        out << buf;
    }
    return 0;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    const SynonymLexicon lex = SynonymLexicon::builtin();
    require_file("checkpoint", cfg.checkpoint_path());
    const ModelParams m = load_checkpoint(cfg.checkpoint_path());
    const EmbeddingTable table = load_table(cfg, m.config().embed_dim, lex);

    const EmbeddingAnalysis a = analyze_embeddings(m, table, lex);
    write_analysis_json(a, cfg.out + "/analysis.json");
    const auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream f(cfg.out + "/" + name, std::ios::binary);
        if (!f) throw Error("cannot write " + cfg.out + "/" + name);
        f << body;
    };
    write("heatmap_input.svg", svg_heatmap(a.cosine_input, lex.vocab()));
    write("heatmap_retro.svg", svg_heatmap(a.cosine_retro, lex.vocab()));
    write("scatter_input.svg", svg_scatter(a.pca_input, lex.vocab(), 0, 1));
    write("scatter_retro.svg", svg_scatter(a.pca_retro, lex.vocab(), 0, 1));

    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "cosine means   intra %7.4f -> %7.4f   inter %7.4f -> %7.4f\n"
                  "antonym cosine (slowly vs fast centroids) %7.4f -> %7.4f\n",
                  a.intra_before, a.intra_after, a.inter_before, a.inter_after, a.antonym_before,
                  a.antonym_after);
    out << buf;
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
    const std::vector<NamedGradCheck> checks = run_gradcheck_suite(cfg.seed);
    const NamedGradCheck* worst = nullptr;
    bool all_ok = true;
    for (const NamedGradCheck& c : checks) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-16s %s  max rel err %.3e\n", c.name.c_str(),
                      c.result.ok ? "ok  " : "FAIL", c.result.max_rel_err);
        out << buf;
        all_ok = all_ok && c.result.ok;
        if (!worst || c.result.max_rel_err > worst->result.max_rel_err) worst = &c;
    }
    if (worst)
        out << "worst: " << worst->name << " (" << worst->result.worst << ") rel err "
            << worst->result.max_rel_err << "\n";
    out << (all_ok ? "gradcheck: PASS\n" : "gradcheck: FAIL\n");
    return all_ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        if (args.empty()) {
            err << kUsage;
            return 2;
        }
        const std::string& command = args[0];
        if (command == "help" || command == "--help" || command == "-h") {
            out << kUsage;
            return 0;
        }
        static const std::set<std::string> known = {"gen-data", "train", "eval", "analyze",
                                                    "gradcheck"};
        if (!known.count(command)) throw UsageError("unknown command '" + command + "'");

        RunConfig cfg = parse_flags(args, 1);
        cfg.command = command;
        cfg.validate();
        prepare_out(cfg);

        if (command == "gen-data") return cmd_gen_data(cfg, out);
        if (command == "train") return cmd_train(cfg, out);
        if (command == "eval") return cmd_eval(cfg, out);
        if (command == "analyze") return cmd_analyze(cfg, out);
        return cmd_gradcheck(cfg, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        err << "run 'rprae help' for the flag list\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace rprae
