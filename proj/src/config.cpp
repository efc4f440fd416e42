#include "rprae/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rprae/errors.hpp"

namespace rprae {

RunConfig RunConfig::preset(const std::string& scale) {
    RunConfig c;
    c.scale = scale;
    if (scale == "desk") {
        c.N = 5000;
        c.batch = 16;
    } else if (scale == "full") {
        c.N = 17300;
        c.batch = 120;
    } else {
        throw UsageError("config: unknown scale '" + scale + "' (want desk|full)");
    }
    return c;
}

void RunConfig::validate() const {
    if (scale != "desk" && scale != "full")
        throw UsageError("config: unknown scale '" + scale + "' (want desk|full)");
    if (fold < 1 || fold > 5) throw UsageError("config: fold must be in 1..5");
    if (threads < 1) throw UsageError("config: threads must be >= 1");
    if (mode != "act2dsc" && mode != "dsc2act")
        throw UsageError("config: unknown mode '" + mode + "' (want act2dsc|dsc2act)");
    if (out.empty()) throw UsageError("config: output directory must not be empty");
    if (embeddings.empty()) throw UsageError("config: embeddings must not be empty");
    if (N < 0) throw UsageError("config: N must be >= 0");
    if (n_ini < 0 || static_cast<long long>(n_ini) > N)
        throw UsageError("config: n_ini must be in 0..N");
    if (n_ch < 1) throw UsageError("config: n_ch must be >= 1");
    if (batch < 2) throw UsageError("config: batch must be >= 2");
    if (!(lr > 0)) throw UsageError("config: lr must be > 0");
    if (margin < 0) throw UsageError("config: margin must be >= 0");
    if (checkpoint_every < 0) throw UsageError("config: checkpoint_every must be >= 0");
    if (hold_tail < 0) throw UsageError("config: hold_tail must be >= 0");
}

DataConfig RunConfig::data_config() const {
    DataConfig d = scale == "full" ? DataConfig::full_scale() : DataConfig::desk_scale();
    d.seed = seed;
    d.fold = fold;
    return d;
}

ModelConfig RunConfig::model_config() const {
    ModelConfig m = scale == "full" ? ModelConfig::full() : ModelConfig::desk();
    m.identity_retrofit = prae;
    return m;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.N = N;
    t.n_ini = n_ini;
    t.n_ch = n_ch;
    t.lr = lr;
    t.batch = batch;
    t.margin = margin;
    t.seed = seed;
    t.checkpoint_every = checkpoint_every;
    t.hold_tail = hold_tail;
    return t;
}

EvalConfig RunConfig::eval_config() const {
    EvalConfig e;
    e.test_word_set = fold;
    e.task.speed_threshold = scale == "full" ? 30 : 16;
    e.stop.T_max = data_config().traj.T_slow + 8;
    e.threads = threads;
    return e;
}

std::string RunConfig::dataset_path() const {
    return dataset.empty() ? out + "/dataset.jsonl" : dataset;
}

std::string RunConfig::checkpoint_path() const {
    return checkpoint.empty() ? out + "/checkpoint.json" : checkpoint;
}

RunConfig run_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config: top level must be an object");

    // The scale key picks the preset the remaining keys overlay.
    RunConfig c = RunConfig::preset(j.value("scale", std::string("desk")));
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "command")
                c.command = val.get<std::string>();
            else if (key == "scale")
                c.scale = val.get<std::string>();
            else if (key == "fold")
                c.fold = val.get<int>();
            else if (key == "seed")
                c.seed = val.get<std::uint64_t>();
            else if (key == "out")
                c.out = val.get<std::string>();
            else if (key == "threads")
                c.threads = val.get<int>();
            else if (key == "embeddings")
                c.embeddings = val.get<std::string>();
            else if (key == "prae")
                c.prae = val.get<bool>();
            else if (key == "N")
                c.N = val.get<long long>();
            else if (key == "n_ini")
                c.n_ini = val.get<int>();
            else if (key == "n_ch")
                c.n_ch = val.get<int>();
            else if (key == "lr")
                c.lr = val.get<double>();
            else if (key == "batch")
                c.batch = val.get<int>();
            else if (key == "margin")
                c.margin = val.get<double>();
            else if (key == "checkpoint_every")
                c.checkpoint_every = val.get<long long>();
            else if (key == "hold_tail")
                c.hold_tail = val.get<int>();
            else if (key == "dataset")
                c.dataset = val.get<std::string>();
            else if (key == "checkpoint")
                c.checkpoint = val.get<std::string>();
            else if (key == "resume")
                c.resume = val.get<std::string>();
            else if (key == "mode")
                c.mode = val.get<std::string>();
            else
                throw ParseError("config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return c;
}

std::string run_config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["scale"] = c.scale;
    j["fold"] = c.fold;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["threads"] = c.threads;
    j["embeddings"] = c.embeddings;
    j["prae"] = c.prae;
    j["N"] = c.N;
    j["n_ini"] = c.n_ini;
    j["n_ch"] = c.n_ch;
    j["lr"] = c.lr;
    j["batch"] = c.batch;
    j["margin"] = c.margin;
    j["checkpoint_every"] = c.checkpoint_every;
    j["hold_tail"] = c.hold_tail;
    j["dataset"] = c.dataset;
    j["checkpoint"] = c.checkpoint;
    j["resume"] = c.resume;
    j["mode"] = c.mode;
    return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return run_config_from_json(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("config: cannot write " + path);
    out << run_config_to_json(cfg);
}

}  // namespace rprae
