#include "rprae/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "rprae/adam.hpp"
#include "rprae/rng.hpp"

namespace rprae {

const char* to_string(UpdateTarget t) { return t == UpdateTarget::AE ? "AE" : "RET"; }

UpdateTarget update_target(long long i, long long n_ini, long long n_ch) {
    if (i < 0) throw UsageError("update_target: negative iteration");
    if (n_ch < 1) throw UsageError("update_target: n_ch must be >= 1");
    if (i < n_ini || ((i - n_ini) / n_ch) % 2 == 1) return UpdateTarget::AE;
    return UpdateTarget::RET;
}

TrainConfig TrainConfig::full_scale() { return TrainConfig{}; }

TrainConfig TrainConfig::desk_scale() {
    TrainConfig cfg;
    cfg.N = 5000;
    cfg.batch = 16;
    return cfg;
}

namespace {

void validate(const TrainConfig& cfg, size_t pool) {
    if (cfg.N < 0) throw UsageError("train: N must be >= 0");
    if (cfg.n_ini < 0 || cfg.n_ini > cfg.N) throw UsageError("train: need 0 <= n_ini <= N");
    if (cfg.n_ch < 1) throw UsageError("train: n_ch must be >= 1");
    if (cfg.batch < 2) throw UsageError("train: batch must be >= 2 (binding loss needs negatives)");
    if (cfg.lr <= 0) throw UsageError("train: lr must be positive");
    if (cfg.margin < 0) throw UsageError("train: negative margin");
    if (cfg.hold_tail < 0) throw UsageError("train: negative hold_tail");
    if (cfg.start < 0 || cfg.start > cfg.N) throw UsageError("train: need 0 <= start <= N");
    if (pool == 0) throw UsageError("train: empty training cell");
}

}  // namespace

TrainLog train(ModelParams& m, const EmbeddingTable& table, const SynonymLexicon& lex,
               const PairedDataset& data, const std::vector<int>& train_indices,
               const TrainConfig& cfg, const CheckpointFn& on_checkpoint) {
    validate(cfg, train_indices.size());
    AdamConfig ac;
    ac.lr = cfg.lr;
    TrainLog log;

    for (long long i = cfg.start; i < cfg.N; ++i) {
        Rng brng = Rng(cfg.seed).split("batch").split(static_cast<std::uint64_t>(i));
        std::vector<int> batch(static_cast<size_t>(cfg.batch));
        for (auto& b : batch)
            b = train_indices[static_cast<size_t>(brng.next_below(train_indices.size()))];

        Tape tape;
        tape.reserve(2048 * cfg.batch);
        BoundModel bm = bind_model(tape, m, table, lex);
        const BatchLosses bl = batch_losses(bm, data, batch, cfg.margin, cfg.hold_tail);

        TrainRecord rec;
        rec.iter = i;
        rec.target = update_target(i, cfg.n_ini, cfg.n_ch);
        rec.dsc = tape.value(bl.dsc)[0];
        rec.act = tape.value(bl.act)[0];
        rec.shr = tape.value(bl.shr)[0];
        rec.all = tape.value(bl.all)[0];
        log.records.push_back(rec);
        if (!std::isfinite(rec.all))
            throw NumericError("train: non-finite loss at iteration " + std::to_string(i));

        const auto grads = tape.backward(bl.all);
        const bool want_ret = rec.target == UpdateTarget::RET;
        for (const auto& name : m.names()) {
            if (ModelParams::is_retrofit(name) != want_ret) continue;
            adam_step(m.value(name), grads[static_cast<size_t>(bm.id(name))], m.state(name), ac);
        }

        if (on_checkpoint && cfg.checkpoint_every > 0 && (i + 1) % cfg.checkpoint_every == 0 &&
            i + 1 < cfg.N)
            on_checkpoint(i + 1, m, log);
    }
    if (on_checkpoint) on_checkpoint(cfg.N, m, log);
    return log;
}

void write_train_log_csv(const TrainLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "iter,target,L_dsc,L_act,L_shr,L_all\n";
    char buf[160];
    for (const auto& r : log.records) {
        std::snprintf(buf, sizeof buf, "%lld,%s,%.17g,%.17g,%.17g,%.17g", r.iter, to_string(r.target),
                      r.dsc, r.act, r.shr, r.all);
        out << buf << "\n";
    }
}

namespace {

nlohmann::json tensor_data(const Tensor& t) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < t.size(); ++i) a.push_back(t[i]);
    return a;
}

nlohmann::json shape_json(const Tensor& t) {
    nlohmann::json a = nlohmann::json::array();
    for (int d = 0; d < t.rank(); ++d) a.push_back(t.dim(d));
    return a;
}

Tensor tensor_from(const nlohmann::json& shape, const nlohmann::json& data, const std::string& name) {
    Shape s;
    for (const auto& d : shape) s.push_back(d.get<int>());
    Tensor t = Tensor::zeros(s);
    if (static_cast<size_t>(t.size()) != data.size())
        throw ParseError("checkpoint: element count mismatch for " + name);
    for (int i = 0; i < t.size(); ++i) t[i] = data[static_cast<size_t>(i)].get<double>();
    return t;
}

}  // namespace

void save_checkpoint(const ModelParams& m, const std::string& path) {
    const ModelConfig& c = m.config();
    nlohmann::json j;
    j["version"] = 1;
    j["config"] = {{"embed_dim", c.embed_dim},
                   {"hidden", c.hidden},
                   {"z_dim", c.z_dim},
                   {"retrofit_hidden", c.retrofit_hidden},
                   {"vocab", c.vocab},
                   {"joint_dim", c.joint_dim},
                   {"visual_dim", c.visual_dim},
                   {"identity_retrofit", c.identity_retrofit}};
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json adam = nlohmann::json::object();
    for (const auto& name : m.names()) {
        const Tensor& v = m.value(name);
        params[name] = {{"shape", shape_json(v)}, {"data", tensor_data(v)}};
        const ParamState& st = m.state(name);
        adam[name] = {{"m", tensor_data(st.m)}, {"v", tensor_data(st.v)}, {"step", st.step}};
    }
    j["params"] = params;
    j["adam"] = adam;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read checkpoint " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path + ": " + e.what());
    }
    try {
        if (!j.contains("version") || j.at("version").get<int>() != 1)
            throw CompatError("checkpoint " + path + ": unsupported version");
        const auto& jc = j.at("config");
        ModelConfig cfg;
        cfg.embed_dim = jc.at("embed_dim").get<int>();
        cfg.hidden = jc.at("hidden").get<int>();
        cfg.z_dim = jc.at("z_dim").get<int>();
        cfg.retrofit_hidden = jc.at("retrofit_hidden").get<int>();
        cfg.vocab = jc.at("vocab").get<int>();
        cfg.joint_dim = jc.at("joint_dim").get<int>();
        cfg.visual_dim = jc.at("visual_dim").get<int>();
        cfg.identity_retrofit = jc.at("identity_retrofit").get<bool>();

        ModelParams m = ModelParams::init(cfg, 0);
        const auto& jp = j.at("params");
        const auto& ja = j.at("adam");
        if (jp.size() != m.names().size() || ja.size() != m.names().size())
            throw ParseError("checkpoint " + path + ": parameter set mismatch");
        for (const auto& name : m.names()) {
            if (!jp.contains(name) || !ja.contains(name))
                throw ParseError("checkpoint " + path + ": missing parameter " + name);
            const auto& pj = jp.at(name);
            Tensor v = tensor_from(pj.at("shape"), pj.at("data"), name);
            if (!v.same_shape(m.value(name)))
                throw ParseError("checkpoint " + path + ": bad shape for " + name);
            m.value(name) = std::move(v);
            const auto& aj = ja.at(name);
            ParamState& st = m.state(name);
            Tensor am = tensor_from(pj.at("shape"), aj.at("m"), name + ".m");
            Tensor av = tensor_from(pj.at("shape"), aj.at("v"), name + ".v");
            st = ParamState(std::move(am), std::move(av), aj.at("step").get<long long>());
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path + ": " + e.what());
    }
}

void save_train_meta(const std::string& ckpt_path, long long next_iteration) {
    nlohmann::json j;
    j["next_iteration"] = next_iteration;
    std::ofstream out(ckpt_path + ".meta.json");
    if (!out) throw Error("cannot write " + ckpt_path + ".meta.json");
    out << j.dump() << "\n";
}

long long load_train_meta(const std::string& ckpt_path) {
    std::ifstream in(ckpt_path + ".meta.json");
    if (!in) throw ParseError("cannot read " + ckpt_path + ".meta.json");
    nlohmann::json j;
    try {
        in >> j;
        return j.at("next_iteration").get<long long>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("train meta " + ckpt_path + ": " + e.what());
    }
}

ModelConfig ablate_prae(ModelConfig cfg) {
    cfg.identity_retrofit = true;
    return cfg;
}

}  // namespace rprae
