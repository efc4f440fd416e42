#include "rprae/model.hpp"

#include <algorithm>
#include <cmath>

#include "rprae/rng.hpp"

namespace rprae {

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full() {
    ModelConfig cfg;
    cfg.embed_dim = 300;
    cfg.hidden = 500;
    cfg.z_dim = 500;
    cfg.retrofit_hidden = 400;
    return cfg;
}

namespace {

Tensor xavier(Rng rng, int rows, int cols) {
    const double a = std::sqrt(6.0 / (rows + cols));
    Tensor t = Tensor::zeros({rows, cols});
    for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-a, a);
    return t;
}

Tensor lstm_bias(int units) {
    Tensor b = Tensor::zeros({4 * units});
    // Forget-gate block starts open so long sequences keep their state early
    // in training.
    for (int i = units; i < 2 * units; ++i) b[i] = 1.0;
    return b;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
    ModelParams m;
    m.cfg_ = cfg;
    Rng root(seed);
    auto w = [&](const std::string& name, int rows, int cols) {
        m.names_.push_back(name);
        m.params_.emplace(name, Param{xavier(root.split("init:" + name), rows, cols),
                                      ParamState({rows, cols})});
    };
    auto b = [&](const std::string& name, Tensor t) {
        Shape shape = t.shape();
        m.names_.push_back(name);
        m.params_.emplace(name, Param{std::move(t), ParamState(shape)});
    };

    const int u = cfg.hidden, E = cfg.embed_dim, z = cfg.z_dim, H = cfg.retrofit_hidden;
    const int A = cfg.action_input(), V = cfg.vocab, J = cfg.joint_dim;

    if (!cfg.identity_retrofit) {
        w("ret.w1", H, E);
        b("ret.b1", Tensor::zeros({H}));
        w("ret.w2", H, H);
        b("ret.b2", Tensor::zeros({H}));
        w("ret.w3", E, H);
        b("ret.b3", Tensor::zeros({E}));
    }

    for (const char* dir : {"fwd", "bwd"}) {
        w("dsc.enc." + std::string(dir) + ".wx", 4 * u, E);
        w("dsc.enc." + std::string(dir) + ".wh", 4 * u, u);
        b("dsc.enc." + std::string(dir) + ".b", lstm_bias(u));
        w("act.enc." + std::string(dir) + ".wx", 4 * u, A);
        w("act.enc." + std::string(dir) + ".wh", 4 * u, u);
        b("act.enc." + std::string(dir) + ".b", lstm_bias(u));
    }
    w("dsc.proj.w", z, 2 * u);
    b("dsc.proj.b", Tensor::zeros({z}));
    w("act.proj.w", z, 2 * u);
    b("act.proj.b", Tensor::zeros({z}));

    w("dsc.dec.wx", 4 * u, E);
    w("dsc.dec.wh", 4 * u, u);
    b("dsc.dec.b", lstm_bias(u));
    w("dsc.dec.init.w", u, z);
    b("dsc.dec.init.b", Tensor::zeros({u}));
    w("dsc.head.w", V, u);
    b("dsc.head.b", Tensor::zeros({V}));

    w("act.dec.wx", 4 * u, A);
    w("act.dec.wh", 4 * u, u);
    b("act.dec.b", lstm_bias(u));
    w("act.dec.init.w", u, z);
    b("act.dec.init.b", Tensor::zeros({u}));
    w("act.head.w", J, u);
    b("act.head.b", Tensor::zeros({J}));

    std::sort(m.names_.begin(), m.names_.end());
    return m;
}

Tensor& ModelParams::value(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw CompatError("no parameter named '" + name + "'");
    return it->second.value;
}

const Tensor& ModelParams::value(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw CompatError("no parameter named '" + name + "'");
    return it->second.value;
}

ParamState& ModelParams::state(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw CompatError("no parameter named '" + name + "'");
    return it->second.state;
}

const ParamState& ModelParams::state(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw CompatError("no parameter named '" + name + "'");
    return it->second.state;
}

void ModelParams::set_values(const std::vector<Tensor>& values) {
    if (values.size() != names_.size())
        throw ShapeError("set_values: expected " + std::to_string(names_.size()) + " tensors");
    for (size_t i = 0; i < names_.size(); ++i) {
        Tensor& dst = value(names_[i]);
        if (!dst.same_shape(values[i]))
            throw ShapeError("set_values: shape mismatch for " + names_[i]);
        dst = values[i];
    }
}

int BoundModel::id(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) throw CompatError("model not bound for parameter '" + name + "'");
    return it->second;
}

BoundModel bind_model(Tape& tape, const ModelParams& m, const EmbeddingTable& table,
                      const SynonymLexicon& lex) {
    if (table.dim() != m.config().embed_dim)
        throw CompatError("embedding dim " + std::to_string(table.dim()) + " does not match model dim " +
                          std::to_string(m.config().embed_dim));
    if (lex.vocab_size() != m.config().vocab)
        throw CompatError("lexicon vocabulary " + std::to_string(lex.vocab_size()) +
                          " does not match model vocabulary " + std::to_string(m.config().vocab));
    BoundModel bm;
    bm.tape = &tape;
    bm.model = &m;
    bm.table = &table;
    bm.lex = &lex;
    for (const auto& name : m.names()) bm.ids[name] = tape.leaf(m.value(name));
    return bm;
}

int retrofit_forward(const BoundModel& bm, int x) {
    if (bm.model->config().identity_retrofit) return x;
    Tape& t = *bm.tape;
    int h = t.tanh_(t.affine(bm.id("ret.w1"), x, bm.id("ret.b1")));
    h = t.tanh_(t.affine(bm.id("ret.w2"), h, bm.id("ret.b2")));
    return t.tanh_(t.affine(bm.id("ret.w3"), h, bm.id("ret.b3")));
}

int embed_token(const BoundModel& bm, const std::string& token) {
    const int idx = bm.lex->index_of(token);
    const auto& vec = bm.table->at(bm.lex->token_at(idx));
    int leaf = bm.tape->leaf(Tensor::vec(vec));
    return retrofit_forward(bm, leaf);
}

namespace {

LstmWeights weights_of(const BoundModel& bm, const std::string& prefix) {
    return {bm.id(prefix + ".wx"), bm.id(prefix + ".wh"), bm.id(prefix + ".b")};
}

int run_bilstm_projection(const BoundModel& bm, const std::vector<int>& xs, const std::string& enc,
                          const std::string& proj) {
    Tape& t = *bm.tape;
    const int u = bm.model->config().hidden;
    const LstmWeights wf = weights_of(bm, enc + ".fwd");
    const LstmWeights wb = weights_of(bm, enc + ".bwd");

    LstmState fwd{t.leaf(Tensor::zeros({u})), t.leaf(Tensor::zeros({u}))};
    for (int x : xs) fwd = lstm_step(t, x, fwd, wf, u);
    LstmState bwd{t.leaf(Tensor::zeros({u})), t.leaf(Tensor::zeros({u}))};
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) bwd = lstm_step(t, *it, bwd, wb, u);

    const int cat = t.concat(fwd.h, bwd.h);
    return t.tanh_(t.affine(bm.id(proj + ".w"), cat, bm.id(proj + ".b")));
}

int action_input_leaf(const BoundModel& bm, const double* joints, const std::vector<double>& visual) {
    const auto& cfg = bm.model->config();
    std::vector<double> row(static_cast<size_t>(cfg.action_input()));
    std::copy(joints, joints + cfg.joint_dim, row.begin());
    std::copy(visual.begin(), visual.end(), row.begin() + cfg.joint_dim);
    return bm.tape->leaf(Tensor::vec(std::move(row)));
}

void check_sequence(const BoundModel& bm, const ActionSequence& seq) {
    const auto& cfg = bm.model->config();
    if (seq.joints.rank() != 2 || seq.joints.dim(1) != cfg.joint_dim)
        throw ShapeError("action sequence joints must be [T," + std::to_string(cfg.joint_dim) + "]");
    if (static_cast<int>(seq.visual.size()) != cfg.visual_dim)
        throw ShapeError("action sequence visual must have length " + std::to_string(cfg.visual_dim));
    if (seq.joints.dim(0) < 2) throw ShapeError("action sequence needs at least 2 frames");
}

}  // namespace

int encode_description(const BoundModel& bm, const std::vector<std::string>& tokens) {
    if (tokens.size() < 2) throw ShapeError("encode_description: need at least 2 tokens");
    std::vector<int> xs;
    xs.reserve(tokens.size());
    for (const auto& tok : tokens) xs.push_back(embed_token(bm, tok));
    return run_bilstm_projection(bm, xs, "dsc.enc", "dsc.proj");
}

int encode_action(const BoundModel& bm, const ActionSequence& seq) {
    check_sequence(bm, seq);
    const int T = seq.joints.dim(0);
    const size_t J = static_cast<size_t>(bm.model->config().joint_dim);
    std::vector<int> xs;
    xs.reserve(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t)
        xs.push_back(action_input_leaf(bm, seq.joints.data() + static_cast<size_t>(t) * J, seq.visual));
    return run_bilstm_projection(bm, xs, "act.enc", "act.proj");
}

namespace {

LstmState decoder_start(const BoundModel& bm, int z, const std::string& dec) {
    Tape& t = *bm.tape;
    const int u = bm.model->config().hidden;
    int h0 = t.tanh_(t.affine(bm.id(dec + ".init.w"), z, bm.id(dec + ".init.b")));
    return {h0, t.leaf(Tensor::zeros({u}))};
}

}  // namespace

std::vector<int> teacher_force_description(const BoundModel& bm, int z,
                                           const std::vector<std::string>& tokens) {
    if (tokens.size() < 2) throw ShapeError("teacher_force_description: need at least 2 tokens");
    Tape& t = *bm.tape;
    const int u = bm.model->config().hidden;
    const LstmWeights w = weights_of(bm, "dsc.dec");
    LstmState st = decoder_start(bm, z, "dsc.dec");
    std::vector<int> dists;
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        st = lstm_step(t, embed_token(bm, tokens[i]), st, w, u);
        dists.push_back(t.softmax_(t.affine(bm.id("dsc.head.w"), st.h, bm.id("dsc.head.b"))));
    }
    return dists;
}

std::vector<int> teacher_force_action(const BoundModel& bm, int z, const ActionSequence& seq) {
    check_sequence(bm, seq);
    Tape& t = *bm.tape;
    const int u = bm.model->config().hidden;
    const LstmWeights w = weights_of(bm, "act.dec");
    LstmState st = decoder_start(bm, z, "act.dec");
    const int T = seq.joints.dim(0);
    const size_t J = static_cast<size_t>(bm.model->config().joint_dim);
    std::vector<int> preds;
    for (int i = 0; i + 1 < T; ++i) {
        int x = action_input_leaf(bm, seq.joints.data() + static_cast<size_t>(i) * J, seq.visual);
        st = lstm_step(t, x, st, w, u);
        preds.push_back(t.affine(bm.id("act.head.w"), st.h, bm.id("act.head.b")));
    }
    return preds;
}

DecodedDescription decode_description(const ModelParams& m, const EmbeddingTable& table,
                                      const SynonymLexicon& lex, const Tensor& z, int max_len) {
    if (z.size() != m.config().z_dim) throw ShapeError("decode_description: z has wrong length");
    Tape tape;
    BoundModel bm = bind_model(tape, m, table, lex);
    const int u = m.config().hidden;
    const LstmWeights w = weights_of(bm, "dsc.dec");
    LstmState st = decoder_start(bm, tape.leaf(z), "dsc.dec");

    DecodedDescription out;
    std::string current = SynonymLexicon::bos_token();
    for (int step = 0; step < max_len; ++step) {
        st = lstm_step(tape, embed_token(bm, current), st, w, u);
        const int dist = tape.softmax_(tape.affine(bm.id("dsc.head.w"), st.h, bm.id("dsc.head.b")));
        const Tensor& p = tape.value(dist);
        int arg = 0;
        for (int i = 1; i < p.size(); ++i)
            if (p[i] > p[arg]) arg = i;
        out.dists.push_back(p);
        out.tokens.push_back(lex.token_at(arg));
        if (arg == lex.eos_index()) break;
        current = lex.token_at(arg);
    }
    return out;
}

Tensor decode_action(const ModelParams& m, const Tensor& z, const std::vector<double>& initial_joints,
                     const std::vector<double>& visual, const StopConfig& stop) {
    const auto& cfg = m.config();
    if (z.size() != cfg.z_dim) throw ShapeError("decode_action: z has wrong length");
    if (static_cast<int>(initial_joints.size()) != cfg.joint_dim ||
        static_cast<int>(visual.size()) != cfg.visual_dim)
        throw ShapeError("decode_action: bad initial joints/visual length");
    if (stop.T_max < 1 || stop.patience < 1) throw UsageError("decode_action: bad stop config");

    Tape tape;
    // Only the action decoder runs here; bind just what it reads.
    BoundModel bm;
    bm.tape = &tape;
    bm.model = &m;
    for (const char* name : {"act.dec.wx", "act.dec.wh", "act.dec.b", "act.dec.init.w", "act.dec.init.b",
                             "act.head.w", "act.head.b"})
        bm.ids[name] = tape.leaf(m.value(name));

    const int u = cfg.hidden;
    const LstmWeights w = weights_of(bm, "act.dec");
    LstmState st = decoder_start(bm, tape.leaf(z), "act.dec");

    std::vector<std::vector<double>> frames;
    std::vector<double> prev = initial_joints;
    for (auto& v : prev) v = std::min(0.8, std::max(-0.8, v));
    frames.push_back(prev);

    int quiet = 0;
    while (static_cast<int>(frames.size()) < stop.T_max) {
        const int x = action_input_leaf(bm, prev.data(), visual);
        st = lstm_step(tape, x, st, w, u);
        const int out = tape.affine(bm.id("act.head.w"), st.h, bm.id("act.head.b"));
        const Tensor& o = tape.value(out);
        std::vector<double> next(static_cast<size_t>(cfg.joint_dim));
        double delta = 0;
        for (int d = 0; d < cfg.joint_dim; ++d) {
            next[static_cast<size_t>(d)] = std::min(0.8, std::max(-0.8, o[d]));
            delta = std::max(delta, std::fabs(next[static_cast<size_t>(d)] - prev[static_cast<size_t>(d)]));
        }
        frames.push_back(next);
        prev = std::move(next);
        if (delta < stop.eps) {
            if (++quiet >= stop.patience) break;
        } else {
            quiet = 0;
        }
    }

    Tensor joints = Tensor::zeros({static_cast<int>(frames.size()), cfg.joint_dim});
    for (size_t t = 0; t < frames.size(); ++t)
        for (int d = 0; d < cfg.joint_dim; ++d)
            joints.data()[t * static_cast<size_t>(cfg.joint_dim) + static_cast<size_t>(d)] =
                frames[t][static_cast<size_t>(d)];
    return joints;
}

int loss_dsc(const BoundModel& bm, const std::vector<int>& dists, const std::vector<std::string>& tokens) {
    if (dists.size() + 1 != tokens.size())
        throw ShapeError("loss_dsc: need one distribution per next-token target");
    if (dists.empty()) throw ShapeError("loss_dsc: need at least one step");
    Tape& t = *bm.tape;
    int acc = -1;
    for (size_t i = 0; i < dists.size(); ++i) {
        const int target = bm.lex->index_of(tokens[i + 1]);
        const int lp = t.log_(t.pick(dists[i], target));
        acc = acc < 0 ? lp : t.add(acc, lp);
    }
    return t.scale(acc, -1.0 / static_cast<double>(dists.size()));
}

int loss_act(const BoundModel& bm, const std::vector<int>& preds, const ActionSequence& seq) {
    const int T = seq.joints.dim(0);
    if (static_cast<int>(preds.size()) + 1 != T)
        throw ShapeError("loss_act: need one prediction per next frame");
    if (preds.empty()) throw ShapeError("loss_act: need at least one step");
    Tape& t = *bm.tape;
    const size_t J = static_cast<size_t>(bm.model->config().joint_dim);
    int acc = -1;
    for (size_t i = 0; i < preds.size(); ++i) {
        std::vector<double> row(seq.joints.data() + (i + 1) * J, seq.joints.data() + (i + 2) * J);
        const int target = t.leaf(Tensor::vec(std::move(row)));
        const int d = t.sub(preds[i], target);
        const int sq = t.dot(d, d);
        acc = acc < 0 ? sq : t.add(acc, sq);
    }
    return t.scale(acc, 1.0 / static_cast<double>(preds.size()));
}

int loss_shr(Tape& tape, const std::vector<int>& z_act, const std::vector<int>& z_dsc, double margin) {
    if (z_act.size() != z_dsc.size() || z_act.empty())
        throw ShapeError("loss_shr: need equal nonzero batch sizes");
    const size_t K = z_act.size();
    std::vector<int> matched(K);
    int acc = -1;
    for (size_t k = 0; k < K; ++k) {
        matched[k] = tape.distance(z_act[k], z_dsc[k]);
        acc = acc < 0 ? matched[k] : tape.add(acc, matched[k]);
    }
    for (size_t k = 0; k < K; ++k)
        for (size_t j = 0; j < K; ++j) {
            if (j == k) continue;
            const int cross = tape.distance(z_act[k], z_dsc[j]);
            const int hinge = tape.relu_(tape.add_const(tape.sub(matched[k], cross), margin));
            acc = tape.add(acc, hinge);
        }
    return acc;
}

ActionSequence with_hold_tail(const ActionSequence& seq, int frames) {
    if (frames < 0) throw UsageError("with_hold_tail: negative tail");
    if (seq.joints.rank() != 2 || seq.joints.dim(0) < 1)
        throw ShapeError("with_hold_tail: joints must be [T,d], T >= 1");
    const int T = seq.joints.dim(0), d = seq.joints.dim(1);
    ActionSequence out;
    out.joints = Tensor::zeros({T + frames, d});
    std::copy(seq.joints.data(), seq.joints.data() + seq.joints.size(), out.joints.data());
    const double* last = seq.joints.data() + static_cast<size_t>(T - 1) * d;
    for (int t = T; t < T + frames; ++t)
        std::copy(last, last + d, out.joints.data() + static_cast<size_t>(t) * d);
    out.visual = seq.visual;
    out.length = T + frames;
    return out;
}

BatchLosses batch_losses(const BoundModel& bm, const PairedDataset& data,
                         const std::vector<int>& sample_indices, double margin, int hold_tail) {
    if (sample_indices.empty()) throw UsageError("batch_losses: empty batch");
    Tape& t = *bm.tape;
    std::vector<int> z_act, z_dsc;
    int acc_dsc = -1, acc_act = -1;
    for (int idx : sample_indices) {
        const auto& s = data.samples[static_cast<size_t>(idx)];
        const auto& seq = data.seq_of(s);
        const ActionSequence held = with_hold_tail(seq, hold_tail);
        const int zd = encode_description(bm, s.description.tokens);
        const int za = encode_action(bm, seq);
        z_dsc.push_back(zd);
        z_act.push_back(za);
        const int ld = loss_dsc(bm, teacher_force_description(bm, zd, s.description.tokens),
                                s.description.tokens);
        const int la = loss_act(bm, teacher_force_action(bm, za, held), held);
        acc_dsc = acc_dsc < 0 ? ld : t.add(acc_dsc, ld);
        acc_act = acc_act < 0 ? la : t.add(acc_act, la);
    }
    const double inv = 1.0 / static_cast<double>(sample_indices.size());
    BatchLosses out;
    out.dsc = t.scale(acc_dsc, inv);
    out.act = t.scale(acc_act, inv);
    out.shr = loss_shr(t, z_act, z_dsc, margin);
    out.all = t.add(t.add(out.dsc, out.act), out.shr);
    return out;
}

}  // namespace rprae
