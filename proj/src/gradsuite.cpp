#include "rprae/gradsuite.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "rprae/embedding.hpp"
#include "rprae/model.hpp"
#include "rprae/rng.hpp"

namespace rprae {

namespace {

Tensor rand_tensor(Rng& rng, Shape shape, double lo, double hi) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Keeps relu inputs off the kink at zero.
Tensor rand_signed_away_from_zero(Rng& rng, Shape shape) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (int i = 0; i < t.size(); ++i) {
        const double mag = rng.uniform(0.2, 1.5);
        t[i] = rng.next_below(2) == 0 ? mag : -mag;
    }
    return t;
}

int leaves_in_order(Tape& tape, const std::vector<Tensor>& vals) {
    int last = -1;
    for (const Tensor& v : vals) last = tape.leaf(v);
    return last;
}

struct Case {
    std::string name;
    std::vector<Tensor> leaves;
    ScalarFn fn;
};

std::vector<Case> op_cases(std::uint64_t seed) {
    std::vector<Case> cases;
    auto rng_for = [seed](const std::string& name) { return Rng(seed).split("gradsuite:" + name); };
    auto push = [&](std::string name, std::vector<Tensor> leaves, ScalarFn fn) {
        cases.push_back({std::move(name), std::move(leaves), std::move(fn)});
    };

    {
        Rng r = rng_for("matmul");
        push("op:matmul", {rand_tensor(r, {3, 4}, -1, 1), rand_tensor(r, {4, 2}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.sum(t.matmul(0, 1));
             });
    }
    {
        Rng r = rng_for("matvec");
        push("op:matvec", {rand_tensor(r, {3, 4}, -1, 1), rand_tensor(r, {4}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.sum(t.matvec(0, 1));
             });
    }
    {
        Rng r = rng_for("affine");
        push("op:affine",
             {rand_tensor(r, {3, 4}, -1, 1), rand_tensor(r, {4}, -1, 1), rand_tensor(r, {3}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.sum(t.affine(0, 1, 2));
             });
    }
    {
        Rng r = rng_for("add");
        push("op:add", {rand_tensor(r, {2, 3}, -1, 1), rand_tensor(r, {2, 3}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.sum(t.square_(t.add(0, 1)));
             });
    }
    {
        Rng r = rng_for("sub");
        push("op:sub", {rand_tensor(r, {5}, -1, 1), rand_tensor(r, {5}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.sum(t.square_(t.sub(0, 1)));
             });
    }
    {
        Rng r = rng_for("mul");
        push("op:mul", {rand_tensor(r, {5}, -1, 1), rand_tensor(r, {5}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.sum(t.mul(0, 1));
             });
    }
    {
        Rng r = rng_for("scale");
        push("op:scale", {rand_tensor(r, {4}, -1, 1)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.scale(0, 1.7));
        });
    }
    {
        Rng r = rng_for("add_const");
        push("op:add_const", {rand_tensor(r, {4}, -1, 1)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.square_(t.add_const(0, 0.3)));
        });
    }
    {
        Rng r = rng_for("tanh");
        push("op:tanh", {rand_tensor(r, {5}, -2, 2)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.tanh_(0));
        });
    }
    {
        Rng r = rng_for("sigmoid");
        push("op:sigmoid", {rand_tensor(r, {5}, -2, 2)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.sigmoid_(0));
        });
    }
    {
        Rng r = rng_for("relu");
        push("op:relu", {rand_signed_away_from_zero(r, {6})},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.sum(t.relu_(0));
             });
    }
    {
        Rng r = rng_for("log");
        push("op:log", {rand_tensor(r, {5}, 0.5, 2.0)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.log_(0));
        });
    }
    {
        Rng r = rng_for("sqrt");
        push("op:sqrt", {rand_tensor(r, {5}, 0.5, 2.0)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.sqrt_(0));
        });
    }
    {
        Rng r = rng_for("square");
        push("op:square", {rand_tensor(r, {5}, -1.5, 1.5)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.square_(0));
        });
    }
    {
        Rng r = rng_for("softmax");
        push("op:softmax", {rand_tensor(r, {6}, -2, 2)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            // Pick one logit so the softmax Jacobian is exercised off-diagonal.
            return t.log_(t.pick(t.softmax_(0), 2));
        });
    }
    {
        Rng r = rng_for("concat");
        push("op:concat", {rand_tensor(r, {3}, -1, 1), rand_tensor(r, {4}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 const int c = t.concat(0, 1);
                 return t.dot(c, c);
             });
    }
    {
        Rng r = rng_for("slice");
        push("op:slice", {rand_tensor(r, {6}, -1, 1)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.sum(t.square_(t.slice(0, 1, 3)));
        });
    }
    {
        Rng r = rng_for("sum");
        push("op:sum", {rand_tensor(r, {7}, -1, 1)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.square_(t.sum(0));
        });
    }
    {
        Rng r = rng_for("dot");
        push("op:dot", {rand_tensor(r, {4}, -1, 1), rand_tensor(r, {4}, -1, 1)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.dot(0, 1);
             });
    }
    {
        Rng r = rng_for("pick");
        push("op:pick", {rand_tensor(r, {5}, -1, 1)}, [](Tape& t, const std::vector<Tensor>& v) {
            leaves_in_order(t, v);
            return t.scale(t.pick(0, 3), 1.3);
        });
    }
    {
        Rng r = rng_for("distance");
        push("op:distance", {rand_tensor(r, {4}, -1, 1), rand_tensor(r, {4}, 1.5, 2.5)},
             [](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 return t.distance(0, 1);
             });
    }
    {
        const int u = 2, d = 3;
        Rng r = rng_for("lstm_step");
        push("op:lstm_step",
             {rand_tensor(r, {d}, -1, 1), rand_tensor(r, {4 * u, d}, -0.5, 0.5),
              rand_tensor(r, {4 * u, u}, -0.5, 0.5), rand_tensor(r, {4 * u}, -0.5, 0.5),
              rand_tensor(r, {u}, -0.5, 0.5), rand_tensor(r, {u}, -0.5, 0.5)},
             [u](Tape& t, const std::vector<Tensor>& v) {
                 leaves_in_order(t, v);
                 const LstmState s = lstm_step(t, 0, {4, 5}, {1, 2, 3}, u);
                 return t.add(t.sum(s.h), t.sum(s.c));
             });
    }
    return cases;
}

// The three losses through the whole model, matched-pair batch of two.
std::vector<Case> loss_cases(std::uint64_t seed) {
    ModelConfig mc;
    mc.embed_dim = 4;
    mc.hidden = 3;
    mc.z_dim = 3;
    mc.retrofit_hidden = 3;

    const auto lex = std::make_shared<SynonymLexicon>(SynonymLexicon::builtin());
    Rng trng = Rng(seed).split("gradsuite:table");
    auto table = std::make_shared<EmbeddingTable>(mc.embed_dim);
    for (const auto& w : lex->vocab()) {
        std::vector<double> vec(static_cast<size_t>(mc.embed_dim));
        for (double& x : vec) x = trng.uniform(-1.0, 1.0);
        table->add(w, std::move(vec));
    }
    const auto base = std::make_shared<ModelParams>(ModelParams::init(mc, seed ^ 0x9e37));

    auto toks = std::make_shared<std::vector<std::vector<std::string>>>(
        std::vector<std::vector<std::string>>{{"BOS", "pull", "red", "EOS"}, {"BOS", "fast", "EOS"}});
    auto seqs = std::make_shared<std::vector<ActionSequence>>();
    Rng srng = Rng(seed).split("gradsuite:seq");
    for (int T : {3, 4}) {
        ActionSequence s;
        s.joints = rand_tensor(srng, {T, 10}, -0.7, 0.7);
        s.visual.resize(10);
        for (double& x : s.visual) x = srng.uniform(-0.5, 0.5);
        s.length = T;
        seqs->push_back(std::move(s));
    }

    std::vector<Tensor> leaves;
    for (const auto& n : base->names()) leaves.push_back(base->value(n));

    enum Which { Dsc, Act, Shr };
    auto make_fn = [=](Which which) {
        return [=](Tape& tape, const std::vector<Tensor>& vals) {
            ModelParams mm = *base;
            mm.set_values(vals);
            BoundModel bm = bind_model(tape, mm, *table, *lex);
            std::vector<int> za, zd;
            int acc_d = -1, acc_a = -1;
            for (size_t i = 0; i < toks->size(); ++i) {
                const int z_d = encode_description(bm, (*toks)[i]);
                const int z_a = encode_action(bm, (*seqs)[i]);
                zd.push_back(z_d);
                za.push_back(z_a);
                const int ld = loss_dsc(bm, teacher_force_description(bm, z_d, (*toks)[i]), (*toks)[i]);
                const int la = loss_act(bm, teacher_force_action(bm, z_a, (*seqs)[i]), (*seqs)[i]);
                acc_d = acc_d < 0 ? ld : tape.add(acc_d, ld);
                acc_a = acc_a < 0 ? la : tape.add(acc_a, la);
            }
            switch (which) {
                case Dsc: return tape.scale(acc_d, 0.5);
                case Act: return tape.scale(acc_a, 0.5);
                default: return loss_shr(tape, za, zd, 1.0);
            }
        };
    };

    return {
        {"loss:dsc", leaves, make_fn(Dsc)},
        {"loss:act", leaves, make_fn(Act)},
        {"loss:shr", leaves, make_fn(Shr)},
    };
}

}  // namespace

std::vector<NamedGradCheck> run_gradcheck_suite(std::uint64_t seed) {
    std::vector<NamedGradCheck> out;
    for (auto& c : op_cases(seed)) out.push_back({c.name, grad_check(c.fn, c.leaves)});
    for (auto& c : loss_cases(seed)) out.push_back({c.name, grad_check(c.fn, c.leaves)});
    return out;
}

}  // namespace rprae
