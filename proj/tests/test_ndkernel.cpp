#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "rprae/adam.hpp"
#include "rprae/gradcheck.hpp"
#include "rprae/graph.hpp"
#include "rprae/rng.hpp"
#include "rprae/tensor.hpp"

using namespace rprae;

namespace {

Tensor rand_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    Tensor t = Tensor::zeros(shape);
    for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Keep elements away from zero so relu/sqrt kinks stay out of the FD window.
Tensor rand_tensor_off_zero(Rng& rng, Shape shape) {
    Tensor t = Tensor::zeros(shape);
    for (int i = 0; i < t.size(); ++i) {
        double v = rng.uniform(0.2, 1.0);
        t[i] = rng.next_double() < 0.5 ? -v : v;
    }
    return t;
}

}  // namespace

TEST_SUITE("ndkernel") {

TEST_CASE("tensor checked construction") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
    CHECK_THROWS_AS(Tensor({0}, {}), ShapeError);
    CHECK_THROWS_AS(Tensor({-1, 3}, {1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor({1}, {std::nan("")}), NumericError);
    CHECK_THROWS_AS(Tensor({1}, {INFINITY}), NumericError);

    Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(t.rank() == 2);
    CHECK(t.dim(0) == 2);
    CHECK(t.dim(1) == 3);
    CHECK(t.at2(1, 2) == 6.0);
    CHECK(t.shape_str() == "[2x3]");

    Tensor z = Tensor::zeros({3, 4});
    CHECK(z.size() == 12);
    for (int i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);

    Tensor f = Tensor::full({2}, 7.5);
    CHECK(f[0] == 7.5);
    CHECK(f[1] == 7.5);

    CHECK(t.bit_equal(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6})));
    CHECK_FALSE(t.bit_equal(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 7})));
    CHECK_FALSE(t.bit_equal(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6})));
}

TEST_CASE("matmul forward hand values") {
    Tape tape;
    int a = tape.leaf(Tensor::matrix(2, 2, {1, 2, 3, 4}));
    int b = tape.leaf(Tensor::matrix(2, 2, {5, 6, 7, 8}));
    int c = tape.matmul(a, b);
    const Tensor& v = tape.value(c);
    CHECK(v.at2(0, 0) == 19.0);
    CHECK(v.at2(0, 1) == 22.0);
    CHECK(v.at2(1, 0) == 43.0);
    CHECK(v.at2(1, 1) == 50.0);

    CHECK_THROWS_AS(tape.matmul(a, tape.leaf(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}))), ShapeError);
}

TEST_CASE("matvec and affine forward") {
    Tape tape;
    int m = tape.leaf(Tensor::matrix(2, 3, {1, 0, -1, 2, 1, 0}));
    int x = tape.leaf(Tensor::vec({3, 4, 5}));
    int y = tape.matvec(m, x);
    CHECK(tape.value(y)[0] == -2.0);
    CHECK(tape.value(y)[1] == 10.0);

    int b = tape.leaf(Tensor::vec({0.5, -0.5}));
    int z = tape.affine(m, x, b);
    CHECK(tape.value(z)[0] == -1.5);
    CHECK(tape.value(z)[1] == 9.5);
}

TEST_CASE("softmax forward") {
    Tape tape;
    int a = tape.leaf(Tensor::vec({0.0, std::log(2.0)}));
    int s = tape.softmax_(a);
    CHECK(std::fabs(tape.value(s)[0] - 1.0 / 3.0) < 1e-12);
    CHECK(std::fabs(tape.value(s)[1] - 2.0 / 3.0) < 1e-12);

    // Shift invariance and normalization even far out in the tails.
    int big = tape.leaf(Tensor::vec({1000.0, 1001.0, 999.0}));
    int sb = tape.softmax_(big);
    double total = 0;
    for (int i = 0; i < 3; ++i) total += tape.value(sb)[i];
    CHECK(std::fabs(total - 1.0) < 1e-12);
    int shifted = tape.leaf(Tensor::vec({0.0, 1.0, -1.0}));
    int ss = tape.softmax_(shifted);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(tape.value(sb)[i] - tape.value(ss)[i]) < 1e-12);
}

TEST_CASE("elementwise forward basics") {
    Tape tape;
    int a = tape.leaf(Tensor::vec({1.0, -2.0, 0.5}));
    int b = tape.leaf(Tensor::vec({2.0, 3.0, -1.0}));
    CHECK(tape.value(tape.add(a, b))[1] == 1.0);
    CHECK(tape.value(tape.sub(a, b))[0] == -1.0);
    CHECK(tape.value(tape.mul(a, b))[2] == -0.5);
    CHECK(tape.value(tape.scale(a, -2.0))[1] == 4.0);
    CHECK(tape.value(tape.add_const(a, 1.5))[2] == 2.0);
    CHECK(tape.value(tape.relu_(a))[1] == 0.0);
    CHECK(tape.value(tape.relu_(a))[0] == 1.0);
    CHECK(tape.value(tape.square_(a))[1] == 4.0);
    CHECK(tape.value(tape.sum(a))[0] == -0.5);
    CHECK(tape.value(tape.dot(a, b))[0] == doctest::Approx(2.0 - 6.0 - 0.5));
    CHECK(tape.value(tape.pick(a, 1))[0] == -2.0);

    int cat = tape.concat(a, b);
    CHECK(tape.value(cat).size() == 6);
    CHECK(tape.value(cat)[4] == 3.0);
    int sl = tape.slice(cat, 2, 3);
    CHECK(tape.value(sl)[0] == 0.5);
    CHECK(tape.value(sl)[1] == 2.0);

    CHECK_THROWS_AS(tape.slice(cat, 4, 3), ShapeError);
    CHECK_THROWS_AS(tape.add(a, tape.leaf(Tensor::vec({1.0, 2.0}))), ShapeError);
    CHECK_THROWS_AS(tape.log_(tape.leaf(Tensor::vec({1.0, 0.0}))), NumericError);
    CHECK_THROWS_AS(tape.sqrt_(tape.leaf(Tensor::vec({-1.0}))), NumericError);
}

TEST_CASE("distance forward") {
    Tape tape;
    int a = tape.leaf(Tensor::vec({1.0, 2.0, 2.0}));
    int b = tape.leaf(Tensor::vec({1.0, 0.0, 0.0}));
    CHECK(std::fabs(tape.value(tape.distance(a, b))[0] - std::sqrt(8.0)) < 1e-12);
    CHECK(tape.value(tape.distance(a, a))[0] == 0.0);
}

TEST_CASE("backward basics") {
    Tape tape;
    int a = tape.leaf(Tensor::vec({2.0, -3.0}));
    int unused = tape.leaf(Tensor::vec({1.0, 1.0, 1.0}));
    int loss = tape.sum(tape.square_(a));
    auto grads = tape.backward(loss);

    CHECK(grads[static_cast<size_t>(loss)][0] == 1.0);
    CHECK(grads[static_cast<size_t>(a)][0] == 4.0);
    CHECK(grads[static_cast<size_t>(a)][1] == -6.0);
    // Off-path node: zero gradient of its own shape.
    CHECK(grads[static_cast<size_t>(unused)].size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(grads[static_cast<size_t>(unused)][i] == 0.0);

    int vecnode = tape.add(a, a);
    CHECK_THROWS_AS(tape.backward(vecnode), ShapeError);
}

TEST_CASE("distance backward has no singularity at zero") {
    Tape tape;
    int a = tape.leaf(Tensor::vec({0.3, -0.7}));
    int loss = tape.distance(a, a);
    auto grads = tape.backward(loss);
    for (int i = 0; i < 2; ++i) CHECK(std::isfinite(grads[static_cast<size_t>(a)][i]));
}

TEST_CASE("gradcheck elementwise chain") {
    Rng rng(101);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Tensor> leaves = {rand_tensor_off_zero(rng, {5}), rand_tensor_off_zero(rng, {5})};
        auto fn = [](Tape& t, const std::vector<Tensor>& in) {
            int a = t.leaf(in[0]);
            int b = t.leaf(in[1]);
            int u = t.mul(t.tanh_(a), t.sigmoid_(b));
            int v = t.add(t.relu_(a), t.scale(b, 0.3));
            int w = t.sub(t.square_(u), t.add_const(v, 0.1));
            return t.sum(t.mul(w, w));
        };
        auto res = grad_check(fn, leaves);
        CAPTURE(res.worst);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("gradcheck matrix ops") {
    Rng rng(202);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Tensor> leaves = {rand_tensor(rng, {3, 4}), rand_tensor(rng, {4, 2}),
                                      rand_tensor(rng, {4}), rand_tensor(rng, {3})};
        auto fn = [](Tape& t, const std::vector<Tensor>& in) {
            int A = t.leaf(in[0]);
            int B = t.leaf(in[1]);
            int x = t.leaf(in[2]);
            int b = t.leaf(in[3]);
            int C = t.matmul(A, B);           // [3,2]
            int y = t.affine(A, x, b);        // [3]
            int z = t.tanh_(t.matvec(A, x));  // [3]
            return t.add(t.sum(t.square_(C)), t.dot(y, z));
        };
        auto res = grad_check(fn, leaves);
        CAPTURE(res.worst);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("gradcheck softmax log pick") {
    Rng rng(303);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Tensor> leaves = {rand_tensor(rng, {6}, -2.0, 2.0)};
        int idx = static_cast<int>(rng.next_below(6));
        auto fn = [idx](Tape& t, const std::vector<Tensor>& in) {
            int a = t.leaf(in[0]);
            int p = t.softmax_(a);
            return t.scale(t.pick(t.log_(p), idx), -1.0);
        };
        auto res = grad_check(fn, leaves);
        CAPTURE(res.worst);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("gradcheck concat slice sqrt distance") {
    Rng rng(404);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Tensor> leaves = {rand_tensor(rng, {4}), rand_tensor(rng, {3})};
        auto fn = [](Tape& t, const std::vector<Tensor>& in) {
            int a = t.leaf(in[0]);
            int b = t.leaf(in[1]);
            int cat = t.concat(a, b);  // [7]
            int head = t.slice(cat, 0, 3);
            int tail = t.slice(cat, 4, 3);
            int d = t.distance(head, tail);
            int s = t.sqrt_(t.add_const(t.square_(b), 0.5));
            return t.add(d, t.sum(s));
        };
        auto res = grad_check(fn, leaves);
        CAPTURE(res.worst);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("lstm zero weights hand values") {
    const int units = 4, dim = 3;
    Tape tape;
    LstmWeights w;
    w.wx = tape.leaf(Tensor::zeros({4 * units, dim}));
    w.wh = tape.leaf(Tensor::zeros({4 * units, units}));
    w.b = tape.leaf(Tensor::zeros({4 * units}));
    LstmState st;
    st.h = tape.leaf(Tensor::zeros({units}));
    st.c = tape.leaf(Tensor::full({units}, 1.0));
    int x = tape.leaf(Tensor::vec({0.7, -0.3, 0.1}));

    LstmState nx = lstm_step(tape, x, st, w, units);
    // All gates sigmoid(0)=0.5, candidate tanh(0)=0:
    //   c' = 0.5*1 = 0.5,  h' = 0.5*tanh(0.5).
    const double h_expect = 0.5 * std::tanh(0.5);
    for (int i = 0; i < units; ++i) {
        CHECK(std::fabs(tape.value(nx.c)[i] - 0.5) < 1e-12);
        CHECK(std::fabs(tape.value(nx.h)[i] - h_expect) < 1e-12);
        CHECK(std::fabs(tape.value(nx.h)[i] - 0.23105857863) < 1e-9);
    }
}

TEST_CASE("lstm forget bias shifts the forget gate") {
    const int units = 2, dim = 2;
    Tape tape;
    Tensor bias = Tensor::zeros({4 * units});
    for (int i = units; i < 2 * units; ++i) bias[i] = 1.0;  // forget block
    LstmWeights w;
    w.wx = tape.leaf(Tensor::zeros({4 * units, dim}));
    w.wh = tape.leaf(Tensor::zeros({4 * units, units}));
    w.b = tape.leaf(bias);
    LstmState st;
    st.h = tape.leaf(Tensor::zeros({units}));
    st.c = tape.leaf(Tensor::full({units}, 1.0));
    int x = tape.leaf(Tensor::zeros({dim}));
    LstmState nx = lstm_step(tape, x, st, w, units);
    const double f = 1.0 / (1.0 + std::exp(-1.0));
    for (int i = 0; i < units; ++i) CHECK(std::fabs(tape.value(nx.c)[i] - f) < 1e-12);
}

TEST_CASE("gradcheck lstm step") {
    Rng rng(505);
    const int units = 3, dim = 2;
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<Tensor> leaves = {
            rand_tensor(rng, {4 * units, dim}, -0.5, 0.5), rand_tensor(rng, {4 * units, units}, -0.5, 0.5),
            rand_tensor(rng, {4 * units}, -0.5, 0.5),      rand_tensor(rng, {dim}),
            rand_tensor(rng, {units}),                     rand_tensor(rng, {units})};
        auto fn = [units](Tape& t, const std::vector<Tensor>& in) {
            LstmWeights w{t.leaf(in[0]), t.leaf(in[1]), t.leaf(in[2])};
            int x = t.leaf(in[3]);
            LstmState st{t.leaf(in[4]), t.leaf(in[5])};
            LstmState s1 = lstm_step(t, x, st, w, units);
            LstmState s2 = lstm_step(t, x, s1, w, units);  // two steps share weights
            return t.sum(t.square_(s2.h));
        };
        auto res = grad_check(fn, leaves);
        CAPTURE(res.worst);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("backward determinism is bitwise") {
    auto run = [] {
        Rng rng(77);
        Tape tape;
        int A = tape.leaf(rand_tensor(rng, {8, 8}));
        int x = tape.leaf(rand_tensor(rng, {8}));
        int h = tape.tanh_(tape.matvec(A, x));
        int loss = tape.sum(tape.square_(tape.softmax_(h)));
        return tape.backward(loss);
    };
    auto g1 = run();
    auto g2 = run();
    REQUIRE(g1.size() == g2.size());
    for (size_t i = 0; i < g1.size(); ++i) CHECK(g1[i].bit_equal(g2[i]));
}

TEST_CASE("adam first step magnitude") {
    AdamConfig cfg;
    Tensor p = Tensor::vec({0.5, -0.25});
    Tensor g = Tensor::vec({1.0, -2.0});
    ParamState st(p.shape());
    adam_step(p, g, st, cfg);
    CHECK(st.step == 1);
    // With zero moments the bias-corrected first step is lr * g/(|g|+eps).
    CHECK(std::fabs((0.5 - p[0]) - cfg.lr * 1.0 / (1.0 + cfg.eps)) < 1e-15);
    CHECK(std::fabs((-0.25 - p[1]) - (-cfg.lr) * 2.0 / (2.0 + cfg.eps)) < 1e-15);
    CHECK(std::fabs(p[0] - 0.499) < 1e-9);
}

TEST_CASE("adam zero lr advances state but not params") {
    AdamConfig cfg;
    cfg.lr = 0.0;
    Tensor p = Tensor::vec({0.1, 0.2, 0.3});
    Tensor before = p;
    Tensor g = Tensor::vec({1.0, -1.0, 0.5});
    ParamState st(p.shape());
    adam_step(p, g, st, cfg);
    adam_step(p, g, st, cfg);
    CHECK(p.bit_equal(before));
    CHECK(st.step == 2);
    CHECK(st.m[0] != 0.0);
    CHECK(st.v[0] != 0.0);
}

TEST_CASE("adam minimizes a quadratic") {
    AdamConfig cfg;
    cfg.lr = 0.05;
    Tensor p = Tensor::vec({-4.0});
    ParamState st(p.shape());
    for (int i = 0; i < 800; ++i) {
        Tensor g = Tensor::vec({2.0 * (p[0] - 3.0)});
        adam_step(p, g, st, cfg);
    }
    CHECK(std::fabs(p[0] - 3.0) < 1e-3);
}

TEST_CASE("adam per-parameter step counters") {
    AdamConfig cfg;
    Tensor pa = Tensor::vec({1.0});
    Tensor pb = Tensor::vec({1.0});
    ParamState sa(pa.shape()), sb(pb.shape());
    Tensor g = Tensor::vec({0.5});
    adam_step(pa, g, sa, cfg);
    adam_step(pa, g, sa, cfg);
    adam_step(pb, g, sb, cfg);
    CHECK(sa.step == 2);
    CHECK(sb.step == 1);
    CHECK(pa[0] != pb[0]);
}

TEST_CASE("rng split depends on seed and label only") {
    Rng parent(42);
    Rng child_fresh = parent.split("weights");
    // Burn parent state; the child derived afterwards must be identical.
    for (int i = 0; i < 100; ++i) parent.next_u64();
    Rng child_late = parent.split("weights");
    for (int i = 0; i < 16; ++i) CHECK(child_fresh.next_u64() == child_late.next_u64());

    Rng a = Rng(42).split("a");
    Rng b = Rng(42).split("b");
    CHECK(a.next_u64() != b.next_u64());

    Rng i3 = Rng(42).split(std::uint64_t{3});
    Rng i4 = Rng(42).split(std::uint64_t{4});
    CHECK(i3.next_u64() != i4.next_u64());

    Rng other(43);
    CHECK(Rng(42).split("x").next_u64() != other.split("x").next_u64());
}

TEST_CASE("rng sequences are reproducible") {
    Rng a(2026), b(2026);
    for (int i = 0; i < 32; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(2027);
    bool same = true;
    Rng d(2026);
    for (int i = 0; i < 8; ++i) same = same && (c.next_u64() == d.next_u64());
    CHECK_FALSE(same);
}

TEST_CASE("rng ranges") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = rng.uniform(-2.0, 3.0);
        CHECK(v >= -2.0);
        CHECK(v < 3.0);
    }
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 500; ++i) {
        std::uint64_t k = rng.next_below(5);
        CHECK(k < 5);
        seen.insert(k);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("rng gaussian moments") {
    Rng rng(99);
    const int n = 20000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
        double x = rng.gaussian(1.0, 2.0);
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(std::fabs(mean - 1.0) < 0.1);
    CHECK(std::fabs(std::sqrt(var) - 2.0) < 0.1);
}

}  // TEST_SUITE
