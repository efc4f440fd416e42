#include "rprae/graph.hpp"

#include <algorithm>
#include <cmath>

namespace rprae {

namespace {

// Four-accumulator dot product: breaks the dependency chain so the compiler
// can keep the FPU busy; the summation order is fixed, so results stay
// bit-reproducible.
double dot_n(const double* a, const double* b, int n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    int j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    double tail = 0;
    for (; j < n; ++j) tail += a[j] * b[j];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

void axpy(double alpha, const double* x, double* y, int n) {
    for (int j = 0; j < n; ++j) y[j] += alpha * x[j];
}

double stable_sigmoid(double v) {
    if (v >= 0) {
        double e = std::exp(-v);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

void Tape::check_id(int id, const char* who) const {
    if (id < 0 || id >= size()) throw ShapeError(std::string(who) + ": bad node id");
}

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Tensor t) {
    if (t.empty()) throw ShapeError("leaf: empty tensor");
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(t);
    return push(std::move(n));
}

int Tape::matmul(int a, int b) {
    check_id(a, "matmul");
    check_id(b, "matmul");
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (A.rank() != 2 || B.rank() != 2)
        throw ShapeError("matmul: need rank-2 operands, got " + A.shape_str() + " and " + B.shape_str());
    if (A.dim(1) != B.dim(0))
        throw ShapeError("matmul: inner dims differ, " + A.shape_str() + " vs " + B.shape_str());
    const int m = A.dim(0), k = A.dim(1), n = B.dim(1);
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        const double* arow = A.data() + static_cast<size_t>(i) * k;
        double* orow = out.data() + static_cast<size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            axpy(arow[p], B.data() + static_cast<size_t>(p) * n, orow, n);
        }
    }
    Node nd;
    nd.op = Op::MatMul;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::matvec(int m, int v) {
    check_id(m, "matvec");
    check_id(v, "matvec");
    const Tensor& A = in(m);
    const Tensor& x = in(v);
    if (A.rank() != 2 || x.rank() != 1)
        throw ShapeError("matvec: need matrix and vector, got " + A.shape_str() + " and " + x.shape_str());
    if (A.dim(1) != x.dim(0))
        throw ShapeError("matvec: dims differ, " + A.shape_str() + " vs " + x.shape_str());
    const int rows = A.dim(0), cols = A.dim(1);
    Tensor out = Tensor::zeros({rows});
    for (int i = 0; i < rows; ++i)
        out[i] = dot_n(A.data() + static_cast<size_t>(i) * cols, x.data(), cols);
    Node nd;
    nd.op = Op::MatVec;
    nd.a = m;
    nd.b = v;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::affine(int m, int v, int bias) {
    check_id(m, "affine");
    check_id(v, "affine");
    check_id(bias, "affine");
    const Tensor& A = in(m);
    const Tensor& x = in(v);
    const Tensor& b = in(bias);
    if (A.rank() != 2 || x.rank() != 1 || b.rank() != 1)
        throw ShapeError("affine: need matrix, vector, vector");
    if (A.dim(1) != x.dim(0) || A.dim(0) != b.dim(0))
        throw ShapeError("affine: dims differ, " + A.shape_str() + ", " + x.shape_str() + ", " + b.shape_str());
    const int rows = A.dim(0), cols = A.dim(1);
    Tensor out = Tensor::zeros({rows});
    for (int i = 0; i < rows; ++i)
        out[i] = dot_n(A.data() + static_cast<size_t>(i) * cols, x.data(), cols) + b[i];
    Node nd;
    nd.op = Op::Affine;
    nd.a = m;
    nd.b = v;
    nd.c = bias;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::add(int a, int b) {
    check_id(a, "add");
    check_id(b, "add");
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (!A.same_shape(B)) throw ShapeError("add: shapes differ, " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = A[i] + B[i];
    Node nd;
    nd.op = Op::Add;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::sub(int a, int b) {
    check_id(a, "sub");
    check_id(b, "sub");
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (!A.same_shape(B)) throw ShapeError("sub: shapes differ, " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = A[i] - B[i];
    Node nd;
    nd.op = Op::Sub;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::mul(int a, int b) {
    check_id(a, "mul");
    check_id(b, "mul");
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (!A.same_shape(B)) throw ShapeError("mul: shapes differ, " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = A[i] * B[i];
    Node nd;
    nd.op = Op::Mul;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::scale(int a, double s) {
    check_id(a, "scale");
    if (!std::isfinite(s)) throw NumericError("scale: non-finite factor");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = A[i] * s;
    Node nd;
    nd.op = Op::Scale;
    nd.a = a;
    nd.x = s;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::add_const(int a, double s) {
    check_id(a, "add_const");
    if (!std::isfinite(s)) throw NumericError("add_const: non-finite constant");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = A[i] + s;
    Node nd;
    nd.op = Op::AddConst;
    nd.a = a;
    nd.x = s;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::tanh_(int a) {
    check_id(a, "tanh");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = std::tanh(A[i]);
    Node nd;
    nd.op = Op::Tanh;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::sigmoid_(int a) {
    check_id(a, "sigmoid");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = stable_sigmoid(A[i]);
    Node nd;
    nd.op = Op::Sigmoid;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::relu_(int a) {
    check_id(a, "relu");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = A[i] > 0 ? A[i] : 0.0;
    Node nd;
    nd.op = Op::Relu;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::log_(int a) {
    check_id(a, "log");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) {
        if (A[i] <= 0.0) throw NumericError("log: non-positive argument");
        out[i] = std::log(A[i]);
    }
    Node nd;
    nd.op = Op::Log;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::sqrt_(int a) {
    check_id(a, "sqrt");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) {
        if (A[i] < 0.0) throw NumericError("sqrt: negative argument");
        out[i] = std::sqrt(A[i]);
    }
    Node nd;
    nd.op = Op::Sqrt;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::square_(int a) {
    check_id(a, "square");
    const Tensor& A = in(a);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < A.size(); ++i) out[i] = A[i] * A[i];
    Node nd;
    nd.op = Op::Square;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::softmax_(int a) {
    check_id(a, "softmax");
    const Tensor& A = in(a);
    if (A.rank() != 1) throw ShapeError("softmax: need rank-1, got " + A.shape_str());
    const int n = A.size();
    double mx = A[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, A[i]);
    Tensor out = Tensor::zeros({n});
    double denom = 0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::exp(A[i] - mx);
        denom += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] /= denom;
    Node nd;
    nd.op = Op::Softmax;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::concat(int a, int b) {
    check_id(a, "concat");
    check_id(b, "concat");
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (A.rank() != 1 || B.rank() != 1) throw ShapeError("concat: need rank-1 operands");
    Tensor out = Tensor::zeros({A.size() + B.size()});
    std::copy(A.data(), A.data() + A.size(), out.data());
    std::copy(B.data(), B.data() + B.size(), out.data() + A.size());
    Node nd;
    nd.op = Op::Concat;
    nd.a = a;
    nd.b = b;
    nd.i0 = A.size();
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::slice(int a, int from, int len) {
    check_id(a, "slice");
    const Tensor& A = in(a);
    if (A.rank() != 1) throw ShapeError("slice: need rank-1 operand");
    if (from < 0 || len <= 0 || from + len > A.size())
        throw ShapeError("slice: window [" + std::to_string(from) + "," + std::to_string(from + len) +
                         ") out of range for " + A.shape_str());
    Tensor out = Tensor::zeros({len});
    std::copy(A.data() + from, A.data() + from + len, out.data());
    Node nd;
    nd.op = Op::Slice;
    nd.a = a;
    nd.i0 = from;
    nd.i1 = len;
    nd.value = std::move(out);
    return push(std::move(nd));
}

int Tape::sum(int a) {
    check_id(a, "sum");
    const Tensor& A = in(a);
    double s = 0;
    for (int i = 0; i < A.size(); ++i) s += A[i];
    Node nd;
    nd.op = Op::Sum;
    nd.a = a;
    nd.value = Tensor::scalar(s);
    return push(std::move(nd));
}

int Tape::dot(int a, int b) {
    check_id(a, "dot");
    check_id(b, "dot");
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (A.rank() != 1 || B.rank() != 1 || A.size() != B.size())
        throw ShapeError("dot: need equal-length vectors, got " + A.shape_str() + " and " + B.shape_str());
    Node nd;
    nd.op = Op::Dot;
    nd.a = a;
    nd.b = b;
    nd.value = Tensor::scalar(dot_n(A.data(), B.data(), A.size()));
    return push(std::move(nd));
}

int Tape::pick(int a, int index) {
    check_id(a, "pick");
    const Tensor& A = in(a);
    if (A.rank() != 1) throw ShapeError("pick: need rank-1 operand");
    if (index < 0 || index >= A.size()) throw ShapeError("pick: index out of range");
    Node nd;
    nd.op = Op::Pick;
    nd.a = a;
    nd.i0 = index;
    nd.value = Tensor::scalar(A[index]);
    return push(std::move(nd));
}

int Tape::distance(int a, int b) {
    int d = sub(a, b);
    return sqrt_(dot(d, d));
}

std::vector<Tensor> Tape::backward(int loss) const {
    check_id(loss, "backward");
    if (in(loss).size() != 1) throw ShapeError("backward: loss must be scalar, got " + in(loss).shape_str());

    std::vector<Tensor> grads(nodes_.size());
    std::vector<char> touched(nodes_.size(), 0);
    for (size_t i = 0; i < nodes_.size(); ++i) grads[i] = Tensor::zeros(nodes_[i].value.shape());
    grads[static_cast<size_t>(loss)][0] = 1.0;
    touched[static_cast<size_t>(loss)] = 1;

    auto touch = [&](int id) { touched[static_cast<size_t>(id)] = 1; };

    for (int id = loss; id >= 0; --id) {
        if (!touched[static_cast<size_t>(id)]) continue;
        const Node& nd = nodes_[static_cast<size_t>(id)];
        const Tensor& g = grads[static_cast<size_t>(id)];
        switch (nd.op) {
            case Op::Leaf:
                break;
            case Op::MatMul: {
                const Tensor& A = in(nd.a);
                const Tensor& B = in(nd.b);
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                Tensor& gB = grads[static_cast<size_t>(nd.b)];
                const int m = A.dim(0), k = A.dim(1), n = B.dim(1);
                // gA += g * B^T ; gB += A^T * g
                for (int i = 0; i < m; ++i) {
                    const double* grow = g.data() + static_cast<size_t>(i) * n;
                    double* garow = gA.data() + static_cast<size_t>(i) * k;
                    for (int p = 0; p < k; ++p)
                        garow[p] += dot_n(grow, B.data() + static_cast<size_t>(p) * n, n);
                    const double* arow = A.data() + static_cast<size_t>(i) * k;
                    for (int p = 0; p < k; ++p)
                        axpy(arow[p], grow, gB.data() + static_cast<size_t>(p) * n, n);
                }
                touch(nd.a);
                touch(nd.b);
                break;
            }
            case Op::MatVec:
            case Op::Affine: {
                const Tensor& A = in(nd.a);
                const Tensor& x = in(nd.b);
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                Tensor& gx = grads[static_cast<size_t>(nd.b)];
                const int rows = A.dim(0), cols = A.dim(1);
                for (int i = 0; i < rows; ++i) {
                    const double gi = g[i];
                    if (gi != 0.0) {
                        axpy(gi, x.data(), gA.data() + static_cast<size_t>(i) * cols, cols);
                        axpy(gi, A.data() + static_cast<size_t>(i) * cols, gx.data(), cols);
                    }
                }
                touch(nd.a);
                touch(nd.b);
                if (nd.op == Op::Affine) {
                    Tensor& gb = grads[static_cast<size_t>(nd.c)];
                    for (int i = 0; i < rows; ++i) gb[i] += g[i];
                    touch(nd.c);
                }
                break;
            }
            case Op::Add: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                Tensor& gB = grads[static_cast<size_t>(nd.b)];
                for (int i = 0; i < g.size(); ++i) {
                    gA[i] += g[i];
                    gB[i] += g[i];
                }
                touch(nd.a);
                touch(nd.b);
                break;
            }
            case Op::Sub: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                Tensor& gB = grads[static_cast<size_t>(nd.b)];
                for (int i = 0; i < g.size(); ++i) {
                    gA[i] += g[i];
                    gB[i] -= g[i];
                }
                touch(nd.a);
                touch(nd.b);
                break;
            }
            case Op::Mul: {
                const Tensor& A = in(nd.a);
                const Tensor& B = in(nd.b);
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                Tensor& gB = grads[static_cast<size_t>(nd.b)];
                for (int i = 0; i < g.size(); ++i) {
                    gA[i] += g[i] * B[i];
                    gB[i] += g[i] * A[i];
                }
                touch(nd.a);
                touch(nd.b);
                break;
            }
            case Op::Scale: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i) gA[i] += g[i] * nd.x;
                touch(nd.a);
                break;
            }
            case Op::AddConst: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i) gA[i] += g[i];
                touch(nd.a);
                break;
            }
            case Op::Tanh: {
                const Tensor& y = nd.value;
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i) gA[i] += g[i] * (1.0 - y[i] * y[i]);
                touch(nd.a);
                break;
            }
            case Op::Sigmoid: {
                const Tensor& y = nd.value;
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i) gA[i] += g[i] * y[i] * (1.0 - y[i]);
                touch(nd.a);
                break;
            }
            case Op::Relu: {
                const Tensor& xin = in(nd.a);
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i)
                    if (xin[i] > 0) gA[i] += g[i];
                touch(nd.a);
                break;
            }
            case Op::Log: {
                const Tensor& xin = in(nd.a);
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i) gA[i] += g[i] / xin[i];
                touch(nd.a);
                break;
            }
            case Op::Sqrt: {
                const Tensor& y = nd.value;
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i)
                    gA[i] += g[i] * 0.5 / std::max(y[i], 1e-12);
                touch(nd.a);
                break;
            }
            case Op::Square: {
                const Tensor& xin = in(nd.a);
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < g.size(); ++i) gA[i] += g[i] * 2.0 * xin[i];
                touch(nd.a);
                break;
            }
            case Op::Softmax: {
                const Tensor& y = nd.value;
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                double inner = 0;
                for (int i = 0; i < g.size(); ++i) inner += g[i] * y[i];
                for (int i = 0; i < g.size(); ++i) gA[i] += y[i] * (g[i] - inner);
                touch(nd.a);
                break;
            }
            case Op::Concat: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                Tensor& gB = grads[static_cast<size_t>(nd.b)];
                for (int i = 0; i < nd.i0; ++i) gA[i] += g[i];
                for (int i = nd.i0; i < g.size(); ++i) gB[i - nd.i0] += g[i];
                touch(nd.a);
                touch(nd.b);
                break;
            }
            case Op::Slice: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                for (int i = 0; i < nd.i1; ++i) gA[nd.i0 + i] += g[i];
                touch(nd.a);
                break;
            }
            case Op::Sum: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                const double gs = g[0];
                for (int i = 0; i < gA.size(); ++i) gA[i] += gs;
                touch(nd.a);
                break;
            }
            case Op::Dot: {
                const Tensor& A = in(nd.a);
                const Tensor& B = in(nd.b);
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                Tensor& gB = grads[static_cast<size_t>(nd.b)];
                const double gs = g[0];
                for (int i = 0; i < A.size(); ++i) {
                    gA[i] += gs * B[i];
                    gB[i] += gs * A[i];
                }
                touch(nd.a);
                touch(nd.b);
                break;
            }
            case Op::Pick: {
                Tensor& gA = grads[static_cast<size_t>(nd.a)];
                gA[nd.i0] += g[0];
                touch(nd.a);
                break;
            }
        }
    }
    return grads;
}

LstmState lstm_step(Tape& tape, int x, LstmState state, const LstmWeights& w, int units) {
    const int pre = tape.affine(w.wx, x, w.b);
    const int rec = tape.matvec(w.wh, state.h);
    const int gates = tape.add(pre, rec);
    if (tape.value(gates).size() != 4 * units)
        throw ShapeError("lstm_step: gate vector size does not match units");
    const int gi = tape.sigmoid_(tape.slice(gates, 0, units));
    const int gf = tape.sigmoid_(tape.slice(gates, units, units));
    const int gg = tape.tanh_(tape.slice(gates, 2 * units, units));
    const int go = tape.sigmoid_(tape.slice(gates, 3 * units, units));
    const int c_next = tape.add(tape.mul(gf, state.c), tape.mul(gi, gg));
    const int h_next = tape.mul(go, tape.tanh_(c_next));
    return {h_next, c_next};
}

}  // namespace rprae
