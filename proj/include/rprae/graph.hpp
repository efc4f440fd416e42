#pragma once

#include <utility>
#include <vector>

#include "rprae/tensor.hpp"

namespace rprae {

// Reverse-mode autodiff over a linear tape of nodes. Node ids are indices
// into the tape, so topological order is construction order by definition.
// Tensors cached on nodes are the forward activations; backward() replays
// the tape in reverse and returns one gradient per node.
//
// All ops are fp64 and deterministic: the same tape always produces
// bit-identical values and gradients.
class Tape {
  public:
    enum class Op : unsigned char {
        Leaf,
        MatMul,    // [m,k] x [k,n] -> [m,n]
        MatVec,    // [m,n] x [n]   -> [m]
        Affine,    // [m,n] x [n] + [m] -> [m]
        Add,
        Sub,
        Mul,       // elementwise
        Scale,     // t * const
        AddConst,  // t + const
        Tanh,
        Sigmoid,
        Relu,
        Log,
        Sqrt,
        Square,
        Softmax,   // rank-1, max-subtraction stabilized
        Concat,    // rank-1 pair
        Slice,     // rank-1 window
        Sum,       // -> [1]
        Dot,       // rank-1 pair -> [1]
        Pick,      // rank-1 element -> [1]
    };

    struct Node {
        Op op = Op::Leaf;
        int a = -1, b = -1, c = -1;  // input node ids
        int i0 = 0, i1 = 0;          // slice offset/length, pick index
        double x = 0.0;              // scale factor / added constant
        Tensor value;
    };

    int leaf(Tensor t);

    int matmul(int a, int b);
    int matvec(int m, int v);
    int affine(int m, int v, int bias);
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    int scale(int a, double s);
    int add_const(int a, double s);
    int tanh_(int a);
    int sigmoid_(int a);
    int relu_(int a);
    int log_(int a);
    int sqrt_(int a);
    int square_(int a);
    int softmax_(int a);
    int concat(int a, int b);
    int slice(int a, int from, int len);
    int sum(int a);
    int dot(int a, int b);
    int pick(int a, int index);

    // Euclidean distance between two rank-1 nodes; sqrt backward is guarded
    // near zero so coincident vectors do not produce NaN gradients.
    int distance(int a, int b);

    const Tensor& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
    const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
    int size() const { return static_cast<int>(nodes_.size()); }
    void reserve(int n) { nodes_.reserve(static_cast<size_t>(n)); }

    // Gradients of the scalar node `loss` w.r.t. every node on the tape;
    // nodes that do not reach the loss get zero tensors of their own shape.
    std::vector<Tensor> backward(int loss) const;

  private:
    int push(Node n);
    const Tensor& in(int id) const { return nodes_[static_cast<size_t>(id)].value; }
    void check_id(int id, const char* who) const;

    std::vector<Node> nodes_;
};

// One LSTM cell. Weight node ids: wx [4u x d], wh [4u x u], b [4u]; gate
// layout along the 4u axis is [input, forget, candidate, output].
// c' = sigmoid(f) * c + sigmoid(i) * tanh(g);  h' = sigmoid(o) * tanh(c').
struct LstmWeights {
    int wx = -1;
    int wh = -1;
    int b = -1;
};

struct LstmState {
    int h = -1;
    int c = -1;
};

LstmState lstm_step(Tape& tape, int x, LstmState state, const LstmWeights& w, int units);

}  // namespace rprae
