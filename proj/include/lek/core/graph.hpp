#pragma once

#include <functional>
#include <vector>

#include "lek/core/kernels.hpp"
#include "lek/core/tensor.hpp"

namespace lek::core {

struct Var {
    long id = -1;
    bool valid() const { return id >= 0; }
};

// Eager reverse-mode tape. Ops execute immediately through the kernel layer
// and append a node; backward() walks the tape in reverse. A Graph is built
// per training/optimization step and discarded.
class Graph {
public:
    Var input(Tensor value, bool requires_grad = false);

    const Tensor& value(Var v) const { return node(v).value; }
    const Tensor& grad(Var v) const;
    bool has_grad(Var v) const { return node(v).grad_alloc; }
    double scalar(Var v) const { return node(v).value.at(0); }

    void backward(Var root);

    // elementwise / scalar
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var tanh_(Var a);
    Var sigmoid_(Var a);
    Var smooth_abs(Var a, double eps); // sqrt(x^2 + eps^2) - eps, exact 0 at 0

    // reductions (deterministic block sums)
    Var sum(Var a);
    Var mean(Var a);
    Var dot(Var a, Var b);
    Var sse(Var a, Var b); // sum of squared differences
    Var mse(Var a, Var b);
    Var sum_maps(Var a); // (n,H,W) -> (n)

    // linear algebra
    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b); // a * b^T
    Var matvec(Var w, Var x);    // (m,k) * (k) -> (m)
    Var add_row_bias(Var x, Var b);
    Var softmax_rows(Var a);

    // shape plumbing
    Var reshape(Var a, std::vector<long> shape);
    Var slice(Var a, long start, long len); // flat range
    Var concat(Var a, Var b);               // flat

    // image ops
    Var conv2d(Var in, Var w, Var bias, long stride, long pad);
    Var upsample2x(Var in);
    Var resize_bilinear(Var in, long out_h, long out_w);
    Var channel_affine(Var x, Var gain, Var bias); // per-channel y = x*g[c]+b[c]
    Var splat(Var centers, Var paint, Var sigma_px, long grid);
    Var heatmaps(Var centers, double sigma_px, long grid);

    long num_nodes() const { return static_cast<long>(nodes_.size()); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        bool grad_alloc = false;
        std::function<void(Graph&)> back;
    };

    Node& node(Var v) { return nodes_[static_cast<size_t>(v.id)]; }
    const Node& node(Var v) const { return nodes_[static_cast<size_t>(v.id)]; }
    Tensor& grad_buf(long id);
    void add_to_grad(long id, const Tensor& g);
    Var make(Tensor value, bool requires_grad, std::function<void(Graph&)> back);
    bool needs(Var v) const { return node(v).requires_grad; }

    std::vector<Node> nodes_;
};

} // namespace lek::core
