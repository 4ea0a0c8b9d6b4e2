#include "lek/core/graph.hpp"

#include <cmath>

namespace lek::core {

namespace k = kernels;

Var Graph::input(Tensor value, bool requires_grad) {
    return make(std::move(value), requires_grad, nullptr);
}

Var Graph::make(Tensor value, bool requires_grad, std::function<void(Graph&)> back) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<long>(nodes_.size()) - 1};
}

Tensor& Graph::grad_buf(long id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_alloc) {
        n.grad = Tensor(n.value.shape());
        n.grad_alloc = true;
    }
    return n.grad;
}

const Tensor& Graph::grad(Var v) const {
    const Node& n = node(v);
    if (!n.grad_alloc) throw Error("grad: no gradient recorded for this node");
    return n.grad;
}

void Graph::add_to_grad(long id, const Tensor& g) {
    Tensor& dst = grad_buf(id);
    require_same_shape(dst, g, "add_to_grad");
    double* d = dst.data();
    const double* s = g.data();
    k::for_each_index(dst.size(), [&](long i) { d[i] += s[i]; });
}

void Graph::backward(Var root) {
    Node& r = node(root);
    if (r.value.size() != 1) throw ShapeError("backward: root must be scalar");
    if (!r.requires_grad) throw Error("backward: root does not depend on any gradient input");
    grad_buf(root.id).fill(1.0);
    for (long id = root.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.requires_grad && n.grad_alloc && n.back) n.back(*this);
    }
}

// --- elementwise --------------------------------------------------------------

// Ops need their own output id inside the backward lambda; the node is
// appended right after, so its id is the current tape length.
#define LEK_OUT_VAR Var out_var{static_cast<long>(nodes_.size())}

Var Graph::add(Var a, Var b) {
    require_same_shape(value(a), value(b), "add");
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    const double* pb = value(b).data();
    double* po = out.data();
    k::for_each_index(out.size(), [&](long i) { po[i] = pa[i] + pb[i]; });
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        if (gr.needs(a)) gr.add_to_grad(a.id, go);
        if (gr.needs(b)) gr.add_to_grad(b.id, go);
    });
}

Var Graph::sub(Var a, Var b) {
    require_same_shape(value(a), value(b), "sub");
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    const double* pb = value(b).data();
    double* po = out.data();
    k::for_each_index(out.size(), [&](long i) { po[i] = pa[i] - pb[i]; });
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        if (gr.needs(a)) gr.add_to_grad(a.id, go);
        if (gr.needs(b)) {
            Tensor neg(go.shape());
            const double* s = go.data();
            double* d = neg.data();
            k::for_each_index(neg.size(), [&](long i) { d[i] = -s[i]; });
            gr.add_to_grad(b.id, neg);
        }
    });
}

Var Graph::mul(Var a, Var b) {
    require_same_shape(value(a), value(b), "mul");
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    const double* pb = value(b).data();
    double* po = out.data();
    k::for_each_index(out.size(), [&](long i) { po[i] = pa[i] * pb[i]; });
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        Tensor tmp(go.shape());
        if (gr.needs(a)) {
            const double* s = go.data();
            const double* pb2 = gr.value(b).data();
            double* d = tmp.data();
            k::for_each_index(tmp.size(), [&](long i) { d[i] = s[i] * pb2[i]; });
            gr.add_to_grad(a.id, tmp);
        }
        if (gr.needs(b)) {
            const double* s = go.data();
            const double* pa2 = gr.value(a).data();
            double* d = tmp.data();
            k::for_each_index(tmp.size(), [&](long i) { d[i] = s[i] * pa2[i]; });
            gr.add_to_grad(b.id, tmp);
        }
    });
}

Var Graph::scale(Var a, double s) {
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    double* po = out.data();
    k::for_each_index(out.size(), [&](long i) { po[i] = pa[i] * s; });
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, s, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const Tensor& go = gr.grad_buf(out_var.id);
        Tensor tmp(go.shape());
        const double* src = go.data();
        double* d = tmp.data();
        k::for_each_index(tmp.size(), [&](long i) { d[i] = src[i] * s; });
        gr.add_to_grad(a.id, tmp);
    });
}

Var Graph::add_scalar(Var a, double s) {
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    double* po = out.data();
    k::for_each_index(out.size(), [&](long i) { po[i] = pa[i] + s; });
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, out_var](Graph& gr) {
        if (gr.needs(a)) gr.add_to_grad(a.id, gr.grad_buf(out_var.id));
    });
}

Var Graph::tanh_(Var a) {
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    double* po = out.data();
    k::for_each_index(out.size(), [&](long i) { po[i] = std::tanh(pa[i]); });
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const Tensor& go = gr.grad_buf(out_var.id);
        const Tensor& y = gr.value(out_var);
        Tensor tmp(go.shape());
        const double* s = go.data();
        const double* py = y.data();
        double* d = tmp.data();
        k::for_each_index(tmp.size(), [&](long i) { d[i] = s[i] * (1.0 - py[i] * py[i]); });
        gr.add_to_grad(a.id, tmp);
    });
}

Var Graph::sigmoid_(Var a) {
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    double* po = out.data();
    k::for_each_index(out.size(), [&](long i) { po[i] = 1.0 / (1.0 + std::exp(-pa[i])); });
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const Tensor& go = gr.grad_buf(out_var.id);
        const Tensor& y = gr.value(out_var);
        Tensor tmp(go.shape());
        const double* s = go.data();
        const double* py = y.data();
        double* d = tmp.data();
        k::for_each_index(tmp.size(), [&](long i) { d[i] = s[i] * py[i] * (1.0 - py[i]); });
        gr.add_to_grad(a.id, tmp);
    });
}

Var Graph::smooth_abs(Var a, double eps) {
    Tensor out(value(a).shape());
    const double* pa = value(a).data();
    double* po = out.data();
    const double e2 = eps * eps;
    k::for_each_index(out.size(), [&](long i) { po[i] = std::sqrt(pa[i] * pa[i] + e2) - eps; });
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, e2, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const Tensor& go = gr.grad_buf(out_var.id);
        const Tensor& x = gr.value(a);
        Tensor tmp(go.shape());
        const double* s = go.data();
        const double* px = x.data();
        double* d = tmp.data();
        k::for_each_index(tmp.size(),
                          [&](long i) { d[i] = s[i] * px[i] / std::sqrt(px[i] * px[i] + e2); });
        gr.add_to_grad(a.id, tmp);
    });
}

// --- reductions ---------------------------------------------------------------

Var Graph::sum(Var a) {
    Tensor out = Tensor::scalar(k::sum_all(value(a)));
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const double g = gr.grad_buf(out_var.id).at(0);
        Tensor tmp(gr.value(a).shape());
        tmp.fill(g);
        gr.add_to_grad(a.id, tmp);
    });
}

Var Graph::mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(value(a).size())); }

Var Graph::dot(Var a, Var b) {
    require_same_shape(value(a), value(b), "dot");
    Tensor prod(value(a).shape());
    const double* pa = value(a).data();
    const double* pb = value(b).data();
    double* pp = prod.data();
    k::for_each_index(prod.size(), [&](long i) { pp[i] = pa[i] * pb[i]; });
    Tensor out = Tensor::scalar(k::sum_all(prod));
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const double g0 = gr.grad_buf(out_var.id).at(0);
        Tensor tmp(gr.value(a).shape());
        if (gr.needs(a)) {
            const double* pb2 = gr.value(b).data();
            double* d = tmp.data();
            k::for_each_index(tmp.size(), [&](long i) { d[i] = g0 * pb2[i]; });
            gr.add_to_grad(a.id, tmp);
        }
        if (gr.needs(b)) {
            const double* pa2 = gr.value(a).data();
            double* d = tmp.data();
            k::for_each_index(tmp.size(), [&](long i) { d[i] = g0 * pa2[i]; });
            gr.add_to_grad(b.id, tmp);
        }
    });
}

Var Graph::sse(Var a, Var b) {
    require_same_shape(value(a), value(b), "sse");
    Tensor sq(value(a).shape());
    const double* pa = value(a).data();
    const double* pb = value(b).data();
    double* ps = sq.data();
    k::for_each_index(sq.size(), [&](long i) {
        const double d = pa[i] - pb[i];
        ps[i] = d * d;
    });
    Tensor out = Tensor::scalar(k::sum_all(sq));
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const double g0 = gr.grad_buf(out_var.id).at(0);
        Tensor tmp(gr.value(a).shape());
        const double* pa2 = gr.value(a).data();
        const double* pb2 = gr.value(b).data();
        if (gr.needs(a)) {
            double* d = tmp.data();
            k::for_each_index(tmp.size(),
                              [&](long i) { d[i] = 2.0 * g0 * (pa2[i] - pb2[i]); });
            gr.add_to_grad(a.id, tmp);
        }
        if (gr.needs(b)) {
            double* d = tmp.data();
            k::for_each_index(tmp.size(),
                              [&](long i) { d[i] = -2.0 * g0 * (pa2[i] - pb2[i]); });
            gr.add_to_grad(b.id, tmp);
        }
    });
}

Var Graph::mse(Var a, Var b) {
    return scale(sse(a, b), 1.0 / static_cast<double>(value(a).size()));
}

Var Graph::sum_maps(Var a) {
    const Tensor& x = value(a);
    if (x.rank() != 3) throw ShapeError("sum_maps: expected rank-3 tensor");
    const long n = x.dim(0), hw = x.dim(1) * x.dim(2);
    Tensor out({n});
    const double* px = x.data();
    double* po = out.data();
    k::for_each_index(n, [&](long ki) {
        double s = 0.0;
        const double* p = px + ki * hw;
        for (long i = 0; i < hw; ++i) s += p[i];
        po[ki] = s;
    });
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, n, hw, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const Tensor& go = gr.grad_buf(out_var.id);
        Tensor tmp(gr.value(a).shape());
        const double* s = go.data();
        double* d = tmp.data();
        k::for_each_index(n, [&](long ki) {
            for (long i = 0; i < hw; ++i) d[ki * hw + i] = s[ki];
        });
        gr.add_to_grad(a.id, tmp);
    });
}

// --- linear algebra -----------------------------------------------------------

Var Graph::matmul(Var a, Var b) {
    Tensor out;
    k::matmul(value(a), value(b), out);
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        if (gr.needs(a)) {
            Tensor ga;
            k::matmul_nt(go, gr.value(b), ga); // dA = dC * B^T
            gr.add_to_grad(a.id, ga);
        }
        if (gr.needs(b)) {
            Tensor gb;
            k::matmul_tn(gr.value(a), go, gb); // dB = A^T * dC
            gr.add_to_grad(b.id, gb);
        }
    });
}

Var Graph::matmul_nt(Var a, Var b) {
    Tensor out;
    k::matmul_nt(value(a), value(b), out);
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        if (gr.needs(a)) {
            Tensor ga;
            k::matmul(go, gr.value(b), ga); // dA = dC * B
            gr.add_to_grad(a.id, ga);
        }
        if (gr.needs(b)) {
            Tensor gb;
            k::matmul_tn(go, gr.value(a), gb); // dB = dC^T * A
            gr.add_to_grad(b.id, gb);
        }
    });
}

Var Graph::matvec(Var w, Var x) {
    const Tensor& W = value(w);
    const Tensor& X = value(x);
    if (W.rank() != 2 || X.rank() != 1 || W.dim(1) != X.dim(0))
        throw ShapeError("matvec: incompatible shapes " + Tensor::shape_str(W.shape()) + " * " +
                         Tensor::shape_str(X.shape()));
    const long m = W.dim(0), n = W.dim(1);
    Tensor out({m});
    const double* pw = W.data();
    const double* px = X.data();
    double* po = out.data();
    k::for_each_index(m, [&](long i) {
        double s = 0.0;
        for (long j = 0; j < n; ++j) s += pw[i * n + j] * px[j];
        po[i] = s;
    });
    LEK_OUT_VAR;
    const bool g = needs(w) || needs(x);
    return make(std::move(out), g, [w, x, m, n, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        const double* pg = go.data();
        if (gr.needs(w)) {
            Tensor gw({m, n});
            const double* px2 = gr.value(x).data();
            double* d = gw.data();
            k::for_each_index(m, [&](long i) {
                for (long j = 0; j < n; ++j) d[i * n + j] = pg[i] * px2[j];
            });
            gr.add_to_grad(w.id, gw);
        }
        if (gr.needs(x)) {
            Tensor gx({n});
            const double* pw2 = gr.value(w).data();
            double* d = gx.data();
            k::for_each_index(n, [&](long j) {
                double s = 0.0;
                for (long i = 0; i < m; ++i) s += pg[i] * pw2[i * n + j];
                d[j] = s;
            });
            gr.add_to_grad(x.id, gx);
        }
    });
}

Var Graph::add_row_bias(Var x, Var b) {
    const Tensor& X = value(x);
    const Tensor& B = value(b);
    if (X.rank() != 2 || B.rank() != 1 || B.dim(0) != X.dim(1))
        throw ShapeError("add_row_bias: incompatible shapes");
    Tensor out(X.shape());
    const long r = X.dim(0), c = X.dim(1);
    const double* px = X.data();
    const double* pb = B.data();
    double* po = out.data();
    k::for_each_index(r, [&](long i) {
        for (long j = 0; j < c; ++j) po[i * c + j] = px[i * c + j] + pb[j];
    });
    LEK_OUT_VAR;
    const bool g = needs(x) || needs(b);
    return make(std::move(out), g, [x, b, r, c, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        if (gr.needs(x)) gr.add_to_grad(x.id, go);
        if (gr.needs(b)) {
            Tensor gb({c});
            const double* pg = go.data();
            double* d = gb.data();
            k::for_each_index(c, [&](long j) {
                double s = 0.0;
                for (long i = 0; i < r; ++i) s += pg[i * c + j];
                d[j] = s;
            });
            gr.add_to_grad(b.id, gb);
        }
    });
}

Var Graph::softmax_rows(Var a) {
    const Tensor& X = value(a);
    if (X.rank() != 2) throw ShapeError("softmax_rows: expected matrix");
    Tensor out(X.shape());
    k::softmax_rows(X, out);
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const Tensor& go = gr.grad_buf(out_var.id);
        Tensor gin(go.shape());
        k::softmax_rows_grad(go, gr.value(out_var), gin);
        gr.add_to_grad(a.id, gin);
    });
}

// --- shape plumbing -----------------------------------------------------------

Var Graph::reshape(Var a, std::vector<long> shape) {
    Tensor out = value(a).reshaped(std::move(shape));
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        Tensor g = gr.grad_buf(out_var.id).reshaped(gr.value(a).shape());
        gr.add_to_grad(a.id, g);
    });
}

Var Graph::slice(Var a, long start, long len) {
    const Tensor& X = value(a);
    if (start < 0 || start + len > X.size()) throw IndexError("slice: range out of bounds");
    Tensor out({len});
    for (long i = 0; i < len; ++i) out.at(i) = X.at(start + i);
    LEK_OUT_VAR;
    return make(std::move(out), needs(a), [a, start, len, out_var](Graph& gr) {
        if (!gr.needs(a)) return;
        const Tensor& go = gr.grad_buf(out_var.id);
        Tensor tmp(gr.value(a).shape());
        for (long i = 0; i < len; ++i) tmp.at(start + i) = go.at(i);
        gr.add_to_grad(a.id, tmp);
    });
}

Var Graph::concat(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    Tensor out({A.size() + B.size()});
    for (long i = 0; i < A.size(); ++i) out.at(i) = A.at(i);
    for (long i = 0; i < B.size(); ++i) out.at(A.size() + i) = B.at(i);
    LEK_OUT_VAR;
    const bool g = needs(a) || needs(b);
    return make(std::move(out), g, [a, b, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        const long na = gr.value(a).size(), nb = gr.value(b).size();
        if (gr.needs(a)) {
            Tensor ga(gr.value(a).shape());
            for (long i = 0; i < na; ++i) ga.at(i) = go.at(i);
            gr.add_to_grad(a.id, ga);
        }
        if (gr.needs(b)) {
            Tensor gb(gr.value(b).shape());
            for (long i = 0; i < nb; ++i) gb.at(i) = go.at(na + i);
            gr.add_to_grad(b.id, gb);
        }
    });
}

// --- image ops ----------------------------------------------------------------

Var Graph::conv2d(Var in, Var w, Var bias, long stride, long pad) {
    k::Conv2dSpec spec{stride, pad};
    Tensor out;
    k::conv2d(value(in), value(w), value(bias), spec, out);
    LEK_OUT_VAR;
    const bool g = needs(in) || needs(w) || needs(bias);
    return make(std::move(out), g, [in, w, bias, spec, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        if (gr.needs(in)) {
            Tensor gin(gr.value(in).shape());
            k::conv2d_grad_input(go, gr.value(w), spec, gin);
            gr.add_to_grad(in.id, gin);
        }
        if (gr.needs(w) || gr.needs(bias)) {
            Tensor gw(gr.value(w).shape());
            Tensor gb(gr.value(bias).shape());
            k::conv2d_grad_weights(go, gr.value(in), spec, gw, gb);
            if (gr.needs(w)) gr.add_to_grad(w.id, gw);
            if (gr.needs(bias)) gr.add_to_grad(bias.id, gb);
        }
    });
}

Var Graph::upsample2x(Var in) {
    Tensor out;
    k::upsample2x(value(in), out);
    LEK_OUT_VAR;
    return make(std::move(out), needs(in), [in, out_var](Graph& gr) {
        if (!gr.needs(in)) return;
        Tensor gin(gr.value(in).shape());
        k::upsample2x_grad(gr.grad_buf(out_var.id), gin);
        gr.add_to_grad(in.id, gin);
    });
}

Var Graph::resize_bilinear(Var in, long out_h, long out_w) {
    const Tensor& X = value(in);
    Tensor out({X.dim(0), out_h, out_w});
    k::resize_bilinear(X, out);
    LEK_OUT_VAR;
    const long ih = X.dim(1), iw = X.dim(2);
    return make(std::move(out), needs(in), [in, ih, iw, out_var](Graph& gr) {
        if (!gr.needs(in)) return;
        Tensor gin;
        k::resize_bilinear_grad(gr.grad_buf(out_var.id), ih, iw, gin);
        gr.add_to_grad(in.id, gin);
    });
}

Var Graph::channel_affine(Var x, Var gain, Var bias) {
    const Tensor& X = value(x);
    const Tensor& G = value(gain);
    const Tensor& B = value(bias);
    if (X.rank() != 3 || G.dim(0) != X.dim(0) || B.dim(0) != X.dim(0))
        throw ShapeError("channel_affine: incompatible shapes");
    Tensor out(X.shape());
    const long c = X.dim(0), hw = X.dim(1) * X.dim(2);
    const double* px = X.data();
    const double* pg = G.data();
    const double* pb = B.data();
    double* po = out.data();
    k::for_each_index(c, [&](long ci) {
        for (long i = 0; i < hw; ++i) po[ci * hw + i] = px[ci * hw + i] * pg[ci] + pb[ci];
    });
    LEK_OUT_VAR;
    const bool g = needs(x) || needs(gain) || needs(bias);
    return make(std::move(out), g, [x, gain, bias, c, hw, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        const double* pgo = go.data();
        if (gr.needs(x)) {
            Tensor gx(gr.value(x).shape());
            const double* pg2 = gr.value(gain).data();
            double* d = gx.data();
            k::for_each_index(c, [&](long ci) {
                for (long i = 0; i < hw; ++i) d[ci * hw + i] = pgo[ci * hw + i] * pg2[ci];
            });
            gr.add_to_grad(x.id, gx);
        }
        if (gr.needs(gain)) {
            Tensor gg({c});
            const double* px2 = gr.value(x).data();
            double* d = gg.data();
            k::for_each_index(c, [&](long ci) {
                double s = 0.0;
                for (long i = 0; i < hw; ++i) s += pgo[ci * hw + i] * px2[ci * hw + i];
                d[ci] = s;
            });
            gr.add_to_grad(gain.id, gg);
        }
        if (gr.needs(bias)) {
            Tensor gb({c});
            double* d = gb.data();
            k::for_each_index(c, [&](long ci) {
                double s = 0.0;
                for (long i = 0; i < hw; ++i) s += pgo[ci * hw + i];
                d[ci] = s;
            });
            gr.add_to_grad(bias.id, gb);
        }
    });
}

Var Graph::splat(Var centers, Var paint, Var sigma_px, long grid) {
    Tensor out({3, grid, grid});
    k::splat(value(centers), value(paint), value(sigma_px), grid, out);
    LEK_OUT_VAR;
    const bool g = needs(centers) || needs(paint) || needs(sigma_px);
    return make(std::move(out), g, [centers, paint, sigma_px, grid, out_var](Graph& gr) {
        const Tensor& go = gr.grad_buf(out_var.id);
        Tensor gc(gr.value(centers).shape());
        Tensor gp(gr.value(paint).shape());
        Tensor gs(gr.value(sigma_px).shape());
        k::splat_grad(go, gr.value(centers), gr.value(paint), gr.value(sigma_px), grid, gc, gp,
                      gs);
        if (gr.needs(centers)) gr.add_to_grad(centers.id, gc);
        if (gr.needs(paint)) gr.add_to_grad(paint.id, gp);
        if (gr.needs(sigma_px)) gr.add_to_grad(sigma_px.id, gs);
    });
}

Var Graph::heatmaps(Var centers, double sigma_px, long grid) {
    const long n = value(centers).dim(0);
    Tensor out({n, grid, grid});
    k::heatmaps(value(centers), sigma_px, grid, out);
    LEK_OUT_VAR;
    return make(std::move(out), needs(centers), [centers, sigma_px, grid, out_var](Graph& gr) {
        if (!gr.needs(centers)) return;
        Tensor gc(gr.value(centers).shape());
        k::heatmaps_grad(gr.grad_buf(out_var.id), gr.value(centers), sigma_px, grid, gc);
        gr.add_to_grad(centers.id, gc);
    });
}

#undef LEK_OUT_VAR

} // namespace lek::core
