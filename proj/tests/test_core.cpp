#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lek/core/graph.hpp"
#include "lek/core/kernels.hpp"
#include "lek/core/params.hpp"
#include "lek/core/rng.hpp"
#include "support/fd_check.hpp"

using namespace lek;
using namespace lek::core;
namespace kn = lek::core::kernels;

namespace {

Tensor random_tensor(std::vector<long> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (long i = 0; i < t.size(); ++i) t.at(i) = rng.normal(0.0, scale);
    return t;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (long i = 0; i < a.size(); ++i)
        if (a.at(i) != b.at(i)) return false;
    return true;
}

// Runs fn under both execution modes and checks the outputs agree exactly.
template <typename Fn>
void check_modes_identical(Fn&& fn) {
    const auto saved = kn::exec_mode();
    kn::set_exec_mode(kn::ExecMode::Serial);
    Tensor serial_out = fn();
    kn::set_exec_mode(kn::ExecMode::Parallel);
    Tensor par_out = fn();
    kn::set_exec_mode(saved);
    CHECK(bitwise_equal(serial_out, par_out));
}

} // namespace

TEST_CASE("matmul matches naive triple loop") {
    Rng rng(7);
    Tensor a = random_tensor({5, 7}, rng);
    Tensor b = random_tensor({7, 4}, rng);
    Tensor out;
    kn::matmul(a, b, out);
    for (long i = 0; i < 5; ++i) {
        for (long j = 0; j < 4; ++j) {
            double s = 0.0;
            for (long p = 0; p < 7; ++p) s += a.at2(i, p) * b.at2(p, j);
            CHECK(out.at2(i, j) == doctest::Approx(s).epsilon(1e-12));
        }
    }
}

TEST_CASE("serial and parallel kernels are bit-identical") {
    Rng rng(11);
    Tensor a = random_tensor({33, 17}, rng);
    Tensor b = random_tensor({17, 29}, rng);
    check_modes_identical([&] {
        Tensor out;
        kn::matmul(a, b, out);
        return out;
    });

    Tensor img = random_tensor({3, 16, 16}, rng);
    Tensor w = random_tensor({5, 3, 3, 3}, rng, 0.2);
    Tensor bias = random_tensor({5}, rng, 0.1);
    check_modes_identical([&] {
        Tensor out;
        kn::conv2d(img, w, bias, {1, 1}, out);
        return out;
    });

    Tensor centers = random_tensor({12, 2}, rng, 0.1);
    for (long i = 0; i < centers.size(); ++i) centers.at(i) = 0.5 + centers.at(i);
    Tensor paint = random_tensor({12, 3}, rng);
    Tensor sigma = Tensor::full({12}, 2.0);
    check_modes_identical([&] {
        Tensor out({3, 32, 32});
        kn::splat(centers, paint, sigma, 32, out);
        return out;
    });
    check_modes_identical([&] {
        Tensor out({12, 32, 32});
        kn::heatmaps(centers, 1.5, 32, out);
        return out;
    });

    Tensor big = random_tensor({5000}, rng);
    check_modes_identical([&] { return Tensor::scalar(kn::sum_all(big)); });

    Tensor mask({20, 20});
    for (long i = 0; i < mask.size(); ++i) mask.at(i) = rng.uniform() < 0.3 ? 1.0 : 0.0;
    check_modes_identical([&] {
        Tensor out({20, 20});
        kn::dilate(mask, 3, out);
        return out;
    });
}

TEST_CASE("dilate matches sliding-window oracle") {
    Rng rng(3);
    Tensor mask({15, 15});
    for (long i = 0; i < mask.size(); ++i) mask.at(i) = rng.uniform() < 0.2 ? 1.0 : 0.0;
    Tensor out({15, 15});
    kn::dilate(mask, 3, out);
    for (long y = 0; y < 15; ++y) {
        for (long x = 0; x < 15; ++x) {
            double m = 0.0;
            for (long dy = -3; dy <= 3; ++dy)
                for (long dx = -3; dx <= 3; ++dx) {
                    const long yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= 15 || xx < 0 || xx >= 15) continue;
                    m = std::max(m, mask.at2(yy, xx));
                }
            CHECK(out.at2(y, x) == m);
        }
    }
}

TEST_CASE("softmax rows sum to one and match direct evaluation") {
    Rng rng(5);
    Tensor x = random_tensor({6, 9}, rng, 2.0);
    Tensor out(x.shape());
    kn::softmax_rows(x, out);
    for (long i = 0; i < 6; ++i) {
        double s = 0.0;
        for (long j = 0; j < 9; ++j) s += out.at2(i, j);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        double z = 0.0;
        for (long j = 0; j < 9; ++j) z += std::exp(x.at2(i, j));
        for (long j = 0; j < 9; ++j)
            CHECK(out.at2(i, j) == doctest::Approx(std::exp(x.at2(i, j)) / z).epsilon(1e-10));
    }
}

TEST_CASE("autodiff gradients match finite differences across op set") {
    Rng rng(17);

    SUBCASE("composite elementwise + reduction") {
        Tensor x = random_tensor({4, 3}, rng);
        Tensor y = random_tensor({4, 3}, rng);
        auto loss = [&](Graph& g, Var vx) {
            Var vy = g.input(y);
            Var s = g.mul(g.tanh_(vx), g.sigmoid_(vy));
            Var d = g.smooth_abs(g.sub(s, vy), 1e-6);
            return g.add(g.sum(d), g.scale(g.sse(vx, vy), 0.3));
        };
        Graph g;
        Var vx = g.input(x, true);
        Var l = loss(g, vx);
        g.backward(l);
        Tensor analytic = g.grad(vx);
        auto f = [&] {
            Graph g2;
            Var v = g2.input(x);
            // evaluate without gradients
            Var vy = g2.input(y);
            Var s = g2.mul(g2.tanh_(v), g2.sigmoid_(vy));
            Var d = g2.smooth_abs(g2.sub(s, vy), 1e-6);
            return g2.scalar(g2.add(g2.sum(d), g2.scale(g2.sse(v, vy), 0.3)));
        };
        Tensor numeric = testsupport::finite_diff_grad(f, x);
        CHECK(testsupport::max_rel_err(analytic, numeric) < 1e-6);
    }

    SUBCASE("matmul chain with softmax") {
        Tensor a = random_tensor({3, 4}, rng, 0.7);
        Tensor b = random_tensor({4, 5}, rng, 0.7);
        auto eval = [&](bool grad, Tensor* out_grad_a) {
            Graph g;
            Var va = g.input(a, grad);
            Var vb = g.input(b, grad);
            Var m = g.softmax_rows(g.matmul(va, vb));
            Var l = g.sse(m, g.input(Tensor::full({3, 5}, 0.1)));
            if (grad) {
                g.backward(l);
                *out_grad_a = g.grad(va);
            }
            return g.scalar(l);
        };
        Tensor analytic;
        eval(true, &analytic);
        auto f = [&] { return eval(false, nullptr); };
        Tensor numeric = testsupport::finite_diff_grad(f, a);
        CHECK(testsupport::max_rel_err(analytic, numeric) < 1e-6);
    }

    SUBCASE("conv2d and upsample") {
        Tensor img = random_tensor({2, 6, 6}, rng, 0.5);
        Tensor w = random_tensor({3, 2, 3, 3}, rng, 0.4);
        Tensor bias = random_tensor({3}, rng, 0.1);
        Tensor target = random_tensor({3, 12, 12}, rng, 0.2);
        auto eval = [&](bool grad, Tensor* gw_out) {
            Graph g;
            Var vi = g.input(img, grad);
            Var vw = g.input(w, grad);
            Var vb = g.input(bias, grad);
            Var c = g.conv2d(vi, vw, vb, 1, 1);
            Var u = g.upsample2x(g.tanh_(c));
            Var l = g.mse(u, g.input(target));
            if (grad) {
                g.backward(l);
                *gw_out = g.grad(vw);
            }
            return g.scalar(l);
        };
        Tensor analytic;
        eval(true, &analytic);
        auto f = [&] { return eval(false, nullptr); };
        Tensor numeric = testsupport::finite_diff_grad(f, w);
        CHECK(testsupport::max_rel_err(analytic, numeric) < 1e-6);
    }

    SUBCASE("splat and heatmaps w.r.t. centers") {
        Tensor centers = Tensor::from({3, 2}, {0.3, 0.4, 0.55, 0.6, 0.7, 0.35});
        Tensor paint = random_tensor({3, 3}, rng, 0.8);
        Tensor sigma = Tensor::from({3}, {2.0, 2.5, 1.8});
        Tensor target = random_tensor({3, 16, 16}, rng, 0.3);
        auto eval = [&](bool grad, Tensor* gc_out) {
            Graph g;
            Var vc = g.input(centers, grad);
            Var vp = g.input(paint, grad);
            Var vs = g.input(sigma, grad);
            Var img = g.splat(vc, vp, vs, 16);
            Var hm = g.heatmaps(vc, 1.5, 16);
            Var l = g.add(g.sse(img, g.input(target)), g.mean(hm));
            if (grad) {
                g.backward(l);
                *gc_out = g.grad(vc);
            }
            return g.scalar(l);
        };
        Tensor analytic;
        eval(true, &analytic);
        auto f = [&] { return eval(false, nullptr); };
        Tensor numeric = testsupport::finite_diff_grad(f, centers, 1e-6);
        CHECK(testsupport::max_rel_err(analytic, numeric) < 1e-5);
    }

    SUBCASE("matvec, slices, concat, channel affine") {
        Tensor W = random_tensor({6, 4}, rng, 0.6);
        Tensor x = random_tensor({4}, rng);
        Tensor gain = random_tensor({2}, rng, 0.5);
        Tensor cbias = random_tensor({2}, rng, 0.5);
        Tensor img = random_tensor({2, 3, 3}, rng);
        auto eval = [&](bool grad, Tensor* gx_out) {
            Graph g;
            Var vW = g.input(W, grad);
            Var vx = g.input(x, grad);
            Var h = g.tanh_(g.matvec(vW, vx));
            Var lo = g.slice(h, 0, 3);
            Var hi = g.slice(h, 3, 3);
            Var cat = g.concat(lo, g.mul(lo, hi));
            Var ca = g.channel_affine(g.input(img), g.input(gain, grad), g.input(cbias, grad));
            Var l = g.add(g.sum(cat), g.mean(ca));
            if (grad) {
                g.backward(l);
                *gx_out = g.grad(vx);
            }
            return g.scalar(l);
        };
        Tensor analytic;
        eval(true, &analytic);
        auto f = [&] { return eval(false, nullptr); };
        Tensor numeric = testsupport::finite_diff_grad(f, x);
        CHECK(testsupport::max_rel_err(analytic, numeric) < 1e-6);
    }

    SUBCASE("resize bilinear") {
        Tensor img = random_tensor({1, 8, 8}, rng);
        Tensor target = random_tensor({1, 5, 5}, rng);
        auto eval = [&](bool grad, Tensor* gi_out) {
            Graph g;
            Var vi = g.input(img, grad);
            Var r = g.resize_bilinear(vi, 5, 5);
            Var l = g.sse(r, g.input(target));
            if (grad) {
                g.backward(l);
                *gi_out = g.grad(vi);
            }
            return g.scalar(l);
        };
        Tensor analytic;
        eval(true, &analytic);
        auto f = [&] { return eval(false, nullptr); };
        Tensor numeric = testsupport::finite_diff_grad(f, img);
        CHECK(testsupport::max_rel_err(analytic, numeric) < 1e-6);
    }
}

TEST_CASE("rng is deterministic and box-muller moments are sane") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(1);
    double mean = 0.0, var = 0.0;
    const int n = 20000;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = r.normal();
        mean += xs[i];
    }
    mean /= n;
    for (int i = 0; i < n; ++i) var += (xs[i] - mean) * (xs[i] - mean);
    var /= n;
    CHECK(std::fabs(mean) < 0.03);
    CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("sgd step updates only parameters with gradients") {
    ParamStore store;
    store.add("used", Tensor::full({2}, 1.0));
    store.add("unused", Tensor::full({2}, 1.0));
    Graph g;
    BoundParams bound(g, store, true);
    Var l = g.sum(bound.at("used"));
    g.backward(l);
    sgd_step(store, bound, g, 0.1);
    CHECK(store.get("used").at(0) == doctest::Approx(0.9));
    CHECK(store.get("unused").at(0) == doctest::Approx(1.0));
}
