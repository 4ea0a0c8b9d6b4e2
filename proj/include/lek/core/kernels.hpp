#pragma once

#include "lek/core/tensor.hpp"

namespace lek::core::kernels {

// Execution mode for the compute kernels. Every kernel has a serial
// reference implementation and an OpenMP one; both use the same blocking
// and accumulation order, so results are bit-identical regardless of mode
// or thread count. Tests compare the two, the benchmark times them.
enum class ExecMode { Serial, Parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode m);

struct Conv2dSpec {
    long stride = 1;
    long pad = 0;
};

namespace serial {

void matmul(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out); // a^T * b
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out); // a * b^T

void conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, const Conv2dSpec& spec,
            Tensor& out);
void conv2d_grad_input(const Tensor& gout, const Tensor& w, const Conv2dSpec& spec, Tensor& gin);
void conv2d_grad_weights(const Tensor& gout, const Tensor& in, const Conv2dSpec& spec, Tensor& gw,
                         Tensor& gbias);

void upsample2x(const Tensor& in, Tensor& out);
void upsample2x_grad(const Tensor& gout, Tensor& gin);

void resize_bilinear(const Tensor& in, Tensor& out);
void resize_bilinear_grad(const Tensor& gout, long in_h, long in_w, Tensor& gin);

// Additive Gaussian splatting: out[c,y,x] += sum_k paint[k,c] *
// exp(-d^2 / (2 sigma_k^2)) with centers in normalized [0,1] coords.
void splat(const Tensor& centers, const Tensor& paint, const Tensor& sigma_px, long grid,
           Tensor& out);
void splat_grad(const Tensor& gout, const Tensor& centers, const Tensor& paint,
                const Tensor& sigma_px, long grid, Tensor& gcenters, Tensor& gpaint,
                Tensor& gsigma);

// Unit-peak Gaussian heatmaps, one 64x64-style map per landmark.
void heatmaps(const Tensor& centers, double sigma_px, long grid, Tensor& out);
void heatmaps_grad(const Tensor& gout, const Tensor& centers, double sigma_px, long grid,
                   Tensor& gcenters);

void softmax_rows(const Tensor& in, Tensor& out);
void softmax_rows_grad(const Tensor& gout, const Tensor& out, Tensor& gin);

double sum_all(const Tensor& t);

// Binary dilation with a square structuring element of the given radius.
void dilate(const Tensor& mask, long radius, Tensor& out);

} // namespace serial

namespace par {

void matmul(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out);

void conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, const Conv2dSpec& spec,
            Tensor& out);
void conv2d_grad_input(const Tensor& gout, const Tensor& w, const Conv2dSpec& spec, Tensor& gin);
void conv2d_grad_weights(const Tensor& gout, const Tensor& in, const Conv2dSpec& spec, Tensor& gw,
                         Tensor& gbias);

void upsample2x(const Tensor& in, Tensor& out);
void upsample2x_grad(const Tensor& gout, Tensor& gin);

void resize_bilinear(const Tensor& in, Tensor& out);
void resize_bilinear_grad(const Tensor& gout, long in_h, long in_w, Tensor& gin);

void splat(const Tensor& centers, const Tensor& paint, const Tensor& sigma_px, long grid,
           Tensor& out);
void splat_grad(const Tensor& gout, const Tensor& centers, const Tensor& paint,
                const Tensor& sigma_px, long grid, Tensor& gcenters, Tensor& gpaint,
                Tensor& gsigma);

void heatmaps(const Tensor& centers, double sigma_px, long grid, Tensor& out);
void heatmaps_grad(const Tensor& gout, const Tensor& centers, double sigma_px, long grid,
                   Tensor& gcenters);

void softmax_rows(const Tensor& in, Tensor& out);
void softmax_rows_grad(const Tensor& gout, const Tensor& out, Tensor& gin);

double sum_all(const Tensor& t);

void dilate(const Tensor& mask, long radius, Tensor& out);

} // namespace par

// Mode-dispatching entry points used by the rest of the project.
void matmul(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out);
void conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, const Conv2dSpec& spec,
            Tensor& out);
void conv2d_grad_input(const Tensor& gout, const Tensor& w, const Conv2dSpec& spec, Tensor& gin);
void conv2d_grad_weights(const Tensor& gout, const Tensor& in, const Conv2dSpec& spec, Tensor& gw,
                         Tensor& gbias);
void upsample2x(const Tensor& in, Tensor& out);
void upsample2x_grad(const Tensor& gout, Tensor& gin);
void resize_bilinear(const Tensor& in, Tensor& out);
void resize_bilinear_grad(const Tensor& gout, long in_h, long in_w, Tensor& gin);
void splat(const Tensor& centers, const Tensor& paint, const Tensor& sigma_px, long grid,
           Tensor& out);
void splat_grad(const Tensor& gout, const Tensor& centers, const Tensor& paint,
                const Tensor& sigma_px, long grid, Tensor& gcenters, Tensor& gpaint,
                Tensor& gsigma);
void heatmaps(const Tensor& centers, double sigma_px, long grid, Tensor& out);
void heatmaps_grad(const Tensor& gout, const Tensor& centers, double sigma_px, long grid,
                   Tensor& gcenters);
void softmax_rows(const Tensor& in, Tensor& out);
void softmax_rows_grad(const Tensor& gout, const Tensor& out, Tensor& gin);
double sum_all(const Tensor& t);
void dilate(const Tensor& mask, long radius, Tensor& out);

// Elementwise helper: applies fn(i) over [0, n), parallel when the mode
// allows. fn must be safe to run for distinct i concurrently.
template <typename Fn>
void for_each_index(long n, Fn&& fn) {
    if (exec_mode() == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < n; ++i) fn(i);
    } else {
        for (long i = 0; i < n; ++i) fn(i);
    }
}

} // namespace lek::core::kernels
