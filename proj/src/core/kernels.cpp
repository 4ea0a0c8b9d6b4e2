#include "lek/core/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace lek::core::kernels {

namespace {

ExecMode g_mode = [] {
#ifdef _OPENMP
    if (const char* e = std::getenv("LEK_SERIAL"); e && e[0] == '1') return ExecMode::Serial;
    return ExecMode::Parallel;
#else
    return ExecMode::Serial;
#endif
}();

constexpr long kSumBlock = 1024;

// --- shared per-unit bodies -------------------------------------------------
// The serial and OpenMP variants below iterate these bodies in the same
// order, so both modes produce bit-identical results.

inline void matmul_row(const double* a, const double* b, double* c, long i, long k, long n) {
    double* ci = c + i * n;
    for (long j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = a + i * k;
    for (long p = 0; p < k; ++p) {
        const double av = ai[p];
        const double* bp = b + p * n;
        for (long j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
}

inline void matmul_tn_row(const double* a, const double* b, double* c, long i, long k, long m,
                          long n) {
    // out (m x n) = a^T (m x k-rows) ... a is (k x m), b is (k x n)
    double* ci = c + i * n;
    for (long j = 0; j < n; ++j) ci[j] = 0.0;
    for (long p = 0; p < k; ++p) {
        const double av = a[p * m + i];
        const double* bp = b + p * n;
        for (long j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
}

inline void matmul_nt_row(const double* a, const double* b, double* c, long i, long k, long n) {
    // out (m x n) = a (m x k) * b^T, b is (n x k)
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (long j = 0; j < n; ++j) {
        const double* bj = b + j * k;
        double s = 0.0;
        for (long p = 0; p < k; ++p) s += ai[p] * bj[p];
        ci[j] = s;
    }
}

struct ConvDims {
    long cin, h, w, f, kh, kw, oh, ow, stride, pad;
};

ConvDims conv_dims(const Tensor& in, const Tensor& w, const Conv2dSpec& spec) {
    ConvDims d{};
    d.cin = in.dim(0);
    d.h = in.dim(1);
    d.w = in.dim(2);
    d.f = w.dim(0);
    d.kh = w.dim(2);
    d.kw = w.dim(3);
    d.stride = spec.stride;
    d.pad = spec.pad;
    d.oh = (d.h + 2 * d.pad - d.kh) / d.stride + 1;
    d.ow = (d.w + 2 * d.pad - d.kw) / d.stride + 1;
    if (w.dim(1) != d.cin) throw ShapeError("conv2d: channel mismatch");
    return d;
}

inline void conv2d_filter(const Tensor& in, const Tensor& w, const Tensor& bias,
                          const ConvDims& d, Tensor& out, long f) {
    for (long oy = 0; oy < d.oh; ++oy) {
        for (long ox = 0; ox < d.ow; ++ox) {
            double s = bias.size() ? bias.at(f) : 0.0;
            for (long c = 0; c < d.cin; ++c) {
                for (long ky = 0; ky < d.kh; ++ky) {
                    const long iy = oy * d.stride + ky - d.pad;
                    if (iy < 0 || iy >= d.h) continue;
                    for (long kx = 0; kx < d.kw; ++kx) {
                        const long ix = ox * d.stride + kx - d.pad;
                        if (ix < 0 || ix >= d.w) continue;
                        s += in.at3(c, iy, ix) * w.at((((f * d.cin) + c) * d.kh + ky) * d.kw + kx);
                    }
                }
            }
            out.at3(f, oy, ox) = s;
        }
    }
}

inline void conv2d_ginput_channel(const Tensor& gout, const Tensor& w, const ConvDims& d,
                                  Tensor& gin, long c) {
    for (long iy = 0; iy < d.h; ++iy)
        for (long ix = 0; ix < d.w; ++ix) gin.at3(c, iy, ix) = 0.0;
    for (long f = 0; f < d.f; ++f) {
        for (long oy = 0; oy < d.oh; ++oy) {
            for (long ox = 0; ox < d.ow; ++ox) {
                const double g = gout.at3(f, oy, ox);
                if (g == 0.0) continue;
                for (long ky = 0; ky < d.kh; ++ky) {
                    const long iy = oy * d.stride + ky - d.pad;
                    if (iy < 0 || iy >= d.h) continue;
                    for (long kx = 0; kx < d.kw; ++kx) {
                        const long ix = ox * d.stride + kx - d.pad;
                        if (ix < 0 || ix >= d.w) continue;
                        gin.at3(c, iy, ix) +=
                            g * w.at((((f * d.cin) + c) * d.kh + ky) * d.kw + kx);
                    }
                }
            }
        }
    }
}

inline void conv2d_gweights_filter(const Tensor& gout, const Tensor& in, const ConvDims& d,
                                   Tensor& gw, Tensor& gbias, long f) {
    double gb = 0.0;
    for (long c = 0; c < d.cin; ++c)
        for (long ky = 0; ky < d.kh; ++ky)
            for (long kx = 0; kx < d.kw; ++kx)
                gw.at((((f * d.cin) + c) * d.kh + ky) * d.kw + kx) = 0.0;
    for (long oy = 0; oy < d.oh; ++oy) {
        for (long ox = 0; ox < d.ow; ++ox) {
            const double g = gout.at3(f, oy, ox);
            gb += g;
            if (g == 0.0) continue;
            for (long c = 0; c < d.cin; ++c) {
                for (long ky = 0; ky < d.kh; ++ky) {
                    const long iy = oy * d.stride + ky - d.pad;
                    if (iy < 0 || iy >= d.h) continue;
                    for (long kx = 0; kx < d.kw; ++kx) {
                        const long ix = ox * d.stride + kx - d.pad;
                        if (ix < 0 || ix >= d.w) continue;
                        gw.at((((f * d.cin) + c) * d.kh + ky) * d.kw + kx) +=
                            g * in.at3(c, iy, ix);
                    }
                }
            }
        }
    }
    if (gbias.size()) gbias.at(f) = gb;
}

inline void splat_row(const Tensor& centers, const Tensor& paint, const Tensor& sigma_px,
                      long grid, Tensor& out, long y) {
    const long n = centers.dim(0);
    for (long x = 0; x < grid; ++x) {
        double acc[3] = {0.0, 0.0, 0.0};
        for (long k = 0; k < n; ++k) {
            const double gx = centers.at2(k, 0) * static_cast<double>(grid) - 0.5;
            const double gy = centers.at2(k, 1) * static_cast<double>(grid) - 0.5;
            const double s = sigma_px.at(k);
            const double dx = static_cast<double>(x) - gx;
            const double dy = static_cast<double>(y) - gy;
            const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
            for (long c = 0; c < 3; ++c) acc[c] += paint.at2(k, c) * g;
        }
        for (long c = 0; c < 3; ++c) out.at3(c, y, x) += acc[c];
    }
}

inline void splat_grad_point(const Tensor& gout, const Tensor& centers, const Tensor& paint,
                             const Tensor& sigma_px, long grid, Tensor& gcenters, Tensor& gpaint,
                             Tensor& gsigma, long k) {
    const double gx = centers.at2(k, 0) * static_cast<double>(grid) - 0.5;
    const double gy = centers.at2(k, 1) * static_cast<double>(grid) - 0.5;
    const double s = sigma_px.at(k);
    const double inv2s2 = 1.0 / (2.0 * s * s);
    double gcx = 0.0, gcy = 0.0, gs = 0.0, gp0 = 0.0, gp1 = 0.0, gp2 = 0.0;
    for (long y = 0; y < grid; ++y) {
        const double dy = static_cast<double>(y) - gy;
        for (long x = 0; x < grid; ++x) {
            const double dx = static_cast<double>(x) - gx;
            const double d2 = dx * dx + dy * dy;
            const double g = std::exp(-d2 * inv2s2);
            const double w0 = gout.at3(0, y, x);
            const double w1 = gout.at3(1, y, x);
            const double w2 = gout.at3(2, y, x);
            gp0 += w0 * g;
            gp1 += w1 * g;
            gp2 += w2 * g;
            const double wp = w0 * paint.at2(k, 0) + w1 * paint.at2(k, 1) + w2 * paint.at2(k, 2);
            const double common = wp * g / (s * s);
            gcx += common * dx;
            gcy += common * dy;
            gs += wp * g * d2 / (s * s * s);
        }
    }
    gcenters.at2(k, 0) = gcx * static_cast<double>(grid);
    gcenters.at2(k, 1) = gcy * static_cast<double>(grid);
    gpaint.at2(k, 0) = gp0;
    gpaint.at2(k, 1) = gp1;
    gpaint.at2(k, 2) = gp2;
    gsigma.at(k) = gs;
}

inline void heatmap_point(const Tensor& centers, double sigma_px, long grid, Tensor& out,
                          long k) {
    const double gx = centers.at2(k, 0) * static_cast<double>(grid) - 0.5;
    const double gy = centers.at2(k, 1) * static_cast<double>(grid) - 0.5;
    const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
    for (long y = 0; y < grid; ++y) {
        const double dy = static_cast<double>(y) - gy;
        for (long x = 0; x < grid; ++x) {
            const double dx = static_cast<double>(x) - gx;
            out.at3(k, y, x) = std::exp(-(dx * dx + dy * dy) * inv2s2);
        }
    }
}

inline void heatmap_grad_point(const Tensor& gout, const Tensor& centers, double sigma_px,
                               long grid, Tensor& gcenters, long k) {
    const double gx = centers.at2(k, 0) * static_cast<double>(grid) - 0.5;
    const double gy = centers.at2(k, 1) * static_cast<double>(grid) - 0.5;
    const double s2 = sigma_px * sigma_px;
    const double inv2s2 = 1.0 / (2.0 * s2);
    double gcx = 0.0, gcy = 0.0;
    for (long y = 0; y < grid; ++y) {
        const double dy = static_cast<double>(y) - gy;
        for (long x = 0; x < grid; ++x) {
            const double dx = static_cast<double>(x) - gx;
            const double g = std::exp(-(dx * dx + dy * dy) * inv2s2);
            const double w = gout.at3(k, y, x);
            gcx += w * g * dx / s2;
            gcy += w * g * dy / s2;
        }
    }
    gcenters.at2(k, 0) = gcx * static_cast<double>(grid);
    gcenters.at2(k, 1) = gcy * static_cast<double>(grid);
}

inline void softmax_row(const Tensor& in, Tensor& out, long i) {
    const long c = in.dim(1);
    double mx = in.at2(i, 0);
    for (long j = 1; j < c; ++j) mx = std::max(mx, in.at2(i, j));
    double z = 0.0;
    for (long j = 0; j < c; ++j) {
        const double e = std::exp(in.at2(i, j) - mx);
        out.at2(i, j) = e;
        z += e;
    }
    for (long j = 0; j < c; ++j) out.at2(i, j) /= z;
}

inline void softmax_grad_row(const Tensor& gout, const Tensor& out, Tensor& gin, long i) {
    const long c = out.dim(1);
    double dot = 0.0;
    for (long j = 0; j < c; ++j) dot += gout.at2(i, j) * out.at2(i, j);
    for (long j = 0; j < c; ++j) gin.at2(i, j) = out.at2(i, j) * (gout.at2(i, j) - dot);
}

inline double sum_block(const double* p, long n) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += p[i];
    return s;
}

inline void upsample_row(const Tensor& in, Tensor& out, long c, long y) {
    const long w = in.dim(2);
    for (long x = 0; x < w; ++x) {
        const double v = in.at3(c, y, x);
        out.at3(c, 2 * y, 2 * x) = v;
        out.at3(c, 2 * y, 2 * x + 1) = v;
        out.at3(c, 2 * y + 1, 2 * x) = v;
        out.at3(c, 2 * y + 1, 2 * x + 1) = v;
    }
}

inline void upsample_grad_row(const Tensor& gout, Tensor& gin, long c, long y) {
    const long w = gin.dim(2);
    for (long x = 0; x < w; ++x) {
        gin.at3(c, y, x) = gout.at3(c, 2 * y, 2 * x) + gout.at3(c, 2 * y, 2 * x + 1) +
                           gout.at3(c, 2 * y + 1, 2 * x) + gout.at3(c, 2 * y + 1, 2 * x + 1);
    }
}

struct BilinearTap {
    long x0, x1;
    double w0, w1;
};

inline BilinearTap bilinear_tap(long o, long out_n, long in_n) {
    const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_n - 1));
    BilinearTap t{};
    t.x0 = static_cast<long>(std::floor(src));
    t.x1 = std::min(t.x0 + 1, in_n - 1);
    t.w1 = src - static_cast<double>(t.x0);
    t.w0 = 1.0 - t.w1;
    return t;
}

inline void resize_channel(const Tensor& in, Tensor& out, long c) {
    const long ih = in.dim(1), iw = in.dim(2);
    const long oh = out.dim(1), ow = out.dim(2);
    for (long y = 0; y < oh; ++y) {
        const BilinearTap ty = bilinear_tap(y, oh, ih);
        for (long x = 0; x < ow; ++x) {
            const BilinearTap tx = bilinear_tap(x, ow, iw);
            out.at3(c, y, x) = ty.w0 * (tx.w0 * in.at3(c, ty.x0, tx.x0) +
                                        tx.w1 * in.at3(c, ty.x0, tx.x1)) +
                               ty.w1 * (tx.w0 * in.at3(c, ty.x1, tx.x0) +
                                        tx.w1 * in.at3(c, ty.x1, tx.x1));
        }
    }
}

inline void resize_grad_channel(const Tensor& gout, Tensor& gin, long c) {
    const long oh = gout.dim(1), ow = gout.dim(2);
    const long ih = gin.dim(1), iw = gin.dim(2);
    for (long y = 0; y < ih; ++y)
        for (long x = 0; x < iw; ++x) gin.at3(c, y, x) = 0.0;
    for (long y = 0; y < oh; ++y) {
        const BilinearTap ty = bilinear_tap(y, oh, ih);
        for (long x = 0; x < ow; ++x) {
            const BilinearTap tx = bilinear_tap(x, ow, iw);
            const double g = gout.at3(c, y, x);
            gin.at3(c, ty.x0, tx.x0) += g * ty.w0 * tx.w0;
            gin.at3(c, ty.x0, tx.x1) += g * ty.w0 * tx.w1;
            gin.at3(c, ty.x1, tx.x0) += g * ty.w1 * tx.w0;
            gin.at3(c, ty.x1, tx.x1) += g * ty.w1 * tx.w1;
        }
    }
}

// Separable square-SE dilation: horizontal max pass then vertical.
inline void dilate_hpass_row(const Tensor& mask, Tensor& tmp, long radius, long y) {
    const long s = mask.dim(1);
    for (long x = 0; x < s; ++x) {
        double m = 0.0;
        const long lo = std::max(0L, x - radius), hi = std::min(s - 1, x + radius);
        for (long j = lo; j <= hi; ++j) m = std::max(m, mask.at2(y, j));
        tmp.at2(y, x) = m;
    }
}

inline void dilate_vpass_row(const Tensor& tmp, Tensor& out, long radius, long y) {
    const long s = tmp.dim(1);
    const long lo = std::max(0L, y - radius), hi = std::min(tmp.dim(0) - 1, y + radius);
    for (long x = 0; x < s; ++x) {
        double m = 0.0;
        for (long i = lo; i <= hi; ++i) m = std::max(m, tmp.at2(i, x));
        out.at2(y, x) = m;
    }
}

void check_matmul(const Tensor& a, const Tensor& b, Tensor& out, long m, long k, long k2,
                  long n) {
    if (k != k2)
        throw ShapeError("matmul: inner dimension mismatch " + Tensor::shape_str(a.shape()) +
                         " vs " + Tensor::shape_str(b.shape()));
    if (out.rank() != 2 || out.dim(0) != m || out.dim(1) != n) out = Tensor({m, n});
}

} // namespace

ExecMode exec_mode() { return g_mode; }
void set_exec_mode(ExecMode m) { g_mode = m; }

// --- serial reference --------------------------------------------------------

namespace serial {

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a, b, out, a.dim(0), a.dim(1), b.dim(0), b.dim(1));
    for (long i = 0; i < a.dim(0); ++i)
        matmul_row(a.data(), b.data(), out.data(), i, a.dim(1), b.dim(1));
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a, b, out, a.dim(1), a.dim(0), b.dim(0), b.dim(1));
    for (long i = 0; i < a.dim(1); ++i)
        matmul_tn_row(a.data(), b.data(), out.data(), i, a.dim(0), a.dim(1), b.dim(1));
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a, b, out, a.dim(0), a.dim(1), b.dim(1), b.dim(0));
    for (long i = 0; i < a.dim(0); ++i)
        matmul_nt_row(a.data(), b.data(), out.data(), i, a.dim(1), b.dim(0));
}

void conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, const Conv2dSpec& spec,
            Tensor& out) {
    const ConvDims d = conv_dims(in, w, spec);
    out = Tensor({d.f, d.oh, d.ow});
    for (long f = 0; f < d.f; ++f) conv2d_filter(in, w, bias, d, out, f);
}

void conv2d_grad_input(const Tensor& gout, const Tensor& w, const Conv2dSpec& spec, Tensor& gin) {
    ConvDims d{};
    d.cin = w.dim(1);
    d.f = w.dim(0);
    d.kh = w.dim(2);
    d.kw = w.dim(3);
    d.h = gin.dim(1);
    d.w = gin.dim(2);
    d.oh = gout.dim(1);
    d.ow = gout.dim(2);
    d.stride = spec.stride;
    d.pad = spec.pad;
    for (long c = 0; c < d.cin; ++c) conv2d_ginput_channel(gout, w, d, gin, c);
}

void conv2d_grad_weights(const Tensor& gout, const Tensor& in, const Conv2dSpec& spec, Tensor& gw,
                         Tensor& gbias) {
    ConvDims d{};
    d.cin = in.dim(0);
    d.h = in.dim(1);
    d.w = in.dim(2);
    d.f = gw.dim(0);
    d.kh = gw.dim(2);
    d.kw = gw.dim(3);
    d.oh = gout.dim(1);
    d.ow = gout.dim(2);
    d.stride = spec.stride;
    d.pad = spec.pad;
    for (long f = 0; f < d.f; ++f) conv2d_gweights_filter(gout, in, d, gw, gbias, f);
}

void upsample2x(const Tensor& in, Tensor& out) {
    out = Tensor({in.dim(0), in.dim(1) * 2, in.dim(2) * 2});
    for (long c = 0; c < in.dim(0); ++c)
        for (long y = 0; y < in.dim(1); ++y) upsample_row(in, out, c, y);
}

void upsample2x_grad(const Tensor& gout, Tensor& gin) {
    for (long c = 0; c < gin.dim(0); ++c)
        for (long y = 0; y < gin.dim(1); ++y) upsample_grad_row(gout, gin, c, y);
}

void resize_bilinear(const Tensor& in, Tensor& out) {
    for (long c = 0; c < in.dim(0); ++c) resize_channel(in, out, c);
}

void resize_bilinear_grad(const Tensor& gout, long in_h, long in_w, Tensor& gin) {
    if (gin.rank() != 3) gin = Tensor({gout.dim(0), in_h, in_w});
    for (long c = 0; c < gout.dim(0); ++c) resize_grad_channel(gout, gin, c);
}

void splat(const Tensor& centers, const Tensor& paint, const Tensor& sigma_px, long grid,
           Tensor& out) {
    for (long y = 0; y < grid; ++y) splat_row(centers, paint, sigma_px, grid, out, y);
}

void splat_grad(const Tensor& gout, const Tensor& centers, const Tensor& paint,
                const Tensor& sigma_px, long grid, Tensor& gcenters, Tensor& gpaint,
                Tensor& gsigma) {
    for (long k = 0; k < centers.dim(0); ++k)
        splat_grad_point(gout, centers, paint, sigma_px, grid, gcenters, gpaint, gsigma, k);
}

void heatmaps(const Tensor& centers, double sigma_px, long grid, Tensor& out) {
    for (long k = 0; k < centers.dim(0); ++k) heatmap_point(centers, sigma_px, grid, out, k);
}

void heatmaps_grad(const Tensor& gout, const Tensor& centers, double sigma_px, long grid,
                   Tensor& gcenters) {
    for (long k = 0; k < centers.dim(0); ++k)
        heatmap_grad_point(gout, centers, sigma_px, grid, gcenters, k);
}

void softmax_rows(const Tensor& in, Tensor& out) {
    for (long i = 0; i < in.dim(0); ++i) softmax_row(in, out, i);
}

void softmax_rows_grad(const Tensor& gout, const Tensor& out, Tensor& gin) {
    for (long i = 0; i < out.dim(0); ++i) softmax_grad_row(gout, out, gin, i);
}

double sum_all(const Tensor& t) {
    const long n = t.size();
    const long blocks = (n + kSumBlock - 1) / kSumBlock;
    double total = 0.0;
    for (long b = 0; b < blocks; ++b)
        total += sum_block(t.data() + b * kSumBlock, std::min(kSumBlock, n - b * kSumBlock));
    return total;
}

void dilate(const Tensor& mask, long radius, Tensor& out) {
    const long s = mask.dim(0);
    Tensor tmp({s, mask.dim(1)});
    for (long y = 0; y < s; ++y) dilate_hpass_row(mask, tmp, radius, y);
    for (long y = 0; y < s; ++y) dilate_vpass_row(tmp, out, radius, y);
}

} // namespace serial

// --- OpenMP variants ----------------------------------------------------------

namespace par {

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a, b, out, a.dim(0), a.dim(1), b.dim(0), b.dim(1));
    const long m = a.dim(0), k = a.dim(1), n = b.dim(1);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < m; ++i) matmul_row(a.data(), b.data(), out.data(), i, k, n);
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a, b, out, a.dim(1), a.dim(0), b.dim(0), b.dim(1));
    const long m = a.dim(1), k = a.dim(0), n = b.dim(1);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < m; ++i) matmul_tn_row(a.data(), b.data(), out.data(), i, k, m, n);
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a, b, out, a.dim(0), a.dim(1), b.dim(1), b.dim(0));
    const long m = a.dim(0), k = a.dim(1), n = b.dim(0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < m; ++i) matmul_nt_row(a.data(), b.data(), out.data(), i, k, n);
}

void conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, const Conv2dSpec& spec,
            Tensor& out) {
    const ConvDims d = conv_dims(in, w, spec);
    out = Tensor({d.f, d.oh, d.ow});
#pragma omp parallel for schedule(static)
    for (long f = 0; f < d.f; ++f) conv2d_filter(in, w, bias, d, out, f);
}

void conv2d_grad_input(const Tensor& gout, const Tensor& w, const Conv2dSpec& spec, Tensor& gin) {
    ConvDims d{};
    d.cin = w.dim(1);
    d.f = w.dim(0);
    d.kh = w.dim(2);
    d.kw = w.dim(3);
    d.h = gin.dim(1);
    d.w = gin.dim(2);
    d.oh = gout.dim(1);
    d.ow = gout.dim(2);
    d.stride = spec.stride;
    d.pad = spec.pad;
#pragma omp parallel for schedule(static)
    for (long c = 0; c < d.cin; ++c) conv2d_ginput_channel(gout, w, d, gin, c);
}

void conv2d_grad_weights(const Tensor& gout, const Tensor& in, const Conv2dSpec& spec, Tensor& gw,
                         Tensor& gbias) {
    ConvDims d{};
    d.cin = in.dim(0);
    d.h = in.dim(1);
    d.w = in.dim(2);
    d.f = gw.dim(0);
    d.kh = gw.dim(2);
    d.kw = gw.dim(3);
    d.oh = gout.dim(1);
    d.ow = gout.dim(2);
    d.stride = spec.stride;
    d.pad = spec.pad;
#pragma omp parallel for schedule(static)
    for (long f = 0; f < d.f; ++f) conv2d_gweights_filter(gout, in, d, gw, gbias, f);
}

void upsample2x(const Tensor& in, Tensor& out) {
    out = Tensor({in.dim(0), in.dim(1) * 2, in.dim(2) * 2});
    const long c = in.dim(0), h = in.dim(1);
#pragma omp parallel for schedule(static) collapse(2)
    for (long ci = 0; ci < c; ++ci)
        for (long y = 0; y < h; ++y) upsample_row(in, out, ci, y);
}

void upsample2x_grad(const Tensor& gout, Tensor& gin) {
    const long c = gin.dim(0), h = gin.dim(1);
#pragma omp parallel for schedule(static) collapse(2)
    for (long ci = 0; ci < c; ++ci)
        for (long y = 0; y < h; ++y) upsample_grad_row(gout, gin, ci, y);
}

void resize_bilinear(const Tensor& in, Tensor& out) {
#pragma omp parallel for schedule(static)
    for (long c = 0; c < in.dim(0); ++c) resize_channel(in, out, c);
}

void resize_bilinear_grad(const Tensor& gout, long in_h, long in_w, Tensor& gin) {
    if (gin.rank() != 3) gin = Tensor({gout.dim(0), in_h, in_w});
#pragma omp parallel for schedule(static)
    for (long c = 0; c < gout.dim(0); ++c) resize_grad_channel(gout, gin, c);
}

void splat(const Tensor& centers, const Tensor& paint, const Tensor& sigma_px, long grid,
           Tensor& out) {
#pragma omp parallel for schedule(static)
    for (long y = 0; y < grid; ++y) splat_row(centers, paint, sigma_px, grid, out, y);
}

void splat_grad(const Tensor& gout, const Tensor& centers, const Tensor& paint,
                const Tensor& sigma_px, long grid, Tensor& gcenters, Tensor& gpaint,
                Tensor& gsigma) {
    const long n = centers.dim(0);
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k)
        splat_grad_point(gout, centers, paint, sigma_px, grid, gcenters, gpaint, gsigma, k);
}

void heatmaps(const Tensor& centers, double sigma_px, long grid, Tensor& out) {
    const long n = centers.dim(0);
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) heatmap_point(centers, sigma_px, grid, out, k);
}

void heatmaps_grad(const Tensor& gout, const Tensor& centers, double sigma_px, long grid,
                   Tensor& gcenters) {
    const long n = centers.dim(0);
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) heatmap_grad_point(gout, centers, sigma_px, grid, gcenters, k);
}

void softmax_rows(const Tensor& in, Tensor& out) {
    const long r = in.dim(0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < r; ++i) softmax_row(in, out, i);
}

void softmax_rows_grad(const Tensor& gout, const Tensor& out, Tensor& gin) {
    const long r = out.dim(0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < r; ++i) softmax_grad_row(gout, out, gin, i);
}

double sum_all(const Tensor& t) {
    const long n = t.size();
    const long blocks = (n + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(static_cast<size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
    for (long b = 0; b < blocks; ++b)
        partial[static_cast<size_t>(b)] =
            sum_block(t.data() + b * kSumBlock, std::min(kSumBlock, n - b * kSumBlock));
    double total = 0.0;
    for (long b = 0; b < blocks; ++b) total += partial[static_cast<size_t>(b)];
    return total;
}

void dilate(const Tensor& mask, long radius, Tensor& out) {
    const long s = mask.dim(0);
    Tensor tmp({s, mask.dim(1)});
#pragma omp parallel for schedule(static)
    for (long y = 0; y < s; ++y) dilate_hpass_row(mask, tmp, radius, y);
#pragma omp parallel for schedule(static)
    for (long y = 0; y < s; ++y) dilate_vpass_row(tmp, out, radius, y);
}

} // namespace par

// --- dispatch -----------------------------------------------------------------

#define LEK_DISPATCH(name, ...)                       \
    do {                                              \
        if (g_mode == ExecMode::Parallel)             \
            par::name(__VA_ARGS__);                   \
        else                                          \
            serial::name(__VA_ARGS__);                \
    } while (0)

void matmul(const Tensor& a, const Tensor& b, Tensor& out) { LEK_DISPATCH(matmul, a, b, out); }
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    LEK_DISPATCH(matmul_tn, a, b, out);
}
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out) {
    LEK_DISPATCH(matmul_nt, a, b, out);
}
void conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, const Conv2dSpec& spec,
            Tensor& out) {
    LEK_DISPATCH(conv2d, in, w, bias, spec, out);
}
void conv2d_grad_input(const Tensor& gout, const Tensor& w, const Conv2dSpec& spec, Tensor& gin) {
    LEK_DISPATCH(conv2d_grad_input, gout, w, spec, gin);
}
void conv2d_grad_weights(const Tensor& gout, const Tensor& in, const Conv2dSpec& spec, Tensor& gw,
                         Tensor& gbias) {
    LEK_DISPATCH(conv2d_grad_weights, gout, in, spec, gw, gbias);
}
void upsample2x(const Tensor& in, Tensor& out) { LEK_DISPATCH(upsample2x, in, out); }
void upsample2x_grad(const Tensor& gout, Tensor& gin) { LEK_DISPATCH(upsample2x_grad, gout, gin); }
void resize_bilinear(const Tensor& in, Tensor& out) { LEK_DISPATCH(resize_bilinear, in, out); }
void resize_bilinear_grad(const Tensor& gout, long in_h, long in_w, Tensor& gin) {
    LEK_DISPATCH(resize_bilinear_grad, gout, in_h, in_w, gin);
}
void splat(const Tensor& centers, const Tensor& paint, const Tensor& sigma_px, long grid,
           Tensor& out) {
    LEK_DISPATCH(splat, centers, paint, sigma_px, grid, out);
}
void splat_grad(const Tensor& gout, const Tensor& centers, const Tensor& paint,
                const Tensor& sigma_px, long grid, Tensor& gcenters, Tensor& gpaint,
                Tensor& gsigma) {
    LEK_DISPATCH(splat_grad, gout, centers, paint, sigma_px, grid, gcenters, gpaint, gsigma);
}
void heatmaps(const Tensor& centers, double sigma_px, long grid, Tensor& out) {
    LEK_DISPATCH(heatmaps, centers, sigma_px, grid, out);
}
void heatmaps_grad(const Tensor& gout, const Tensor& centers, double sigma_px, long grid,
                   Tensor& gcenters) {
    LEK_DISPATCH(heatmaps_grad, gout, centers, sigma_px, grid, gcenters);
}
void softmax_rows(const Tensor& in, Tensor& out) { LEK_DISPATCH(softmax_rows, in, out); }
void softmax_rows_grad(const Tensor& gout, const Tensor& out, Tensor& gin) {
    LEK_DISPATCH(softmax_rows_grad, gout, out, gin);
}
double sum_all(const Tensor& t) {
    return g_mode == ExecMode::Parallel ? par::sum_all(t) : serial::sum_all(t);
}
void dilate(const Tensor& mask, long radius, Tensor& out) {
    LEK_DISPATCH(dilate, mask, radius, out);
}

#undef LEK_DISPATCH

} // namespace lek::core::kernels
