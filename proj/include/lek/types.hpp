#pragma once

#include <array>
#include <vector>

#include "lek/core/tensor.hpp"

namespace lek {

using core::Tensor;

// 2x3 affine matrix [a b tx; c d ty], maps crop coordinates (in pixels of the
// crop) back to source-frame pixel coordinates.
using AffineTransform = std::array<double, 6>;

inline constexpr AffineTransform kIdentityTransform = {1, 0, 0, 0, 1, 0};

// Square RGB crop with pixels in [0,1], stored channel-major (3,S,S).
struct Frame {
    Tensor pixels;
    AffineTransform crop_transform = kIdentityTransform;
    int index = 0;

    long size() const { return pixels.rank() == 3 ? pixels.dim(1) : 0; }
    double& px(long c, long y, long x) { return pixels.at3(c, y, x); }
    double px(long c, long y, long x) const { return pixels.at3(c, y, x); }
};

struct FrameSequence {
    std::vector<Frame> frames;
    double fps = 25.0;

    long count() const { return static_cast<long>(frames.size()); }
};

// Per-video-frame audio features: T sub-steps by F coefficients.
struct AudioFeatureWindow {
    Tensor features;
    int frame_index = 0;
};

// n labeled points in normalized [0,1] crop coordinates, (n,2), x then y.
struct LandmarkSet {
    Tensor points;

    LandmarkSet() = default;
    explicit LandmarkSet(Tensor pts) : points(std::move(pts)) {
        if (points.rank() != 2 || points.dim(1) != 2)
            throw ShapeError("LandmarkSet: expected (n,2) points");
        if (!points.all_finite()) throw Error("LandmarkSet: non-finite coordinates");
    }

    long n() const { return points.dim(0); }
    double x(long k) const { return points.at2(k, 0); }
    double y(long k) const { return points.at2(k, 1); }
};

// Layerwise latent (L,d), one style vector per synthesis layer.
struct LatentCode {
    Tensor w;

    LatentCode() = default;
    explicit LatentCode(Tensor t) : w(std::move(t)) {
        if (w.rank() != 2) throw ShapeError("LatentCode: expected (L,d) matrix");
    }

    long layers() const { return w.dim(0); }
    long dim() const { return w.dim(1); }
};

// n heatmaps on a fixed grid, stored (n, G, G).
struct HeatmapStack {
    Tensor maps;

    HeatmapStack() = default;
    explicit HeatmapStack(Tensor t) : maps(std::move(t)) {
        if (maps.rank() != 3 || maps.dim(1) != maps.dim(2))
            throw ShapeError("HeatmapStack: expected (n,G,G) tensor");
    }

    long count() const { return maps.dim(0); }
    long grid() const { return maps.dim(1); }
};

// Per-landmark nonnegative loss weights a_i.
struct LandmarkWeights {
    Tensor a;

    LandmarkWeights() = default;
    explicit LandmarkWeights(Tensor t) : a(std::move(t)) {
        if (a.rank() != 1) throw ShapeError("LandmarkWeights: expected vector");
        for (long i = 0; i < a.size(); ++i)
            if (a.at(i) < 0.0) throw Error("LandmarkWeights: negative weight");
    }

    long n() const { return a.size(); }
};

} // namespace lek
