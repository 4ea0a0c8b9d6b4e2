#include "lek/face.hpp"

#include <cmath>

#include "lek/core/kernels.hpp"

namespace lek::face {

namespace {

constexpr double kPi = 3.14159265358979323846;

long group_of(long k) {
    if (k < kJawEnd) return 0;
    if (k < kBrowEnd) return 1;
    if (k < kNoseEnd) return 2;
    if (k < kLeftEyeEnd) return 3;
    if (k < kMouthInnerBegin) return 4;
    return 5;
}

} // namespace

LandmarkSet face_landmarks(const FaceParams& p) {
    Tensor pts({kCount, 2});
    auto set = [&](long k, double x, double y) {
        pts.at2(k, 0) = x;
        pts.at2(k, 1) = y;
    };

    // jaw: U-shaped arc ear to ear
    for (long i = 0; i < 17; ++i) {
        const double u = static_cast<double>(i) / 16.0;
        set(kJawBegin + i, 0.5 - 0.34 * std::cos(kPi * u), 0.42 + 0.38 * std::sin(kPi * u));
    }
    // brows, slightly arched
    for (long j = 0; j < 5; ++j) {
        const double arch = 0.015 * std::sin(kPi * static_cast<double>(j) / 4.0);
        set(17 + j, 0.22 + 0.04 * static_cast<double>(j), 0.31 - arch);
        set(22 + j, 0.62 + 0.04 * static_cast<double>(j), 0.31 - arch);
    }
    // nose bridge and nostril line
    for (long j = 0; j < 4; ++j) set(27 + j, 0.50, 0.41 + 0.045 * static_cast<double>(j));
    for (long j = 0; j < 5; ++j) set(31 + j, 0.44 + 0.03 * static_cast<double>(j), 0.58);
    // eyes: hexagons centered on the canonical anchors
    const double ex[6] = {-0.045, -0.018, 0.018, 0.045, 0.018, -0.018};
    const double ey[6] = {0.0, -0.018, -0.018, 0.0, 0.018, 0.018};
    for (long j = 0; j < 6; ++j) {
        set(kRightEyeBegin + j, kRightEyeX + ex[j], kEyeY + ey[j]);
        set(kLeftEyeBegin + j, kLeftEyeX + ex[j], kEyeY + ey[j]);
    }
    // mouth: outer 12-gon and inner 8-gon, opening controlled by mouth_open
    const double m = p.mouth_open;
    const double mcx = 0.50, mcy = 0.67;
    for (long j = 0; j < 12; ++j) {
        const double th = kPi - kPi / 6.0 * static_cast<double>(j);
        const double s = std::sin(th);
        const double ry = s >= 0.0 ? 0.030 + 0.35 * m : 0.045 + 0.65 * m;
        set(48 + j, mcx + 0.10 * std::cos(th), mcy - ry * s);
    }
    for (long j = 0; j < 8; ++j) {
        const double th = kPi - kPi / 4.0 * static_cast<double>(j);
        const double ry = 0.006 + 0.45 * m;
        set(60 + j, mcx + 0.065 * std::cos(th), mcy - ry * std::sin(th));
    }

    // all-point offset, then rigid similarity about the crop center
    const double cr = std::cos(p.rotation), sr = std::sin(p.rotation);
    for (long k = 0; k < kCount; ++k) {
        const double x = pts.at2(k, 0) + p.offset_x - 0.5;
        const double y = pts.at2(k, 1) + p.offset_y - 0.5;
        pts.at2(k, 0) = 0.5 + p.scale * (cr * x - sr * y) + p.tx;
        pts.at2(k, 1) = 0.5 + p.scale * (sr * x + cr * y) + p.ty;
    }
    return LandmarkSet(std::move(pts));
}

LandmarkSet canonical_template() { return face_landmarks(FaceParams{}); }

Tensor group_selector() {
    Tensor sel({kCount, kGroups});
    for (long k = 0; k < kCount; ++k) sel.at2(k, group_of(k)) = 1.0;
    return sel;
}

FaceAppearance default_appearance() {
    FaceAppearance app;
    app.paint_groups = Tensor::from({kGroups, 3}, {
        2.0, 1.6, 1.2,    // jaw / skin fill
        -1.6, -1.6, -1.4, // brows
        0.9, 0.55, 0.4,   // nose
        -2.0, -2.0, -0.6, // eyes
        1.8, -1.3, -1.0,  // outer lips
        -2.6, -2.9, -2.9, // inner mouth
    });
    app.radius_groups = Tensor::from({kGroups}, {7.0, 1.8, 2.2, 1.6, 2.2, 1.8});
    app.bias = Tensor::from({3}, {-2.2, -2.1, -1.9});
    return app;
}

Tensor render_face(const LandmarkSet& landmarks, const FaceAppearance& app, long size) {
    const Tensor sel = group_selector();
    Tensor paint, radius;
    core::kernels::matmul(sel, app.paint_groups, paint);
    Tensor radius_col = app.radius_groups.reshaped({kGroups, 1});
    Tensor radius2;
    core::kernels::matmul(sel, radius_col, radius2);
    radius = radius2.reshaped({kCount});
    // stroke radii are stated at 64-grid scale
    const double rescale = static_cast<double>(size) / 64.0;
    for (long k = 0; k < kCount; ++k) radius.at(k) *= rescale;

    Tensor logits({3, size, size});
    for (long c = 0; c < 3; ++c)
        for (long i = 0; i < size * size; ++i) logits.at(c * size * size + i) = app.bias.at(c);
    core::kernels::splat(landmarks.points, paint, radius, size, logits);
    Tensor out({3, size, size});
    for (long i = 0; i < out.size(); ++i) out.at(i) = 1.0 / (1.0 + std::exp(-logits.at(i)));
    return out;
}

} // namespace lek::face
