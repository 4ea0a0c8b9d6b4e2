#pragma once

#include "lek/core/tensor.hpp"
#include "lek/types.hpp"

namespace lek::face {

// iBUG-68 landmark indexing convention.
inline constexpr long kCount = 68;
inline constexpr long kJawBegin = 0, kJawEnd = 17;
inline constexpr long kBrowBegin = 17, kBrowEnd = 27;
inline constexpr long kNoseBegin = 27, kNoseEnd = 36;
inline constexpr long kRightEyeBegin = 36, kRightEyeEnd = 42;
inline constexpr long kLeftEyeBegin = 42, kLeftEyeEnd = 48;
inline constexpr long kMouthBegin = 48, kMouthEnd = 68;
inline constexpr long kMouthInnerBegin = 60;

// Canonical eye centers; crop alignment targets these positions.
inline constexpr double kRightEyeX = 0.30, kLeftEyeX = 0.70, kEyeY = 0.40;

// Parameters of the procedural face: shape variation (mouth opening), an
// all-point offset, and a rigid similarity pose about the crop center.
struct FaceParams {
    double mouth_open = 0.0; // normalized units, sensible range [0, 0.08]
    double offset_x = 0.0;
    double offset_y = 0.0;
    double rotation = 0.0; // radians
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;
};

LandmarkSet canonical_template();
LandmarkSet face_landmarks(const FaceParams& p);

// Splat-rendering appearance: per-group paint (logit space), Gaussian stroke
// radius in pixels on a 64 grid, and the background logit bias.
inline constexpr long kGroups = 6; // jaw, brow, nose, eye, mouth outer, mouth inner

struct FaceAppearance {
    Tensor paint_groups; // (kGroups, 3)
    Tensor radius_groups; // (kGroups), pixels at 64-grid scale
    Tensor bias;          // (3)
};

FaceAppearance default_appearance();

// One-hot (68, kGroups) matrix mapping landmark index to its stroke group.
Tensor group_selector();

// Eager rasterization: sigmoid(bias + splats), (3,size,size) in [0,1].
Tensor render_face(const LandmarkSet& landmarks, const FaceAppearance& app, long size);

} // namespace lek::face
