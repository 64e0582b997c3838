#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sv/geometry.hpp"
#include "sv/image.hpp"

namespace sv {

/// Frame budget shared by every plan: phase lengths always sum to this.
inline constexpr int kPlanTotalFrames = 41;
/// Dense-track length expected by the downstream generator.
inline constexpr int kOutputFrames = 81;
/// Sketch preview playback rate.
inline constexpr double kSketchFps = 4.0;

/// One movable sprite extracted from the initial frame.
struct ObjectAsset {
    std::string id;
    std::string label;
    Image sprite;      // RGBA crop, dimensions equal the mask's tight bounding box
    Image mask;        // full-frame binary mask
    BBox initial_box;  // normalized location of the crop in the initial frame
    bool resizable = false;
};

/// Machine-checkable end state for one sub-instruction. At least one of
/// region/direction is present; direction has unit norm.
struct GoalSpec {
    std::optional<BBox> goal_region;
    std::optional<Vec2> direction;
    std::string description;

    bool valid() const;
};

struct SubInstruction {
    int index = 0;
    std::string text;
    int frame_budget = 0;  // >= 2
    std::vector<std::string> moving_ids;
    std::vector<std::string> static_ids;
    std::optional<GoalSpec> goal;  // resolved from the plan or the scene manifest
};

struct HighLevelPlan {
    std::vector<SubInstruction> sub_instructions;  // 1..4 phases
    int total_plan_frames = kPlanTotalFrames;
    std::string source_prompt;
};

/// Validated input bundle: the planning canvas plus the sprites that move on it.
/// Immutable after load; safe to share across threads.
struct SceneBundle {
    Image initial_frame;  // RGB
    Image background;     // RGB, same dimensions
    Image static_mask;    // binary, same dimensions; non-moving obstacles/supports
    std::vector<ObjectAsset> objects;
    double ground_line = 1.0;  // normalized y of the ground plane
    std::optional<GoalSpec> goal;

    int width() const { return initial_frame.width; }
    int height() const { return initial_frame.height; }

    const ObjectAsset* find_object(const std::string& id) const;
};

/// Reads `manifest.json` and the rasters it references, then checks every
/// bundle invariant. Throws MissingAsset / DimensionMismatch / ManifestInvalid,
/// each naming the offending field.
SceneBundle load_scene_bundle(const std::filesystem::path& dir);

/// Inverse of load_scene_bundle; writes a bundle directory whose reload
/// compares equal and whose re-save is byte-identical.
void save_scene_bundle(const SceneBundle& scene, const std::filesystem::path& dir);

/// Tight pixel bounding rectangle of a mask's nonzero region.
PixelRect mask_pixel_bbox(const Image& mask);

}  // namespace sv
