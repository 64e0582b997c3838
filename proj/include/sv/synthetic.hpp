#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sv/scene.hpp"

namespace sv {

/// Recipe for a seeded single-mover benchmark scene: a colored shape resting
/// on the ground at the left, a goal region on the ground at the right, and a
/// floating obstacle block over the corridor between them.
struct SyntheticSceneSpec {
    int width = 256;
    int height = 256;
    enum class Shape { square, disc } shape = Shape::square;
    int object_size_px = 32;
    std::array<uint8_t, 3> object_color = {200, 60, 50};
    bool with_obstacle = true;
    bool emit_direction = true;  // include a direction term in the goal
    uint64_t seed = 0;
    std::string object_id = "mover";
    std::string object_label = "colored block";
};

/// Builds the bundle in memory; passes load_scene_bundle validation when
/// saved. Deterministic per spec+seed.
SceneBundle make_synthetic_scene(const SyntheticSceneSpec& spec);

}  // namespace sv
