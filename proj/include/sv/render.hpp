#pragma once

#include <filesystem>
#include <vector>

#include "sv/planner.hpp"
#include "sv/scene.hpp"

namespace sv {

/// Cheap frame sequence: sprites pasted over the static background along one
/// candidate trajectory. A proxy for full generation during verification.
struct VideoSketch {
    std::vector<Image> frames;  // RGB, scene dimensions
    int trajectory_ref = 0;     // candidate_index this sketch visualizes
    double fps = kSketchFps;
};

/// Pure compositor. Frame t = background with each object present in
/// candidate.frames[t] pasted in manifest order (later over earlier), sprite
/// scaled to its box (nearest-neighbor when sizes match, bilinear otherwise),
/// source-over alpha with half-up rounding. Pixels outside pasted rectangles
/// are bit-identical to the background.
VideoSketch render_sketch(const TrajectoryCandidate& candidate, const SceneBundle& scene);

/// Writes dir/frame_%03d.png (lossless, canonical) and optionally dir/sketch.gif
/// at sketch.fps. Throws IoError.
void encode_sketch(const VideoSketch& sketch, const std::filesystem::path& dir,
                   bool with_gif = false);

std::vector<Image> decode_sketch_frames(const std::filesystem::path& dir);

/// Final frame, unmodified; the next sub-instruction's context frame.
const Image& last_frame(const VideoSketch& sketch);

}  // namespace sv
