#include "sv/synthetic.hpp"

#include <cmath>

#include "rng.hpp"
#include "sv/error.hpp"

namespace sv {

using detail::Rng;
using detail::mix;

namespace {

void fill_rect(Image& image, const PixelRect& rect, const uint8_t* color, int channels) {
    for (int y = std::max(rect.y0, 0); y < std::min(rect.y1, image.height); ++y)
        for (int x = std::max(rect.x0, 0); x < std::min(rect.x1, image.width); ++x)
            for (int c = 0; c < channels; ++c) image.at(x, y, c) = color[c];
}

bool in_shape(SyntheticSceneSpec::Shape shape, int x, int y, int size) {
    if (shape == SyntheticSceneSpec::Shape::square) return true;
    const double cx = (size - 1) / 2.0, cy = (size - 1) / 2.0;
    const double r = size / 2.0;
    const double dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy <= r * r;
}

}  // namespace

SceneBundle make_synthetic_scene(const SyntheticSceneSpec& spec) {
    const int w = spec.width, h = spec.height;
    if (w < 64 || h < 64)
        throw Error(ErrorCode::ManifestInvalid, "synthetic canvas must be at least 64x64");
    Rng rng{mix(spec.seed, 0x5CE11E, w, h)};

    // Ground strip occupies the bottom eighth of the canvas.
    const int ground_row = h - h / 8;
    const int size = spec.object_size_px;

    // Start at the left on the ground, goal at the right, obstacle shelf
    // floating over the corridor between them. Horizontal jitter only, so
    // start and goal centers share the ground row.
    const int start_x = w / 8 + static_cast<int>(rng.range(-w / 32.0, w / 32.0));
    const int goal_x = w - w / 4 + static_cast<int>(rng.range(-w / 32.0, w / 32.0));
    const int obstacle_cx = w / 2 + static_cast<int>(rng.range(-w / 48.0, w / 48.0));
    const int obstacle_cy = h / 4 + static_cast<int>(rng.range(-h / 48.0, h / 48.0));
    const int obstacle_hw = w / 10, obstacle_hh = h / 10;

    SceneBundle scene;
    scene.ground_line = static_cast<double>(ground_row) / h;

    // Background: flat sky over a darker ground strip, obstacle drawn in.
    const uint8_t sky[3] = {228, 232, 236};
    const uint8_t ground[3] = {116, 104, 92};
    const uint8_t obstacle_color[3] = {70, 76, 88};
    scene.background = Image(w, h, 3);
    fill_rect(scene.background, {0, 0, w, h}, sky, 3);
    fill_rect(scene.background, {0, ground_row, w, h}, ground, 3);
    const PixelRect obstacle{obstacle_cx - obstacle_hw, obstacle_cy - obstacle_hh,
                             obstacle_cx + obstacle_hw, obstacle_cy + obstacle_hh};
    if (spec.with_obstacle) fill_rect(scene.background, obstacle, obstacle_color, 3);

    scene.static_mask = Image(w, h, 1);
    const uint8_t on[1] = {255};
    fill_rect(scene.static_mask, {0, ground_row, w, h}, on, 1);
    if (spec.with_obstacle) fill_rect(scene.static_mask, obstacle, on, 1);

    // Object resting on the ground.
    const PixelRect object_rect{start_x, ground_row - size, start_x + size, ground_row};
    scene.initial_frame = scene.background;

    ObjectAsset obj;
    obj.id = spec.object_id;
    obj.label = spec.object_label;
    obj.mask = Image(w, h, 1);
    obj.sprite = Image(size, size, 4);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            if (!in_shape(spec.shape, x, y, size)) continue;
            obj.mask.at(object_rect.x0 + x, object_rect.y0 + y, 0) = 255;
            for (int c = 0; c < 3; ++c) {
                scene.initial_frame.at(object_rect.x0 + x, object_rect.y0 + y, c) =
                    spec.object_color[c];
                obj.sprite.at(x, y, c) = spec.object_color[c];
            }
            obj.sprite.at(x, y, 3) = 255;
        }
    obj.initial_box = {static_cast<double>(object_rect.x0) / w,
                       static_cast<double>(object_rect.y0) / h,
                       static_cast<double>(object_rect.x1) / w,
                       static_cast<double>(object_rect.y1) / h};
    scene.objects.push_back(std::move(obj));

    // Goal region: object-sized box on the ground at the right.
    GoalSpec goal;
    const PixelRect goal_rect{goal_x, ground_row - size, goal_x + size, ground_row};
    goal.goal_region = BBox{static_cast<double>(goal_rect.x0) / w,
                            static_cast<double>(goal_rect.y0) / h,
                            static_cast<double>(goal_rect.x1) / w,
                            static_cast<double>(goal_rect.y1) / h};
    if (spec.emit_direction) {
        const Vec2 start_center = bbox_center(scene.objects.front().initial_box);
        const Vec2 goal_center = bbox_center(*goal.goal_region);
        const Vec2 d = goal_center - start_center;
        const double n = d.norm();
        if (n > 1e-12) goal.direction = Vec2{d.x / n, d.y / n};
    }
    goal.description = "move the " + spec.object_label + " to the marked spot on the right";
    scene.goal = goal;

    return scene;
}

}  // namespace sv
