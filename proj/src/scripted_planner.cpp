#include <algorithm>
#include <cmath>
#include <numbers>

#include "rng.hpp"
#include "sv/error.hpp"
#include "sv/planner.hpp"

namespace sv {

using detail::Rng;
using detail::mix;

namespace {

BBox box_from_center(Vec2 center, double half_w, double half_h) {
    // Shift-clamp into the unit square, preserving size.
    center.x = std::clamp(center.x, half_w, 1.0 - half_w);
    center.y = std::clamp(center.y, half_h, 1.0 - half_h);
    return {center.x - half_w, center.y - half_h, center.x + half_w, center.y + half_h};
}

/// Bounding box of static-mask pixels above the ground strip, if any.
std::optional<BBox> obstacle_bbox(const SceneBundle& scene) {
    const Image& mask = scene.static_mask;
    const double limit = scene.ground_line - 0.01;
    int x0 = mask.width, y0 = mask.height, x1 = 0, y1 = 0;
    for (int y = 0; y < mask.height; ++y) {
        if ((y + 0.5) / mask.height >= limit) break;
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y, 0) != 0) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x + 1);
                y1 = std::max(y1, y + 1);
            }
    }
    if (x1 <= x0) return std::nullopt;
    return BBox{static_cast<double>(x0) / mask.width, static_cast<double>(y0) / mask.height,
                static_cast<double>(x1) / mask.width, static_cast<double>(y1) / mask.height};
}

Vec2 goal_center_of(const GoalSpec& goal, const Vec2& start) {
    if (goal.goal_region) return bbox_center(*goal.goal_region);
    if (goal.direction) return start + *goal.direction * 0.35;
    return start;
}

/// Primary-mover center path for one variant; every moving object follows
/// the same per-frame deltas relative to its own start box.
std::vector<Vec2> variant_path(ScriptedVariant variant, const Vec2& start, const Vec2& goal,
                               const BBox& start_box, const SceneBundle& scene, int frames,
                               Rng& rng, bool jitter) {
    const int last = frames - 1;
    std::vector<Vec2> path(frames);
    auto u_of = [last](int t) { return last > 0 ? static_cast<double>(t) / last : 0.0; };

    switch (variant) {
        case ScriptedVariant::clean: {
            // Constant velocity; a mild seeded timing profile in pool mode.
            const double gamma = jitter ? rng.range(0.92, 1.08) : 1.0;
            for (int t = 0; t < frames; ++t)
                path[t] = lerp(start, goal, std::pow(u_of(t), gamma));
            break;
        }
        case ScriptedVariant::teleport: {
            const int t_jump = std::max(1, frames / 2);
            double magnitude = jitter ? rng.range(0.30, 0.40) : 0.35;
            const double half_w = start_box.width() / 2.0;
            const Vec2 before = lerp(start, goal, u_of(t_jump));
            const double dir = before.x + magnitude + half_w <= 1.0 ? 1.0 : -1.0;
            const Vec2 landing{before.x + dir * magnitude, before.y};
            for (int t = 0; t < frames; ++t) {
                if (t < t_jump)
                    path[t] = lerp(start, goal, u_of(t));
                else if (t == last)
                    path[t] = goal;
                else
                    path[t] = lerp(landing, goal,
                                   static_cast<double>(t - t_jump) / (last - t_jump));
            }
            break;
        }
        case ScriptedVariant::penetrate: {
            // Quadratic arc through the obstacle center: gravity-consistent
            // flight that breaks only the penetration law.
            Vec2 mid;
            if (auto obs = obstacle_bbox(scene)) {
                mid = bbox_center(*obs);
            } else {
                mid = lerp(start, goal, 0.5);
                mid.y -= jitter ? rng.range(0.2, 0.3) : 0.25;
            }
            const Vec2 control{2.0 * mid.x - (start.x + goal.x) / 2.0,
                               2.0 * mid.y - (start.y + goal.y) / 2.0};
            for (int t = 0; t < frames; ++t) {
                const double u = u_of(t);
                const double a = (1 - u) * (1 - u), b = 2 * u * (1 - u), c = u * u;
                path[t] = {a * start.x + b * control.x + c * goal.x,
                           a * start.y + b * control.y + c * goal.y};
            }
            break;
        }
        case ScriptedVariant::hover: {
            // Constant-altitude glide, airborne from the first frame.
            const double half_h = start_box.height() / 2.0;
            double altitude = start.y - (jitter ? rng.range(0.13, 0.20) : 0.1625);
            if (auto obs = obstacle_bbox(scene))
                altitude = std::max(altitude, obs->y_max + half_h + 0.03);
            altitude = std::min(altitude, scene.ground_line - half_h - 0.04);
            for (int t = 0; t < frames; ++t)
                path[t] = {lerp(start, goal, u_of(t)).x, altitude};
            break;
        }
        case ScriptedVariant::drift: {
            // Overshoot-and-return timing keeps the drifting candidate far
            // from the clean one under the center-distance metric; the size
            // ramp itself is applied by the caller.
            const double amp = jitter ? rng.range(0.20, 0.30) : 0.25;
            for (int t = 0; t < frames; ++t) {
                const double u = u_of(t);
                const double s = u + amp * std::sin(std::numbers::pi * u);
                path[t] = lerp(start, goal, s);
            }
            break;
        }
    }
    return path;
}

}  // namespace

const char* scripted_variant_name(ScriptedVariant v) {
    switch (v) {
        case ScriptedVariant::clean: return "clean";
        case ScriptedVariant::teleport: return "teleport";
        case ScriptedVariant::penetrate: return "penetrate";
        case ScriptedVariant::hover: return "hover";
        case ScriptedVariant::drift: return "drift";
    }
    return "?";
}

ScriptedPlanner::ScriptedPlanner(ScriptedPlannerOptions options) : options_(std::move(options)) {
    if (options_.variant_pool.empty())
        options_.variant_pool = {ScriptedVariant::clean};
}

std::vector<ScriptedVariant> ScriptedPlanner::variant_order(int sub_index, int attempt,
                                                            int k) const {
    std::vector<ScriptedVariant> order;
    if (options_.mode == ScriptedPlannerOptions::Mode::planted_set) {
        std::vector<ScriptedVariant> base = {ScriptedVariant::clean, ScriptedVariant::teleport,
                                             ScriptedVariant::penetrate, ScriptedVariant::hover,
                                             ScriptedVariant::drift};
        Rng rng{mix(options_.seed, static_cast<uint64_t>(sub_index),
                    static_cast<uint64_t>(attempt), 0xA11)};
        for (int i = static_cast<int>(base.size()) - 1; i > 0; --i)
            std::swap(base[i], base[rng.index(i + 1)]);
        for (int slot = 0; slot < k; ++slot) order.push_back(base[slot % base.size()]);
        return order;
    }
    for (int slot = 0; slot < k; ++slot) {
        Rng rng{mix(options_.seed, static_cast<uint64_t>(sub_index),
                    static_cast<uint64_t>(attempt) * 64 + 1, static_cast<uint64_t>(slot))};
        order.push_back(
            options_.variant_pool[rng.index(static_cast<int>(options_.variant_pool.size()))]);
    }
    return order;
}

HighLevelPlan ScriptedPlanner::propose_plan(const std::string& prompt,
                                            const SceneBundle& scene) {
    const int phases = std::clamp(options_.phases, 1, 4);
    HighLevelPlan plan;
    plan.source_prompt = prompt;
    plan.total_plan_frames = kPlanTotalFrames;

    std::vector<std::string> all_ids;
    for (const ObjectAsset& obj : scene.objects) all_ids.push_back(obj.id);
    if (all_ids.empty())
        throw Error(ErrorCode::ManifestInvalid, "scene has no objects to plan for");

    if (!scene.goal)
        throw Error(ErrorCode::ManifestInvalid,
                    "goal: required in the manifest for scripted planning");

    const Vec2 start = bbox_center(scene.objects.front().initial_box);
    const Vec2 end = goal_center_of(*scene.goal, start);

    // Even frame split, remainder to the last phase.
    const int base = kPlanTotalFrames / phases;
    for (int i = 0; i < phases; ++i) {
        SubInstruction sub;
        sub.index = i;
        sub.text = prompt + " (phase " + std::to_string(i + 1) + "/" + std::to_string(phases) + ")";
        sub.frame_budget = i + 1 == phases ? kPlanTotalFrames - base * (phases - 1) : base;
        sub.moving_ids = all_ids;

        if (i + 1 == phases) {
            sub.goal = *scene.goal;
        } else {
            // Intermediate waypoint: the goal region translated onto the path.
            const Vec2 prev = lerp(start, end, static_cast<double>(i) / phases);
            const Vec2 waypoint = lerp(start, end, static_cast<double>(i + 1) / phases);
            GoalSpec goal;
            if (scene.goal->goal_region) {
                const double hw = scene.goal->goal_region->width() / 2.0;
                const double hh = scene.goal->goal_region->height() / 2.0;
                goal.goal_region = box_from_center(waypoint, hw, hh);
            }
            const Vec2 step = waypoint - prev;
            if (step.norm() > 1e-12)
                goal.direction = Vec2{step.x / step.norm(), step.y / step.norm()};
            goal.description = "waypoint " + std::to_string(i + 1);
            if (!goal.goal_region && !goal.direction) goal.direction = Vec2{1.0, 0.0};
            sub.goal = goal;
        }
        plan.sub_instructions.push_back(std::move(sub));
    }
    return plan;
}

std::vector<TrajectoryCandidate> ScriptedPlanner::propose_trajectories(
    const SubInstruction& sub, const PlanningContext& context, const SceneBundle& scene, int k,
    const std::optional<PlannerFeedback>& feedback) {
    const int attempt = feedback ? feedback->attempt : 1;
    const bool jitter = options_.mode == ScriptedPlannerOptions::Mode::pool;
    const std::vector<ScriptedVariant> variants = variant_order(sub.index, attempt, k);

    const std::string& primary = sub.moving_ids.front();
    auto primary_it = context.boxes.find(primary);
    if (primary_it == context.boxes.end())
        throw SchemaError(SchemaErrorKind::unknown_object,
                          "context has no current box for \"" + primary + "\"");
    const BBox primary_box = primary_it->second;
    const Vec2 start = bbox_center(primary_box);
    const Vec2 goal = sub.goal ? goal_center_of(*sub.goal, start) : start;

    std::vector<TrajectoryCandidate> candidates;
    for (int slot = 0; slot < k; ++slot) {
        Rng rng{mix(options_.seed, static_cast<uint64_t>(sub.index),
                    static_cast<uint64_t>(attempt) * 64 + 2, static_cast<uint64_t>(slot))};
        const ScriptedVariant variant = variants[slot];
        const std::vector<Vec2> path = variant_path(variant, start, goal, primary_box, scene,
                                                    sub.frame_budget, rng, jitter);

        TrajectoryCandidate candidate;
        candidate.candidate_index = slot;
        candidate.frames.resize(sub.frame_budget);
        for (const std::string& id : sub.moving_ids) {
            auto it = context.boxes.find(id);
            if (it == context.boxes.end())
                throw SchemaError(SchemaErrorKind::unknown_object,
                                  "context has no current box for \"" + id + "\"");
            const BBox start_box = it->second;
            const Vec2 center0 = bbox_center(start_box);
            const double half_w = start_box.width() / 2.0;
            const double half_h = start_box.height() / 2.0;
            const double bottom = start_box.y_max;

            for (int t = 0; t < sub.frame_budget; ++t) {
                const Vec2 delta = path[t] - start;
                const Vec2 center = center0 + delta;
                if (variant == ScriptedVariant::drift) {
                    const double u =
                        sub.frame_budget > 1 ? static_cast<double>(t) / (sub.frame_budget - 1) : 0.0;
                    const double scale = 1.0 + 0.5 * u;
                    const double w = half_w * scale, h = half_h * scale;
                    // Bottom-anchored growth stays supported on the ground.
                    double cx = std::clamp(center.x, w, 1.0 - w);
                    const double cy = std::clamp(bottom - h, h, 1.0 - h);
                    candidate.frames[t][id] = {cx - w, cy - h, cx + w, cy + h};
                } else {
                    candidate.frames[t][id] = box_from_center(center, half_w, half_h);
                }
            }
        }
        candidates.push_back(std::move(candidate));
    }
    return candidates;
}

std::unique_ptr<PlannerBackend> scripted_planner(uint64_t seed) {
    ScriptedPlannerOptions options;
    options.seed = seed;
    return std::make_unique<ScriptedPlanner>(options);
}

}  // namespace sv
