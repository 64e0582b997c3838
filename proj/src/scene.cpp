#include "sv/scene.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>

#include "sv/error.hpp"

namespace sv {

using nlohmann::json;

namespace {

constexpr double kUnitNormTolerance = 1e-6;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ManifestInvalid, field + ": " + why);
}

void reject_unknown_fields(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.contains(item.key())) invalid(where + "." + item.key(), "unknown field");
}

double require_number(const json& obj, const std::string& field, const std::string& where) {
    if (!obj.contains(field)) invalid(where + "." + field, "missing");
    if (!obj[field].is_number()) invalid(where + "." + field, "expected number");
    return obj[field].get<double>();
}

std::string require_string(const json& obj, const std::string& field,
                           const std::string& where) {
    if (!obj.contains(field)) invalid(where + "." + field, "missing");
    if (!obj[field].is_string()) invalid(where + "." + field, "expected string");
    return obj[field].get<std::string>();
}

BBox parse_box(const json& value, const std::string& where) {
    if (!value.is_array() || value.size() != 4) invalid(where, "expected [x_min,y_min,x_max,y_max]");
    for (const auto& v : value)
        if (!v.is_number()) invalid(where, "expected numeric coordinates");
    BBox box{value[0].get<double>(), value[1].get<double>(), value[2].get<double>(),
             value[3].get<double>()};
    if (!box.valid()) invalid(where, "box violates 0 <= min < max <= 1");
    return box;
}

GoalSpec parse_goal(const json& value, const std::string& where) {
    if (!value.is_object()) invalid(where, "expected object");
    reject_unknown_fields(value, {"region", "direction", "description"}, where);
    GoalSpec goal;
    if (value.contains("region")) goal.goal_region = parse_box(value["region"], where + ".region");
    if (value.contains("direction")) {
        const json& d = value["direction"];
        if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
            invalid(where + ".direction", "expected [dx,dy]");
        Vec2 dir{d[0].get<double>(), d[1].get<double>()};
        if (std::abs(dir.norm() - 1.0) > kUnitNormTolerance)
            invalid(where + ".direction", "must have unit norm");
        goal.direction = dir;
    }
    if (value.contains("description"))
        goal.description = require_string(value, "description", where);
    if (!goal.goal_region && !goal.direction)
        invalid(where, "needs at least one of region/direction");
    return goal;
}

json goal_to_json(const GoalSpec& goal) {
    json out = json::object();
    if (goal.goal_region) {
        const BBox& b = *goal.goal_region;
        out["region"] = {b.x_min, b.y_min, b.x_max, b.y_max};
    }
    if (goal.direction) out["direction"] = {goal.direction->x, goal.direction->y};
    out["description"] = goal.description;
    return out;
}

Image load_raster(const std::filesystem::path& dir, const std::string& rel,
                  const std::string& field) {
    const auto path = dir / rel;
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::MissingAsset, field + ": " + rel);
    return read_png(path);
}

}  // namespace

bool GoalSpec::valid() const {
    if (!goal_region && !direction) return false;
    if (goal_region && !goal_region->valid()) return false;
    if (direction && std::abs(direction->norm() - 1.0) > kUnitNormTolerance) return false;
    return true;
}

const ObjectAsset* SceneBundle::find_object(const std::string& id) const {
    for (const auto& obj : objects)
        if (obj.id == id) return &obj;
    return nullptr;
}

PixelRect mask_pixel_bbox(const Image& mask) {
    PixelRect r{mask.width, mask.height, 0, 0};
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y, 0) != 0) {
                r.x0 = std::min(r.x0, x);
                r.y0 = std::min(r.y0, y);
                r.x1 = std::max(r.x1, x + 1);
                r.y1 = std::max(r.y1, y + 1);
            }
    if (r.empty()) return {0, 0, 0, 0};
    return r;
}

SceneBundle load_scene_bundle(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        throw Error(ErrorCode::MissingAsset, "manifest.json");

    json manifest;
    {
        std::ifstream in(manifest_path);
        try {
            manifest = json::parse(in);
        } catch (const json::exception& e) {
            invalid("manifest.json", e.what());
        }
    }
    if (!manifest.is_object()) invalid("manifest.json", "expected object");
    reject_unknown_fields(
        manifest, {"version", "frame", "background", "static_mask", "ground_line", "objects", "goal"},
        "manifest");

    SceneBundle scene;
    scene.initial_frame = to_rgb(load_raster(dir, require_string(manifest, "frame", "manifest"), "frame"));
    scene.background =
        to_rgb(load_raster(dir, require_string(manifest, "background", "manifest"), "background"));
    scene.static_mask = to_gray(
        load_raster(dir, require_string(manifest, "static_mask", "manifest"), "static_mask"));

    const int w = scene.initial_frame.width;
    const int h = scene.initial_frame.height;
    if (scene.background.width != w || scene.background.height != h)
        throw Error(ErrorCode::DimensionMismatch, "background: expected " + std::to_string(w) +
                                                      "x" + std::to_string(h));
    if (scene.static_mask.width != w || scene.static_mask.height != h)
        throw Error(ErrorCode::DimensionMismatch, "static_mask: expected " + std::to_string(w) +
                                                      "x" + std::to_string(h));

    if (manifest.contains("ground_line")) {
        scene.ground_line = require_number(manifest, "ground_line", "manifest");
        if (scene.ground_line < 0.0 || scene.ground_line > 1.0)
            invalid("manifest.ground_line", "outside [0,1]");
    }

    if (manifest.contains("goal")) scene.goal = parse_goal(manifest["goal"], "manifest.goal");

    if (!manifest.contains("objects") || !manifest["objects"].is_array())
        invalid("manifest.objects", "missing or not an array");

    std::set<std::string> seen_ids;
    int index = 0;
    for (const json& entry : manifest["objects"]) {
        const std::string where = "manifest.objects[" + std::to_string(index++) + "]";
        if (!entry.is_object()) invalid(where, "expected object");
        reject_unknown_fields(entry, {"id", "label", "sprite", "mask", "initial_box", "resizable"},
                              where);

        ObjectAsset obj;
        obj.id = require_string(entry, "id", where);
        if (!seen_ids.insert(obj.id).second) invalid(where + ".id", "duplicate \"" + obj.id + "\"");
        obj.label = entry.contains("label") ? require_string(entry, "label", where) : obj.id;
        obj.sprite = load_raster(dir, require_string(entry, "sprite", where), where + ".sprite");
        obj.mask =
            to_gray(load_raster(dir, require_string(entry, "mask", where), where + ".mask"));
        if (!entry.contains("initial_box")) invalid(where + ".initial_box", "missing");
        obj.initial_box = parse_box(entry["initial_box"], where + ".initial_box");
        if (entry.contains("resizable")) {
            if (!entry["resizable"].is_boolean()) invalid(where + ".resizable", "expected bool");
            obj.resizable = entry["resizable"].get<bool>();
        }

        if (obj.mask.width != w || obj.mask.height != h)
            throw Error(ErrorCode::DimensionMismatch,
                        where + ".mask: expected " + std::to_string(w) + "x" + std::to_string(h));
        if (obj.sprite.channels != 4) invalid(where + ".sprite", "expected RGBA");

        const PixelRect bbox = mask_pixel_bbox(obj.mask);
        if (bbox.empty()) invalid(where + ".mask", "mask has no set pixels");
        if (obj.sprite.width != bbox.width() || obj.sprite.height != bbox.height())
            throw Error(ErrorCode::DimensionMismatch,
                        where + ".sprite: expected mask bbox size " +
                            std::to_string(bbox.width()) + "x" + std::to_string(bbox.height()));

        // Alpha must be zero exactly outside the mask.
        for (int y = 0; y < obj.sprite.height; ++y)
            for (int x = 0; x < obj.sprite.width; ++x) {
                const bool inside = obj.mask.at(bbox.x0 + x, bbox.y0 + y, 0) != 0;
                const bool opaque = obj.sprite.at(x, y, 3) != 0;
                if (inside != opaque)
                    invalid(where + ".sprite", "alpha does not match mask at (" +
                                                   std::to_string(x) + "," + std::to_string(y) + ")");
            }

        scene.objects.push_back(std::move(obj));
    }

    return scene;
}

void save_scene_bundle(const SceneBundle& scene, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "objects", ec);

    json manifest;
    manifest["version"] = 1;
    manifest["frame"] = "frame.png";
    manifest["background"] = "background.png";
    manifest["static_mask"] = "static_mask.png";
    manifest["ground_line"] = scene.ground_line;
    if (scene.goal) manifest["goal"] = goal_to_json(*scene.goal);

    write_png(scene.initial_frame, dir / "frame.png");
    write_png(scene.background, dir / "background.png");
    write_png(scene.static_mask, dir / "static_mask.png");

    manifest["objects"] = json::array();
    for (const ObjectAsset& obj : scene.objects) {
        std::filesystem::create_directories(dir / "objects" / obj.id, ec);
        const std::string sprite_rel = "objects/" + obj.id + "/sprite.png";
        const std::string mask_rel = "objects/" + obj.id + "/mask.png";
        write_png(obj.sprite, dir / sprite_rel);
        write_png(obj.mask, dir / mask_rel);
        json entry;
        entry["id"] = obj.id;
        entry["label"] = obj.label;
        entry["sprite"] = sprite_rel;
        entry["mask"] = mask_rel;
        entry["initial_box"] = {obj.initial_box.x_min, obj.initial_box.y_min,
                                obj.initial_box.x_max, obj.initial_box.y_max};
        entry["resizable"] = obj.resizable;
        manifest["objects"].push_back(entry);
    }

    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error(ErrorCode::IoError, "cannot write manifest.json");
    out << manifest.dump(2) << "\n";
}

}  // namespace sv
