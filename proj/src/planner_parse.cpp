#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "sv/error.hpp"
#include "sv/planner.hpp"

namespace sv {

using nlohmann::json;

namespace {

[[noreturn]] void schema(SchemaErrorKind kind, const std::string& detail) {
    throw SchemaError(kind, detail);
}

json parse_json_or_throw(const std::string& raw, const std::string& what) {
    try {
        return json::parse(raw);
    } catch (const json::exception& e) {
        schema(SchemaErrorKind::bad_type, what + " is not valid JSON: " + e.what());
    }
}

BBox parse_box_checked(const json& value, const std::string& where) {
    if (!value.is_array() || value.size() != 4)
        schema(SchemaErrorKind::invalid_box, where + ": expected 4 coordinates");
    for (const auto& v : value)
        if (!v.is_number()) schema(SchemaErrorKind::invalid_box, where + ": non-numeric coordinate");
    BBox box{value[0].get<double>(), value[1].get<double>(), value[2].get<double>(),
             value[3].get<double>()};
    if (!box.valid())
        schema(SchemaErrorKind::invalid_box, where + ": violates 0 <= min < max <= 1");
    return box;
}

GoalSpec parse_goal_loose(const json& value, const std::string& where) {
    if (!value.is_object()) schema(SchemaErrorKind::bad_type, where + ": expected object");
    GoalSpec goal;
    for (const auto& item : value.items()) {
        if (item.key() == "region") {
            goal.goal_region = parse_box_checked(item.value(), where + ".region");
        } else if (item.key() == "direction") {
            const json& d = item.value();
            if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
                schema(SchemaErrorKind::bad_type, where + ".direction: expected [dx,dy]");
            Vec2 dir{d[0].get<double>(), d[1].get<double>()};
            const double n = dir.norm();
            if (!(n > 1e-12) || !std::isfinite(n))
                schema(SchemaErrorKind::bad_type, where + ".direction: zero or non-finite");
            goal.direction = Vec2{dir.x / n, dir.y / n};
        } else if (item.key() == "description") {
            if (!item.value().is_string())
                schema(SchemaErrorKind::bad_type, where + ".description: expected string");
            goal.description = item.value().get<std::string>();
        } else {
            schema(SchemaErrorKind::bad_type, where + "." + item.key() + ": unexpected field");
        }
    }
    if (!goal.goal_region && !goal.direction)
        schema(SchemaErrorKind::missing_field, where + ": needs region or direction");
    return goal;
}

std::vector<std::string> parse_id_list(const json& value, const std::string& where) {
    if (!value.is_array()) schema(SchemaErrorKind::bad_type, where + ": expected array");
    std::vector<std::string> ids;
    for (const auto& v : value) {
        if (!v.is_string()) schema(SchemaErrorKind::bad_type, where + ": expected string ids");
        ids.push_back(v.get<std::string>());
    }
    return ids;
}

}  // namespace

HighLevelPlan parse_plan_response(const std::string& raw, int expected_total_frames) {
    const json doc = parse_json_or_throw(raw, "plan response");
    if (!doc.is_object()) schema(SchemaErrorKind::bad_type, "plan response: expected object");

    for (const auto& item : doc.items())
        if (item.key() != "phases" && item.key() != "total_frames" && item.key() != "prompt")
            schema(SchemaErrorKind::bad_type, "plan." + item.key() + ": unexpected field");

    HighLevelPlan plan;
    plan.total_plan_frames = expected_total_frames;
    if (doc.contains("total_frames")) {
        if (!doc["total_frames"].is_number_integer())
            schema(SchemaErrorKind::bad_type, "plan.total_frames: expected integer");
        plan.total_plan_frames = doc["total_frames"].get<int>();
    }
    if (doc.contains("prompt")) {
        if (!doc["prompt"].is_string())
            schema(SchemaErrorKind::bad_type, "plan.prompt: expected string");
        plan.source_prompt = doc["prompt"].get<std::string>();
    }

    if (!doc.contains("phases")) schema(SchemaErrorKind::missing_field, "plan.phases");
    const json& phases = doc["phases"];
    if (!phases.is_array()) schema(SchemaErrorKind::bad_type, "plan.phases: expected array");
    if (phases.size() < 1 || phases.size() > 4)
        schema(SchemaErrorKind::M_out_of_range,
               "plan has " + std::to_string(phases.size()) + " phases, allowed 1..4");

    int total = 0;
    int index = 0;
    for (const json& entry : phases) {
        const std::string where = "plan.phases[" + std::to_string(index) + "]";
        if (!entry.is_object()) schema(SchemaErrorKind::bad_type, where + ": expected object");
        for (const auto& item : entry.items())
            if (item.key() != "action" && item.key() != "duration" && item.key() != "moving" &&
                item.key() != "static" && item.key() != "goal")
                schema(SchemaErrorKind::bad_type, where + "." + item.key() + ": unexpected field");

        SubInstruction sub;
        sub.index = index;

        if (!entry.contains("action")) schema(SchemaErrorKind::missing_field, where + ".action");
        if (!entry["action"].is_string())
            schema(SchemaErrorKind::bad_type, where + ".action: expected string");
        sub.text = entry["action"].get<std::string>();

        if (!entry.contains("duration")) schema(SchemaErrorKind::missing_field, where + ".duration");
        if (!entry["duration"].is_number_integer())
            schema(SchemaErrorKind::bad_type, where + ".duration: expected integer");
        sub.frame_budget = entry["duration"].get<int>();
        if (sub.frame_budget < 2)
            schema(SchemaErrorKind::frame_budget_mismatch,
                   where + ".duration: " + std::to_string(sub.frame_budget) + " < 2");

        if (!entry.contains("moving")) schema(SchemaErrorKind::missing_field, where + ".moving");
        sub.moving_ids = parse_id_list(entry["moving"], where + ".moving");
        if (sub.moving_ids.empty())
            schema(SchemaErrorKind::missing_field, where + ".moving: empty");
        if (entry.contains("static"))
            sub.static_ids = parse_id_list(entry["static"], where + ".static");
        if (entry.contains("goal")) sub.goal = parse_goal_loose(entry["goal"], where + ".goal");

        total += sub.frame_budget;
        plan.sub_instructions.push_back(std::move(sub));
        ++index;
    }

    if (total != plan.total_plan_frames)
        schema(SchemaErrorKind::frame_budget_mismatch,
               "phase durations sum to " + std::to_string(total) + ", expected " +
                   std::to_string(plan.total_plan_frames));
    return plan;
}

std::string serialize_plan(const HighLevelPlan& plan) {
    json doc;
    doc["total_frames"] = plan.total_plan_frames;
    doc["prompt"] = plan.source_prompt;
    doc["phases"] = json::array();
    for (const SubInstruction& sub : plan.sub_instructions) {
        json entry;
        entry["action"] = sub.text;
        entry["duration"] = sub.frame_budget;
        entry["moving"] = sub.moving_ids;
        if (!sub.static_ids.empty()) entry["static"] = sub.static_ids;
        if (sub.goal) {
            json goal = json::object();
            if (sub.goal->goal_region) {
                const BBox& b = *sub.goal->goal_region;
                goal["region"] = {b.x_min, b.y_min, b.x_max, b.y_max};
            }
            if (sub.goal->direction)
                goal["direction"] = {sub.goal->direction->x, sub.goal->direction->y};
            goal["description"] = sub.goal->description;
            entry["goal"] = goal;
        }
        doc["phases"].push_back(entry);
    }
    return doc.dump(2);
}

namespace {

void validate_candidate_frames(TrajectoryCandidate& candidate, const SubInstruction& sub) {
    if (static_cast<int>(candidate.frames.size()) != sub.frame_budget)
        schema(SchemaErrorKind::frame_count,
               "candidate " + std::to_string(candidate.candidate_index) + " has " +
                   std::to_string(candidate.frames.size()) + " frames, expected " +
                   std::to_string(sub.frame_budget));
    const std::set<std::string> moving(sub.moving_ids.begin(), sub.moving_ids.end());
    int t = 0;
    for (const auto& frame : candidate.frames) {
        for (const auto& [id, box] : frame) {
            if (!moving.contains(id))
                schema(SchemaErrorKind::unknown_object,
                       "frame " + std::to_string(t) + ": \"" + id + "\" is not a moving object");
            (void)box;
        }
        if (frame.size() != moving.size())
            for (const std::string& id : sub.moving_ids)
                if (!frame.contains(id))
                    schema(SchemaErrorKind::unknown_object,
                           "frame " + std::to_string(t) + ": missing object \"" + id + "\"");
        ++t;
    }
    if (!candidate.caption_per_frame.empty() &&
        candidate.caption_per_frame.size() != candidate.frames.size())
        candidate.caption_per_frame.resize(candidate.frames.size());
}

TrajectoryCandidate candidate_from_json(const json& doc, const SubInstruction& sub, int index) {
    if (!doc.is_object())
        schema(SchemaErrorKind::bad_type, "candidate " + std::to_string(index) + ": expected object");
    TrajectoryCandidate candidate;
    candidate.candidate_index = index;
    if (doc.contains("candidate_index") && doc["candidate_index"].is_number_integer())
        candidate.candidate_index = doc["candidate_index"].get<int>();
    if (!doc.contains("frames") || !doc["frames"].is_array())
        schema(SchemaErrorKind::bad_type, "candidate " + std::to_string(index) + ".frames: expected array");
    int t = 0;
    for (const json& frame : doc["frames"]) {
        if (!frame.is_object())
            schema(SchemaErrorKind::bad_type, "frames[" + std::to_string(t) + "]: expected object");
        std::map<std::string, BBox> boxes;
        for (const auto& item : frame.items())
            boxes[item.key()] =
                parse_box_checked(item.value(), "frames[" + std::to_string(t) + "]." + item.key());
        candidate.frames.push_back(std::move(boxes));
        ++t;
    }
    if (doc.contains("captions")) {
        if (!doc["captions"].is_array())
            schema(SchemaErrorKind::bad_type, "candidate.captions: expected array");
        for (const json& c : doc["captions"])
            candidate.caption_per_frame.push_back(c.is_string() ? c.get<std::string>() : "");
    }
    validate_candidate_frames(candidate, sub);
    return candidate;
}

// One "Frame_N: [...]" line: the payload between the outermost brackets is
// JSON-compatible, so it is handed to the JSON parser after extraction.
struct FrameLine {
    int number = 0;
    std::map<std::string, BBox> boxes;
    std::string caption;
};

std::optional<FrameLine> parse_frame_line(const std::string& line) {
    size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos) return std::nullopt;
    static const std::string prefix = "Frame_";
    if (line.compare(pos, prefix.size(), prefix) != 0) return std::nullopt;
    pos += prefix.size();
    size_t digits_end = pos;
    while (digits_end < line.size() && std::isdigit(static_cast<unsigned char>(line[digits_end])))
        ++digits_end;
    if (digits_end == pos) return std::nullopt;

    FrameLine out;
    out.number = std::stoi(line.substr(pos, digits_end - pos));

    const size_t open = line.find('[', digits_end);
    if (open == std::string::npos)
        schema(SchemaErrorKind::bad_type, "frame line has no bracket payload: " + line);
    int depth = 0;
    size_t close = open;
    for (size_t i = open; i < line.size(); ++i) {
        if (line[i] == '[') ++depth;
        if (line[i] == ']' && --depth == 0) {
            close = i;
            break;
        }
    }
    if (depth != 0) schema(SchemaErrorKind::bad_type, "unbalanced brackets: " + line);

    const json payload =
        parse_json_or_throw(line.substr(open, close - open + 1), "frame line payload");
    for (const json& pair : payload) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string())
            schema(SchemaErrorKind::bad_type, "expected [\"name\", [x1,y1,x2,y2]] entries");
        out.boxes[pair[0].get<std::string>()] =
            parse_box_checked(pair[1], "Frame_" + std::to_string(out.number));
    }

    const size_t caption_pos = line.find("caption:", close);
    if (caption_pos != std::string::npos) {
        std::string caption = line.substr(caption_pos + 8);
        const size_t start = caption.find_first_not_of(" \t");
        out.caption = start == std::string::npos ? "" : caption.substr(start);
    }
    return out;
}

bool is_candidate_header(const std::string& line) {
    const size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos) return false;
    static const char* headers[] = {"Candidate", "candidate", "Trajectory", "trajectory"};
    for (const char* h : headers)
        if (line.compare(pos, std::strlen(h), h) == 0) return true;
    return false;
}

std::vector<TrajectoryCandidate> parse_line_format(const std::string& raw,
                                                   const SubInstruction& sub) {
    std::vector<TrajectoryCandidate> candidates;
    TrajectoryCandidate current;
    int prev_number = 0;
    bool any_frames = false;
    bool any_caption = false;

    auto finish = [&]() {
        if (current.frames.empty()) return;
        current.candidate_index = static_cast<int>(candidates.size());
        if (!any_caption) current.caption_per_frame.clear();
        validate_candidate_frames(current, sub);
        candidates.push_back(std::move(current));
        current = {};
        prev_number = 0;
        any_caption = false;
    };

    std::istringstream stream(raw);
    std::string line;
    while (std::getline(stream, line)) {
        if (is_candidate_header(line)) {
            finish();
            continue;
        }
        auto frame = parse_frame_line(line);
        if (!frame) continue;
        any_frames = true;
        if (!current.frames.empty() && frame->number <= prev_number) finish();
        prev_number = frame->number;
        current.frames.push_back(std::move(frame->boxes));
        current.caption_per_frame.push_back(frame->caption);
        if (!frame->caption.empty()) any_caption = true;
    }
    finish();

    if (!any_frames)
        schema(SchemaErrorKind::bad_type, "trajectory response has no Frame_N lines");
    return candidates;
}

}  // namespace

std::vector<TrajectoryCandidate> parse_trajectory_response(const std::string& raw,
                                                           const SubInstruction& sub) {
    // JSON form first; anything that does not parse as JSON goes through the
    // line-format reader.
    const size_t first = raw.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (raw[first] == '[' || raw[first] == '{')) {
        json doc;
        bool is_json = true;
        try {
            doc = json::parse(raw);
        } catch (const json::exception&) {
            is_json = false;
        }
        if (is_json) {
            std::vector<TrajectoryCandidate> candidates;
            if (doc.is_array()) {
                int index = 0;
                for (const json& entry : doc)
                    candidates.push_back(candidate_from_json(entry, sub, index++));
            } else {
                candidates.push_back(candidate_from_json(doc, sub, 0));
            }
            if (candidates.empty())
                schema(SchemaErrorKind::bad_type, "trajectory response has no candidates");
            return candidates;
        }
    }
    return parse_line_format(raw, sub);
}

std::string serialize_candidate(const TrajectoryCandidate& candidate) {
    json doc;
    doc["candidate_index"] = candidate.candidate_index;
    doc["frames"] = json::array();
    for (const auto& frame : candidate.frames) {
        json f = json::object();
        for (const auto& [id, box] : frame) f[id] = {box.x_min, box.y_min, box.x_max, box.y_max};
        doc["frames"].push_back(f);
    }
    if (!candidate.caption_per_frame.empty()) doc["captions"] = candidate.caption_per_frame;
    return doc.dump(2);
}

TrajectoryCandidate parse_candidate_json(const std::string& raw, const SubInstruction& sub) {
    return candidate_from_json(parse_json_or_throw(raw, "candidate"), sub, 0);
}

double candidate_distance(const TrajectoryCandidate& a, const TrajectoryCandidate& b) {
    double sum_sq = 0.0;
    size_t count = 0;
    const size_t frames = std::min(a.frames.size(), b.frames.size());
    for (size_t t = 0; t < frames; ++t) {
        for (const auto& [id, box_a] : a.frames[t]) {
            auto it = b.frames[t].find(id);
            if (it == b.frames[t].end()) continue;
            const Vec2 d = bbox_center(box_a) - bbox_center(it->second);
            sum_sq += d.dot(d);
            ++count;
        }
    }
    if (count == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(sum_sq / static_cast<double>(count));
}

std::vector<TrajectoryCandidate> diversity_filter(
    const std::vector<TrajectoryCandidate>& candidates, double min_dist) {
    std::vector<TrajectoryCandidate> kept;
    for (const TrajectoryCandidate& candidate : candidates) {
        bool distinct = true;
        for (const TrajectoryCandidate& other : kept)
            if (candidate_distance(candidate, other) < min_dist) {
                distinct = false;
                break;
            }
        if (distinct) kept.push_back(candidate);
    }
    return kept;
}

}  // namespace sv
