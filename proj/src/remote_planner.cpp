#include "sv/remote.hpp"

#include <sstream>

#include "sv/error.hpp"
#include "sv/prompts.hpp"

namespace sv {

namespace {

std::string box_text(const BBox& b) {
    std::ostringstream out;
    out.precision(4);
    out << "[" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max << "]";
    return out.str();
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const std::string& id : ids) {
        if (!out.empty()) out += ", ";
        out += id;
    }
    return out.empty() ? "(none)" : out;
}

const char* kCoordsGuide =
    "Boxes are [x1, y1, x2, y2] normalized to [0,1]^2. Origin is the top-left corner;"
    " x increases rightward, y increases downward.";

std::string feedback_text(const std::optional<PlannerFeedback>& feedback) {
    if (!feedback || feedback->rejected_summaries.empty()) return "";
    std::ostringstream out;
    out << "Previous attempt " << feedback->attempt - 1
        << " was rejected. Avoid these failure modes:\n";
    for (const auto& rejected : feedback->rejected_summaries)
        out << "- candidate " << rejected.candidate_index << " (combined score "
            << rejected.combined_score << ", worst law " << rejected.worst_law
            << "): " << rejected.explanation << " It started at " << box_text(rejected.start_box)
            << " and ended at " << box_text(rejected.end_box) << ".\n";
    return out.str();
}

}  // namespace

RemotePlanner::RemotePlanner(EndpointConfig config) : client_(std::move(config)) {}

HighLevelPlan RemotePlanner::propose_plan(const std::string& prompt, const SceneBundle& scene) {
    std::ostringstream objects;
    for (const ObjectAsset& obj : scene.objects)
        objects << "- " << obj.id << " (" << obj.label
                << "): currently at " << box_text(obj.initial_box) << "\n";

    ChatRequest request;
    request.model = client_.config().model;
    request.temperature = client_.config().temperature;
    request.messages.push_back(
        {"system",
         prompts::fill(prompts::kHighLevelSystem,
                       {{"total_frames", std::to_string(kPlanTotalFrames)}}),
         {}});
    request.messages.push_back(
        {"user",
         prompts::fill(prompts::kHighLevelUser,
                       {{"text_prompt", prompt},
                        {"total_frames", std::to_string(kPlanTotalFrames)},
                        {"object_list", objects.str()}}),
         {png_base64(scene.initial_frame)}});

    for (int attempt = 1;; ++attempt) {
        const std::string response = client_.complete(request);
        try {
            HighLevelPlan plan = parse_plan_response(response);
            plan.source_prompt = prompt;
            return plan;
        } catch (const SchemaError&) {
            if (attempt >= client_.config().retry_cap) throw;
        }
    }
}

std::vector<TrajectoryCandidate> RemotePlanner::propose_trajectories(
    const SubInstruction& sub, const PlanningContext& context, const SceneBundle& scene, int k,
    const std::optional<PlannerFeedback>& feedback) {
    (void)scene;
    if (!context.frame)
        throw Error(ErrorCode::ManifestInvalid, "planning context has no frame");

    const std::string phase_name = "phase " + std::to_string(sub.index + 1);
    std::map<std::string, std::string> slots = {
        {"chunk_start", "1"},
        {"chunk_end", std::to_string(sub.frame_budget)},
        {"phase_name", phase_name},
        {"phase_description", sub.text},
        {"total_frames", std::to_string(kPlanTotalFrames)},
        {"coords_guide", kCoordsGuide},
        {"moving_objects", join_ids(sub.moving_ids)},
        {"static_objects", join_ids(sub.static_ids)},
        {"num_candidates", std::to_string(k)},
    };

    std::ostringstream history;
    history << "Current object boxes:\n";
    for (const std::string& id : sub.moving_ids) {
        auto it = context.boxes.find(id);
        if (it != context.boxes.end()) history << "- " << id << ": " << box_text(it->second) << "\n";
    }
    history << feedback_text(feedback);
    slots["history_text"] = history.str();
    slots["text_prompt"] = sub.text;

    ChatRequest request;
    request.model = client_.config().model;
    request.temperature = client_.config().temperature;
    request.messages.push_back({"system", prompts::fill(prompts::kTrajectorySystem, slots), {}});
    request.messages.push_back(
        {"user", prompts::fill(prompts::kTrajectoryUser, slots), {png_base64(*context.frame)}});

    for (int attempt = 1;; ++attempt) {
        const std::string response = client_.complete(request);
        try {
            return parse_trajectory_response(response, sub);
        } catch (const SchemaError&) {
            if (attempt >= client_.config().retry_cap) throw;
        }
    }
}

std::unique_ptr<PlannerBackend> remote_planner(EndpointConfig config) {
    return std::make_unique<RemotePlanner>(std::move(config));
}

}  // namespace sv
