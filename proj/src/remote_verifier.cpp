#include <sstream>

#include "sv/error.hpp"
#include "sv/prompts.hpp"
#include "sv/verify.hpp"

namespace sv {

namespace {

std::string goal_text(const GoalSpec& goal) {
    std::ostringstream out;
    out.precision(4);
    if (!goal.description.empty()) out << goal.description << " ";
    if (goal.goal_region)
        out << "The object should end inside [" << goal.goal_region->x_min << ", "
            << goal.goal_region->y_min << ", " << goal.goal_region->x_max << ", "
            << goal.goal_region->y_max << "]. ";
    if (goal.direction)
        out << "Net motion direction should be (" << goal.direction->x << ", "
            << goal.direction->y << ").";
    return out.str();
}

}  // namespace

RemoteVerifier::RemoteVerifier(EndpointConfig config) : client_(std::move(config)) {}

std::pair<double, std::string> RemoteVerifier::query(const ChatRequest& request) {
    for (int attempt = 1;; ++attempt) {
        const std::string response = client_.complete(request);
        try {
            return parse_verifier_reply(response);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ParseError || attempt >= client_.config().retry_cap)
                throw;
        }
    }
}

VerificationReport RemoteVerifier::verify(const VideoSketch& sketch,
                                          const TrajectoryCandidate& candidate,
                                          const SubInstruction& sub, const SceneBundle& scene,
                                          const VerifierWeights& weights) {
    (void)candidate;
    (void)scene;
    if (sketch.frames.empty())
        throw Error(ErrorCode::BadLength, "cannot verify an empty sketch");

    VerificationReport report;
    const std::string phase_name = "phase " + std::to_string(sub.index + 1);

    // Alignment: first/last frame comparison.
    {
        ChatRequest request;
        request.model = client_.config().model;
        request.temperature = client_.config().temperature;
        request.messages.push_back({"system", prompts::kAlignmentSystem, {}});
        request.messages.push_back(
            {"user",
             prompts::fill(prompts::kAlignmentUser,
                           {{"phase_name", phase_name},
                            {"phase_description", sub.text},
                            {"end_goal", sub.goal ? goal_text(*sub.goal) : "(unspecified)"}}),
             {png_base64(sketch.frames.front()), png_base64(sketch.frames.back())}});
        const auto [score, explanation] = query(request);
        report.semantic = score;
        report.semantic_explanation = explanation;
    }

    // One physics query per law over the full frame sequence.
    std::vector<std::string> frames_b64;
    frames_b64.reserve(sketch.frames.size());
    for (const Image& frame : sketch.frames) frames_b64.push_back(png_base64(frame));

    for (size_t i = 0; i < kAllLaws.size(); ++i) {
        const Law law = kAllLaws[i];
        ChatRequest request;
        request.model = client_.config().model;
        request.temperature = client_.config().temperature;
        request.messages.push_back(
            {"user",
             prompts::fill(prompts::kPhysicsPrompt,
                           {{"law_example", prompts::physics_law_focus(law_name(law))}}),
             frames_b64});
        const auto [score, explanation] = query(request);
        report.laws[i] = {law, score, explanation};
    }

    report.combined = combine(report.semantic, report.laws, weights);
    return report;
}

}  // namespace sv
