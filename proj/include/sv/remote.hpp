#pragma once

#include "sv/planner.hpp"
#include "sv/transport.hpp"

namespace sv {

/// MLLM-backed planner: one chat request per call using the shipped prompt
/// templates with images attached as base64 PNG. Responses run through the
/// strict parsers; malformed ones are resampled up to the endpoint's retry
/// cap, after which the SchemaError surfaces.
class RemotePlanner : public PlannerBackend {
public:
    explicit RemotePlanner(EndpointConfig config);

    HighLevelPlan propose_plan(const std::string& prompt, const SceneBundle& scene) override;

    std::vector<TrajectoryCandidate> propose_trajectories(
        const SubInstruction& sub, const PlanningContext& context, const SceneBundle& scene,
        int k, const std::optional<PlannerFeedback>& feedback) override;

private:
    ChatClient client_;
};

std::unique_ptr<PlannerBackend> remote_planner(EndpointConfig config);

}  // namespace sv
