#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sv/scene.hpp"

namespace sv {

/// One candidate motion plan for a sub-instruction: per-frame boxes for each
/// moving object, all boxes valid, exactly frame_budget frames.
struct TrajectoryCandidate {
    int candidate_index = 0;
    std::vector<std::map<std::string, BBox>> frames;
    std::vector<std::string> caption_per_frame;  // optional, empty or one per frame
};

/// Summary of a rejected round, fed back into the next sampling request.
struct PlannerFeedback {
    struct RejectedCandidate {
        int candidate_index = 0;
        double combined_score = 0.0;
        std::string worst_law;
        std::string explanation;
        BBox start_box;
        BBox end_box;
    };
    std::vector<RejectedCandidate> rejected_summaries;
    int attempt = 1;  // >= 1; round number of the request this feedback precedes
};

/// What the planner knows about "now": the conditioning image plus the
/// current box of every object (initial boxes for the first phase, the
/// previous phase's selected final boxes afterwards).
struct PlanningContext {
    const Image* frame = nullptr;
    std::map<std::string, BBox> boxes;
};

/// Proposal source. Implementations are stateless between calls except for
/// replay cassettes; determinism comes from (seed, sub, attempt) inputs.
class PlannerBackend {
public:
    virtual ~PlannerBackend() = default;

    virtual HighLevelPlan propose_plan(const std::string& prompt,
                                       const SceneBundle& scene) = 0;

    virtual std::vector<TrajectoryCandidate> propose_trajectories(
        const SubInstruction& sub, const PlanningContext& context,
        const SceneBundle& scene, int k,
        const std::optional<PlannerFeedback>& feedback) = 0;
};

// --- structured-output parsing ------------------------------------------------

/// Parses and validates a plan response. The accepted document is
///   {"total_frames"?: N, "prompt"?: str, "phases": [
///      {"action": str, "duration": int, "moving": [ids],
///       "static"?: [ids], "goal"?: {...}}]}
/// with unknown fields rejected. Throws SchemaError (missing_field, bad_type,
/// frame_budget_mismatch, M_out_of_range); callers resample on failure.
HighLevelPlan parse_plan_response(const std::string& raw,
                                  int expected_total_frames = kPlanTotalFrames);

std::string serialize_plan(const HighLevelPlan& plan);

/// Parses a trajectory response in either accepted format — the per-frame
/// line format
///   Frame_N: [["object_name", [x1, y1, x2, y2]], ...], caption: ...
/// (frame numbering restarts or a "Candidate k" header begin a new candidate),
/// or the JSON equivalent (one candidate object or an array of them). Boxes
/// are validation-checked, never clamped. Throws SchemaError (frame_count,
/// unknown_object, invalid_box).
std::vector<TrajectoryCandidate> parse_trajectory_response(const std::string& raw,
                                                           const SubInstruction& sub);

std::string serialize_candidate(const TrajectoryCandidate& candidate);
TrajectoryCandidate parse_candidate_json(const std::string& raw, const SubInstruction& sub);

// --- candidate diversity -------------------------------------------------------

/// RMS over frames and shared moving objects of the center-point l2 distance.
double candidate_distance(const TrajectoryCandidate& a, const TrajectoryCandidate& b);

inline constexpr double kMinCandidateDistance = 0.05;

/// Greedy keep-first subset whose pairwise distance is >= min_dist. May
/// return fewer candidates than given; the search loop resamples across
/// rounds rather than refilling within one.
std::vector<TrajectoryCandidate> diversity_filter(
    const std::vector<TrajectoryCandidate>& candidates,
    double min_dist = kMinCandidateDistance);

// --- deterministic scripted backend ---------------------------------------------

enum class ScriptedVariant : uint8_t {
    clean,      // constant-velocity straight line to the goal
    teleport,   // one > 0.15 center jump mid-path
    penetrate,  // arc routed through the static obstacle
    hover,      // constant-altitude glide with no support
    drift,      // box dimensions grow 1.5x along the way
};

const char* scripted_variant_name(ScriptedVariant v);

struct ScriptedPlannerOptions {
    uint64_t seed = 0;
    int phases = 1;  // M for propose_plan, clamped to [1,4]
    /// planted_set: every call yields one clean candidate and the four planted
    /// violations in seed-shuffled order (k is capped at 5).
    /// pool: each slot draws independently from variant_pool.
    enum class Mode { planted_set, pool } mode = Mode::planted_set;
    std::vector<ScriptedVariant> variant_pool = {
        ScriptedVariant::clean, ScriptedVariant::teleport, ScriptedVariant::penetrate,
        ScriptedVariant::hover, ScriptedVariant::drift};
};

/// Deterministic test double for the MLLM planner. Candidate k of a given
/// (seed, sub, attempt) is a pure function of those values, so prefixes of
/// the candidate list agree across different k budgets.
class ScriptedPlanner : public PlannerBackend {
public:
    explicit ScriptedPlanner(ScriptedPlannerOptions options);

    HighLevelPlan propose_plan(const std::string& prompt,
                               const SceneBundle& scene) override;

    std::vector<TrajectoryCandidate> propose_trajectories(
        const SubInstruction& sub, const PlanningContext& context,
        const SceneBundle& scene, int k,
        const std::optional<PlannerFeedback>& feedback) override;

    /// Variant assignment for a call, exposed so tests can identify the
    /// planted clean candidate without re-deriving backend internals.
    std::vector<ScriptedVariant> variant_order(int sub_index, int attempt, int k) const;

    const ScriptedPlannerOptions& options() const { return options_; }

private:
    ScriptedPlannerOptions options_;
};

std::unique_ptr<PlannerBackend> scripted_planner(uint64_t seed);

}  // namespace sv
