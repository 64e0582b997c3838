#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sv/planner.hpp"
#include "sv/render.hpp"
#include "sv/verify.hpp"

namespace sv {

struct SearchConfig {
    int k = 5;                 // candidates sampled per round
    double tau = 0.6;          // quality threshold on the combined score
    int max_rounds = 3;        // sampling rounds before settling for best-seen
    VerifierWeights weights;
    double min_diversity = kMinCandidateDistance;

    void validate() const;  // throws WeightError on broken invariants
};

/// Audit record of one sub-instruction search. Every sampled candidate
/// appears once; verified ones carry their report, diversity-filtered ones
/// are marked instead.
struct SearchTrace {
    struct CandidateRecord {
        TrajectoryCandidate candidate;
        std::optional<VerificationReport> report;  // absent when filtered out
        bool diversity_filtered = false;
    };
    struct Round {
        int attempt = 1;
        std::optional<PlannerFeedback> feedback;  // feedback sent with this round's request
        std::vector<CandidateRecord> candidates;
        int selected_index = -1;  // candidate_index of the round's best
        double best_combined = 0.0;
    };
    std::vector<Round> rounds;
    int selected_round = -1;
    int selected_candidate_index = -1;
    double selected_combined = 0.0;
    bool below_threshold = false;  // best-effort result, never reached tau
};

struct SubInstructionResult {
    SubInstruction sub;
    TrajectoryCandidate selected;
    VerificationReport report;
    VideoSketch sketch;
    SearchTrace trace;
};

struct PipelineResult {
    HighLevelPlan plan;
    std::vector<SubInstructionResult> segments;
    bool below_threshold = false;  // any segment settled below tau
};

struct Backends {
    PlannerBackend* planner = nullptr;
    VerifierBackend* verifier = nullptr;
};

/// Index of the highest combined score; ties go to the lowest index.
/// Throws EmptyCandidateSet.
size_t select_best(const std::vector<VerificationReport>& reports);

/// One test-time search: rounds of sample -> diversity filter -> render ->
/// verify -> select. Accepts the round's best when combined >= tau, otherwise
/// resamples with feedback built from the rejected candidates; after
/// max_rounds the best-seen candidate is returned flagged below_threshold.
/// context.frame must be set (the initial frame for the first phase, the
/// previous selected sketch's last frame afterwards).
SubInstructionResult search_sub_instruction(const SubInstruction& sub,
                                            const PlanningContext& context,
                                            const SceneBundle& scene, Backends backends,
                                            const SearchConfig& config);

/// Full loop: plan, search each sub-instruction in order, chain the selected
/// sketch's last frame as the next context frame.
PipelineResult run_pipeline(const std::string& prompt, const SceneBundle& scene,
                            Backends backends, const SearchConfig& config);

std::string trace_to_json(const PipelineResult& result, const VerifierWeights& weights);

}  // namespace sv
