#pragma once

#include <array>
#include <optional>
#include <string>

#include "sv/planner.hpp"
#include "sv/render.hpp"
#include "sv/scene.hpp"
#include "sv/transport.hpp"

namespace sv {

enum class Law { newton, penetration, gravity, deformation };
inline constexpr std::array<Law, 4> kAllLaws = {Law::newton, Law::penetration,
                                                Law::gravity, Law::deformation};
const char* law_name(Law law);

struct LawScore {
    Law law = Law::newton;
    double score = 1.0;  // in [0,1]
    std::string explanation;
};

struct VerificationReport {
    double semantic = 0.0;
    std::string semantic_explanation;
    std::array<LawScore, 4> laws;
    double combined = 0.0;

    const LawScore& law(Law l) const;
};

/// Selection-objective weights: combined = sem*s_sem + phys*sum(law_l*s_l).
struct VerifierWeights {
    double lambda_sem = 0.5;
    double lambda_phys = 0.5;
    std::array<double, 4> lambda_laws = {0.25, 0.25, 0.25, 0.25};

    /// Throws WeightError unless lambda_sem + lambda_phys = 1,
    /// sum(lambda_laws) = 1 and everything is >= 0.
    void validate() const;
};

/// Thresholds of the deterministic verifier. The defaults define the scoring
/// bands; they are plain data so harness configs can move them.
struct VerifierThresholds {
    double accel_ok = 0.02;       // |a| at or below this is fully smooth
    double accel_zero = 0.10;     // |a| at or above this scores 0
    double jump = 0.15;           // per-frame displacement that caps newton at 0.3
    double overlap_free = 0.05;   // obstacle overlap fraction with no penalty
    double overlap_full = 0.50;   // overlap fraction scoring 0
    double support_band = 0.02;   // probe depth below the box bottom
    double stack_adjacency = 0.01;  // box-on-box support tolerance
    double gravity_min = 0.001;   // least admissible downward quadratic coefficient
    double hover_travel = 0.005;  // total |dy| below which a run is a hover
    int hover_min_run = 5;
    double deform_free = 0.05;    // size drift with no penalty
    double deform_full = 0.50;    // size drift scoring 0
};

// --- deterministic checks ---------------------------------------------------

/// Goal-alignment score in [0,1] from the candidate's primary mover (first
/// moving id): mean of a region term (1.0 inside the goal region, else
/// 1 - dist/sqrt(2)) and a direction term ((1 + cos)/2 of the net
/// displacement against the goal direction), whichever are present.
LawScore verify_semantic_local(const TrajectoryCandidate& candidate,
                               const SubInstruction& sub, const GoalSpec& goal);

LawScore verify_newton(const TrajectoryCandidate& candidate, const SubInstruction& sub,
                       const VerifierThresholds& th = {});

LawScore verify_penetration(const TrajectoryCandidate& candidate, const SceneBundle& scene,
                            const VerifierThresholds& th = {});

LawScore verify_gravity(const TrajectoryCandidate& candidate, const SceneBundle& scene,
                        const VerifierThresholds& th = {});

LawScore verify_deformation(const TrajectoryCandidate& candidate, const SceneBundle& scene,
                            const VerifierThresholds& th = {});

/// combined = lambda_sem*s_sem + lambda_phys*sum_l lambda_l*s_l. Validates
/// weights and that all scores are in [0,1].
double combine(double semantic, const std::array<LawScore, 4>& laws,
               const VerifierWeights& weights);

// --- backends ----------------------------------------------------------------

class VerifierBackend {
public:
    virtual ~VerifierBackend() = default;
    virtual VerificationReport verify(const VideoSketch& sketch,
                                      const TrajectoryCandidate& candidate,
                                      const SubInstruction& sub, const SceneBundle& scene,
                                      const VerifierWeights& weights) = 0;
};

/// Pure rule-based verifier; all five checks run on the candidate geometry
/// and scene rasters only, so scores are exactly reproducible.
class LocalVerifier : public VerifierBackend {
public:
    explicit LocalVerifier(VerifierThresholds thresholds = {});
    VerificationReport verify(const VideoSketch& sketch, const TrajectoryCandidate& candidate,
                              const SubInstruction& sub, const SceneBundle& scene,
                              const VerifierWeights& weights) override;

private:
    VerifierThresholds thresholds_;
};

/// Maps a descriptive verdict ("very consistent", "somewhat inconsistent", ...)
/// to a scalar; returns nullopt when no rule matches.
std::optional<double> descriptive_score(const std::string& text);

/// Parses one {"score": x, "explanation": "..."} verifier reply; falls back
/// to the descriptive map, clamps out-of-range scores with a warning mark in
/// the explanation. Throws ParseError when nothing usable is found.
std::pair<double, std::string> parse_verifier_reply(const std::string& text);

/// Issues one alignment query (first/last frame) and four per-law queries per
/// candidate, then combines the five scores. Cassette-driven in tests.
class RemoteVerifier : public VerifierBackend {
public:
    explicit RemoteVerifier(EndpointConfig config);
    VerificationReport verify(const VideoSketch& sketch, const TrajectoryCandidate& candidate,
                              const SubInstruction& sub, const SceneBundle& scene,
                              const VerifierWeights& weights) override;

private:
    std::pair<double, std::string> query(const ChatRequest& request);
    ChatClient client_;
};

std::string report_to_json(const VerificationReport& report, const VerifierWeights& weights);

}  // namespace sv
