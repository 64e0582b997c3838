#include "sv/search.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

#include "sv/error.hpp"

namespace sv {

using nlohmann::json;

void SearchConfig::validate() const {
    weights.validate();
    if (k < 1) throw Error(ErrorCode::WeightError, "search config: k must be >= 1");
    if (!(tau >= 0.0 && tau <= 1.0))
        throw Error(ErrorCode::WeightError, "search config: tau must be in [0,1]");
    if (max_rounds < 1) throw Error(ErrorCode::WeightError, "search config: max_rounds >= 1");
    if (min_diversity < 0.0)
        throw Error(ErrorCode::WeightError, "search config: min_diversity >= 0");
}

size_t select_best(const std::vector<VerificationReport>& reports) {
    if (reports.empty()) throw Error(ErrorCode::EmptyCandidateSet, "no reports to select from");
    size_t best = 0;
    for (size_t i = 1; i < reports.size(); ++i)
        if (reports[i].combined > reports[best].combined) best = i;
    return best;
}

namespace {

Law worst_law_of(const VerificationReport& report) {
    Law worst = report.laws.front().law;
    double lowest = report.laws.front().score;
    for (const LawScore& law : report.laws)
        if (law.score < lowest) {
            lowest = law.score;
            worst = law.law;
        }
    return worst;
}

PlannerFeedback build_feedback(const std::vector<TrajectoryCandidate>& candidates,
                               const std::vector<VerificationReport>& reports,
                               const SubInstruction& sub, int next_attempt) {
    PlannerFeedback feedback;
    feedback.attempt = next_attempt;
    const std::string& primary = sub.moving_ids.front();
    for (size_t i = 0; i < candidates.size(); ++i) {
        const Law worst = worst_law_of(reports[i]);
        PlannerFeedback::RejectedCandidate rejected;
        rejected.candidate_index = candidates[i].candidate_index;
        rejected.combined_score = reports[i].combined;
        rejected.worst_law = law_name(worst);
        rejected.explanation = reports[i].law(worst).explanation;
        if (!candidates[i].frames.empty()) {
            rejected.start_box = candidates[i].frames.front().at(primary);
            rejected.end_box = candidates[i].frames.back().at(primary);
        }
        feedback.rejected_summaries.push_back(std::move(rejected));
    }
    return feedback;
}

}  // namespace

SubInstructionResult search_sub_instruction(const SubInstruction& sub,
                                            const PlanningContext& context,
                                            const SceneBundle& scene, Backends backends,
                                            const SearchConfig& config) {
    config.validate();
    if (!context.frame)
        throw Error(ErrorCode::ManifestInvalid, "planning context has no frame");
    if (!sub.goal)
        throw SchemaError(SchemaErrorKind::missing_field,
                          "sub-instruction " + std::to_string(sub.index) + " has no goal");

    SubInstructionResult result;
    result.sub = sub;
    bool have_best = false;
    double best_combined = -1.0;

    std::optional<PlannerFeedback> feedback;
    for (int round = 1; round <= config.max_rounds; ++round) {
        SearchTrace::Round record;
        record.attempt = round;
        record.feedback = feedback;

        const std::vector<TrajectoryCandidate> sampled =
            backends.planner->propose_trajectories(sub, context, scene, config.k, feedback);
        const std::vector<TrajectoryCandidate> kept =
            diversity_filter(sampled, config.min_diversity);
        std::set<int> kept_ids;
        for (const TrajectoryCandidate& c : kept) kept_ids.insert(c.candidate_index);

        // Render + verify the surviving candidates, in candidate order so
        // selection stays deterministic.
        std::vector<VerificationReport> reports;
        std::vector<VideoSketch> sketches;
        reports.reserve(kept.size());
        for (const TrajectoryCandidate& candidate : kept) {
            VideoSketch sketch = render_sketch(candidate, scene);
            reports.push_back(
                backends.verifier->verify(sketch, candidate, sub, scene, config.weights));
            sketches.push_back(std::move(sketch));
        }

        size_t kept_pos = 0;
        for (const TrajectoryCandidate& candidate : sampled) {
            SearchTrace::CandidateRecord entry;
            entry.candidate = candidate;
            if (kept_ids.contains(candidate.candidate_index)) {
                entry.report = reports[kept_pos];
                ++kept_pos;
            } else {
                entry.diversity_filtered = true;
            }
            record.candidates.push_back(std::move(entry));
        }

        const size_t best_i = select_best(reports);
        record.selected_index = kept[best_i].candidate_index;
        record.best_combined = reports[best_i].combined;
        result.trace.rounds.push_back(std::move(record));

        if (reports[best_i].combined > best_combined) {
            best_combined = reports[best_i].combined;
            result.selected = kept[best_i];
            result.report = reports[best_i];
            result.sketch = std::move(sketches[best_i]);
            result.trace.selected_round = round;
            result.trace.selected_candidate_index = kept[best_i].candidate_index;
            result.trace.selected_combined = best_combined;
            have_best = true;
        }

        if (best_combined >= config.tau) {
            result.trace.below_threshold = false;
            return result;
        }
        if (round < config.max_rounds)
            feedback = build_feedback(kept, reports, sub, round + 1);
    }

    // Retry limit reached: hand back the best-seen plan, flagged.
    if (!have_best) throw Error(ErrorCode::EmptyCandidateSet, "search produced no candidates");
    result.trace.below_threshold = true;
    return result;
}

PipelineResult run_pipeline(const std::string& prompt, const SceneBundle& scene,
                            Backends backends, const SearchConfig& config) {
    config.validate();
    PipelineResult result;
    result.plan = backends.planner->propose_plan(prompt, scene);
    if (result.plan.sub_instructions.empty())
        throw SchemaError(SchemaErrorKind::M_out_of_range, "plan has no sub-instructions");
    if (result.plan.source_prompt.empty()) result.plan.source_prompt = prompt;

    Image current_frame = scene.initial_frame;
    std::map<std::string, BBox> current_boxes;
    for (const ObjectAsset& obj : scene.objects) current_boxes[obj.id] = obj.initial_box;

    for (SubInstruction sub : result.plan.sub_instructions) {
        if (!sub.goal) sub.goal = scene.goal;
        if (!sub.goal)
            throw SchemaError(SchemaErrorKind::missing_field,
                              "no goal for sub-instruction " + std::to_string(sub.index) +
                                  " (neither plan nor manifest provides one)");
        for (const std::string& id : sub.moving_ids)
            if (!current_boxes.contains(id))
                throw SchemaError(SchemaErrorKind::unknown_object,
                                  "plan moves unknown object \"" + id + "\"");

        PlanningContext context;
        context.frame = &current_frame;
        context.boxes = current_boxes;

        SubInstructionResult segment =
            search_sub_instruction(sub, context, scene, backends, config);
        result.below_threshold |= segment.trace.below_threshold;

        // Chain: the selected sketch's last frame conditions the next phase,
        // and the selected final boxes become the next current positions.
        current_frame = last_frame(segment.sketch);
        for (const std::string& id : sub.moving_ids)
            current_boxes[id] = segment.selected.frames.back().at(id);

        result.segments.push_back(std::move(segment));
    }
    return result;
}

namespace {

json box_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

json candidate_json(const TrajectoryCandidate& c) {
    json frames = json::array();
    for (const auto& frame : c.frames) {
        json f = json::object();
        for (const auto& [id, box] : frame) f[id] = box_json(box);
        frames.push_back(f);
    }
    json doc;
    doc["candidate_index"] = c.candidate_index;
    doc["frames"] = frames;
    return doc;
}

json report_json(const VerificationReport& r) {
    json laws = json::object();
    for (const LawScore& law : r.laws)
        laws[law_name(law.law)] = {{"score", law.score}, {"explanation", law.explanation}};
    return {{"semantic", {{"score", r.semantic}, {"explanation", r.semantic_explanation}}},
            {"laws", laws},
            {"combined", r.combined}};
}

}  // namespace

std::string trace_to_json(const PipelineResult& result, const VerifierWeights& weights) {
    json doc;
    doc["prompt"] = result.plan.source_prompt;
    doc["total_plan_frames"] = result.plan.total_plan_frames;
    doc["below_threshold"] = result.below_threshold;
    doc["weights"] = {{"semantic", weights.lambda_sem},
                      {"physics", weights.lambda_phys},
                      {"laws", weights.lambda_laws}};
    doc["sub_instructions"] = json::array();

    for (const SubInstructionResult& segment : result.segments) {
        json sub;
        sub["index"] = segment.sub.index;
        sub["text"] = segment.sub.text;
        sub["frame_budget"] = segment.sub.frame_budget;
        sub["moving"] = segment.sub.moving_ids;
        sub["rounds"] = json::array();
        for (const SearchTrace::Round& round : segment.trace.rounds) {
            json r;
            r["attempt"] = round.attempt;
            if (round.feedback) {
                json rejected = json::array();
                for (const auto& f : round.feedback->rejected_summaries)
                    rejected.push_back({{"candidate_index", f.candidate_index},
                                        {"combined", f.combined_score},
                                        {"worst_law", f.worst_law},
                                        {"explanation", f.explanation},
                                        {"start_box", box_json(f.start_box)},
                                        {"end_box", box_json(f.end_box)}});
                r["feedback"] = {{"attempt", round.feedback->attempt},
                                 {"rejected", rejected}};
            }
            r["candidates"] = json::array();
            for (const SearchTrace::CandidateRecord& record : round.candidates) {
                json c = candidate_json(record.candidate);
                if (record.report)
                    c["report"] = report_json(*record.report);
                else
                    c["diversity_filtered"] = true;
                r["candidates"].push_back(std::move(c));
            }
            r["selected_index"] = round.selected_index;
            r["best_combined"] = round.best_combined;
            sub["rounds"].push_back(std::move(r));
        }
        sub["selected"] = {{"round", segment.trace.selected_round},
                           {"candidate_index", segment.trace.selected_candidate_index},
                           {"combined", segment.trace.selected_combined},
                           {"below_threshold", segment.trace.below_threshold}};
        doc["sub_instructions"].push_back(std::move(sub));
    }
    return doc.dump(2);
}

}  // namespace sv
