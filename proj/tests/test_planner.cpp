#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <functional>

#include "oracles.hpp"
#include "sv/error.hpp"
#include "sv/planner.hpp"
#include "sv/synthetic.hpp"
#include "test_util.hpp"

using namespace sv;

namespace {

SubInstruction sample_sub(int frames = 10,
                          std::vector<std::string> moving = {"ball"}) {
    SubInstruction sub;
    sub.index = 0;
    sub.text = "move the ball";
    sub.frame_budget = frames;
    sub.moving_ids = std::move(moving);
    GoalSpec goal;
    goal.goal_region = BBox{0.7, 0.7, 0.9, 0.9};
    sub.goal = goal;
    return sub;
}

TrajectoryCandidate line_candidate(int frames, double x0, double y0, double step_x,
                                   double step_y = 0.0, const std::string& id = "ball",
                                   double size = 0.1) {
    TrajectoryCandidate candidate;
    for (int t = 0; t < frames; ++t) {
        const double x = x0 + step_x * t;
        const double y = y0 + step_y * t;
        candidate.frames.push_back({{id, BBox{x, y, x + size, y + size}}});
    }
    return candidate;
}

SchemaErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const SchemaError& e) {
        return e.kind();
    }
    FAIL("expected SchemaError");
    return SchemaErrorKind::bad_type;
}

}  // namespace

TEST_CASE("well-formed two-phase plan parses to M=2 summing to 41") {
    const std::string raw = R"({
      "phases": [
        {"action": "walk to the shelf", "duration": 20, "moving": ["robot"]},
        {"action": "grab the box", "duration": 21, "moving": ["robot", "box"],
         "goal": {"region": [0.6, 0.4, 0.8, 0.6], "description": "box in hand"}}
      ]
    })";
    const HighLevelPlan plan = parse_plan_response(raw);
    CHECK(plan.sub_instructions.size() == 2);
    CHECK(plan.total_plan_frames == 41);
    CHECK(plan.sub_instructions[0].frame_budget == 20);
    CHECK(plan.sub_instructions[1].frame_budget == 21);
    CHECK(plan.sub_instructions[1].goal.has_value());
}

TEST_CASE("plan parser rejects the documented malformations with the right kinds") {
    CHECK(kind_of([] {
              parse_plan_response(R"({"phases": [
                {"action": "a", "duration": 20, "moving": ["x"]},
                {"action": "b", "moving": ["x"]}]})");
          }) == SchemaErrorKind::missing_field);

    const std::string five_phases = R"({"phases": [
      {"action":"a","duration":9,"moving":["x"]},
      {"action":"b","duration":8,"moving":["x"]},
      {"action":"c","duration":8,"moving":["x"]},
      {"action":"d","duration":8,"moving":["x"]},
      {"action":"e","duration":8,"moving":["x"]}]})";
    CHECK(kind_of([&] { parse_plan_response(five_phases); }) == SchemaErrorKind::M_out_of_range);

    CHECK(kind_of([] {
              parse_plan_response(R"({"phases": [
                {"action": "a", "duration": 40, "moving": ["x"]}]})");
          }) == SchemaErrorKind::frame_budget_mismatch);

    CHECK(kind_of([] { parse_plan_response("not json at all"); }) == SchemaErrorKind::bad_type);
}

TEST_CASE("serialize then parse is the identity on plans") {
    ScriptedPlannerOptions options;
    options.seed = 9;
    options.phases = 3;
    ScriptedPlanner planner(options);
    const SceneBundle scene = make_synthetic_scene({});
    const HighLevelPlan plan = planner.propose_plan("shift the block", scene);

    const HighLevelPlan reparsed = parse_plan_response(serialize_plan(plan));
    REQUIRE(reparsed.sub_instructions.size() == plan.sub_instructions.size());
    CHECK(reparsed.total_plan_frames == plan.total_plan_frames);
    for (size_t i = 0; i < plan.sub_instructions.size(); ++i) {
        const SubInstruction& a = plan.sub_instructions[i];
        const SubInstruction& b = reparsed.sub_instructions[i];
        CHECK(a.text == b.text);
        CHECK(a.frame_budget == b.frame_budget);
        CHECK(a.moving_ids == b.moving_ids);
        REQUIRE(a.goal.has_value() == b.goal.has_value());
        if (a.goal && a.goal->goal_region) {
            CHECK(b.goal->goal_region.has_value());
            CHECK(a.goal->goal_region->x_min ==
                  doctest::Approx(b.goal->goal_region->x_min).epsilon(1e-12));
        }
    }
}

TEST_CASE("line-format trajectory response parses to one candidate") {
    std::string raw;
    for (int t = 1; t <= 10; ++t) {
        const double x = 0.1 + 0.05 * (t - 1);
        raw += "Frame_" + std::to_string(t) + ": [[\"ball\", [" + std::to_string(x) +
               ", 0.4, " + std::to_string(x + 0.1) + ", 0.5]]], caption: gliding right\n";
    }
    const auto candidates = parse_trajectory_response(raw, sample_sub(10));
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].frames.size() == 10);
    CHECK(candidates[0].caption_per_frame.size() == 10);
    CHECK(candidates[0].caption_per_frame[0] == "gliding right");
    CHECK(candidates[0].frames[0].at("ball").x_min == doctest::Approx(0.1));
}

TEST_CASE("frame numbering restart begins a new candidate") {
    std::string raw;
    for (int rep = 0; rep < 2; ++rep)
        for (int t = 1; t <= 4; ++t)
            raw += "Frame_" + std::to_string(t) +
                   ": [[\"ball\", [0." + std::to_string(1 + rep) + ", 0.4, 0." +
                   std::to_string(3 + rep) + ", 0.6]]]\n";
    const auto candidates = parse_trajectory_response(raw, sample_sub(4));
    REQUIRE(candidates.size() == 2);
    CHECK(candidates[0].candidate_index == 0);
    CHECK(candidates[1].candidate_index == 1);
}

TEST_CASE("JSON trajectory format is accepted") {
    const std::string raw = R"([{"frames": [
        {"ball": [0.1, 0.1, 0.2, 0.2]},
        {"ball": [0.15, 0.1, 0.25, 0.2]}
    ]}])";
    const auto candidates = parse_trajectory_response(raw, sample_sub(2));
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].frames.size() == 2);
}

TEST_CASE("trajectory parser rejects the documented malformations") {
    // Unknown object.
    CHECK(kind_of([] {
              parse_trajectory_response(
                  R"([{"frames": [{"tree": [0.1,0.1,0.2,0.2]}, {"tree": [0.1,0.1,0.2,0.2]}]}])",
                  sample_sub(2));
          }) == SchemaErrorKind::unknown_object);

    // Invalid box: x_min >= x_max.
    CHECK(kind_of([] {
              parse_trajectory_response(
                  R"([{"frames": [{"ball": [0.4,0.4,0.3,0.6]}, {"ball": [0.1,0.1,0.2,0.2]}]}])",
                  sample_sub(2));
          }) == SchemaErrorKind::invalid_box);

    // Wrong frame count.
    CHECK(kind_of([] {
              parse_trajectory_response(R"([{"frames": [{"ball": [0.1,0.1,0.2,0.2]}]}])",
                                        sample_sub(2));
          }) == SchemaErrorKind::frame_count);

    // Missing moving object in a frame.
    CHECK(kind_of([] {
              parse_trajectory_response(
                  R"([{"frames": [{"ball": [0.1,0.1,0.2,0.2]}, {}]}])", sample_sub(2));
          }) == SchemaErrorKind::unknown_object);
}

TEST_CASE("candidate serialization round trips") {
    const TrajectoryCandidate candidate = line_candidate(6, 0.1, 0.3, 0.04);
    const TrajectoryCandidate back =
        parse_candidate_json(serialize_candidate(candidate), sample_sub(6));
    REQUIRE(back.frames.size() == candidate.frames.size());
    for (size_t t = 0; t < back.frames.size(); ++t)
        CHECK(back.frames[t].at("ball").x_min ==
              doctest::Approx(candidate.frames[t].at("ball").x_min).epsilon(1e-12));
}

TEST_CASE("diversity filter: identical candidates collapse, 0.1 offsets survive") {
    const TrajectoryCandidate a = line_candidate(8, 0.1, 0.3, 0.05);
    TrajectoryCandidate b = a;
    b.candidate_index = 1;
    CHECK(diversity_filter({a, b}).size() == 1);

    // Uniform +0.1 x offset: RMS distance is exactly 0.1.
    const TrajectoryCandidate c = line_candidate(8, 0.2, 0.3, 0.05);
    CHECK(oracle::candidate_rms_distance(a, c) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(candidate_distance(a, c) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(diversity_filter({a, c}).size() == 2);

    CHECK(diversity_filter({}).empty());
}

TEST_CASE("diversity filter is idempotent and meets the distance bound") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        std::vector<TrajectoryCandidate> candidates;
        for (int i = 0; i < 8; ++i) {
            const double x0 = 0.05 + 0.017 * ((seed * 7 + i * 13) % 40);
            TrajectoryCandidate c = line_candidate(6, std::min(x0, 0.8), 0.3, 0.01);
            c.candidate_index = i;
            candidates.push_back(std::move(c));
        }
        const auto once = diversity_filter(candidates);
        const auto twice = diversity_filter(once);
        CHECK(once.size() == twice.size());
        for (size_t i = 0; i < once.size(); ++i)
            for (size_t j = i + 1; j < once.size(); ++j)
                CHECK(oracle::candidate_rms_distance(once[i], once[j]) >= 0.05);
    }
}

TEST_CASE("scripted planner is deterministic") {
    const SceneBundle scene = make_synthetic_scene({});
    ScriptedPlannerOptions options;
    options.seed = 7;
    ScriptedPlanner planner(options);
    const HighLevelPlan plan = planner.propose_plan("slide", scene);
    PlanningContext context;
    context.frame = &scene.initial_frame;
    context.boxes["mover"] = scene.objects.front().initial_box;

    const auto first =
        planner.propose_trajectories(plan.sub_instructions[0], context, scene, 5, std::nullopt);
    const auto second =
        planner.propose_trajectories(plan.sub_instructions[0], context, scene, 5, std::nullopt);
    REQUIRE(first.size() == second.size());
    for (size_t i = 0; i < first.size(); ++i)
        CHECK(serialize_candidate(first[i]) == serialize_candidate(second[i]));
}

TEST_CASE("straight variant advances 0.06 per frame for the spec geometry") {
    // Goal at (0.8,0.5) from (0.2,0.5) over 11 frames: (0.8-0.2)/10 per step.
    SceneBundle scene = make_synthetic_scene({});
    SubInstruction sub = sample_sub(11, {"mover"});
    GoalSpec goal;
    goal.goal_region = BBox{0.75, 0.45, 0.85, 0.55};  // center (0.8, 0.5)
    sub.goal = goal;

    ScriptedPlannerOptions options;
    options.seed = 1;
    ScriptedPlanner planner(options);
    PlanningContext context;
    context.frame = &scene.initial_frame;
    context.boxes["mover"] = BBox{0.15, 0.45, 0.25, 0.55};  // center (0.2, 0.5)

    const auto order = planner.variant_order(sub.index, 1, 5);
    const auto candidates = planner.propose_trajectories(sub, context, scene, 5, std::nullopt);
    for (size_t slot = 0; slot < order.size(); ++slot) {
        if (order[slot] != ScriptedVariant::clean) continue;
        const TrajectoryCandidate& clean = candidates[slot];
        for (int t = 0; t + 1 < 11; ++t) {
            const double dx = bbox_center(clean.frames[t + 1].at("mover")).x -
                              bbox_center(clean.frames[t].at("mover")).x;
            CHECK(dx == doctest::Approx(0.06).epsilon(1e-9));
        }
    }
}

TEST_CASE("planted teleport variant contains a step displacement above 0.15") {
    const SceneBundle scene = make_synthetic_scene({});
    ScriptedPlannerOptions options;
    options.seed = 3;
    ScriptedPlanner planner(options);
    const HighLevelPlan plan = planner.propose_plan("slide", scene);
    PlanningContext context;
    context.frame = &scene.initial_frame;
    context.boxes["mover"] = scene.objects.front().initial_box;

    const auto order = planner.variant_order(0, 1, 5);
    const auto candidates =
        planner.propose_trajectories(plan.sub_instructions[0], context, scene, 5, std::nullopt);
    bool found = false;
    for (size_t slot = 0; slot < order.size(); ++slot)
        if (order[slot] == ScriptedVariant::teleport) {
            CHECK(oracle::max_step_displacement(candidates[slot]) > 0.15);
            found = true;
        }
    CHECK(found);
}

TEST_CASE("scripted candidates satisfy frame-count and box invariants over 1000 seeds") {
    const SceneBundle scene = make_synthetic_scene({});
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        ScriptedPlannerOptions options;
        options.seed = seed;
        options.mode = seed % 2 == 0 ? ScriptedPlannerOptions::Mode::planted_set
                                     : ScriptedPlannerOptions::Mode::pool;
        ScriptedPlanner planner(options);
        const HighLevelPlan plan = planner.propose_plan("slide", scene);
        PlanningContext context;
        context.frame = &scene.initial_frame;
        context.boxes["mover"] = scene.objects.front().initial_box;

        const auto candidates =
            planner.propose_trajectories(plan.sub_instructions[0], context, scene, 5, std::nullopt);
        REQUIRE(candidates.size() == 5);
        for (const TrajectoryCandidate& candidate : candidates) {
            REQUIRE(static_cast<int>(candidate.frames.size()) ==
                    plan.sub_instructions[0].frame_budget);
            for (const auto& frame : candidate.frames) {
                REQUIRE(frame.size() == 1);
                REQUIRE(frame.at("mover").valid());
            }
        }
    }
}

TEST_CASE("planted set contains all five variants pairwise distinct") {
    const SceneBundle scene = make_synthetic_scene({});
    ScriptedPlannerOptions options;
    options.seed = 42;
    ScriptedPlanner planner(options);
    const HighLevelPlan plan = planner.propose_plan("slide", scene);
    PlanningContext context;
    context.frame = &scene.initial_frame;
    context.boxes["mover"] = scene.objects.front().initial_box;

    const auto candidates =
        planner.propose_trajectories(plan.sub_instructions[0], context, scene, 5, std::nullopt);
    const auto kept = diversity_filter(candidates);
    CHECK(kept.size() == 5);  // every planted variant clears the 0.05 bar
}
