#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <unistd.h>

#include <atomic>
#include <thread>

#include "sv/error.hpp"
#include "sv/remote.hpp"
#include "sv/synthetic.hpp"
#include "sv/verify.hpp"
#include "test_util.hpp"

using namespace sv;
using testutil::TempDir;

namespace {

/// Local endpoint speaking the wire contract; hands each POST body to `reply`.
class FakeEndpoint {
public:
    explicit FakeEndpoint(std::function<std::string(const std::string&)> reply) {
        server_.Post("/v1/chat", [reply = std::move(reply)](const httplib::Request& req,
                                                            httplib::Response& res) {
            nlohmann::json body;
            body["text"] = reply(req.body);
            res.set_content(body.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeEndpoint() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat"; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

EndpointConfig record_config(const std::string& url, const std::filesystem::path& cassette) {
    EndpointConfig config;
    config.url = url;
    config.api_key = "test-key";
    config.model = "test-model";
    config.mode = EndpointConfig::Mode::record;
    config.cassette_path = cassette;
    return config;
}

EndpointConfig replay_config(const std::filesystem::path& cassette) {
    EndpointConfig config;
    config.model = "test-model";
    config.mode = EndpointConfig::Mode::replay;
    config.cassette_path = cassette;
    return config;
}

std::string trajectory_text(int candidates, int frames) {
    std::string out;
    for (int c = 0; c < candidates; ++c) {
        out += "Candidate " + std::to_string(c + 1) + ":\n";
        for (int t = 1; t <= frames; ++t) {
            const double x = 0.1 + 0.1 * c + 0.04 * (t - 1);
            out += "Frame_" + std::to_string(t) + ": [[\"mover\", [" + std::to_string(x) +
                   ", 0.5, " + std::to_string(x + 0.1) + ", 0.6]]]\n";
        }
    }
    return out;
}

SubInstruction test_sub(int frames) {
    SubInstruction sub;
    sub.index = 0;
    sub.text = "slide the block";
    sub.frame_budget = frames;
    sub.moving_ids = {"mover"};
    GoalSpec goal;
    goal.goal_region = BBox{0.7, 0.4, 0.9, 0.6};
    sub.goal = goal;
    return sub;
}

}  // namespace

TEST_CASE("cassette replays per-hash entries in recording order") {
    ChatRequest request;
    request.model = "m";
    request.messages.push_back({"user", "hello", {}});

    Cassette cassette;
    cassette.record(request, "first");
    cassette.record(request, "second");

    TempDir dir("cassette");
    const auto path = dir.path() / "tape.json";
    cassette.save(path);
    Cassette loaded = Cassette::load(path);
    CHECK(loaded.replay(request) == "first");
    CHECK(loaded.replay(request) == "second");
    CHECK(!loaded.replay(request).has_value());
}

TEST_CASE("replay mode without a matching entry is a TransportError") {
    TempDir dir("cassette_miss");
    ChatClient client(replay_config(dir.path() / "missing.json"));
    ChatRequest request;
    request.model = "m";
    request.messages.push_back({"user", "anything", {}});
    try {
        client.complete(request);
        FAIL("expected TransportError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TransportError);
    }
}

TEST_CASE("live mode requires an endpoint and credentials") {
    EndpointConfig no_key;
    no_key.url = "http://127.0.0.1:9/v1/chat";
    no_key.mode = EndpointConfig::Mode::live;
    ChatRequest request;
    request.model = "m";
    try {
        ChatClient(no_key).complete(request);
        FAIL("expected AuthError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AuthError);
    }

    EndpointConfig unreachable;
    unreachable.url = "http://127.0.0.1:9/v1/chat";  // nothing listens here
    unreachable.api_key = "k";
    unreachable.mode = EndpointConfig::Mode::live;
    try {
        ChatClient(unreachable).complete(request);
        FAIL("expected TransportError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TransportError);
    }
}

TEST_CASE("remote planner records a session and replays it byte-identically") {
    const SceneBundle scene = make_synthetic_scene({});
    const SubInstruction sub = test_sub(4);
    PlanningContext context;
    context.frame = &scene.initial_frame;
    context.boxes["mover"] = scene.objects.front().initial_box;

    TempDir dir("remote_planner");
    const auto cassette = dir.path() / "planner.json";

    std::vector<TrajectoryCandidate> recorded;
    {
        FakeEndpoint endpoint([](const std::string&) { return trajectory_text(2, 4); });
        RemotePlanner planner(record_config(endpoint.url(), cassette));
        recorded = planner.propose_trajectories(sub, context, scene, 2, std::nullopt);
    }
    REQUIRE(recorded.size() == 2);

    RemotePlanner replayed(replay_config(cassette));
    const auto first = replayed.propose_trajectories(sub, context, scene, 2, std::nullopt);
    REQUIRE(first.size() == recorded.size());
    for (size_t i = 0; i < first.size(); ++i)
        CHECK(serialize_candidate(first[i]) == serialize_candidate(recorded[i]));
}

TEST_CASE("a malformed response is resampled once, then the valid one is used") {
    const SceneBundle scene = make_synthetic_scene({});
    const SubInstruction sub = test_sub(4);
    PlanningContext context;
    context.frame = &scene.initial_frame;
    context.boxes["mover"] = scene.objects.front().initial_box;

    TempDir dir("remote_retry");
    const auto cassette = dir.path() / "planner.json";

    std::atomic<int> calls{0};
    {
        FakeEndpoint endpoint([&calls](const std::string&) {
            return ++calls == 1 ? std::string("Frame_1: [[\"mover\", [0.9, 0.9, 0.1, 0.1]]]")
                                : trajectory_text(1, 4);
        });
        RemotePlanner planner(record_config(endpoint.url(), cassette));
        const auto candidates = planner.propose_trajectories(sub, context, scene, 1, std::nullopt);
        CHECK(calls == 2);  // exactly one resample
        REQUIRE(candidates.size() == 1);
    }

    // The cassette holds both exchanges; replay walks the same retry path.
    RemotePlanner replayed(replay_config(cassette));
    const auto candidates = replayed.propose_trajectories(sub, context, scene, 1, std::nullopt);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].frames.size() == 4);
}

TEST_CASE("retries stop at the cap and surface the SchemaError") {
    const SceneBundle scene = make_synthetic_scene({});
    const SubInstruction sub = test_sub(4);
    PlanningContext context;
    context.frame = &scene.initial_frame;
    context.boxes["mover"] = scene.objects.front().initial_box;

    TempDir dir("remote_cap");
    std::atomic<int> calls{0};
    FakeEndpoint endpoint([&calls](const std::string&) {
        ++calls;
        return std::string("no frames at all");
    });
    RemotePlanner planner(record_config(endpoint.url(), dir.path() / "c.json"));
    CHECK_THROWS_AS(planner.propose_trajectories(sub, context, scene, 1, std::nullopt),
                    SchemaError);
    CHECK(calls == 3);
}

TEST_CASE("remote plan responses parse and retry like trajectories") {
    const SceneBundle scene = make_synthetic_scene({});
    TempDir dir("remote_plan");
    FakeEndpoint endpoint([](const std::string&) {
        return std::string(R"({"phases": [
            {"action": "slide", "duration": 41, "moving": ["mover"],
             "goal": {"region": [0.7, 0.7, 0.9, 0.9], "description": "at the mark"}}]})");
    });
    RemotePlanner planner(record_config(endpoint.url(), dir.path() / "c.json"));
    const HighLevelPlan plan = planner.propose_plan("slide the block", scene);
    CHECK(plan.sub_instructions.size() == 1);
    CHECK(plan.sub_instructions[0].frame_budget == 41);
    CHECK(plan.source_prompt == "slide the block");
}

TEST_CASE("remote verifier: uniform 0.85 replies combine to 0.85") {
    const SceneBundle scene = make_synthetic_scene({});
    const SubInstruction sub = test_sub(3);
    TrajectoryCandidate candidate;
    for (int t = 0; t < 3; ++t)
        candidate.frames.push_back({{"mover", scene.objects.front().initial_box}});
    const VideoSketch sketch = render_sketch(candidate, scene);

    TempDir dir("remote_verify");
    const auto cassette = dir.path() / "verifier.json";
    VerificationReport recorded;
    {
        FakeEndpoint endpoint([](const std::string&) {
            return std::string(R"({"score": 0.85, "explanation": "fine"})");
        });
        RemoteVerifier verifier(record_config(endpoint.url(), cassette));
        recorded = verifier.verify(sketch, candidate, sub, scene, VerifierWeights{});
    }
    CHECK(recorded.combined == doctest::Approx(0.85).epsilon(1e-12));

    RemoteVerifier replayed(replay_config(cassette));
    const VerificationReport again =
        replayed.verify(sketch, candidate, sub, scene, VerifierWeights{});
    CHECK(again.combined == doctest::Approx(recorded.combined).epsilon(1e-15));
}

TEST_CASE("remote verifier maps descriptive replies through the rule table") {
    const SceneBundle scene = make_synthetic_scene({});
    const SubInstruction sub = test_sub(3);
    TrajectoryCandidate candidate;
    for (int t = 0; t < 3; ++t)
        candidate.frames.push_back({{"mover", scene.objects.front().initial_box}});
    const VideoSketch sketch = render_sketch(candidate, scene);

    TempDir dir("remote_desc");
    {
        FakeEndpoint endpoint(
            [](const std::string&) { return std::string("very consistent"); });
        RemoteVerifier verifier(
            record_config(endpoint.url(), dir.path() / "high.json"));
        const VerificationReport report =
            verifier.verify(sketch, candidate, sub, scene, VerifierWeights{});
        CHECK(report.combined == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        FakeEndpoint endpoint(
            [](const std::string&) { return std::string("somewhat inconsistent"); });
        RemoteVerifier verifier(record_config(endpoint.url(), dir.path() / "low.json"));
        const VerificationReport report =
            verifier.verify(sketch, candidate, sub, scene, VerifierWeights{});
        CHECK(report.combined == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(report.semantic == 0.7);
    }
}
