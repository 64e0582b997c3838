#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include "oracles.hpp"
#include "sv/render.hpp"
#include "sv/synthetic.hpp"
#include "test_util.hpp"

using namespace sv;
using testutil::TempDir;

namespace {

SceneBundle scene_512() {
    SyntheticSceneSpec spec;
    spec.width = 512;
    spec.height = 512;
    spec.object_size_px = 64;
    spec.seed = 17;
    return make_synthetic_scene(spec);
}

TrajectoryCandidate identity_candidate(const SceneBundle& scene, int frames) {
    TrajectoryCandidate candidate;
    for (int t = 0; t < frames; ++t) {
        std::map<std::string, BBox> frame;
        for (const ObjectAsset& obj : scene.objects) frame[obj.id] = obj.initial_box;
        candidate.frames.push_back(std::move(frame));
    }
    return candidate;
}

}  // namespace

TEST_CASE("identity trajectory reproduces initial-frame masked pixels bit-exactly") {
    const SceneBundle scene = scene_512();
    const VideoSketch sketch = render_sketch(identity_candidate(scene, 3), scene);
    REQUIRE(sketch.frames.size() == 3);
    const ObjectAsset& obj = scene.objects.front();
    for (const Image& frame : sketch.frames)
        for (int y = 0; y < scene.height(); ++y)
            for (int x = 0; x < scene.width(); ++x)
                for (int c = 0; c < 3; ++c) {
                    const uint8_t expected = obj.mask.at(x, y, 0) != 0
                                                 ? scene.initial_frame.at(x, y, c)
                                                 : scene.background.at(x, y, c);
                    REQUIRE(frame.at(x, y, c) == expected);
                }
}

TEST_CASE("translation by +0.1 at 512 px shifts the sprite 51 px and matches the reference") {
    const SceneBundle scene = scene_512();
    const ObjectAsset& obj = scene.objects.front();

    // Anchor at x_min = 0.25 so the half-up rasterization shift is exactly 51.
    const double w = obj.initial_box.width();
    const BBox at{0.25, obj.initial_box.y_min, 0.25 + w, obj.initial_box.y_max};
    const BBox shifted{0.35, at.y_min, 0.35 + w, at.y_max};
    CHECK(rasterize(shifted, 512, 512).x0 - rasterize(at, 512, 512).x0 == 51);

    TrajectoryCandidate candidate;
    candidate.frames.push_back({{obj.id, at}});
    candidate.frames.push_back({{obj.id, shifted}});
    const VideoSketch sketch = render_sketch(candidate, scene);

    const Image ref0 = oracle::reference_composite(scene.background, obj.sprite, at);
    const Image ref1 = oracle::reference_composite(scene.background, obj.sprite, shifted);
    CHECK(sketch.frames[0] == ref0);
    CHECK(sketch.frames[1] == ref1);
}

TEST_CASE("a frame with no moving objects equals the background") {
    const SceneBundle scene = scene_512();
    TrajectoryCandidate candidate;
    candidate.frames.push_back({});
    const VideoSketch sketch = render_sketch(candidate, scene);
    CHECK(sketch.frames[0] == scene.background);
}

TEST_CASE("png sequence encoding names frames and round trips losslessly") {
    TempDir dir("renderer_png");
    const SceneBundle scene = scene_512();
    const VideoSketch sketch = render_sketch(identity_candidate(scene, 10), scene);
    encode_sketch(sketch, dir.path());

    for (int t = 0; t < 10; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03d.png", t);
        REQUIRE(std::filesystem::exists(dir.path() / name));
    }
    const std::vector<Image> decoded = decode_sketch_frames(dir.path());
    REQUIRE(decoded.size() == 10);
    for (int t = 0; t < 10; ++t) CHECK(decoded[t] == sketch.frames[t]);
}

TEST_CASE("gif timing metadata totals frames/fps seconds") {
    TempDir dir("renderer_gif");
    const SceneBundle scene = scene_512();
    VideoSketch sketch = render_sketch(identity_candidate(scene, 10), scene);
    sketch.fps = 4.0;
    encode_sketch(sketch, dir.path(), true);

    const std::vector<uint8_t> bytes = testutil::read_bytes(dir.path() / "sketch.gif");
    REQUIRE(bytes.size() > 13);
    long total_cs = 0;
    int frames = 0;
    for (size_t i = 0; i + 7 < bytes.size(); ++i)
        if (bytes[i] == 0x21 && bytes[i + 1] == 0xF9 && bytes[i + 2] == 0x04) {
            total_cs += bytes[i + 4] | (bytes[i + 5] << 8);
            ++frames;
        }
    CHECK(frames == 10);
    CHECK(total_cs == 250);  // 10 frames / 4 fps = 2.5 s
}

TEST_CASE("last_frame returns the final frame unmodified") {
    const SceneBundle scene = scene_512();
    const ObjectAsset& obj = scene.objects.front();

    const VideoSketch single = render_sketch(identity_candidate(scene, 1), scene);
    CHECK(&last_frame(single) == &single.frames.back());

    const VideoSketch identity = render_sketch(identity_candidate(scene, 5), scene);
    CHECK(last_frame(identity) == identity.frames.front());

    // Straight line: final frame shows the sprite at the goal box.
    const double w = obj.initial_box.width();
    TrajectoryCandidate candidate;
    for (int t = 0; t < 5; ++t) {
        const double x = obj.initial_box.x_min + 0.05 * t;
        candidate.frames.push_back(
            {{obj.id, BBox{x, obj.initial_box.y_min, x + w, obj.initial_box.y_max}}});
    }
    const VideoSketch moved = render_sketch(candidate, scene);
    const Image expected = oracle::reference_composite(
        scene.background, obj.sprite, candidate.frames.back().at(obj.id));
    CHECK(last_frame(moved) == expected);
}

TEST_CASE("rendering is deterministic and local to the pasted boxes") {
    const SceneBundle scene = scene_512();
    const ObjectAsset& obj = scene.objects.front();
    TrajectoryCandidate candidate;
    for (int t = 0; t < 4; ++t) {
        const double x = 0.3 + 0.07 * t;
        candidate.frames.push_back({{obj.id, BBox{x, 0.2, x + 0.13, 0.41}}});
    }
    const VideoSketch a = render_sketch(candidate, scene);
    const VideoSketch b = render_sketch(candidate, scene);
    REQUIRE(a.frames.size() == b.frames.size());
    for (size_t t = 0; t < a.frames.size(); ++t) CHECK(a.frames[t] == b.frames[t]);

    for (size_t t = 0; t < a.frames.size(); ++t) {
        const PixelRect rect = rasterize(candidate.frames[t].at(obj.id), 512, 512);
        for (int y = 0; y < 512; ++y)
            for (int x = 0; x < 512; ++x) {
                const bool inside = x >= rect.x0 - 1 && x < rect.x1 + 1 && y >= rect.y0 - 1 &&
                                    y < rect.y1 + 1;
                if (inside) continue;
                for (int c = 0; c < 3; ++c)
                    REQUIRE(a.frames[t].at(x, y, c) == scene.background.at(x, y, c));
            }
    }
}

TEST_CASE("frame count and dimensions hold for 200 random candidates") {
    const SceneBundle scene = []() {
        SyntheticSceneSpec spec;
        spec.seed = 23;
        return make_synthetic_scene(spec);
    }();
    uint64_t state = 99;
    auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return (state >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < 200; ++i) {
        const int frames = 2 + static_cast<int>(next() * 12);
        TrajectoryCandidate candidate;
        for (int t = 0; t < frames; ++t) {
            const double x = next() * 0.7;
            const double y = next() * 0.7;
            const double w = 0.05 + next() * 0.25;
            const double h = 0.05 + next() * 0.25;
            candidate.frames.push_back({{"mover", BBox{x, y, x + w, y + h}}});
        }
        const VideoSketch sketch = render_sketch(candidate, scene);
        REQUIRE(sketch.frames.size() == static_cast<size_t>(frames));
        for (const Image& frame : sketch.frames) {
            REQUIRE(frame.width == scene.width());
            REQUIRE(frame.height == scene.height());
            REQUIRE(frame.channels == 3);
        }
    }
}
