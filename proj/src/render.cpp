#include "sv/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sv/error.hpp"

namespace sv {

namespace {

/// floor(x/255 + 1/2) in exact integer arithmetic.
uint8_t div255_half_up(int x) {
    return static_cast<uint8_t>((2 * x + 255) / 510);
}

void composite_nearest(Image& frame, const Image& sprite, const PixelRect& rect) {
    for (int y = 0; y < rect.height(); ++y) {
        const int fy = rect.y0 + y;
        if (fy < 0 || fy >= frame.height) continue;
        for (int x = 0; x < rect.width(); ++x) {
            const int fx = rect.x0 + x;
            if (fx < 0 || fx >= frame.width) continue;
            const uint8_t a = sprite.at(x, y, 3);
            if (a == 0) continue;
            if (a == 255) {
                for (int c = 0; c < 3; ++c) frame.at(fx, fy, c) = sprite.at(x, y, c);
            } else {
                for (int c = 0; c < 3; ++c)
                    frame.at(fx, fy, c) =
                        div255_half_up(sprite.at(x, y, c) * a + frame.at(fx, fy, c) * (255 - a));
            }
        }
    }
}

void composite_bilinear(Image& frame, const Image& sprite, const PixelRect& rect) {
    const int sw = sprite.width, sh = sprite.height;
    const int tw = rect.width(), th = rect.height();
    for (int y = 0; y < th; ++y) {
        const int fy = rect.y0 + y;
        if (fy < 0 || fy >= frame.height) continue;
        const double sy = std::clamp((y + 0.5) * sh / th - 0.5, 0.0, sh - 1.0);
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, sh - 1);
        const double fy_w = sy - y0;
        for (int x = 0; x < tw; ++x) {
            const int fx = rect.x0 + x;
            if (fx < 0 || fx >= frame.width) continue;
            const double sx = std::clamp((x + 0.5) * sw / tw - 0.5, 0.0, sw - 1.0);
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, sw - 1);
            const double fx_w = sx - x0;

            const double w00 = (1 - fx_w) * (1 - fy_w), w10 = fx_w * (1 - fy_w);
            const double w01 = (1 - fx_w) * fy_w, w11 = fx_w * fy_w;

            // Premultiplied sampling avoids color bleed from transparent texels.
            double alpha = 0.0, premul[3] = {0, 0, 0};
            auto tap = [&](int px, int py, double w) {
                const double a = sprite.at(px, py, 3);
                alpha += w * a;
                for (int c = 0; c < 3; ++c) premul[c] += w * sprite.at(px, py, c) * a / 255.0;
            };
            tap(x0, y0, w00);
            tap(x1, y0, w10);
            tap(x0, y1, w01);
            tap(x1, y1, w11);

            if (alpha <= 0.0) continue;
            const double keep = 1.0 - alpha / 255.0;
            for (int c = 0; c < 3; ++c) {
                const double out = premul[c] + frame.at(fx, fy, c) * keep;
                frame.at(fx, fy, c) = static_cast<uint8_t>(
                    std::clamp(std::floor(out + 0.5), 0.0, 255.0));
            }
        }
    }
}

}  // namespace

VideoSketch render_sketch(const TrajectoryCandidate& candidate, const SceneBundle& scene) {
    VideoSketch sketch;
    sketch.trajectory_ref = candidate.candidate_index;
    sketch.frames.reserve(candidate.frames.size());

    for (const auto& frame_boxes : candidate.frames) {
        Image frame = scene.background;
        for (const ObjectAsset& obj : scene.objects) {
            auto it = frame_boxes.find(obj.id);
            if (it == frame_boxes.end()) continue;
            const PixelRect rect = rasterize(it->second, scene.width(), scene.height());
            if (rect.empty()) continue;
            if (rect.width() == obj.sprite.width && rect.height() == obj.sprite.height)
                composite_nearest(frame, obj.sprite, rect);
            else
                composite_bilinear(frame, obj.sprite, rect);
        }
        sketch.frames.push_back(std::move(frame));
    }
    return sketch;
}

void encode_sketch(const VideoSketch& sketch, const std::filesystem::path& dir, bool with_gif) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

    char name[32];
    for (size_t t = 0; t < sketch.frames.size(); ++t) {
        std::snprintf(name, sizeof(name), "frame_%03zu.png", t);
        write_png(sketch.frames[t], dir / name);
    }
    if (with_gif) write_gif(sketch.frames, sketch.fps, dir / "sketch.gif");
}

std::vector<Image> decode_sketch_frames(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("frame_", 0) == 0 && entry.path().extension() == ".png")
            paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<Image> frames;
    frames.reserve(paths.size());
    for (const auto& p : paths) frames.push_back(read_png(p));
    return frames;
}

const Image& last_frame(const VideoSketch& sketch) {
    if (sketch.frames.empty()) throw Error(ErrorCode::BadLength, "last_frame of empty sketch");
    return sketch.frames.back();
}

}  // namespace sv
