#pragma once

// Brute-force reference implementations used to pin expected values. These
// stay independent of the library code paths they check: pixel scans instead
// of integral images, direct formula evaluation instead of shared helpers.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sv/image.hpp"
#include "sv/planner.hpp"
#include "sv/verify.hpp"

namespace oracle {

/// Tight pixel bbox of nonzero mask pixels by full scan.
inline sv::PixelRect mask_bbox(const sv::Image& mask) {
    int x0 = mask.width, y0 = mask.height, x1 = 0, y1 = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y, 0) != 0) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x + 1);
                y1 = std::max(y1, y + 1);
            }
    if (x1 <= x0) return {0, 0, 0, 0};
    return {x0, y0, x1, y1};
}

/// Mask pixels inside a normalized box, counted one by one with the same
/// half-up rasterization rule.
inline long long overlap_count(const sv::Image& mask, const sv::BBox& box) {
    const int px0 = static_cast<int>(std::floor(box.x_min * mask.width + 0.5));
    const int py0 = static_cast<int>(std::floor(box.y_min * mask.height + 0.5));
    const int px1 = static_cast<int>(std::floor(box.x_max * mask.width + 0.5));
    const int py1 = static_cast<int>(std::floor(box.y_max * mask.height + 0.5));
    long long count = 0;
    for (int y = std::max(py0, 0); y < std::min(py1, mask.height); ++y)
        for (int x = std::max(px0, 0); x < std::min(px1, mask.width); ++x)
            if (mask.at(x, y, 0) != 0) ++count;
    return count;
}

inline long long box_pixel_area(const sv::Image& mask, const sv::BBox& box) {
    const int px0 = static_cast<int>(std::floor(box.x_min * mask.width + 0.5));
    const int py0 = static_cast<int>(std::floor(box.y_min * mask.height + 0.5));
    const int px1 = static_cast<int>(std::floor(box.x_max * mask.width + 0.5));
    const int py1 = static_cast<int>(std::floor(box.y_max * mask.height + 0.5));
    return static_cast<long long>(std::max(px1 - px0, 0)) * std::max(py1 - py0, 0);
}

/// Linear scan argmax with the keep-lowest-index tie rule.
inline size_t argmax_first(const std::vector<double>& values) {
    size_t best = 0;
    for (size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

/// RMS candidate distance evaluated directly from the definition.
inline double candidate_rms_distance(const sv::TrajectoryCandidate& a,
                                     const sv::TrajectoryCandidate& b) {
    double sum = 0.0;
    long long n = 0;
    for (size_t t = 0; t < std::min(a.frames.size(), b.frames.size()); ++t)
        for (const auto& [id, box] : a.frames[t]) {
            auto it = b.frames[t].find(id);
            if (it == b.frames[t].end()) continue;
            const double ax = (box.x_min + box.x_max) / 2.0;
            const double ay = (box.y_min + box.y_max) / 2.0;
            const double bx = (it->second.x_min + it->second.x_max) / 2.0;
            const double by = (it->second.y_min + it->second.y_max) / 2.0;
            sum += (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
            ++n;
        }
    return n == 0 ? std::numeric_limits<double>::infinity()
                  : std::sqrt(sum / static_cast<double>(n));
}

/// Least-squares quadratic fit y = a t^2 + b t + c over t = 0..n-1, solved
/// with raw power sums in long double (uncentered, unlike the library).
inline double quadfit_coefficient(const std::vector<double>& y) {
    const size_t n = y.size();
    long double s0 = static_cast<long double>(n), s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    long double sy = 0, sty = 0, st2y = 0;
    for (size_t t = 0; t < n; ++t) {
        const long double td = static_cast<long double>(t);
        s1 += td;
        s2 += td * td;
        s3 += td * td * td;
        s4 += td * td * td * td;
        sy += y[t];
        sty += td * y[t];
        st2y += td * td * y[t];
    }
    // Cramer's rule on the 3x3 normal equations, solved for the t^2 term.
    const long double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s2 * s3) +
                            s2 * (s1 * s3 - s2 * s2);
    const long double det_a = s0 * (s2 * st2y - s3 * sty) - s1 * (s1 * st2y - s3 * sy) +
                              s2 * (s1 * sty - s2 * sy);
    if (det == 0) return 0.0;
    return static_cast<double>(det_a / det);
}

/// Max per-frame center displacement of any object, by direct scan.
inline double max_step_displacement(const sv::TrajectoryCandidate& candidate) {
    double worst = 0.0;
    for (size_t t = 0; t + 1 < candidate.frames.size(); ++t)
        for (const auto& [id, box] : candidate.frames[t]) {
            auto it = candidate.frames[t + 1].find(id);
            if (it == candidate.frames[t + 1].end()) continue;
            const double dx = (it->second.x_min + it->second.x_max) / 2.0 -
                              (box.x_min + box.x_max) / 2.0;
            const double dy = (it->second.y_min + it->second.y_max) / 2.0 -
                              (box.y_min + box.y_max) / 2.0;
            worst = std::max(worst, std::sqrt(dx * dx + dy * dy));
        }
    return worst;
}

/// Per-pixel reference compositor: nearest-neighbor paste of an RGBA sprite
/// scaled to the box (only exercised at scale 1 in tests), source-over.
inline sv::Image reference_composite(const sv::Image& background, const sv::Image& sprite,
                                     const sv::BBox& box) {
    sv::Image out = background;
    const int px0 = static_cast<int>(std::floor(box.x_min * out.width + 0.5));
    const int py0 = static_cast<int>(std::floor(box.y_min * out.height + 0.5));
    const int px1 = static_cast<int>(std::floor(box.x_max * out.width + 0.5));
    const int py1 = static_cast<int>(std::floor(box.y_max * out.height + 0.5));
    for (int y = py0; y < py1; ++y) {
        if (y < 0 || y >= out.height) continue;
        for (int x = px0; x < px1; ++x) {
            if (x < 0 || x >= out.width) continue;
            const int sx = x - px0, sy = y - py0;
            if (sx >= sprite.width || sy >= sprite.height) continue;
            const int a = sprite.at(sx, sy, 3);
            for (int c = 0; c < 3; ++c) {
                const int blended = sprite.at(sx, sy, c) * a + out.at(x, y, c) * (255 - a);
                out.at(x, y, c) = static_cast<uint8_t>((2 * blended + 255) / 510);
            }
        }
    }
    return out;
}

/// Closed-form resample of a uniform linear segment sweep.
inline std::vector<sv::Vec2> resample_line(const sv::Vec2& from, const sv::Vec2& to, int count) {
    std::vector<sv::Vec2> out;
    for (int j = 0; j < count; ++j) {
        const double u = count > 1 ? static_cast<double>(j) / (count - 1) : 0.0;
        out.push_back({from.x + (to.x - from.x) * u, from.y + (to.y - from.y) * u});
    }
    return out;
}

}  // namespace oracle
