#pragma once

#include <cmath>

namespace sv {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const = default;

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 lerp(const Vec2& a, const Vec2& b, double t) {
    return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

/// Axis-aligned box in normalized image coordinates, origin top-left,
/// y increasing downward. Valid iff 0 <= min < max <= 1 on both axes.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool operator==(const BBox& o) const = default;

    bool valid() const {
        return 0.0 <= x_min && x_min < x_max && x_max <= 1.0 &&
               0.0 <= y_min && y_min < y_max && y_max <= 1.0;
    }

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }

    bool contains(const Vec2& p) const {
        return x_min <= p.x && p.x <= x_max && y_min <= p.y && p.y <= y_max;
    }
};

inline Vec2 bbox_center(const BBox& b) {
    return {(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0};
}

/// Round half-up; the single rounding rule used at every normalized->pixel boundary.
inline int round_half_up(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

/// Pixel rectangle [x0,x1) x [y0,y1) produced by rasterizing a normalized box.
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
};

inline PixelRect rasterize(const BBox& b, int image_width, int image_height) {
    return {round_half_up(b.x_min * image_width), round_half_up(b.y_min * image_height),
            round_half_up(b.x_max * image_width), round_half_up(b.y_max * image_height)};
}

}  // namespace sv
