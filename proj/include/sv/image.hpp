#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sv/geometry.hpp"

namespace sv {

/// Interleaved 8-bit raster. channels: 1 = gray/mask, 3 = RGB, 4 = RGBA.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<uint8_t> data;

    Image() = default;
    Image(int w, int h, int c, uint8_t fill = 0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    bool empty() const { return data.empty(); }

    uint8_t& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    uint8_t at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const Image& o) const = default;
};

/// Decode a PNG file. 16-bit and palette images are expanded to 8-bit;
/// the channel count follows the file (gray 1, gray+alpha 2, RGB 3, RGBA 4).
Image read_png(const std::filesystem::path& path);

/// Encode losslessly. Deterministic: identical pixels give identical bytes.
void write_png(const Image& image, const std::filesystem::path& path);

/// In-memory PNG encode with the same settings as write_png.
std::vector<uint8_t> encode_png(const Image& image);

Image to_rgb(const Image& image);   // drops alpha / expands gray
Image to_gray(const Image& image);  // takes channel 0 of multi-channel input

/// GIF89a writer for preview output; 252-color uniform palette,
/// per-frame delay of round(100/fps) centiseconds, infinite loop.
void write_gif(const std::vector<Image>& frames, double fps,
               const std::filesystem::path& path);

/// Prefix sums of nonzero mask pixels; overlap counts for any pixel
/// rectangle in O(1). sum(x0,y0,x1,y1) counts over [x0,x1) x [y0,y1).
class MaskIntegral {
public:
    MaskIntegral() = default;
    explicit MaskIntegral(const Image& mask);

    long long total() const;
    long long sum(int x0, int y0, int x1, int y1) const;
    long long sum(const PixelRect& r) const { return sum(r.x0, r.y0, r.x1, r.y1); }

    int width() const { return width_; }
    int height() const { return height_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<long long> table_;  // (width+1) x (height+1)
};

}  // namespace sv
