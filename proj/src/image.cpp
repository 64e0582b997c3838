#include "sv/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>

#include "sv/error.hpp"

namespace sv {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp, png_const_charp msg) {
    throw Error(ErrorCode::IoError, std::string("png: ") + msg);
}

void png_warn(png_structp, png_const_charp) {}

}  // namespace

Image read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw Error(ErrorCode::MissingAsset, path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
    if (!png) throw Error(ErrorCode::IoError, "png_create_read_struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorCode::IoError, "png_create_info_struct");
    }

    Image image;
    try {
        png_init_io(png, file.get());
        png_read_info(png, info);

        png_uint_32 width = 0, height = 0;
        int bit_depth = 0, color_type = 0;
        png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr,
                     nullptr);

        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
            png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (bit_depth == 16) png_set_strip_16(png);
        png_read_update_info(png, info);

        image.width = static_cast<int>(width);
        image.height = static_cast<int>(height);
        image.channels = png_get_channels(png, info);
        image.data.resize(static_cast<size_t>(image.width) * image.height * image.channels);

        std::vector<png_bytep> rows(height);
        const size_t stride = static_cast<size_t>(image.width) * image.channels;
        for (png_uint_32 y = 0; y < height; ++y) rows[y] = image.data.data() + y * stride;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

std::vector<uint8_t> encode_png(const Image& image) {
    if (image.empty()) throw Error(ErrorCode::IoError, "encode_png: empty image");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
    if (!png) throw Error(ErrorCode::IoError, "png_create_write_struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorCode::IoError, "png_create_info_struct");
    }

    int color_type = 0;
    switch (image.channels) {
        case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
        case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
        case 3: color_type = PNG_COLOR_TYPE_RGB; break;
        case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
        default:
            png_destroy_write_struct(&png, &info);
            throw Error(ErrorCode::IoError, "encode_png: unsupported channel count");
    }

    std::vector<uint8_t> bytes;
    try {
        png_set_write_fn(png, &bytes, append_bytes, flush_noop);
        // Fixed settings keep the byte stream deterministic for equal pixels.
        png_set_compression_level(png, 6);
        png_set_filter(png, 0, PNG_FILTER_SUB);
        png_set_IHDR(png, info, image.width, image.height, 8, color_type, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<png_const_bytep> rows(image.height);
        const size_t stride = static_cast<size_t>(image.width) * image.channels;
        for (int y = 0; y < image.height; ++y) rows[y] = image.data.data() + y * stride;
        png_write_image(png, const_cast<png_bytepp>(rows.data()));
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return bytes;
}

void write_png(const Image& image, const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = encode_png(image);
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw Error(ErrorCode::IoError, "cannot open for write: " + path.string());
    if (std::fwrite(bytes.data(), 1, bytes.size(), file.get()) != bytes.size())
        throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

Image to_rgb(const Image& image) {
    if (image.channels == 3) return image;
    Image out(image.width, image.height, 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const int src = image.channels >= 3 ? c : 0;
                out.at(x, y, c) = image.at(x, y, src);
            }
        }
    }
    return out;
}

Image to_gray(const Image& image) {
    if (image.channels == 1) return image;
    Image out(image.width, image.height, 1);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) out.at(x, y, 0) = image.at(x, y, 0);
    return out;
}

MaskIntegral::MaskIntegral(const Image& mask)
    : width_(mask.width), height_(mask.height),
      table_(static_cast<size_t>(mask.width + 1) * (mask.height + 1), 0) {
    const int w = width_, h = height_;
    for (int y = 0; y < h; ++y) {
        long long row = 0;
        for (int x = 0; x < w; ++x) {
            row += mask.at(x, y, 0) != 0 ? 1 : 0;
            table_[static_cast<size_t>(y + 1) * (w + 1) + (x + 1)] =
                table_[static_cast<size_t>(y) * (w + 1) + (x + 1)] + row;
        }
    }
}

long long MaskIntegral::total() const {
    if (table_.empty()) return 0;
    return table_.back();
}

long long MaskIntegral::sum(int x0, int y0, int x1, int y1) const {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, width_);
    y1 = std::min(y1, height_);
    if (x1 <= x0 || y1 <= y0) return 0;
    const int w = width_ + 1;
    auto cell = [&](int x, int y) { return table_[static_cast<size_t>(y) * w + x]; };
    return cell(x1, y1) - cell(x0, y1) - cell(x1, y0) + cell(x0, y0);
}

}  // namespace sv
