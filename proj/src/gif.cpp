#include <cstdint>
#include <fstream>
#include <unordered_map>
#include <vector>

#include "sv/error.hpp"
#include "sv/image.hpp"

namespace sv {

namespace {

// 6x7x6 uniform RGB cube, 252 used entries.
constexpr int kRLevels = 6, kGLevels = 7, kBLevels = 6;

uint8_t quantize_channel(uint8_t v, int levels) {
    return static_cast<uint8_t>((v * (levels - 1) + 127) / 255);
}

uint8_t palette_index(uint8_t r, uint8_t g, uint8_t b) {
    return static_cast<uint8_t>(quantize_channel(r, kRLevels) * kGLevels * kBLevels +
                                quantize_channel(g, kGLevels) * kBLevels +
                                quantize_channel(b, kBLevels));
}

class BitPacker {
public:
    void put(int code, int width) {
        accum_ |= static_cast<uint32_t>(code) << bits_;
        bits_ += width;
        while (bits_ >= 8) {
            bytes_.push_back(static_cast<uint8_t>(accum_ & 0xff));
            accum_ >>= 8;
            bits_ -= 8;
        }
    }
    void flush() {
        if (bits_ > 0) bytes_.push_back(static_cast<uint8_t>(accum_ & 0xff));
        accum_ = 0;
        bits_ = 0;
    }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
    uint32_t accum_ = 0;
    int bits_ = 0;
};

std::vector<uint8_t> lzw_compress(const std::vector<uint8_t>& indices) {
    constexpr int kMinCodeSize = 8;
    constexpr int kClear = 1 << kMinCodeSize;
    constexpr int kEoi = kClear + 1;

    BitPacker packer;
    std::unordered_map<uint32_t, int> dict;
    int next_code = kEoi + 1;
    int width = kMinCodeSize + 1;

    packer.put(kClear, width);
    if (indices.empty()) {
        packer.put(kEoi, width);
        packer.flush();
        return packer.bytes();
    }

    int prefix = indices[0];
    for (size_t i = 1; i < indices.size(); ++i) {
        const uint32_t key = (static_cast<uint32_t>(prefix) << 8) | indices[i];
        auto it = dict.find(key);
        if (it != dict.end()) {
            prefix = it->second;
            continue;
        }
        packer.put(prefix, width);
        dict.emplace(key, next_code);
        if (next_code == (1 << width) && width < 12) ++width;
        ++next_code;
        if (next_code >= 4096) {
            packer.put(kClear, width);
            dict.clear();
            next_code = kEoi + 1;
            width = kMinCodeSize + 1;
        }
        prefix = indices[i];
    }
    packer.put(prefix, width);
    packer.put(kEoi, width);
    packer.flush();
    return packer.bytes();
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

}  // namespace

void write_gif(const std::vector<Image>& frames, double fps,
               const std::filesystem::path& path) {
    if (frames.empty()) throw Error(ErrorCode::IoError, "write_gif: no frames");
    const int w = frames.front().width;
    const int h = frames.front().height;
    const int delay_cs = round_half_up(100.0 / fps);

    std::vector<uint8_t> out;
    out.insert(out.end(), {'G', 'I', 'F', '8', '9', 'a'});
    put_u16(out, static_cast<uint16_t>(w));
    put_u16(out, static_cast<uint16_t>(h));
    out.push_back(0xF7);  // global color table, 256 entries, 8-bit color
    out.push_back(0);     // background color index
    out.push_back(0);     // square pixels

    for (int r = 0; r < kRLevels; ++r)
        for (int g = 0; g < kGLevels; ++g)
            for (int b = 0; b < kBLevels; ++b) {
                out.push_back(static_cast<uint8_t>(r * 255 / (kRLevels - 1)));
                out.push_back(static_cast<uint8_t>(g * 255 / (kGLevels - 1)));
                out.push_back(static_cast<uint8_t>(b * 255 / (kBLevels - 1)));
            }
    for (int i = kRLevels * kGLevels * kBLevels; i < 256; ++i)
        out.insert(out.end(), {0, 0, 0});

    // Netscape application extension: loop forever.
    out.insert(out.end(), {0x21, 0xFF, 0x0B});
    const char* netscape = "NETSCAPE2.0";
    out.insert(out.end(), netscape, netscape + 11);
    out.insert(out.end(), {0x03, 0x01, 0x00, 0x00, 0x00});

    for (const Image& frame : frames) {
        if (frame.width != w || frame.height != h)
            throw Error(ErrorCode::IoError, "write_gif: frame dimensions differ");

        out.insert(out.end(), {0x21, 0xF9, 0x04, 0x04});  // GCE, keep previous frame
        put_u16(out, static_cast<uint16_t>(delay_cs));
        out.insert(out.end(), {0x00, 0x00});  // no transparency; terminator

        out.push_back(0x2C);  // image descriptor
        put_u16(out, 0);
        put_u16(out, 0);
        put_u16(out, static_cast<uint16_t>(w));
        put_u16(out, static_cast<uint16_t>(h));
        out.push_back(0x00);  // no local color table

        std::vector<uint8_t> indices(static_cast<size_t>(w) * h);
        const Image rgb = to_rgb(frame);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                indices[static_cast<size_t>(y) * w + x] =
                    palette_index(rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2));

        const std::vector<uint8_t> compressed = lzw_compress(indices);
        out.push_back(8);  // LZW minimum code size
        for (size_t off = 0; off < compressed.size(); off += 255) {
            const size_t n = std::min<size_t>(255, compressed.size() - off);
            out.push_back(static_cast<uint8_t>(n));
            out.insert(out.end(), compressed.begin() + off, compressed.begin() + off + n);
        }
        out.push_back(0x00);  // block terminator
    }
    out.push_back(0x3B);  // trailer

    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::IoError, "cannot open for write: " + path.string());
    file.write(reinterpret_cast<const char*>(out.data()),
               static_cast<std::streamsize>(out.size()));
    if (!file) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace sv
