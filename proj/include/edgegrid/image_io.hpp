#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "edgegrid/errors.hpp"
#include "edgegrid/image.hpp"

namespace edgegrid {

namespace detail {

// Reads the next PGM header token, skipping whitespace and '#' comments.
inline std::string pnm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

inline int pnm_int(std::istream& in, const char* what) {
    const std::string tok = pnm_token(in);
    if (tok.empty()) throw FormatError(std::string("truncated PGM header: missing ") + what);
    for (char ch : tok)
        if (ch < '0' || ch > '9') throw FormatError(std::string("bad PGM ") + what + ": '" + tok + "'");
    return std::stoi(tok);
}

}  // namespace detail

inline GrayFrame load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const std::string magic = detail::pnm_token(in);
    if (magic != "P5") throw FormatError("'" + path.string() + "' is not binary PGM (P5)");
    const int width = detail::pnm_int(in, "width");
    const int height = detail::pnm_int(in, "height");
    const int maxval = detail::pnm_int(in, "maxval");
    if (width <= 0 || height <= 0) throw FormatError("'" + path.string() + "' has zero dimension");
    if (maxval <= 0 || maxval > 255)
        throw FormatError("'" + path.string() + "': only 8-bit PGM supported (maxval " +
                          std::to_string(maxval) + ")");
    // The header terminates with exactly one whitespace byte, already consumed
    // by the token scanner.
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw FormatError("'" + path.string() + "' truncated pixel data");

    GrayFrame frame(width, height);
    const float scale = 1.0f / static_cast<float>(maxval);
    for (std::size_t i = 0; i < raw.size(); ++i) frame.data[i] = static_cast<float>(raw[i]) * scale;
    return frame;
}

inline void save_pgm(const GrayFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    std::vector<std::uint8_t> raw(frame.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const float v = std::min(1.0f, std::max(0.0f, frame.data[i]));
        raw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

/// Binary edge maps dump as PGM: edge=255, non-edge=0.
inline void save_mask_pgm(int width, int height, const std::vector<std::uint8_t>& mask,
                          const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "P5\n" << width << " " << height << "\n255\n";
    std::vector<std::uint8_t> raw(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) raw[i] = mask[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

inline GrayFrame load_png(const std::filesystem::path& path) {
    std::FILE* fp = std::fopen(path.string().c_str(), "rb");
    if (!fp) throw IoError("cannot open '" + path.string() + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw FormatError("'" + path.string() + "' is not a decodable PNG");
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    // Normalize to 8-bit gray or RGB.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = static_cast<int>(png_get_channels(png, info));
    if (width <= 0 || height <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw FormatError("'" + path.string() + "' has zero dimension");
    }
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw FormatError("'" + path.string() + "': unsupported PNG layout (" +
                          std::to_string(channels) + " channels)");
    }

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * channels);
    std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y)
        row_ptrs[static_cast<std::size_t>(y)] = raw.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, row_ptrs.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    GrayFrame frame(width, height);
    if (channels == 1) {
        for (std::size_t i = 0; i < frame.size(); ++i)
            frame.data[i] = static_cast<float>(raw[i]) / 255.0f;
    } else {
        for (std::size_t i = 0; i < frame.size(); ++i) {
            const std::uint8_t* px = raw.data() + 3 * i;
            frame.data[i] = static_cast<float>(luma601(px[0], px[1], px[2]));
        }
    }
    return frame;
}

/// Dispatch by extension. PGM (P5, 8-bit) is the native format; PNG covers
/// 8-bit gray and RGB sources (RGB goes through BT.601 luma).
inline GrayFrame load_frame(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: '" + path.string() + "'");
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") return load_pgm(path);
    if (ext == ".png") return load_png(path);
    throw FormatError("unsupported raster format: '" + path.string() + "'");
}

inline bool is_frame_file(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".png";
}

/// A sequence is a directory of frames, ordered lexicographically by filename.
inline FrameSequence load_sequence(const std::filesystem::path& dir, double source_fps = 24.0) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

    FrameSequence seq;
    seq.id = dir.filename().string();
    seq.source_fps = source_fps;
    seq.frames.reserve(files.size());
    for (const auto& f : files) seq.frames.push_back(load_frame(f));
    seq.validate();
    return seq;
}

/// Loads every sequence directory under root, sorted by directory name.
inline std::vector<FrameSequence> load_corpus(const std::filesystem::path& root, double source_fps = 24.0) {
    if (!std::filesystem::is_directory(root)) throw IoError("not a directory: '" + root.string() + "'");
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root))
        if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    std::vector<FrameSequence> out;
    out.reserve(dirs.size());
    for (const auto& d : dirs) out.push_back(load_sequence(d, source_fps));
    return out;
}

}  // namespace edgegrid
