#include <catch2/catch_amalgamated.hpp>

#include <png.h>

#include <cstdio>
#include <vector>

#include "edgegrid/image.hpp"
#include "edgegrid/image_io.hpp"
#include "test_util.hpp"

using namespace edgegrid;

namespace {

// Minimal PNG writer for fixtures; channels = 1 (gray) or 3 (RGB), 8-bit.
void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<unsigned char>& pixels) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(&pixels[static_cast<std::size_t>(y) * width * channels]);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

TEST_CASE("frames reject non-positive dimensions", "[imaging]") {
    CHECK_THROWS_AS(GrayFrame(0, 4), DimensionError);
    CHECK_THROWS_AS(GrayFrame(4, -1), DimensionError);
    CHECK_NOTHROW(GrayFrame(1, 1));
}

TEST_CASE("clamped access repeats border pixels", "[imaging]") {
    GrayFrame f(3, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) f.at(x, y) = static_cast<float>(y * 3 + x);
    CHECK(f.at_clamped(-5, 0) == f.at(0, 0));
    CHECK(f.at_clamped(7, 1) == f.at(2, 1));
    CHECK(f.at_clamped(1, -2) == f.at(1, 0));
    CHECK(f.at_clamped(1, 9) == f.at(1, 1));
}

TEST_CASE("luma conversion weights channels by BT.601", "[imaging]") {
    CHECK_THAT(luma601(255, 0, 0), Catch::Matchers::WithinAbs(0.299, 1e-12));
    CHECK_THAT(luma601(0, 255, 0), Catch::Matchers::WithinAbs(0.587, 1e-12));
    CHECK_THAT(luma601(0, 0, 255), Catch::Matchers::WithinAbs(0.114, 1e-12));
    CHECK_THAT(luma601(255, 255, 255), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("downsampling keeps frames 0, k, 2k and divides the rate", "[imaging]") {
    FrameSequence seq;
    seq.id = "s";
    seq.source_fps = 24.0;
    for (int i = 0; i < 7; ++i) {
        GrayFrame f(2, 2);
        f.at(0, 0) = static_cast<float>(i);
        seq.frames.push_back(f);
    }
    const FrameSequence kept = downsample(seq, 3);
    REQUIRE(kept.frames.size() == 3);
    CHECK(kept.frames[0].at(0, 0) == 0.0f);
    CHECK(kept.frames[1].at(0, 0) == 3.0f);
    CHECK(kept.frames[2].at(0, 0) == 6.0f);
    CHECK(kept.source_fps == 8.0);
    CHECK_THROWS_AS(downsample(seq, 0), DimensionError);
}

TEST_CASE("windowing drops trailing partials and honors stride", "[imaging]") {
    FrameSequence seq;
    seq.id = "s";
    for (int i = 0; i < 10; ++i) seq.frames.emplace_back(2, 2);

    const auto full = windows(seq, 8, 1);
    REQUIRE(full.size() == 3);
    CHECK(full[0].start_index == 0);
    CHECK(full[2].start_index == 2);
    CHECK(full[0].frames.size() == 8);
    CHECK(full[0].sequence_id == "s");

    const auto strided = windows(seq, 4, 3);
    REQUIRE(strided.size() == 3);
    CHECK(strided[2].start_index == 6);

    CHECK(windows(seq, 11, 1).empty());
    CHECK_THROWS_AS(windows(seq, 1, 1), DimensionError);
    CHECK_THROWS_AS(windows(seq, 4, 0), DimensionError);
}

TEST_CASE("PGM round-trip preserves 8-bit levels", "[imaging]") {
    testutil::TempDir tmp;
    GrayFrame f(5, 3);
    for (std::size_t i = 0; i < f.data.size(); ++i)
        f.data[i] = static_cast<float>(i) / static_cast<float>(f.data.size() - 1);
    save_pgm(f, tmp / "a.pgm");
    const GrayFrame back = load_pgm(tmp / "a.pgm");
    REQUIRE(back.width == 5);
    REQUIRE(back.height == 3);
    for (std::size_t i = 0; i < f.data.size(); ++i)
        CHECK_THAT(back.data[i], Catch::Matchers::WithinAbs(f.data[i], 0.51 / 255.0));
}

TEST_CASE("PGM parser accepts comments and rejects malformed files", "[imaging]") {
    testutil::TempDir tmp;
    testutil::spit(tmp / "ok.pgm", std::string("P5 # magic\n# a comment\n2 1\n255\nab"));
    const GrayFrame f = load_pgm(tmp / "ok.pgm");
    CHECK(f.width == 2);
    CHECK_THAT(f.at(0, 0), Catch::Matchers::WithinAbs(double('a') / 255.0, 1e-6));

    testutil::spit(tmp / "bad_magic.pgm", "P6\n2 1\n255\nab");
    CHECK_THROWS_AS(load_pgm(tmp / "bad_magic.pgm"), FormatError);
    testutil::spit(tmp / "truncated.pgm", "P5\n4 4\n255\nab");
    CHECK_THROWS_AS(load_pgm(tmp / "truncated.pgm"), FormatError);
    testutil::spit(tmp / "zero.pgm", "P5\n0 1\n255\n");
    CHECK_THROWS_AS(load_pgm(tmp / "zero.pgm"), FormatError);
    CHECK_THROWS_AS(load_pgm(tmp / "missing.pgm"), IoError);
}

TEST_CASE("gray and RGB PNGs load as luma", "[imaging]") {
    testutil::TempDir tmp;
    write_png(tmp / "gray.png", 2, 1, 1, {0, 255});
    const GrayFrame gray = load_frame(tmp / "gray.png");
    CHECK_THAT(gray.at(0, 0), Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK_THAT(gray.at(1, 0), Catch::Matchers::WithinAbs(1.0, 1e-6));

    write_png(tmp / "rgb.png", 1, 1, 3, {255, 0, 0});
    const GrayFrame rgb = load_frame(tmp / "rgb.png");
    CHECK_THAT(rgb.at(0, 0), Catch::Matchers::WithinAbs(0.299, 1e-3));

    testutil::spit(tmp / "x.bmp", "BM junk");
    CHECK_THROWS_AS(load_frame(tmp / "x.bmp"), FormatError);
}

TEST_CASE("sequences load frames in lexicographic filename order", "[imaging]") {
    testutil::TempDir tmp;
    const auto dir = tmp / "seq0";
    std::filesystem::create_directories(dir);
    for (int i : {2, 0, 1}) {
        GrayFrame f(2, 2);
        f.at(0, 0) = static_cast<float>(i) / 255.0f;
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05d.pgm", i);
        save_pgm(f, dir / name);
    }
    const FrameSequence seq = load_sequence(dir);
    CHECK(seq.id == "seq0");
    REQUIRE(seq.frames.size() == 3);
    CHECK(seq.frames[0].at(0, 0) <= seq.frames[1].at(0, 0));
    CHECK(seq.frames[1].at(0, 0) <= seq.frames[2].at(0, 0));

    const auto corpus = load_corpus(tmp.path());
    REQUIRE(corpus.size() == 1);
    CHECK(corpus[0].id == "seq0");
}
