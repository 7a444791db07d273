#include "mealgen/image_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <png.h>

#include "mealgen/error.hpp"

namespace mealgen {

namespace {

[[noreturn]] void io_fail(const std::string& msg, const std::string& path) {
    Error e(Error::Kind::Io, msg + ": " + path);
    e.path = path;
    throw e;
}

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

// libpng reports errors through longjmp; wrap each call site with setjmp and
// convert to exceptions outside the jump scope.

void write_png_impl(const std::string& path, int width, int height, int bit_depth,
                    int color_type, std::vector<png_bytep>& rows) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) io_fail("cannot open for writing", path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail("png_create_write_struct failed", path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        io_fail("png_create_info_struct failed", path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        io_fail("PNG encode failed", path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);  // in-memory uint16 is host (little) endian
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

void read_png_impl(const std::string& path, int expect_color_type, int expect_bit_depth,
                   int& width, int& height, std::vector<std::vector<png_byte>>& rows) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) io_fail("cannot open for reading", path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        io_fail("not a PNG file", path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) io_fail("png_create_read_struct failed", path);
    r.info = png_create_info_struct(r.png);
    if (!r.info) io_fail("png_create_info_struct failed", path);
    if (setjmp(png_jmpbuf(r.png))) io_fail("PNG decode failed", path);

    png_init_io(r.png, fp.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    width = static_cast<int>(png_get_image_width(r.png, r.info));
    height = static_cast<int>(png_get_image_height(r.png, r.info));
    const int color_type = png_get_color_type(r.png, r.info);
    const int bit_depth = png_get_bit_depth(r.png, r.info);
    if (color_type != expect_color_type || bit_depth != expect_bit_depth)
        io_fail("unexpected PNG layout (color type " + std::to_string(color_type) +
                    ", bit depth " + std::to_string(bit_depth) + ")",
                path);
    if (bit_depth == 16) png_set_swap(r.png);

    const size_t row_bytes = png_get_rowbytes(r.png, r.info);
    rows.assign(static_cast<size_t>(height), std::vector<png_byte>(row_bytes));
    std::vector<png_bytep> row_ptrs(static_cast<size_t>(height));
    for (int y = 0; y < height; ++y) row_ptrs[static_cast<size_t>(y)] = rows[static_cast<size_t>(y)].data();
    png_read_image(r.png, row_ptrs.data());
    png_read_end(r.png, nullptr);
}

} // namespace

void write_png_rgb(const std::string& path, const RgbImage& img) {
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] =
            const_cast<png_bytep>(&img.data[static_cast<size_t>(y) * img.width * 3]);
    write_png_impl(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

RgbImage read_png_rgb(const std::string& path) {
    int w = 0, h = 0;
    std::vector<std::vector<png_byte>> rows;
    read_png_impl(path, PNG_COLOR_TYPE_RGB, 8, w, h, rows);
    RgbImage img(w, h);
    for (int y = 0; y < h; ++y)
        std::memcpy(&img.data[static_cast<size_t>(y) * w * 3], rows[static_cast<size_t>(y)].data(),
                    static_cast<size_t>(w) * 3);
    return img;
}

void write_png_gray16(const std::string& path, const MaskImage& img) {
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = const_cast<png_bytep>(
            reinterpret_cast<const png_byte*>(&img.data[static_cast<size_t>(y) * img.width]));
    write_png_impl(path, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

MaskImage read_png_gray16(const std::string& path) {
    int w = 0, h = 0;
    std::vector<std::vector<png_byte>> rows;
    read_png_impl(path, PNG_COLOR_TYPE_GRAY, 16, w, h, rows);
    MaskImage img(w, h);
    for (int y = 0; y < h; ++y)
        std::memcpy(&img.data[static_cast<size_t>(y) * w], rows[static_cast<size_t>(y)].data(),
                    static_cast<size_t>(w) * 2);
    return img;
}

void write_png_gray8(const std::string& path, const BinaryMask& img) {
    std::vector<png_byte> bytes(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) bytes[i] = img.data[i] ? 255 : 0;
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = &bytes[static_cast<size_t>(y) * img.width];
    write_png_impl(path, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, rows);
}

BinaryMask read_png_gray8(const std::string& path) {
    int w = 0, h = 0;
    std::vector<std::vector<png_byte>> rows;
    read_png_impl(path, PNG_COLOR_TYPE_GRAY, 8, w, h, rows);
    BinaryMask img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = rows[static_cast<size_t>(y)][static_cast<size_t>(x)] ? 1 : 0;
    return img;
}

void write_pfm(const std::string& path, const DepthMap& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail("cannot open for writing", path);
    out << "Pf\n" << img.width << " " << img.height << "\n-1.0\n";
    // PFM stores rows bottom-to-top
    for (int y = img.height - 1; y >= 0; --y)
        out.write(reinterpret_cast<const char*>(&img.data[static_cast<size_t>(y) * img.width]),
                  static_cast<std::streamsize>(sizeof(float)) * img.width);
    if (!out) io_fail("write error", path);
}

DepthMap read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail("cannot open for reading", path);

    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if (magic != "Pf" || w < 1 || h < 1)
        io_fail("not a grayscale PFM file", path);
    if (scale >= 0.0) io_fail("big-endian PFM is not supported", path);
    in.get();  // single whitespace after the scale line

    DepthMap img(w, h);
    for (int y = h - 1; y >= 0; --y)
        in.read(reinterpret_cast<char*>(&img.data[static_cast<size_t>(y) * w]),
                static_cast<std::streamsize>(sizeof(float)) * w);
    if (!in) io_fail("truncated PFM payload", path);
    return img;
}

} // namespace mealgen
