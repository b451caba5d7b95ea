#include "sad/image_io.hpp"

#include "sad/error.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace sad::io {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    return f;
}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw IoError(std::string("png: ") + msg); }
void png_warn(png_structp, png_const_charp) {}

} // namespace

void write_png(const std::filesystem::path& path, const RawImage& image) {
    if (image.channels != 1 && image.channels != 3)
        throw IoError("png: unsupported channel count");
    if (image.bit_depth != 8 && image.bit_depth != 16) throw IoError("png: unsupported bit depth");
    const std::size_t expected = std::size_t(image.width) * image.height * image.channels;
    if (image.samples.size() != expected) throw IoError("png: sample buffer size mismatch");

    auto f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& p;
        png_infop& i;
        ~Guard() { png_destroy_write_struct(&p, &i); }
    } guard{png, info};

    png_init_io(png, f.get());
    png_set_IHDR(png, info, image.width, image.height, image.bit_depth,
                 image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const std::size_t row_samples = std::size_t(image.width) * image.channels;
    const std::size_t bytes_per_sample = image.bit_depth / 8;
    std::vector<png_byte> row(row_samples * bytes_per_sample);
    for (int y = 0; y < image.height; ++y) {
        const std::uint16_t* src = image.samples.data() + y * row_samples;
        for (std::size_t i = 0; i < row_samples; ++i) {
            if (bytes_per_sample == 1) {
                row[i] = static_cast<png_byte>(src[i]);
            } else { // PNG stores 16-bit samples big-endian
                row[2 * i] = static_cast<png_byte>(src[i] >> 8);
                row[2 * i + 1] = static_cast<png_byte>(src[i] & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
}

RawImage read_png(const std::filesystem::path& path) {
    auto f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& p;
        png_infop& i;
        ~Guard() { png_destroy_read_struct(&p, &i, nullptr); }
    } guard{png, info};

    png_init_io(png, f.get());
    png_read_info(png, info);

    RawImage out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.bit_depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_RGB) {
        out.channels = 3;
    } else if (color == PNG_COLOR_TYPE_GRAY) {
        out.channels = 1;
    } else {
        throw IoError("png: '" + path.string() + "' is neither RGB nor grayscale");
    }
    if (out.bit_depth != 8 && out.bit_depth != 16)
        throw IoError("png: '" + path.string() + "' has unsupported bit depth");

    const std::size_t row_samples = std::size_t(out.width) * out.channels;
    const std::size_t bytes_per_sample = out.bit_depth / 8;
    std::vector<png_byte> row(row_samples * bytes_per_sample);
    out.samples.resize(row_samples * out.height);
    for (int y = 0; y < out.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        std::uint16_t* dst = out.samples.data() + y * row_samples;
        for (std::size_t i = 0; i < row_samples; ++i) {
            dst[i] = bytes_per_sample == 1
                         ? row[i]
                         : static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1]);
        }
    }
    png_read_end(png, nullptr);
    return out;
}

} // namespace sad::io
