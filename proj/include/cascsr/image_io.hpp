#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <png.h>

#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"

namespace cascsr {

// Images are stored 8-bit on disk and mapped linearly to [0,1] in memory.
// Supported formats: PNG (gray / RGB), PGM (P5), PPM (P6).

namespace io_detail {

inline std::uint8_t to_byte(double v) {
    if (!std::isfinite(v)) throw NumericError("image save: non-finite pixel value");
    const double s = std::clamp(v, 0.0, 1.0) * 255.0;
    return static_cast<std::uint8_t>(std::lround(s));
}

inline bool has_suffix(const std::string& path, const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    if (path.size() < n) return false;
    std::string tail = path.substr(path.size() - n);
    for (char& c : tail) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return tail == suffix;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Reads a PNG into 8-bit interleaved rows; channels is 1 or 3 after the
// requested transformations (palette expanded, alpha stripped, 16->8).
inline void read_png_bytes(const std::string& path, std::vector<std::uint8_t>& bytes, int& height,
                           int& width, int& channels) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    png_read_update_info(png, info);

    height = static_cast<int>(png_get_image_height(png, info));
    width = static_cast<int>(png_get_image_width(png, info));
    channels = static_cast<int>(png_get_channels(png, info));
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG channel count in " + path);
    }

    bytes.resize(static_cast<std::size_t>(height) * width * channels);
    std::vector<png_bytep> rows(height);
    for (int i = 0; i < height; ++i)
        rows[i] = bytes.data() + static_cast<std::size_t>(i) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

inline void write_png_bytes(const std::string& path, const std::uint8_t* bytes, int height, int width,
                            int channels) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(height);
    for (int i = 0; i < height; ++i)
        rows[i] = const_cast<png_bytep>(bytes + static_cast<std::size_t>(i) * width * channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// PNM header token reader skipping whitespace and '#' comments.
inline int read_pnm_int(std::istream& in) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        c = in.get();
    }
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw IoError("malformed PNM header");
    return value;
}

inline void read_pnm_bytes(const std::string& path, std::vector<std::uint8_t>& bytes, int& height,
                           int& width, int& channels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw IoError("unsupported PNM magic in " + path);
    channels = magic[1] == '5' ? 1 : 3;
    width = read_pnm_int(in);
    height = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (maxval != 255) throw IoError("only 8-bit PNM supported: " + path);
    bytes.resize(static_cast<std::size_t>(height) * width * channels);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError("truncated PNM data in " + path);
}

inline void write_pnm_bytes(const std::string& path, const std::uint8_t* bytes, int height, int width,
                            int channels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << (channels == 1 ? "P5\n" : "P6\n") << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes),
              static_cast<std::streamsize>(static_cast<std::size_t>(height) * width * channels));
    if (!out) throw IoError("failed writing " + path);
}

inline bool is_png(const std::string& path) { return has_suffix(path, ".png"); }
inline bool is_pnm(const std::string& path) {
    return has_suffix(path, ".pgm") || has_suffix(path, ".ppm") || has_suffix(path, ".pnm");
}

inline void read_any_bytes(const std::string& path, std::vector<std::uint8_t>& bytes, int& height,
                           int& width, int& channels) {
    if (is_png(path))
        read_png_bytes(path, bytes, height, width, channels);
    else if (is_pnm(path))
        read_pnm_bytes(path, bytes, height, width, channels);
    else
        throw IoError("unsupported image format: " + path);
}

}  // namespace io_detail

// Loads as grayscale; RGB inputs are reduced to BT.601 luminance.
inline ImagePlane load_image_gray(const std::string& path) {
    std::vector<std::uint8_t> bytes;
    int h = 0, w = 0, c = 0;
    io_detail::read_any_bytes(path, bytes, h, w, c);
    ImagePlane img(h, w);
    if (c == 1) {
        for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = bytes[i] / 255.0;
    } else {
        for (std::size_t i = 0; i < img.size(); ++i) {
            const double r = bytes[3 * i] / 255.0;
            const double g = bytes[3 * i + 1] / 255.0;
            const double b = bytes[3 * i + 2] / 255.0;
            img.data()[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        }
    }
    return img;
}

// Loads RGB; grayscale inputs are replicated across channels.
inline RgbImage load_image_rgb(const std::string& path) {
    std::vector<std::uint8_t> bytes;
    int h = 0, w = 0, c = 0;
    io_detail::read_any_bytes(path, bytes, h, w, c);
    RgbImage img{ImagePlane(h, w), ImagePlane(h, w), ImagePlane(h, w)};
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        if (c == 1) {
            const double v = bytes[i] / 255.0;
            img.r.data()[i] = img.g.data()[i] = img.b.data()[i] = v;
        } else {
            img.r.data()[i] = bytes[3 * i] / 255.0;
            img.g.data()[i] = bytes[3 * i + 1] / 255.0;
            img.b.data()[i] = bytes[3 * i + 2] / 255.0;
        }
    }
    return img;
}

inline void save_image_gray(const std::string& path, const ImagePlane& img) {
    std::vector<std::uint8_t> bytes(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = io_detail::to_byte(img.data()[i]);
    if (io_detail::is_png(path))
        io_detail::write_png_bytes(path, bytes.data(), img.height(), img.width(), 1);
    else if (io_detail::is_pnm(path))
        io_detail::write_pnm_bytes(path, bytes.data(), img.height(), img.width(), 1);
    else
        throw IoError("unsupported image format: " + path);
}

inline void save_image_rgb(const std::string& path, const RgbImage& img) {
    if (!img.r.same_shape(img.g) || !img.r.same_shape(img.b))
        throw ParameterError("save_image_rgb: channel shape mismatch");
    std::vector<std::uint8_t> bytes(img.r.size() * 3);
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        bytes[3 * i] = io_detail::to_byte(img.r.data()[i]);
        bytes[3 * i + 1] = io_detail::to_byte(img.g.data()[i]);
        bytes[3 * i + 2] = io_detail::to_byte(img.b.data()[i]);
    }
    if (io_detail::is_png(path))
        io_detail::write_png_bytes(path, bytes.data(), img.r.height(), img.r.width(), 3);
    else if (io_detail::is_pnm(path))
        io_detail::write_pnm_bytes(path, bytes.data(), img.r.height(), img.r.width(), 3);
    else
        throw IoError("unsupported image format: " + path);
}

}  // namespace cascsr
