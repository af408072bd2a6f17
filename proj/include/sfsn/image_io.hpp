#pragma once

// PNG (libpng) and uncompressed BMP decoding to luma, plus 8-bit writers.

#include <sfsn/core.hpp>

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace sfsn {

class IoError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void png_quiet_warning(png_structp, png_const_charp) {}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct PngReadState {
    const unsigned char* data;
    std::size_t size;
    std::size_t offset;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t count)
{
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->offset + count > st->size)
        png_error(png, "truncated PNG stream");
    std::memcpy(out, st->data + st->offset, count);
    st->offset += count;
}

/// Interleaved samples (1 or 3 channels) scaled to [0, 255] into luma.
inline GrayImage interleaved_to_gray(std::size_t w, std::size_t h, std::size_t channels,
                                     const std::vector<double>& samples)
{
    if (channels == 1)
        return GrayImage(w, h, samples);
    std::vector<double> r(w * h), g(w * h), b(w * h);
    for (std::size_t i = 0; i < w * h; ++i) {
        r[i] = samples[i * channels + 0];
        g[i] = samples[i * channels + 1];
        b[i] = samples[i * channels + 2];
    }
    return to_gray(GrayImage(w, h, std::move(r)), GrayImage(w, h, std::move(g)), GrayImage(w, h, std::move(b)));
}

inline GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::string& name)
{
    PngReadState state{bytes.data(), bytes.size(), 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_quiet_warning);
    if (!png)
        throw IoError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng initialisation failed");
    }
    // No object with a destructor may be created between setjmp and the last libpng call.
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("'" + name + "' is not a decodable PNG");
    }
    png_set_read_fn(png, &state, png_read_from_memory);
    png_read_png(png, info, PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_STRIP_ALPHA, nullptr);

    const std::size_t w = png_get_image_width(png, info);
    const std::size_t h = png_get_image_height(png, info);
    const std::size_t channels = png_get_channels(png, info);
    const int depth = png_get_bit_depth(png, info);
    png_bytepp rows = png_get_rows(png, info);

    std::vector<double> samples;
    try {
        samples.resize(w * h * channels);
        for (std::size_t y = 0; y < h; ++y) {
            const png_bytep row = rows[y];
            for (std::size_t i = 0; i < w * channels; ++i) {
                samples[y * w * channels + i] =
                    depth == 16 ? static_cast<double>((row[2 * i] << 8) | row[2 * i + 1]) * (255.0 / 65535.0)
                                : static_cast<double>(row[i]);
            }
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels != 1 && channels != 3)
        throw IoError("'" + name + "' has an unsupported channel layout");
    return interleaved_to_gray(w, h, channels, samples);
}

inline std::uint32_t le32(const unsigned char* p) noexcept
{
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

inline std::uint16_t le16(const unsigned char* p) noexcept
{
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

/// Uncompressed 8-bit (palette), 24-bit and 32-bit BMP.
inline GrayImage decode_bmp(const std::vector<unsigned char>& b, const std::string& name)
{
    auto fail = [&](const std::string& why) { return IoError("'" + name + "': " + why); };
    if (b.size() < 54)
        throw fail("truncated BMP header");
    const std::uint32_t pixel_offset = le32(&b[10]);
    const std::uint32_t dib_size = le32(&b[14]);
    if (dib_size < 40)
        throw fail("unsupported BMP header version");
    const auto width = static_cast<std::int32_t>(le32(&b[18]));
    const auto raw_height = static_cast<std::int32_t>(le32(&b[22]));
    const std::uint16_t bpp = le16(&b[28]);
    const std::uint32_t compression = le32(&b[30]);
    std::uint32_t colors_used = le32(&b[46]);

    if (width <= 0 || raw_height == 0)
        throw fail("invalid BMP dimensions");
    if (!(compression == 0 || (compression == 3 && bpp == 32)))
        throw fail("compressed BMP is not supported");
    if (bpp != 8 && bpp != 24 && bpp != 32)
        throw fail("unsupported BMP bit depth " + std::to_string(bpp));

    const bool top_down = raw_height < 0;
    const auto w = static_cast<std::size_t>(width);
    const auto h = static_cast<std::size_t>(top_down ? -static_cast<std::int64_t>(raw_height) : raw_height);
    const std::size_t stride = ((bpp * w + 31) / 32) * 4;
    if (pixel_offset + stride * h > b.size())
        throw fail("truncated BMP pixel data");

    std::vector<std::array<double, 3>> palette;
    if (bpp == 8) {
        if (colors_used == 0)
            colors_used = 256;
        const std::size_t pal_start = 14 + dib_size;
        if (pal_start + 4 * colors_used > b.size())
            throw fail("truncated BMP palette");
        for (std::size_t i = 0; i < colors_used; ++i) {
            const unsigned char* e = &b[pal_start + 4 * i];
            palette.push_back({double(e[2]), double(e[1]), double(e[0])});
        }
    }

    std::vector<double> samples(w * h * 3);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t src_row = top_down ? y : h - 1 - y;
        const unsigned char* row = &b[pixel_offset + src_row * stride];
        for (std::size_t x = 0; x < w; ++x) {
            double* px = &samples[(y * w + x) * 3];
            if (bpp == 8) {
                if (row[x] >= palette.size())
                    throw fail("palette index out of range");
                const auto& c = palette[row[x]];
                px[0] = c[0];
                px[1] = c[1];
                px[2] = c[2];
            } else {
                const unsigned char* p = row + x * (bpp / 8);
                px[0] = p[2];
                px[1] = p[1];
                px[2] = p[0];
            }
        }
    }
    return interleaved_to_gray(w, h, 3, samples);
}

inline std::vector<unsigned char> to_bytes(const GrayImage& img)
{
    std::vector<unsigned char> out(img.size());
    auto p = img.pixels();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<unsigned char>(std::lround(std::clamp(p[i], 0.0, 255.0)));
    return out;
}

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t n)
{
    auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

inline void png_flush_noop(png_structp) {}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("short write to '" + path.string() + "'");
}

} // namespace detail

/// Decodes PNG or BMP (by signature) and reduces colour to BT.601 luma.
/// 16-bit samples are scaled into [0, 255].
inline GrayImage load_image(const std::filesystem::path& path)
{
    const auto bytes = detail::read_file_bytes(path);
    static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0)
        return detail::decode_png(bytes, path.string());
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M')
        return detail::decode_bmp(bytes, path.string());
    throw IoError("'" + path.string() + "' is neither PNG nor BMP");
}

/// 8-bit grayscale PNG; samples are rounded and clamped to [0, 255].
inline void save_png(const GrayImage& img, const std::filesystem::path& path)
{
    const auto pixels = detail::to_bytes(img);
    std::vector<unsigned char> encoded;
    std::vector<png_bytep> rows(img.height());
    for (std::size_t y = 0; y < img.height(); ++y)
        rows[y] = const_cast<png_bytep>(pixels.data() + y * img.width());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, detail::png_quiet_warning);
    if (!png)
        throw IoError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed for '" + path.string() + "'");
    }
    png_set_write_fn(png, &encoded, detail::png_write_to_vector, detail::png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);

    detail::write_bytes(path, encoded);
}

/// 24-bit BMP with R = G = B.
inline void save_bmp(const GrayImage& img, const std::filesystem::path& path)
{
    const auto pixels = detail::to_bytes(img);
    const std::size_t w = img.width(), h = img.height();
    const std::size_t stride = ((24 * w + 31) / 32) * 4;
    const std::size_t data_size = stride * h;
    std::vector<unsigned char> out(54 + data_size, 0);
    auto put32 = [&](std::size_t at, std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            out[at + i] = static_cast<unsigned char>(v >> (8 * i));
    };
    out[0] = 'B';
    out[1] = 'M';
    put32(2, static_cast<std::uint32_t>(out.size()));
    put32(10, 54);
    put32(14, 40);
    put32(18, static_cast<std::uint32_t>(w));
    put32(22, static_cast<std::uint32_t>(h));
    out[26] = 1;
    out[28] = 24;
    put32(34, static_cast<std::uint32_t>(data_size));
    for (std::size_t y = 0; y < h; ++y) {
        unsigned char* row = &out[54 + (h - 1 - y) * stride];
        for (std::size_t x = 0; x < w; ++x)
            row[3 * x] = row[3 * x + 1] = row[3 * x + 2] = pixels[y * w + x];
    }
    detail::write_bytes(path, out);
}

} // namespace sfsn
