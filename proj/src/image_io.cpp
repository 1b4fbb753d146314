#include "morphprof/error.hpp"
#include "morphprof/mask.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

namespace morphprof {

namespace fs = std::filesystem;

namespace {

std::uint8_t luma(int r, int g, int b) {
    // round(0.299 R + 0.587 G + 0.114 B) in exact integer arithmetic
    return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("unreadable file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_area(const GrayImage& img, const fs::path& path) {
    if (img.width <= 0 || img.height <= 0) throw InputError("zero-area image: " + path.string());
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
    std::size_t pos = 2;
    auto next_token = [&]() -> long {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw InputError("unreadable file: " + path.string());
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > (1L << 30)) throw InputError("unreadable file: " + path.string());
            ++pos;
        }
        return v;
    };
    GrayImage img;
    img.width = static_cast<int>(next_token());
    img.height = static_cast<int>(next_token());
    const long maxval = next_token();
    if (maxval <= 0) throw InputError("unreadable file: " + path.string());
    if (maxval > 255) throw InputError("unsupported bit depth: " + path.string());
    check_area(img, path);
    ++pos;  // single whitespace after maxval
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    if (pos > bytes.size() || bytes.size() - pos < n) throw InputError("unreadable file: " + path.string());
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return img;
}

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint16_t le16(const std::vector<std::uint8_t>& b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

GrayImage decode_bmp(const std::vector<std::uint8_t>& b, const fs::path& path) {
    if (b.size() < 54) throw InputError("unreadable file: " + path.string());
    const std::uint32_t data_offset = le32(b, 10);
    const std::uint32_t dib_size = le32(b, 14);
    const auto raw_w = static_cast<std::int32_t>(le32(b, 18));
    const auto raw_h = static_cast<std::int32_t>(le32(b, 22));
    const int bpp = le16(b, 28);
    const std::uint32_t compression = le32(b, 30);
    if (bpp != 8 && bpp != 24 && bpp != 32) throw InputError("unsupported bit depth: " + path.string());
    if (compression != 0 && !(compression == 3 && bpp == 32)) {
        throw InputError("unreadable file (compressed BMP): " + path.string());
    }
    GrayImage img;
    img.width = raw_w;
    img.height = raw_h < 0 ? -raw_h : raw_h;
    check_area(img, path);
    const bool bottom_up = raw_h > 0;

    std::array<std::uint8_t, 256> palette{};
    if (bpp == 8) {
        std::uint32_t ncolors = le32(b, 46);
        if (ncolors == 0 || ncolors > 256) ncolors = 256;
        const std::size_t pal_off = 14 + dib_size;
        for (std::uint32_t i = 0; i < ncolors; ++i) {
            const std::size_t o = pal_off + 4 * i;
            if (o + 3 > b.size()) throw InputError("unreadable file: " + path.string());
            palette[i] = luma(b[o + 2], b[o + 1], b[o]);
        }
    }
    const std::size_t row_bytes = ((static_cast<std::size_t>(img.width) * bpp + 31) / 32) * 4;
    if (data_offset > b.size() || b.size() - data_offset < row_bytes * img.height) {
        throw InputError("unreadable file: " + path.string());
    }
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y) {
        const int src_row = bottom_up ? img.height - 1 - y : y;
        const std::uint8_t* row = b.data() + data_offset + row_bytes * src_row;
        for (int x = 0; x < img.width; ++x) {
            std::uint8_t v;
            if (bpp == 8) {
                v = palette[row[x]];
            } else {
                const int step = bpp / 8;
                const std::uint8_t* p = row + static_cast<std::size_t>(x) * step;
                v = luma(p[2], p[1], p[0]);
            }
            img.pixels[static_cast<std::size_t>(y) * img.width + x] = v;
        }
    }
    return img;
}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw InputError("unreadable file: " + path.string());
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw InputError("unsupported bit depth: " + path.string());
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw InputError("unreadable file: " + path.string());
    }
    GrayImage img;
    img.width = static_cast<int>(image.width);
    img.height = static_cast<int>(image.height);
    check_area(img, path);
    if (!color) {
        img.pixels = std::move(buf);
    } else {
        img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            img.pixels[i] = luma(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
        }
    }
    return img;
}

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".bmp" || ext == ".pgm";
}

}  // namespace

GrayImage load_gray_image(const fs::path& path) {
    const auto bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes, path);
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes, path);
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes, path);
    throw InputError("unreadable file: " + path.string());
}

void write_gray_pgm(const GrayImage& img, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw InputError("cannot write " + path.string());
}

void write_mask_pgm(const BinaryMask& mask, const fs::path& path) {
    GrayImage img{mask.width, mask.height, {}};
    img.pixels.reserve(mask.foreground.size());
    for (auto f : mask.foreground) img.pixels.push_back(f ? 0 : 255);
    write_gray_pgm(img, path);
}

std::vector<fs::path> list_images(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw InputError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && has_image_extension(entry.path())) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) { return a.string() < b.string(); });
    return out;
}

}  // namespace morphprof
