#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace morphprof {

/// Row-major 8-bit grayscale raster.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Row-major foreground occupancy. Pixel (x, y) has its center at integer (x, y).
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> foreground;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), foreground(static_cast<std::size_t>(w) * h, 0) {}

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    bool at(int x, int y) const { return contains(x, y) && foreground[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v = true) { foreground[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;

    bool operator==(const BinaryMask&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

/// Closed boundary of pixel centers; consecutive points are 8-neighbors and
/// the shoelace area in raw (x, y) coordinates is positive.
struct Contour {
    std::vector<Point2> points;
};

struct Centroid {
    double x = 0.0;
    double y = 0.0;
};

/// Reads an 8-bit PGM (P5), BMP or PNG raster. Color inputs are reduced with
/// round(0.299 R + 0.587 G + 0.114 B).
GrayImage load_gray_image(const std::filesystem::path& path);

/// Writes a binary PGM (P5); foreground is written dark (0) on a light (255) background.
void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path);
void write_gray_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Image files under `dir` with a supported extension, sorted lexicographically.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Between-class variance for threshold t over a 256-bin histogram, with class
/// 0 = intensities <= t. Zero when either class is empty.
double otsu_between_class_variance(const std::vector<std::uint64_t>& histogram, int t);

/// Otsu threshold; ties are averaged and floor-rounded.
int otsu_threshold(const GrayImage& img);

/// Foreground = intensity <= t (particles are dark).
BinaryMask binarize(const GrayImage& img, int t);

/// Keeps the largest 8-connected component. Ties go to the component whose
/// bounding-box corner (top, left) comes first in row-major order.
BinaryMask largest_component(const BinaryMask& mask);

/// Number of 8-connected foreground components.
int count_components(const BinaryMask& mask);

/// Moore-neighbor trace of the outer boundary, starting at the topmost then
/// leftmost foreground pixel. Holes are ignored.
Contour trace_contour(const BinaryMask& mask);

Centroid centroid_of(const BinaryMask& mask);

double signed_area(const Contour& contour);

/// Otsu, binarize, largest component.
BinaryMask segment_particle(const GrayImage& img);

/// Lossless raster rotation by quarter_turns * 90 degrees counterclockwise.
BinaryMask rotate90(const BinaryMask& mask, int quarter_turns);

}  // namespace morphprof
