#include "morphprof/mask.hpp"

#include "morphprof/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace morphprof {

namespace {

// Clockwise on screen (y grows downward), starting west.
constexpr std::array<int, 8> kDx = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDy = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_index(int dx, int dy) {
    for (int d = 0; d < 8; ++d) {
        if (kDx[d] == dx && kDy[d] == dy) return d;
    }
    return -1;
}

// Labels 8-connected components; returns per-pixel label (-1 background) and component count.
int label_components(const BinaryMask& mask, std::vector<int>& labels) {
    labels.assign(mask.foreground.size(), -1);
    std::vector<int> stack;
    int next = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * mask.width + x;
            if (!mask.foreground[idx] || labels[idx] >= 0) continue;
            labels[idx] = next;
            stack.push_back(static_cast<int>(idx));
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cx = cur % mask.width;
                const int cy = cur / mask.width;
                for (int d = 0; d < 8; ++d) {
                    const int nx = cx + kDx[d];
                    const int ny = cy + kDy[d];
                    if (!mask.at(nx, ny)) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny) * mask.width + nx;
                    if (labels[nidx] < 0) {
                        labels[nidx] = next;
                        stack.push_back(static_cast<int>(nidx));
                    }
                }
            }
            ++next;
        }
    }
    return next;
}

}  // namespace

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count_if(foreground.begin(), foreground.end(), [](auto v) { return v != 0; }));
}

double otsu_between_class_variance(const std::vector<std::uint64_t>& histogram, int t) {
    std::uint64_t n0 = 0, n1 = 0;
    __int128 s0 = 0, s1 = 0;
    for (int v = 0; v < static_cast<int>(histogram.size()); ++v) {
        if (v <= t) {
            n0 += histogram[v];
            s0 += static_cast<__int128>(histogram[v]) * v;
        } else {
            n1 += histogram[v];
            s1 += static_cast<__int128>(histogram[v]) * v;
        }
    }
    if (n0 == 0 || n1 == 0) return 0.0;
    // w0 w1 (mu0 - mu1)^2 = (s0 n1 - s1 n0)^2 / (n0 n1 N^2), numerator exact
    const __int128 diff = s0 * static_cast<__int128>(n1) - s1 * static_cast<__int128>(n0);
    const long double total = static_cast<long double>(n0 + n1);
    const long double d = static_cast<long double>(diff);
    return static_cast<double>(d * d / (static_cast<long double>(n0) * n1) / (total * total));
}

int otsu_threshold(const GrayImage& img) {
    std::vector<std::uint64_t> hist(256, 0);
    for (auto v : img.pixels) ++hist[v];
    const auto distinct = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
    if (distinct < 2) throw InputError("degenerate histogram");

    std::array<double, 256> var{};
    double best = 0.0;
    for (int t = 0; t < 256; ++t) {
        var[t] = otsu_between_class_variance(hist, t);
        best = std::max(best, var[t]);
    }
    long sum = 0;
    long count = 0;
    for (int t = 0; t < 256; ++t) {
        if (var[t] >= best * (1.0 - 1e-12)) {
            sum += t;
            ++count;
        }
    }
    return static_cast<int>(sum / count);
}

BinaryMask binarize(const GrayImage& img, int t) {
    if (t < 0 || t > 255) throw ConfigError("threshold out of range");
    BinaryMask mask(img.width, img.height);
    bool any = false;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (img.pixels[i] <= t) {
            mask.foreground[i] = 1;
            any = true;
        }
    }
    if (!any) throw InputError("no particle found");
    return mask;
}

int count_components(const BinaryMask& mask) {
    std::vector<int> labels;
    return label_components(mask, labels);
}

BinaryMask largest_component(const BinaryMask& mask) {
    std::vector<int> labels;
    const int n = label_components(mask, labels);
    if (n == 0) throw InputError("no particle found");
    if (n == 1) return mask;

    struct Stats {
        std::size_t size = 0;
        int top = INT32_MAX;
        int left = INT32_MAX;
    };
    std::vector<Stats> stats(n);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const int l = labels[static_cast<std::size_t>(y) * mask.width + x];
            if (l < 0) continue;
            auto& s = stats[l];
            ++s.size;
            s.top = std::min(s.top, y);
            s.left = std::min(s.left, x);
        }
    }
    int best = 0;
    for (int l = 1; l < n; ++l) {
        const auto& a = stats[l];
        const auto& b = stats[best];
        if (a.size > b.size || (a.size == b.size && std::pair(a.top, a.left) < std::pair(b.top, b.left))) best = l;
    }
    BinaryMask out(mask.width, mask.height);
    for (std::size_t i = 0; i < labels.size(); ++i) out.foreground[i] = labels[i] == best ? 1 : 0;
    return out;
}

Contour trace_contour(const BinaryMask& mask) {
    int sx = -1, sy = -1;
    for (int y = 0; y < mask.height && sx < 0; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y)) {
                sx = x;
                sy = y;
                break;
            }
        }
    }
    if (sx < 0) throw InputError("no particle found");

    Contour contour;
    contour.points.push_back({static_cast<double>(sx), static_cast<double>(sy)});
    int cx = sx, cy = sy;
    int back = 0;  // west of the start pixel is background by construction
    int first_move = -1;
    const std::size_t guard = 8 * mask.foreground.size() + 16;
    for (std::size_t step = 0;; ++step) {
        if (step > guard) throw NumericError("contour trace did not close");
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (mask.at(cx + kDx[d], cy + kDy[d])) {
                found = d;
                break;
            }
        }
        if (found < 0) throw InputError("contour degenerate");
        if (cx == sx && cy == sy && found == first_move) break;
        if (first_move < 0) first_move = found;
        const int prev = (found + 7) % 8;
        const int px = cx + kDx[prev];
        const int py = cy + kDy[prev];
        cx += kDx[found];
        cy += kDy[found];
        back = direction_index(px - cx, py - cy);
        contour.points.push_back({static_cast<double>(cx), static_cast<double>(cy)});
    }
    contour.points.pop_back();  // closing revisit of the start pixel
    if (contour.points.size() < 4) throw InputError("contour degenerate");
    return contour;
}

double signed_area(const Contour& contour) {
    const auto& p = contour.points;
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& q = p[(i + 1) % p.size()];
        a += p[i].x * q.y - q.x * p[i].y;
    }
    return 0.5 * a;
}

Centroid centroid_of(const BinaryMask& mask) {
    long long sx = 0, sy = 0, n = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.foreground[static_cast<std::size_t>(y) * mask.width + x]) {
                sx += x;
                sy += y;
                ++n;
            }
        }
    }
    if (n == 0) throw InputError("no particle found");
    return {static_cast<double>(sx) / static_cast<double>(n), static_cast<double>(sy) / static_cast<double>(n)};
}

BinaryMask segment_particle(const GrayImage& img) {
    return largest_component(binarize(img, otsu_threshold(img)));
}

BinaryMask rotate90(const BinaryMask& mask, int quarter_turns) {
    const int q = ((quarter_turns % 4) + 4) % 4;
    if (q == 0) return mask;
    const int w = mask.width, h = mask.height;
    BinaryMask out = (q == 2) ? BinaryMask(w, h) : BinaryMask(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            switch (q) {
                case 1: out.set(y, w - 1 - x); break;
                case 2: out.set(w - 1 - x, h - 1 - y); break;
                default: out.set(h - 1 - y, x); break;
            }
        }
    }
    return out;
}

}  // namespace morphprof
