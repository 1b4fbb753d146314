#include "morphprof/synth.hpp"

#include "morphprof/error.hpp"
#include "morphprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace morphprof {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Disk {
    double x, y, r;
};

// Shape in particle coordinates (pixels at scale 1, origin at the particle center).
struct Geometry {
    bool radial = false;  // perturbed disk r(theta) = R (1 + amp * sum a_j cos(j theta + phi_j))
    double radius = 0.0;
    double amp = 0.0;
    std::array<double, 3> harm_a{};
    std::array<double, 3> harm_phi{};
    std::vector<Disk> disks;
    bool capsule = false;
    double half_length = 0.0;  // half of the capsule's straight segment
    double cap_radius = 0.0;

    double surface_radius(double t) const {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += harm_a[j] * std::cos((j + 2) * t + harm_phi[j]);
        return radius * (1.0 + amp * s);
    }

    bool inside(double x, double y) const {
        if (radial) {
            const double r = surface_radius(std::atan2(y, x));
            if (x * x + y * y <= r * r) return true;
        }
        for (const auto& d : disks) {
            const double dx = x - d.x, dy = y - d.y;
            if (dx * dx + dy * dy <= d.r * d.r) return true;
        }
        if (capsule) {
            const double cx = std::clamp(x, -half_length, half_length);
            const double dx = x - cx;
            if (dx * dx + y * y <= cap_radius * cap_radius) return true;
        }
        return false;
    }
};

Geometry build_geometry(const SyntheticSpec& spec) {
    Rng rng(spec.seed);
    Geometry g;
    const double R = spec.base_radius;
    switch (spec.cls) {
        case ParticleClass::Sphere:
        case ParticleClass::Satellited: {
            g.radial = true;
            g.radius = R;
            g.amp = spec.noise_amp;
            for (int j = 0; j < 3; ++j) {
                g.harm_a[j] = rng.uniform(-1.0, 1.0);
                g.harm_phi[j] = rng.uniform(0.0, kTwoPi);
            }
            if (spec.cls == ParticleClass::Satellited) {
                const auto count = 1 + rng.below(3);
                for (std::uint64_t i = 0; i < count; ++i) {
                    const double r = R * rng.uniform(0.18, 0.25);
                    const double phi = rng.uniform(0.0, kTwoPi);
                    // near-tangent placement; the slight overlap keeps the raster connected
                    const double dist = g.surface_radius(phi) + 0.85 * r;
                    g.disks.push_back({dist * std::cos(phi), dist * std::sin(phi), r});
                }
            }
            break;
        }
        case ParticleClass::Lobed: {
            const auto count = 2 + rng.below(2);
            const double r = R * rng.uniform(0.55, 0.65);
            g.disks.push_back({0.0, 0.0, r});
            // center distance is a fraction of the radius sum, so every lobe overlaps the core
            const double r1 = r * rng.uniform(0.85, 1.0);
            const double d1 = (r + r1) * rng.uniform(0.85, 0.95);
            g.disks.push_back({d1, 0.0, r1});
            if (count == 3) {
                const double r2 = r * rng.uniform(0.3, 0.45);
                const double d2 = (r + r2) * rng.uniform(0.75, 0.9);
                const double a = rng.uniform(140.0, 170.0) * std::numbers::pi / 180.0;
                g.disks.push_back({d2 * std::cos(a), d2 * std::sin(a), r2});
            }
            double mx = 0.0, my = 0.0;
            for (const auto& d : g.disks) {
                mx += d.x;
                my += d.y;
            }
            mx /= static_cast<double>(g.disks.size());
            my /= static_cast<double>(g.disks.size());
            for (auto& d : g.disks) {
                d.x -= mx;
                d.y -= my;
            }
            break;
        }
        case ParticleClass::Rod: {
            const double ratio = rng.uniform(3.0, 6.0);
            const double length = 2.0 * R;
            const double width = length / ratio;
            g.capsule = true;
            g.cap_radius = 0.5 * width;
            g.half_length = 0.5 * (length - width);
            break;
        }
    }
    return g;
}

}  // namespace

std::string_view class_name(ParticleClass c) {
    switch (c) {
        case ParticleClass::Sphere: return "sphere";
        case ParticleClass::Satellited: return "satellited";
        case ParticleClass::Lobed: return "lobed";
        case ParticleClass::Rod: return "rod";
    }
    return "?";
}

ParticleClass parse_class(std::string_view name) {
    for (std::size_t i = 0; i < kParticleClassCount; ++i) {
        const auto c = static_cast<ParticleClass>(i);
        if (class_name(c) == name) return c;
    }
    throw ConfigError("unknown particle class: " + std::string(name));
}

void validate(const SyntheticSpec& spec) {
    if (spec.image_size < 8) throw ConfigError("image_size must be at least 8");
    if (!(spec.base_radius > 0.0) || spec.base_radius > spec.image_size / 2.0 - 2.0) {
        throw ConfigError("base_radius must lie in (0, image_size/2 - 2]");
    }
    if (!(spec.noise_amp >= 0.0 && spec.noise_amp <= 0.5)) throw ConfigError("noise_amp must lie in [0, 0.5]");
    if (!(spec.scale > 0.0)) throw ConfigError("scale must be positive");
}

BinaryMask generate_particle(const SyntheticSpec& spec) {
    validate(spec);
    const Geometry g = build_geometry(spec);
    const int size = static_cast<int>(std::lround(spec.image_size * spec.scale));
    const double cx = 0.5 * (size - 1) + spec.offset_x * spec.scale;
    const double cy = 0.5 * (size - 1) + spec.offset_y * spec.scale;
    const double c = std::cos(spec.rotation);
    const double s = std::sin(spec.rotation);
    const double inv_scale = 1.0 / spec.scale;

    BinaryMask mask(size, size);
    for (int py = 0; py < size; ++py) {
        for (int px = 0; px < size; ++px) {
            const double dx = px - cx;
            const double dy = py - cy;
            const double u = (dx * c - dy * s) * inv_scale;
            const double v = (dx * s + dy * c) * inv_scale;
            if (g.inside(u, v)) mask.set(px, py);
        }
    }
    return largest_component(mask);
}

SyntheticDataset generate_dataset(const DatasetConfig& config) {
    std::vector<int> classes;
    for (std::size_t c = 0; c < kParticleClassCount; ++c) {
        if (config.counts[c] == 0) throw ConfigError("every class count must be at least 1");
        classes.insert(classes.end(), config.counts[c], static_cast<int>(c));
    }
    Rng order(derive_seed(config.seed, 0xC1A55));
    order.shuffle(classes);

    SyntheticDataset out;
    out.labels = classes;
    out.specs.reserve(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        Rng prng(derive_seed(config.seed, i));
        SyntheticSpec spec;
        spec.cls = static_cast<ParticleClass>(classes[i]);
        spec.image_size = config.image_size;
        spec.base_radius = prng.uniform(config.radius_min, config.radius_max);
        spec.noise_amp = (spec.cls == ParticleClass::Sphere || spec.cls == ParticleClass::Satellited)
                             ? prng.uniform(0.0, 0.03)
                             : 0.0;
        spec.rotation = prng.uniform(0.0, kTwoPi);
        spec.offset_x = prng.uniform(-0.5, 0.5);
        spec.offset_y = prng.uniform(-0.5, 0.5);
        spec.seed = prng.next_u64();
        out.specs.push_back(spec);
    }
    return out;
}

std::vector<BinaryMask> render_all(const std::vector<SyntheticSpec>& specs) {
    std::vector<BinaryMask> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(generate_particle(s));
    return out;
}

void export_dataset(const SyntheticDataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream labels(dir / "labels.csv");
    if (!labels) throw InputError("cannot write " + (dir / "labels.csv").string());
    labels << "file,class,label\n";
    char name[64];
    for (std::size_t i = 0; i < data.specs.size(); ++i) {
        std::snprintf(name, sizeof name, "particle_%06zu.pgm", i);
        write_mask_pgm(generate_particle(data.specs[i]), dir / name);
        labels << name << ',' << class_name(data.specs[i].cls) << ',' << data.labels[i] << '\n';
    }
}

}  // namespace morphprof
