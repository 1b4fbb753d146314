#pragma once

#include "morphprof/mask.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace morphprof {

enum class ParticleClass { Sphere = 0, Satellited = 1, Lobed = 2, Rod = 3 };

inline constexpr std::size_t kParticleClassCount = 4;

std::string_view class_name(ParticleClass c);
ParticleClass parse_class(std::string_view name);

/// One synthetic particle. Shape parameters are drawn from `seed`; the pose
/// fields (rotation, scale, offset) only move the rasterization, so the same
/// seed under a different pose is the same particle rotated or resized.
struct SyntheticSpec {
    ParticleClass cls = ParticleClass::Sphere;
    int image_size = 128;
    double base_radius = 24.0;
    double noise_amp = 0.0;
    std::uint64_t seed = 0;

    double rotation = 0.0;  // radians, counterclockwise on screen
    double scale = 1.0;     // canvas and geometry scale together
    double offset_x = 0.0;  // sub-pixel placement relative to the canvas center
    double offset_y = 0.0;
};

void validate(const SyntheticSpec& spec);

/// Rasterizes the particle (pixel centers inside the shape) and keeps the
/// largest component.
BinaryMask generate_particle(const SyntheticSpec& spec);

/// Generation settings for a labeled batch.
struct DatasetConfig {
    std::array<std::size_t, kParticleClassCount> counts{1000, 1000, 1000, 1000};
    std::uint64_t seed = 0;
    int image_size = 128;
    double radius_min = 20.0;
    double radius_max = 30.0;
};

struct SyntheticDataset {
    std::vector<SyntheticSpec> specs;
    std::vector<int> labels;  // ParticleClass as int
};

/// Per-particle specs with seeds derived from the master seed, in shuffled order.
SyntheticDataset generate_dataset(const DatasetConfig& config);

std::vector<BinaryMask> render_all(const std::vector<SyntheticSpec>& specs);

/// Writes particle_%06zu.pgm files and labels.csv (file,class,label).
void export_dataset(const SyntheticDataset& data, const std::filesystem::path& dir);

}  // namespace morphprof
