#include "morphprof/descriptors.hpp"
#include "morphprof/error.hpp"

#include <cstdio>

namespace morphprof {

std::string_view descriptor_name(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::CDF100: return "cdf100";
        case DescriptorKind::FD10: return "fd10";
        case DescriptorKind::ZM12: return "zm12";
    }
    return "?";
}

DescriptorKind parse_descriptor(std::string_view name) {
    if (name == "cdf100") return DescriptorKind::CDF100;
    if (name == "fd10") return DescriptorKind::FD10;
    if (name == "zm12") return DescriptorKind::ZM12;
    throw ConfigError("unknown descriptor: " + std::string(name));
}

std::size_t descriptor_length(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::CDF100: return kCdfSamples;
        case DescriptorKind::FD10: return 2 * kFdHarmonics;
        case DescriptorKind::ZM12: return zernike_indices(kZernikeOrder).size();
    }
    return 0;
}

std::vector<std::string> descriptor_headers(DescriptorKind kind) {
    std::vector<std::string> out;
    char buf[32];
    switch (kind) {
        case DescriptorKind::CDF100:
            for (std::size_t i = 0; i < kCdfSamples; ++i) {
                std::snprintf(buf, sizeof buf, "cdf_%03zu", i);
                out.emplace_back(buf);
            }
            break;
        case DescriptorKind::FD10:
            for (int h = -static_cast<int>(kFdHarmonics); h <= static_cast<int>(kFdHarmonics); ++h) {
                if (h == 0) continue;
                std::snprintf(buf, sizeof buf, "fd_%c%d", h < 0 ? 'm' : 'p', std::abs(h));
                out.emplace_back(buf);
            }
            break;
        case DescriptorKind::ZM12:
            for (auto [n, m] : zernike_indices(kZernikeOrder)) {
                std::snprintf(buf, sizeof buf, "zm_%d_%d", n, m);
                out.emplace_back(buf);
            }
            break;
    }
    return out;
}

DescriptorVector extract_descriptor(DescriptorKind kind, const BinaryMask& mask) {
    switch (kind) {
        case DescriptorKind::CDF100: return cdf_descriptor(mask, centroid_of(mask));
        case DescriptorKind::FD10: return fd_descriptor(trace_contour(mask));
        case DescriptorKind::ZM12: return zm_descriptor(mask);
    }
    throw ConfigError("unknown descriptor");
}

}  // namespace morphprof
