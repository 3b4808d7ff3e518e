#ifndef ODT_VOLIO_HPP
#define ODT_VOLIO_HPP

#include <cstdint>
#include <filesystem>

#include "odt/grid.hpp"

namespace odt {

/// VOL3 container, little-endian regardless of host:
///   magic "VOL3" | u16 version=1 | u16 kind | u32 nx,ny,nz | f64 dx,dy,dz
///   payload, x-fastest: kind 1 = f32 per voxel, kind 2 = interleaved
///   (re, im) f32, kind 3 = one byte (0/1) per voxel.
namespace vol3 {
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint16_t kKindReal = 1;
inline constexpr std::uint16_t kKindComplex = 2;
inline constexpr std::uint16_t kKindMask = 3;
inline constexpr std::uint64_t kDefaultCap = std::uint64_t(2) << 30;  // 2 GiB
}  // namespace vol3

void write_vol(const std::filesystem::path& path, const Volume3& v);
void write_spec(const std::filesystem::path& path, const Spectrum3& s);
void write_mask(const std::filesystem::path& path, const SupportMask& m);

Volume3 read_vol(const std::filesystem::path& path, std::uint64_t max_bytes = vol3::kDefaultCap);
Spectrum3 read_spec(const std::filesystem::path& path, std::uint64_t max_bytes = vol3::kDefaultCap);
SupportMask read_mask(const std::filesystem::path& path,
                      std::uint64_t max_bytes = vol3::kDefaultCap);

/// Headerless raw binary32 export for external viewers.
void write_raw_f32(const std::filesystem::path& path, const Volume3& v);

}  // namespace odt

#endif
