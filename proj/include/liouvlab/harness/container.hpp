#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "liouvlab/covariant.hpp"
#include "liouvlab/harness/config.hpp"

namespace liouvlab::harness {

/// Binary ensemble container, all fields little-endian:
///   magic "LVLBENS\0" | u32 version | u32 endian tag 0x01020304
///   u32 d | i32 extent[d] | f64 spacing | u32 boundary | f64 origin[d] | u32 averaging
///   u64 M | u64 N | u64 seed[M] | complex128 data[M][N][N] (column-major)
///   u64 FNV-1a checksum of everything before it
inline constexpr std::uint32_t kContainerVersion = 1;

/// Truncated, corrupted or foreign file.
class IntegrityError : public IoError {
public:
  using IoError::IoError;
};

/// Container written by a different format version.
class VersionError : public IoError {
public:
  using IoError::IoError;
};

std::string encode_ensemble(const CovariantEnsemble& a);
CovariantEnsemble decode_ensemble(const std::string& bytes);

void save_ensemble(const std::filesystem::path& path, const CovariantEnsemble& a);
/// Reads the whole file and validates it before constructing anything.
CovariantEnsemble load_ensemble(const std::filesystem::path& path);

} // namespace liouvlab::harness
