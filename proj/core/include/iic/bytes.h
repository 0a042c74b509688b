#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iic {

// Whole-file helpers. Both throw std::runtime_error on I/O failure.
std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);
std::string ReadFileText(const std::filesystem::path& path);
void WriteFileText(const std::filesystem::path& path, std::string_view text);

// 64-bit FNV-1a; used for model and prompt identifiers in run manifests.
std::uint64_t Fnv1a64(std::span<const std::uint8_t> bytes);
std::string HexDigest(std::uint64_t value);

}  // namespace iic
