#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "inkcheck/tensor.hpp"

namespace inkcheck::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kKindRecognizer = 1;
inline constexpr std::uint32_t kKindClassifierHead = 2;

std::uint64_t fnv1a64(const std::string& text);

// Versioned binary container: header with format version, kind and config
// digest, then named little-endian float64 parameter blocks. The digest
// guards against loading weights into a mismatched configuration; classifier
// checkpoints additionally pin the extractor they were trained against.
struct Checkpoint {
    std::uint32_t kind = 0;
    std::uint64_t config_digest = 0;
    std::uint64_t extractor_digest = 0;  // classifier heads only, else 0
    std::vector<std::pair<std::string, nn::TensorPtr>> tensors;

    const nn::TensorPtr& find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace inkcheck::io
