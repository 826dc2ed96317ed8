#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deft/model.hpp"

namespace deft {

// Checkpoint directory layout: manifest.txt (human-readable) + params.bin
// (little-endian float32 payload in manifest-declared order). Reload is
// bit-exact, so forward passes reproduce.
struct Manifest {
    int version = 1;
    int epoch = 0;
    double dev_metric = 0.0;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> params;

    const std::string* find(const std::string& key) const;
    std::string get(const std::string& key) const;  // throws DataError
};

void save_checkpoint(const std::filesystem::path& dir,
                     const std::vector<ParamRef>& params,
                     const Manifest& manifest);

Manifest load_manifest(const std::filesystem::path& dir);

// Fills the referenced tensors from params.bin, validating names and shapes
// against the manifest.
void load_checkpoint(const std::filesystem::path& dir,
                     const std::vector<ParamRef>& params);

}  // namespace deft
