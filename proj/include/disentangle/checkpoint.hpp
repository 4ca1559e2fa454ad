#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "disentangle/mlp.hpp"

namespace disentangle {

// Binary checkpoint layout, all integers and doubles little-endian:
//
//   8 bytes   magic "DSNTCKP1"
//   u32       number of networks
//   per network:
//     u32       name length, then name bytes (UTF-8, no terminator)
//     u32       number of layer dims D
//     u64 x D   layer dims
//     per layer k: weights[k] row-major (f64), then biases[k] (f64)
//
// Metadata (seed, hyperparameters, stage) lives in "<path>.json".
struct NamedNet {
  std::string name;
  MlpNet net;
};

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedNet>& nets,
                      const nlohmann::json& metadata);
std::vector<NamedNet> read_checkpoint(const std::filesystem::path& path);
nlohmann::json read_checkpoint_metadata(const std::filesystem::path& path);

const MlpNet& find_net(const std::vector<NamedNet>& nets, const std::string& name);

}  // namespace disentangle
