#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace spamlens {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Single-file model container: a fixed magic/version prefix, a JSON manifest
// (model kind, config snapshot, named tensor index with shapes and byte
// offsets) and a payload of raw little-endian float32 arrays concatenated in
// index order, each in row-major element order.
struct Checkpoint {
  std::string model_kind;
  nlohmann::json config;  // run configuration snapshot, includes the seed
  nlohmann::json meta;    // kind-specific non-tensor state
  std::vector<std::pair<std::string, Eigen::MatrixXf>> tensors;

  const Eigen::MatrixXf& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace spamlens
