#include "spamlens/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "spamlens/errors.hpp"

namespace spamlens {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'C', 'K'};

void write_u32(std::ostream& out, std::uint32_t value) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = (value >> (8 * i)) & 0xFF;
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_u64(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = (value >> (8 * i)) & 0xFF;
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= std::uint32_t(bytes[i]) << (8 * i);
  return value;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= std::uint64_t(bytes[i]) << (8 * i);
  return value;
}

void write_f32(std::ostream& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  write_u32(out, bits);
}

float read_f32(std::istream& in) {
  const std::uint32_t bits = read_u32(in);
  float value;
  std::memcpy(&value, &bits, 4);
  return value;
}

}  // namespace

const Eigen::MatrixXf& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [tensor_name, matrix] : tensors) {
    if (tensor_name == name) return matrix;
  }
  throw DataError("checkpoint: missing tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& [tensor_name, _] : tensors) {
    if (tensor_name == name) return true;
  }
  return false;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, matrix] : checkpoint.tensors) {
    index.push_back({{"name", name},
                     {"rows", matrix.rows()},
                     {"cols", matrix.cols()},
                     {"offset", offset}});
    offset += std::uint64_t(matrix.size()) * 4;
  }
  const nlohmann::json manifest = {
      {"format_version", kCheckpointVersion},
      {"model_kind", checkpoint.model_kind},
      {"config", checkpoint.config},
      {"meta", checkpoint.meta},
      {"tensors", index},
  };
  const std::string manifest_bytes = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_u32(out, kCheckpointVersion);
  write_u64(out, manifest_bytes.size());
  out.write(manifest_bytes.data(),
            static_cast<std::streamsize>(manifest_bytes.size()));
  for (const auto& [name, matrix] : checkpoint.tensors) {
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
      for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        write_f32(out, matrix(r, c));
      }
    }
  }
  if (!out) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint format version " + std::to_string(version) +
                    " unsupported (expected " +
                    std::to_string(kCheckpointVersion) + "): " + path);
  }
  const std::uint64_t manifest_size = read_u64(in);
  std::string manifest_bytes(manifest_size, '\0');
  in.read(manifest_bytes.data(),
          static_cast<std::streamsize>(manifest_size));
  if (!in) throw DataError("checkpoint manifest truncated: " + path);

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_bytes);
  } catch (const std::exception& e) {
    throw DataError("checkpoint manifest is not valid JSON: " + path);
  }
  if (manifest.at("format_version").get<std::uint32_t>() !=
      kCheckpointVersion) {
    throw DataError("checkpoint manifest version mismatch: " + path);
  }

  Checkpoint checkpoint;
  checkpoint.model_kind = manifest.at("model_kind").get<std::string>();
  checkpoint.config = manifest.value("config", nlohmann::json::object());
  checkpoint.meta = manifest.value("meta", nlohmann::json::object());

  std::uint64_t expected_payload = 0;
  for (const auto& entry : manifest.at("tensors")) {
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    if (entry.at("offset").get<std::uint64_t>() != expected_payload) {
      throw DataError("checkpoint tensor offsets inconsistent: " + path);
    }
    Eigen::MatrixXf matrix(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        matrix(r, c) = read_f32(in);
      }
    }
    if (!in) throw DataError("checkpoint payload truncated: " + path);
    expected_payload += std::uint64_t(rows) * std::uint64_t(cols) * 4;
    checkpoint.tensors.emplace_back(entry.at("name").get<std::string>(),
                                    std::move(matrix));
  }
  // the manifest-declared payload must end exactly at end-of-file
  in.peek();
  if (!in.eof()) {
    throw DataError("checkpoint payload longer than manifest declares: " +
                    path);
  }
  return checkpoint;
}

}  // namespace spamlens
