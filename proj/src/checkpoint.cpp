#include "disentangle/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "disentangle/error.hpp"

namespace disentangle {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'N', 'T', 'C', 'K', 'P', '1'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw IoError("checkpoint " + path.string() + ": truncated file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedNet>& nets,
                      const nlohmann::json& metadata) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(nets.size()));
  for (const auto& [name, net] : nets) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.layer_dims().size()));
    for (std::size_t d : net.layer_dims()) put_le<std::uint64_t>(os, d);
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
      for (double x : net.weights()[k].values()) put_le<double>(os, x);
      for (double x : net.biases()[k].values()) put_le<double>(os, x);
    }
  }
  if (!os) throw IoError("failed writing checkpoint: " + path.string());

  std::ofstream meta(sidecar(path), std::ios::trunc);
  if (!meta) throw IoError("cannot open checkpoint metadata for writing: " + sidecar(path).string());
  meta << metadata.dump(2) << '\n';
}

std::vector<NamedNet> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("checkpoint " + path.string() + ": bad magic bytes");
  }
  const auto count = get_le<std::uint32_t>(is, path);
  std::vector<NamedNet> nets;
  nets.reserve(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto name_len = get_le<std::uint32_t>(is, path);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw IoError("checkpoint " + path.string() + ": truncated name");
    const auto ndims = get_le<std::uint32_t>(is, path);
    std::vector<std::size_t> dims(ndims);
    for (auto& d : dims) d = static_cast<std::size_t>(get_le<std::uint64_t>(is, path));
    MlpNet net(dims);
    auto& w = net.mutable_weights();
    auto& b = net.mutable_biases();
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
      for (double& x : w[k].values()) x = get_le<double>(is, path);
      for (double& x : b[k].values()) x = get_le<double>(is, path);
    }
    nets.push_back({std::move(name), std::move(net)});
  }
  return nets;
}

nlohmann::json read_checkpoint_metadata(const std::filesystem::path& path) {
  std::ifstream is(sidecar(path));
  if (!is) throw IoError("cannot open checkpoint metadata: " + sidecar(path).string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint metadata " + sidecar(path).string() + ": " + e.what());
  }
}

const MlpNet& find_net(const std::vector<NamedNet>& nets, const std::string& name) {
  for (const auto& n : nets) {
    if (n.name == name) return n.net;
  }
  throw DataError("checkpoint has no network named '" + name + "'");
}

}  // namespace disentangle
