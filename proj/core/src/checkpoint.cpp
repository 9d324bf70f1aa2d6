#include "edgemig/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "edgemig/error.hpp"

namespace edgemig::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written in host order, which must be little-endian");

constexpr char kMagic[8] = {'E', 'D', 'G', 'M', 'C', 'K', 'P', 'T'};

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const ParamStore& params) {
  nlohmann::json manifest;
  manifest["format"] = "edgemig-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["params"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    manifest["params"].push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", offset}});
    offset += p.value.size();
  }
  manifest["total_values"] = offset;

  std::ofstream bin(with_ext(stem, ".bin"), std::ios::binary);
  if (!bin) throw Error(Errc::IoError, "cannot write " + with_ext(stem, ".bin").string());
  bin.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kCheckpointVersion;
  bin.write(reinterpret_cast<const char*>(&version), sizeof(version));
  bin.write(reinterpret_cast<const char*>(&offset), sizeof(offset));
  for (const auto& p : params)
    bin.write(reinterpret_cast<const char*>(p.value.values().data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  if (!bin) throw Error(Errc::IoError, "write failed: " + with_ext(stem, ".bin").string());

  std::ofstream js(with_ext(stem, ".json"));
  if (!js) throw Error(Errc::IoError, "cannot write " + with_ext(stem, ".json").string());
  js << manifest.dump(2) << '\n';
}

void load_checkpoint(const std::filesystem::path& stem, ParamStore& params) {
  std::ifstream js(with_ext(stem, ".json"));
  if (!js) throw Error(Errc::IoError, "cannot open " + with_ext(stem, ".json").string());
  nlohmann::json manifest;
  try {
    js >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadCheckpoint, e.what());
  }
  if (manifest.value("version", 0u) != kCheckpointVersion)
    throw Error(Errc::BadCheckpoint, "unsupported checkpoint version");
  const auto& entries = manifest.at("params");
  if (entries.size() != params.size())
    throw Error(Errc::BadCheckpoint, "parameter count differs from the network");

  std::ifstream bin(with_ext(stem, ".bin"), std::ios::binary);
  if (!bin) throw Error(Errc::IoError, "cannot open " + with_ext(stem, ".bin").string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t total = 0;
  bin.read(magic, sizeof(magic));
  bin.read(reinterpret_cast<char*>(&version), sizeof(version));
  bin.read(reinterpret_cast<char*>(&total), sizeof(total));
  if (!bin || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || version != kCheckpointVersion)
    throw Error(Errc::BadCheckpoint, "bad blob header");
  std::vector<double> blob(total);
  bin.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(total * sizeof(double)));
  if (!bin) throw Error(Errc::BadCheckpoint, "truncated blob");

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto& e = entries[i];
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    const auto off = e.at("offset").get<std::uint64_t>();
    if (e.at("name").get<std::string>() != p.name || shape != p.value.shape() ||
        off + p.value.size() > total)
      throw Error(Errc::BadCheckpoint, "layout mismatch at " + p.name);
    std::copy_n(blob.begin() + static_cast<std::ptrdiff_t>(off), p.value.size(),
                p.value.values().begin());
  }
}

}  // namespace edgemig::nn
