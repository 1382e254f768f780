#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hullcraft/common.hpp"

namespace hullcraft {

// Single-file container of named double arrays plus a JSON manifest.
// Serves both the model-weight archives and the persisted poison sets.
// Layout (little-endian): magic "HCAR", u32 version, u64 manifest byte
// count, manifest JSON, u32 array count, then per array: u32 name
// length, name bytes, u32 ndim, u64 dims..., f64 payload.
class Archive {
 public:
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json manifest = nlohmann::json::object();

  void put(const std::string& name, const Vec& v) {
    arrays_[name] = {{static_cast<std::uint64_t>(v.size())},
                     std::vector<double>(v.data(), v.data() + v.size())};
  }

  void put(const std::string& name, const std::vector<double>& v,
           std::vector<std::uint64_t> dims = {}) {
    if (dims.empty()) dims = {static_cast<std::uint64_t>(v.size())};
    arrays_[name] = {std::move(dims), v};
  }

  bool has(const std::string& name) const { return arrays_.count(name) != 0; }

  Vec get_vec(const std::string& name) const {
    const auto& a = entry(name);
    Vec v(static_cast<Eigen::Index>(a.data.size()));
    std::memcpy(v.data(), a.data.data(), a.data.size() * sizeof(double));
    return v;
  }

  const std::vector<double>& get_raw(const std::string& name) const {
    return entry(name).data;
  }

  const std::vector<std::uint64_t>& dims(const std::string& name) const {
    return entry(name).dims;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(arrays_.size());
    for (const auto& [k, v] : arrays_) out.push_back(k);
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("archive: cannot open for writing: " + path);
    f.write("HCAR", 4);
    write_u32(f, kVersion);
    const std::string m = manifest.dump();
    write_u64(f, m.size());
    f.write(m.data(), static_cast<std::streamsize>(m.size()));
    write_u32(f, static_cast<std::uint32_t>(arrays_.size()));
    for (const auto& [name, a] : arrays_) {
      write_u32(f, static_cast<std::uint32_t>(name.size()));
      f.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_u32(f, static_cast<std::uint32_t>(a.dims.size()));
      for (auto d : a.dims) write_u64(f, d);
      f.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    }
    if (!f) throw ConfigError("archive: write failed: " + path);
  }

  static Archive load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("archive: cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "HCAR", 4) != 0)
      throw ConfigError("archive: bad magic in " + path);
    const std::uint32_t version = read_u32(f);
    if (version != kVersion)
      throw ConfigError("archive: unsupported version in " + path);
    Archive ar;
    const std::uint64_t mlen = read_u64(f);
    std::string m(mlen, '\0');
    f.read(m.data(), static_cast<std::streamsize>(mlen));
    ar.manifest = nlohmann::json::parse(m);
    const std::uint32_t count = read_u32(f);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t nlen = read_u32(f);
      std::string name(nlen, '\0');
      f.read(name.data(), nlen);
      const std::uint32_t ndim = read_u32(f);
      Entry e;
      std::uint64_t total = 1;
      for (std::uint32_t d = 0; d < ndim; ++d) {
        e.dims.push_back(read_u64(f));
        total *= e.dims.back();
      }
      e.data.resize(total);
      f.read(reinterpret_cast<char*>(e.data.data()),
             static_cast<std::streamsize>(total * sizeof(double)));
      ar.arrays_[name] = std::move(e);
    }
    if (!f) throw ConfigError("archive: truncated file: " + path);
    return ar;
  }

 private:
  struct Entry {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
  };

  const Entry& entry(const std::string& name) const {
    auto it = arrays_.find(name);
    if (it == arrays_.end()) throw ConfigError("archive: no array named " + name);
    return it->second;
  }

  static void write_u32(std::ofstream& f, std::uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  static void write_u64(std::ofstream& f, std::uint64_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  static std::uint32_t read_u32(std::ifstream& f) {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  }
  static std::uint64_t read_u64(std::ifstream& f) {
    std::uint64_t v = 0;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  }

  std::map<std::string, Entry> arrays_;
};

}  // namespace hullcraft
