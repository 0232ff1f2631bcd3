#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mssit/common.hpp"
#include "mssit/icosphere.hpp"
#include "mssit/patching.hpp"
#include "mssit/tensor/tensor.hpp"

namespace mssit {

// All on-disk formats are little-endian with fixed-width fields. The helpers
// below assume a little-endian host.

namespace io {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open for writing: " + path);
    path_ = path;
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  template <typename V>
  void value(V v) {
    bytes(&v, sizeof(V));
  }
  void magic(const char tag[5]) { bytes(tag, 4); }
  void close() {
    out_.close();
    if (!out_) throw DataError("write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open: " + path);
    path_ = path;
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), n);
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw DataError("truncated file: " + path_);
  }
  template <typename V>
  V value() {
    V v;
    bytes(&v, sizeof(V));
    return v;
  }
  void expect_magic(const char tag[5]) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, tag, 4) != 0)
      throw DataError("bad magic in " + path_ + ": expected " + tag);
  }
  bool at_eof() { return in_.peek() == std::ifstream::traits_type::eof(); }
  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
};

// Write to <path>.tmp then rename, so partial writes never corrupt a
// checkpoint or dataset file.
template <typename Fn>
void atomic_write(const std::string& path, Fn&& fill) {
  const std::string tmp = path + ".tmp";
  {
    Writer w(tmp);
    fill(w);
    w.close();
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace io

// --- ICOS: mesh export ------------------------------------------------------

inline void write_mesh(const std::string& path, const Icosphere& ico) {
  io::atomic_write(path, [&](io::Writer& w) {
    w.magic("ICOS");
    w.value<std::uint32_t>(static_cast<std::uint32_t>(ico.level));
    w.value<std::uint64_t>(ico.vertex_count());
    for (const Vec3& v : ico.vertices) {
      w.value<double>(v.x);
      w.value<double>(v.y);
      w.value<double>(v.z);
    }
    w.value<std::uint64_t>(ico.face_count());
    for (const auto& f : ico.faces)
      for (std::uint32_t idx : f) w.value<std::uint32_t>(idx);
  });
}

inline Icosphere read_mesh(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("ICOS");
  Icosphere ico;
  ico.level = static_cast<int>(r.value<std::uint32_t>());
  const auto nv = r.value<std::uint64_t>();
  ico.vertices.resize(nv);
  for (auto& v : ico.vertices) {
    v.x = r.value<double>();
    v.y = r.value<double>();
    v.z = r.value<double>();
  }
  const auto nf = r.value<std::uint64_t>();
  ico.faces.resize(nf);
  for (auto& f : ico.faces)
    for (int k = 0; k < 3; ++k) f[k] = r.value<std::uint32_t>();
  return ico;
}

// --- PMAP: index-table export -----------------------------------------------
// Sequence of tables: u32 id, u32 rank, u64 dims[rank], u32 payload
// (row-major). Ids: 1 patch_vertices [20480x6]; 10+l window_id[l];
// 20 window_size[4]; 21 shift_offset[4]; 22 level_length[4].

inline void write_patch_maps(const std::string& path, const PatchMaps& maps) {
  io::atomic_write(path, [&](io::Writer& w) {
    w.magic("PMAP");
    auto table = [&](std::uint32_t id, const std::vector<std::uint64_t>& dims,
                     const std::uint32_t* payload, std::size_t n) {
      w.value<std::uint32_t>(id);
      w.value<std::uint32_t>(static_cast<std::uint32_t>(dims.size()));
      for (auto d : dims) w.value<std::uint64_t>(d);
      w.bytes(payload, n * sizeof(std::uint32_t));
    };
    std::vector<std::uint32_t> pv;
    pv.reserve(maps.patch_vertices.size() * 6);
    for (const auto& row : maps.patch_vertices)
      pv.insert(pv.end(), row.begin(), row.end());
    table(1, {maps.patch_vertices.size(), 6}, pv.data(), pv.size());
    for (int l = 1; l <= 4; ++l)
      table(10 + l, {maps.window_id[l].size()}, maps.window_id[l].data(),
            maps.window_id[l].size());
    std::uint32_t scalars[4];
    auto scalar_table = [&](std::uint32_t id, const std::array<int, 5>& src) {
      for (int l = 1; l <= 4; ++l) scalars[l - 1] = static_cast<std::uint32_t>(src[l]);
      table(id, {4}, scalars, 4);
    };
    scalar_table(20, maps.window_size);
    scalar_table(21, maps.shift_offset);
    scalar_table(22, maps.level_length);
  });
}

inline PatchMaps read_patch_maps(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("PMAP");
  PatchMaps maps;
  while (!r.at_eof()) {
    const auto id = r.value<std::uint32_t>();
    const auto rank = r.value<std::uint32_t>();
    std::vector<std::uint64_t> dims(rank);
    std::size_t n = 1;
    for (auto& d : dims) {
      d = r.value<std::uint64_t>();
      n *= d;
    }
    std::vector<std::uint32_t> payload(n);
    r.bytes(payload.data(), n * sizeof(std::uint32_t));
    if (id == 1) {
      require(rank == 2 && dims[1] == 6, "PMAP: bad patch table dims");
      maps.patch_vertices.resize(dims[0]);
      for (std::size_t i = 0; i < dims[0]; ++i)
        for (int k = 0; k < 6; ++k) maps.patch_vertices[i][k] = payload[i * 6 + k];
    } else if (id >= 11 && id <= 14) {
      maps.window_id[id - 10].assign(payload.begin(), payload.end());
    } else if (id >= 20 && id <= 22) {
      auto& dst = id == 20 ? maps.window_size : id == 21 ? maps.shift_offset
                                                         : maps.level_length;
      for (int l = 1; l <= 4; ++l) dst[l] = static_cast<int>(payload[l - 1]);
    } else {
      throw DataError("PMAP: unknown table id " + std::to_string(id));
    }
  }
  if (maps.window_size[1] > 0)
    maps.shift_fraction =
        static_cast<double>(maps.shift_offset[1]) / maps.window_size[1];
  return maps;
}

// --- SURF / LABL / SCAL: per-vertex data ------------------------------------

inline void write_surface(const std::string& path, const std::vector<float>& data,
                          std::size_t vertex_count, std::size_t channels) {
  require(data.size() == vertex_count * channels, "write_surface: shape mismatch");
  io::atomic_write(path, [&](io::Writer& w) {
    w.magic("SURF");
    w.value<std::uint64_t>(vertex_count);
    w.value<std::uint32_t>(static_cast<std::uint32_t>(channels));
    w.bytes(data.data(), data.size() * sizeof(float));
  });
}

struct Surface {
  std::size_t vertex_count = 0;
  std::size_t channels = 0;
  std::vector<float> data;  // row-major [vertex_count x channels]
};

inline Surface read_surface(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("SURF");
  Surface s;
  s.vertex_count = r.value<std::uint64_t>();
  s.channels = r.value<std::uint32_t>();
  s.data.resize(s.vertex_count * s.channels);
  r.bytes(s.data.data(), s.data.size() * sizeof(float));
  return s;
}

inline void write_labels(const std::string& path, const std::vector<std::uint32_t>& labels) {
  io::atomic_write(path, [&](io::Writer& w) {
    w.magic("LABL");
    w.value<std::uint64_t>(labels.size());
    w.bytes(labels.data(), labels.size() * sizeof(std::uint32_t));
  });
}

inline std::vector<std::uint32_t> read_labels(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("LABL");
  std::vector<std::uint32_t> labels(r.value<std::uint64_t>());
  r.bytes(labels.data(), labels.size() * sizeof(std::uint32_t));
  return labels;
}

inline void write_scalars(const std::string& path, const std::vector<float>& values) {
  io::atomic_write(path, [&](io::Writer& w) {
    w.magic("SCAL");
    w.value<std::uint64_t>(values.size());
    w.bytes(values.data(), values.size() * sizeof(float));
  });
}

inline std::vector<float> read_scalars(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("SCAL");
  std::vector<float> values(r.value<std::uint64_t>());
  r.bytes(values.data(), values.size() * sizeof(float));
  return values;
}

// --- MSWT: named-tensor checkpoint ------------------------------------------
// Magic, u32 version, then records until EOF:
// u32 name length, name bytes, u8 dtype (0 f32 / 1 f64), u32 rank,
// u64 dims[rank], payload.

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
void write_checkpoint(const std::string& path, const std::vector<NamedTensor<T>>& items) {
  io::atomic_write(path, [&](io::Writer& w) {
    w.magic("MSWT");
    w.value<std::uint32_t>(1);
    for (const auto& [name, t] : items) {
      w.value<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
      w.bytes(name.data(), name.size());
      w.value<std::uint8_t>(std::is_same_v<T, float> ? 0 : 1);
      w.value<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
      for (std::size_t d : t.shape()) w.value<std::uint64_t>(d);
      if constexpr (std::is_same_v<T, float>)
        w.bytes(t.data(), t.numel() * sizeof(float));
      else
        w.bytes(t.data(), t.numel() * sizeof(double));
    }
  });
}

// Reads a checkpoint into precision T, converting f32<->f64 records as needed.
template <typename T>
std::vector<NamedTensor<T>> read_checkpoint(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("MSWT");
  const auto version = r.value<std::uint32_t>();
  if (version != 1) throw DataError("unsupported checkpoint version in " + path);
  std::vector<NamedTensor<T>> items;
  while (!r.at_eof()) {
    const auto name_len = r.value<std::uint32_t>();
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len);
    const auto dtype = r.value<std::uint8_t>();
    const auto rank = r.value<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.value<std::uint64_t>();
    const std::size_t n = shape_numel(shape);
    std::vector<T> values(n);
    if (dtype == 0) {
      std::vector<float> raw(n);
      r.bytes(raw.data(), n * sizeof(float));
      for (std::size_t i = 0; i < n; ++i) values[i] = static_cast<T>(raw[i]);
    } else if (dtype == 1) {
      std::vector<double> raw(n);
      r.bytes(raw.data(), n * sizeof(double));
      for (std::size_t i = 0; i < n; ++i) values[i] = static_cast<T>(raw[i]);
    } else {
      throw DataError("unknown dtype in " + path);
    }
    items.push_back({std::move(name), Tensor<T>::from(std::move(shape), std::move(values))});
  }
  return items;
}

// --- Key-value config files ---------------------------------------------------
// `key = value` lines, '#' comments. Serialisation preserves insertion order
// so the config hash is stable.

class KeyValueFile {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : items_)
      if (k == key) {
        v = value;
        return;
      }
    items_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    set(key, os.str());
  }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }

  bool has(const std::string& key) const {
    for (const auto& [k, v] : items_)
      if (k == key) return true;
    return false;
  }
  const std::string& get(const std::string& key) const {
    for (const auto& [k, v] : items_)
      if (k == key) return v;
    throw DataError("missing config key: " + key);
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }
  double get_double(const std::string& key) const { return std::stod(get(key)); }
  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }
  long get_int(const std::string& key) const { return std::stol(get(key)); }
  long get_int_or(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : items_) out += k + " = " + v + "\n";
    return out;
  }
  std::uint64_t hash() const { return fnv1a64(serialize()); }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << serialize();
  }

  static KeyValueFile parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!key.empty()) kv.set(key, value);
    }
    return kv;
  }

  static KeyValueFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

// --- CSV helpers ----------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace mssit
