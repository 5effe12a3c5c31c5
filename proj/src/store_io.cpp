#include "treegls/store_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "treegls/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "store files are little-endian; add byte swapping before porting");

namespace treegls {

namespace {

constexpr char kMagic[6] = {'T', 'G', 'L', 'S', '1', '\n'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_i32(std::string& out, std::int32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64(std::string& out, double v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_lower_triangle(std::string& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) put_f64(out, m(i, j));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  std::uint32_t u32() { return take<std::uint32_t>(); }
  std::int32_t i32() { return take<std::int32_t>(); }
  double f64() { return take<double>(); }

  std::string bytes(size_t count) {
    require(count);
    std::string out = data_.substr(pos_, count);
    pos_ += count;
    return out;
  }

  Matrix lower_triangle(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        m(i, j) = f64();
        m(j, i) = m(i, j);
      }
    }
    return m;
  }

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  template <typename T>
  T take() {
    require(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void require(size_t count) {
    if (pos_ + count > data_.size()) throw IoError("store file truncated");
  }

  const std::string& data_;
  size_t pos_ = 0;
};

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path);
  return data;
}

void write_file_atomic(const std::string& path, const std::string& data) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed on " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot replace " + path + ": " + ec.message());
  }
}

void save_store(const StateStore& store, const std::vector<std::string>& names,
                const std::string& path) {
  const int v_count = store.tree.vertex_count();
  if (static_cast<int>(names.size()) != v_count) {
    throw DimensionMismatch("need one name per vertex: got " + std::to_string(names.size()) +
                            " for " + std::to_string(v_count));
  }

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(store.n));
  put_u32(out, static_cast<std::uint32_t>(v_count));
  put_u32(out, static_cast<std::uint32_t>(store.tree.root));
  for (int v = 0; v < v_count; ++v) put_i32(out, store.tree.parent[v]);
  for (int v = 0; v < v_count; ++v) {
    put_u32(out, static_cast<std::uint32_t>(names[v].size()));
    out.append(names[v]);
  }
  for (int v = 0; v < v_count; ++v) {
    const VertexState& s = store.states[v];
    for (int i = 0; i < store.n; ++i) put_f64(out, s.beta_final(i));
    put_lower_triangle(out, s.var_final);
    for (int i = 0; i < store.n; ++i) {
      for (int j = 0; j < store.n; ++j) put_f64(out, s.A(i, j));
    }
    put_lower_triangle(out, s.var_up);
  }
  write_file_atomic(path, out);
}

LoadedStore load_store(const std::string& path) {
  const std::string data = read_file(path);
  Reader r(data);
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw IoError(path + " is not a state store (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw IoError(path + ": unsupported store version " + std::to_string(version));
  }
  const int n = static_cast<int>(r.u32());
  const int v_count = static_cast<int>(r.u32());
  const int root = static_cast<int>(r.u32());

  std::vector<std::pair<VertexId, VertexId>> pairs;
  for (int v = 0; v < v_count; ++v) {
    const int parent = r.i32();
    if (parent >= 0) pairs.emplace_back(v, parent);
  }

  LoadedStore loaded;
  loaded.store.tree = build_tree(pairs, root);
  loaded.store.n = n;
  loaded.names.resize(v_count);
  for (int v = 0; v < v_count; ++v) loaded.names[v] = r.bytes(r.u32());

  loaded.store.states.resize(v_count);
  for (int v = 0; v < v_count; ++v) {
    VertexState& s = loaded.store.states[v];
    s.beta_final.resize(n);
    for (int i = 0; i < n; ++i) s.beta_final(i) = r.f64();
    s.var_final = r.lower_triangle(n);
    s.A.resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) s.A(i, j) = r.f64();
    }
    s.var_up = r.lower_triangle(n);
  }
  if (!r.exhausted()) throw IoError(path + ": trailing bytes after store payload");
  return loaded;
}

}  // namespace treegls
