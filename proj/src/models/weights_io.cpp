#include "vfer/models/weights_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "vfer/core/errors.hpp"

namespace vfer::models {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "weight files are little-endian");

namespace {

constexpr char kMagic[8] = {'V', 'F', 'E', 'R', 'W', 'T', 'S', '1'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ofstream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open weight file " + path.string());
  }

  template <typename T>
  T get() {
    T value{};
    read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    if (n > (1u << 24)) fail("string length out of range");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  [[noreturn]] void fail(const std::string& why) const { throw LoadError(path_.string() + ": " + why); }

 private:
  fs::path path_;
  std::ifstream in_;
};

void copy_checked(const std::string& name, const Tensor& src, Tensor& dst) {
  if (src.shape() != dst.shape()) {
    throw LoadError("shape mismatch for '" + name + "': file has " + shape_string(src.shape()) + ", model expects " +
                    shape_string(dst.shape()));
  }
  dst = src;
}

}  // namespace

const Tensor* WeightFile::find(const std::string& name) const {
  for (const auto& [key, value] : arrays) {
    if (key == name) return &value;
  }
  return nullptr;
}

void write_weight_file(const fs::path& path, const WeightFile& file) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write weight file " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.metadata.size()));
  for (const auto& [key, value] : file.metadata) {
    put_string(out, key);
    put_string(out, value);
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.arrays.size()));
  for (const auto& [name, tensor] : file.arrays) {
    put_string(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t d : tensor.shape()) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(tensor.data()), static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

WeightFile read_weight_file(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("weight file not found: " + path.string());
  Reader in(path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) in.fail("not a weight file (bad magic)");
  WeightFile file;
  const auto meta_count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string key = in.get_string();
    file.metadata[std::move(key)] = in.get_string();
  }
  const auto array_count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < array_count; ++i) {
    std::string name = in.get_string();
    const auto rank = in.get<std::uint32_t>();
    if (rank > 8) in.fail("rank out of range for '" + name + "'");
    Shape shape(rank);
    std::uint64_t count = 1;
    for (auto& d : shape) {
      const auto dim = in.get<std::uint64_t>();
      count *= dim;
      if (count > kMaxElements) in.fail("array too large: '" + name + "'");
      d = static_cast<std::size_t>(dim);
    }
    Tensor tensor(shape);
    in.read(reinterpret_cast<char*>(tensor.data()), tensor.size() * sizeof(double));
    file.arrays.emplace_back(std::move(name), std::move(tensor));
  }
  if (!in.at_end()) in.fail("trailing bytes after last array");
  return file;
}

bool is_classifier_array(const std::string& name) noexcept {
  return name == "fc" || name.rfind("fc.", 0) == 0;
}

LoadReport load_backbone_weights(ModelBundle& model, const fs::path& path) {
  const WeightFile file = read_weight_file(path);
  ParameterList params = model.backbone_parameters();
  std::unordered_map<std::string, Parameter*> by_name;
  for (auto& p : params) by_name.emplace(p.name, p.param);

  // Validate every shape before mutating anything.
  LoadReport report;
  std::vector<std::pair<const Tensor*, Parameter*>> plan;
  for (const auto& [name, tensor] : file.arrays) {
    if (is_classifier_array(name)) {
      report.skipped.push_back(name);
      continue;
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      report.skipped.push_back(name);
      continue;
    }
    if (tensor.shape() != it->second->value.shape()) {
      throw LoadError("shape mismatch for '" + name + "': file has " + shape_string(tensor.shape()) +
                      ", backbone expects " + shape_string(it->second->value.shape()));
    }
    plan.emplace_back(&tensor, it->second);
    by_name.erase(it);
  }
  for (auto& [src, dst] : plan) dst->value = *src;
  report.matched = plan.size();
  for (const auto& p : params) {
    if (by_name.count(p.name) != 0) report.missing.push_back(p.name);
  }
  return report;
}

void save_backbone_weights(ModelBundle& model, const fs::path& path) {
  WeightFile file;
  file.metadata["kind"] = "backbone";
  file.metadata["architecture"] = std::string(arch_name(model.backbone_config().architecture));
  for (auto& p : model.backbone_parameters()) file.arrays.emplace_back(p.name, p.param->value);
  write_weight_file(path, file);
}

WeightFile model_weights(ModelBundle& model) {
  WeightFile file;
  file.metadata["kind"] = "model";
  file.metadata["fingerprint"] = model.fingerprint();
  file.metadata["config"] = model.canonical_config();
  for (auto& p : model.parameters()) file.arrays.emplace_back(p.name, p.param->value);
  return file;
}

void save_model_weights(ModelBundle& model, const fs::path& path) { write_weight_file(path, model_weights(model)); }

void assign_model_weights(ModelBundle& model, const WeightFile& file) {
  ParameterList params = model.parameters();
  for (auto& p : params) {
    const Tensor* src = file.find(p.name);
    if (src == nullptr) throw LoadError("missing array '" + p.name + "'");
    if (src->shape() != p.param->value.shape()) {
      throw LoadError("shape mismatch for '" + p.name + "': file has " + shape_string(src->shape()) +
                      ", model expects " + shape_string(p.param->value.shape()));
    }
  }
  for (auto& p : params) copy_checked(p.name, *file.find(p.name), p.param->value);
}

void load_model_weights(ModelBundle& model, const fs::path& path, bool ignore_fingerprint) {
  const WeightFile file = read_weight_file(path);
  const auto it = file.metadata.find("fingerprint");
  const std::string stored = it == file.metadata.end() ? "" : it->second;
  if (!ignore_fingerprint && stored != model.fingerprint()) {
    throw FingerprintMismatchError("config fingerprint mismatch: file " + stored + ", current config " +
                                   model.fingerprint());
  }
  assign_model_weights(model, file);
}

}  // namespace vfer::models
