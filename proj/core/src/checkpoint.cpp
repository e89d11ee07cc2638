#include "ensq/checkpoint.hpp"

#include <cstring>
#include <stdexcept>
#include <string>

#include "ensq/gradients.hpp"
#include "ensq/io_util.hpp"

namespace ensq {

namespace {

constexpr char kMagic[8] = {'E', 'N', 'S', 'Q', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void put_f64(std::string& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

class Reader {
 public:
  Reader(const std::string& data, std::string origin)
      : data_(data), origin_(std::move(origin)) {}

  std::uint32_t u32() {
    std::uint32_t v;
    take(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    take(&v, 8);
    return v;
  }
  double f64() {
    double v;
    take(&v, 8);
    return v;
  }
  void bytes(void* dst, std::size_t n) { take(dst, n); }
  bool exhausted() const { return pos_ == data_.size(); }
  void fail(const std::string& why) const {
    throw std::runtime_error(origin_ + ": " + why);
  }

 private:
  void take(void* dst, std::size_t n) {
    if (pos_ + n > data_.size()) fail("truncated checkpoint");
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }
  const std::string& data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const EnsembleParams& params, const std::filesystem::path& path) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);

  const ArchitectureConfig& arch = params.arch;
  put_u32(out, static_cast<std::uint32_t>(arch.input_dim));
  put_u32(out, static_cast<std::uint32_t>(arch.shared_widths.size()));
  for (int w : arch.shared_widths) put_u32(out, static_cast<std::uint32_t>(w));
  const std::vector<int> head_widths = arch.effective_head_widths();
  put_u32(out, static_cast<std::uint32_t>(head_widths.size()));
  for (int w : head_widths) put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(arch.num_heads));
  put_u64(out, params.init_seed);

  for (double v : params.run_mean) put_f64(out, v);
  for (double v : params.run_var) put_f64(out, v);
  for (const auto& [name, values] : param_tensors(params)) {
    for (double v : values) put_f64(out, v);
  }
  write_file_atomic(path, out);
}

EnsembleParams load_checkpoint(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  Reader reader(data, path.string());

  char magic[8];
  reader.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) reader.fail("not an ensq checkpoint");
  const std::uint32_t version = reader.u32();
  if (version != kVersion) {
    reader.fail("unsupported checkpoint version " + std::to_string(version));
  }

  ArchitectureConfig arch;
  arch.input_dim = static_cast<int>(reader.u32());
  arch.shared_widths.resize(reader.u32());
  for (int& w : arch.shared_widths) w = static_cast<int>(reader.u32());
  arch.head_widths.resize(reader.u32());
  for (int& w : arch.head_widths) w = static_cast<int>(reader.u32());
  arch.num_heads = static_cast<int>(reader.u32());

  EnsembleParams params = make_skeleton(arch);
  params.init_seed = reader.u64();
  for (double& v : params.run_mean) v = reader.f64();
  for (double& v : params.run_var) v = reader.f64();
  for (auto& [name, values] : param_tensors(params)) {
    for (double& v : values) v = reader.f64();
  }
  if (!reader.exhausted()) reader.fail("trailing bytes after checkpoint payload");
  return params;
}

}  // namespace ensq
