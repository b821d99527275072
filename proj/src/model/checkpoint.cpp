// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/model/checkpoint.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace s2f::model {
namespace {

constexpr char kMagic[8] = {'S', '2', 'F', 'N', 'E', 'T', 'C', 'K'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written as raw little-endian scalars");

class Writer {
 public:
  template <typename U>
  void pod(U v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(U));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  template <typename U>
  U pod() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, b_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  const std::uint8_t* take(std::size_t n) {
    need(n);
    const std::uint8_t* p = b_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > b_.size() - pos_) throw CheckpointError("checkpoint truncated");
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::string fmt_hash(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::uint32_t crc32_of(const std::uint8_t* p, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(0L, p, static_cast<uInt>(n)));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Parsed {
  CheckpointInfo info;
  std::vector<const std::uint8_t*> payloads;
};

// Validates framing and CRC; payload pointers alias `bytes`.
Parsed parse(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() < sizeof(kMagic) + 4 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw CheckpointError(name + ": not a checkpoint (bad magic)");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (crc32_of(bytes.data(), body) != stored)
    throw CheckpointError(name + ": checksum mismatch (corrupt or modified file)");
  Reader r(bytes.first(body));
  r.take(8);
  Parsed p;
  CheckpointInfo& info = p.info;
  info.version = r.pod<std::uint32_t>();
  if (info.version != kCheckpointVersion)
    throw CheckpointError(name + ": unsupported checkpoint version " +
                          std::to_string(info.version));
  info.scalar_bytes = r.pod<std::uint32_t>();
  if (info.scalar_bytes != 4 && info.scalar_bytes != 8)
    throw CheckpointError(name + ": bad scalar width");
  info.config_hash = r.pod<std::uint64_t>();
  const std::string text = r.str();
  try {
    info.config = ModelConfig::from_text(text);
    info.ablation = parse_ablation(r.str());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(name + ": " + e.what());
  }
  if (info.config.hash() != info.config_hash)
    throw CheckpointError(name + ": config hash does not match stored config");
  const auto count = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorMeta m;
    m.name = r.str();
    m.buffer = r.pod<std::uint8_t>() != 0;
    const auto rank = r.pod<std::uint32_t>();
    if (rank > 8) throw CheckpointError(name + ": bad tensor rank");
    for (std::uint32_t d = 0; d < rank; ++d) m.shape.push_back(r.pod<std::uint64_t>());
    const std::size_t n = shape_numel(m.shape);
    p.payloads.push_back(r.take(n * info.scalar_bytes));
    if (!m.buffer) info.parameter_count += n;
    info.tensors.push_back(std::move(m));
  }
  if (r.pos() != body) throw CheckpointError(name + ": trailing bytes");
  return p;
}

nlohmann::json sidecar(const CheckpointInfo& info) {
  nlohmann::json j;
  j["format"] = "s2fnet-checkpoint";
  j["version"] = info.version;
  j["precision"] = info.scalar_bytes == 4 ? "float32" : "float64";
  j["config_hash"] = fmt_hash(info.config_hash);
  const ModelConfig& c = info.config;
  j["model"] = {{"view_size", c.view_size},
                {"groups", c.groups},
                {"alpha", c.alpha},
                {"energy_norm", c.energy_norm},
                {"mask_mode", lfa::mask_mode_name(c.mask_mode)}};
  j["ablation"] = ablation_name(info.ablation);
  j["parameter_count"] = info.parameter_count;
  nlohmann::json ts = nlohmann::json::array();
  for (const TensorMeta& m : info.tensors)
    ts.push_back({{"name", m.name}, {"shape", m.shape}, {"kind", m.buffer ? "buffer" : "parameter"}});
  j["tensors"] = ts;
  return j;
}

}  // namespace

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(Detector<T>& model) {
  Writer w;
  w.raw(kMagic, 8);
  w.pod(kCheckpointVersion);
  w.pod(static_cast<std::uint32_t>(sizeof(T)));
  w.pod(model.config().hash());
  w.str(model.config().to_text());
  w.str(ablation_name(model.ablation()));
  auto params = model.named_parameters();
  auto buffers = model.named_buffers();
  w.pod(static_cast<std::uint32_t>(params.size() + buffers.size()));
  auto put = [&](const NamedTensor<T>& nt, bool buffer) {
    w.str(nt.name);
    w.pod(static_cast<std::uint8_t>(buffer));
    w.pod(static_cast<std::uint32_t>(nt.tensor.rank()));
    for (std::size_t d : nt.tensor.shape()) w.pod(static_cast<std::uint64_t>(d));
    w.raw(nt.tensor.ptr(), nt.tensor.numel() * sizeof(T));
  };
  for (const auto& nt : params) put(nt, false);
  for (const auto& nt : buffers) put(nt, true);
  std::vector<std::uint8_t>& b = w.bytes();
  w.pod(crc32_of(b.data(), b.size()));
  return std::move(w.bytes());
}

template <typename T>
void save_checkpoint(Detector<T>& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(model);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write failed: " + path.string());
  }
  const CheckpointInfo info = parse(bytes, path.string()).info;
  std::ofstream js(path.string() + ".json");
  js << sidecar(info).dump(2) << '\n';
}

template <typename T>
void load_into(Detector<T>& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  const Parsed p = parse(bytes, path.string());
  if (p.info.scalar_bytes != sizeof(T))
    throw CheckpointError(path.string() + ": stored precision differs from the model's");
  if (p.info.config_hash != model.config().hash())
    throw CheckpointError(path.string() + ": config hash " + fmt_hash(p.info.config_hash) +
                          " does not match model config hash " +
                          fmt_hash(model.config().hash()));
  auto params = model.named_parameters();
  auto buffers = model.named_buffers();
  if (p.info.tensors.size() != params.size() + buffers.size())
    throw CheckpointError(path.string() + ": tensor count mismatch");
  for (std::size_t i = 0; i < p.info.tensors.size(); ++i) {
    const TensorMeta& m = p.info.tensors[i];
    const bool is_buf = i >= params.size();
    NamedTensor<T>& dst = is_buf ? buffers[i - params.size()] : params[i];
    if (m.name != dst.name || m.buffer != is_buf || m.shape != dst.tensor.shape())
      throw CheckpointError(path.string() + ": unexpected tensor '" + m.name + "' " +
                            shape_str(m.shape) + ", expected '" + dst.name + "' " +
                            shape_str(dst.tensor.shape()));
    std::memcpy(dst.tensor.ptr(), p.payloads[i], dst.tensor.numel() * sizeof(T));
  }
  model.set_ablation(p.info.ablation);
}

template <typename T>
Detector<T> load_checkpoint(const std::filesystem::path& path) {
  const CheckpointInfo info = read_checkpoint_info(path);
  Detector<T> model = Detector<T>::make(info.config, 0);
  load_into(model, path);
  return model;
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  return parse(bytes, path.string()).info;
}

template std::vector<std::uint8_t> serialize_checkpoint<float>(Detector<float>&);
template std::vector<std::uint8_t> serialize_checkpoint<double>(Detector<double>&);
template void save_checkpoint<float>(Detector<float>&, const std::filesystem::path&);
template void save_checkpoint<double>(Detector<double>&, const std::filesystem::path&);
template void load_into<float>(Detector<float>&, const std::filesystem::path&);
template void load_into<double>(Detector<double>&, const std::filesystem::path&);
template Detector<float> load_checkpoint<float>(const std::filesystem::path&);
template Detector<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace s2f::model
