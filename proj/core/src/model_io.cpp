#include "ecgprune/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ecgprune/errors.hpp"
#include "ecgprune/version.hpp"

namespace ecgprune {

namespace {

constexpr char kMagic[8] = {'E', 'C', 'G', 'P', 'R', 'U', 'N', 'E'};

struct Writer {
  std::vector<std::uint8_t> out;

  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void tensor(const Tensor& t) {
    u32(static_cast<std::uint32_t>(t.rank()));
    for (std::int64_t d : t.shape()) i64(d);
    for (std::int64_t i = 0; i < t.numel(); ++i) f64(t[i]);
  }

  void mask_bits(const Tensor& mask) {
    const std::int64_t n = mask.numel();
    u64(static_cast<std::uint64_t>(n));
    std::uint8_t byte = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      if (mask[i] != 0.0) byte |= static_cast<std::uint8_t>(1u << (i % 8));
      if (i % 8 == 7) {
        u8(byte);
        byte = 0;
      }
    }
    if (n % 8 != 0) u8(byte);
  }
};

struct Reader {
  const std::vector<std::uint8_t>& in;
  std::size_t pos = 0;

  void require(std::size_t n) {
    if (pos + n > in.size()) throw FormatError("truncated model file");
  }
  std::uint8_t u8() {
    require(1);
    return in[pos++];
  }
  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    require(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos++]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  Tensor tensor() {
    const std::uint32_t rank = u32();
    if (rank < 1 || rank > 3) throw FormatError("tensor rank out of range");
    std::vector<std::int64_t> shape(rank);
    std::int64_t numel = 1;
    for (auto& d : shape) {
      d = i64();
      if (d <= 0 || d > (1 << 24)) throw FormatError("tensor dim out of range");
      numel *= d;
    }
    require(static_cast<std::size_t>(numel) * 8);
    std::vector<double> data(static_cast<std::size_t>(numel));
    for (auto& v : data) v = f64();
    return Tensor(std::move(shape), std::move(data));
  }

  Tensor mask_bits(const std::vector<std::int64_t>& shape, std::int64_t expected_numel) {
    const std::uint64_t n = u64();
    if (static_cast<std::int64_t>(n) != expected_numel) {
      throw FormatError("mask bit count does not match weight tensor");
    }
    Tensor mask = Tensor::zeros(shape);
    std::uint8_t byte = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (i % 8 == 0) byte = u8();
      mask[static_cast<std::int64_t>(i)] = (byte >> (i % 8)) & 1u ? 1.0 : 0.0;
    }
    return mask;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kModelFormatVersion);
  w.u64(model.seed);
  w.u32(static_cast<std::uint32_t>(model.specs.size()));
  for (std::size_t i = 0; i < model.specs.size(); ++i) {
    const LayerSpec& spec = model.specs[i];
    w.u8(static_cast<std::uint8_t>(spec.kind));
    w.u8(spec.prunable ? 1 : 0);
    w.u8(spec.fused_relu ? 1 : 0);
    w.i64(spec.in_channels);
    w.i64(spec.out_channels);
    w.i64(spec.kernel);
    w.i64(spec.stride);
    const ParamGroup& group = model.params[i];
    w.u8(group.empty() ? 0 : 1);
    if (!group.empty()) {
      w.tensor(group.weight);
      w.tensor(group.bias);
      w.u8(group.mask.empty() ? 0 : 1);
      if (!group.mask.empty()) w.mask_bits(group.mask);
      w.u8(group.weight_trainable ? 1 : 0);
      w.u8(group.bias_trainable ? 1 : 0);
    }
  }
  w.u32(static_cast<std::uint32_t>(model.history.size()));
  for (const auto& e : model.history) {
    w.f64(e.train_loss);
    w.f64(e.val_loss);
    w.f64(e.val_accuracy);
  }
  return std::move(w.out);
}

Model deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  for (char c : kMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) {
      throw FormatError("not a model file (bad magic)");
    }
  }
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw VersionError("unsupported model format version " + std::to_string(version) +
                       " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  Model m;
  m.seed = r.u64();
  const std::uint32_t layer_count = r.u32();
  if (layer_count == 0 || layer_count > 1024) throw FormatError("layer count out of range");
  m.specs.resize(layer_count);
  m.params.resize(layer_count);
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    LayerSpec& spec = m.specs[i];
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(LayerKind::Dense)) {
      throw FormatError("unknown layer kind " + std::to_string(kind));
    }
    spec.kind = static_cast<LayerKind>(kind);
    spec.prunable = r.u8() != 0;
    spec.fused_relu = r.u8() != 0;
    spec.in_channels = r.i64();
    spec.out_channels = r.i64();
    spec.kernel = r.i64();
    spec.stride = r.i64();
    if (r.u8() != 0) {
      ParamGroup& group = m.params[i];
      group.weight = r.tensor();
      group.bias = r.tensor();
      if (spec.kind == LayerKind::Conv) {
        if (group.weight.rank() != 3 || group.weight.dim(0) != spec.out_channels ||
            group.weight.dim(1) != spec.in_channels || group.weight.dim(2) != spec.kernel) {
          throw ShapeError("conv weight " + shape_string(group.weight) +
                           " does not match layer geometry");
        }
      } else if (spec.kind == LayerKind::Dense) {
        if (group.weight.rank() != 2 || group.weight.dim(0) != spec.out_channels ||
            group.weight.dim(1) != spec.in_channels) {
          throw ShapeError("dense weight " + shape_string(group.weight) +
                           " does not match layer geometry");
        }
      } else {
        throw FormatError("parameters on a parameterless layer");
      }
      if (group.bias.rank() != 1 || group.bias.dim(0) != spec.out_channels) {
        throw ShapeError("bias " + shape_string(group.bias) + " does not match layer geometry");
      }
      if (r.u8() != 0) {
        group.mask = r.mask_bits(group.weight.shape(), group.weight.numel());
        for (std::int64_t j = 0; j < group.weight.numel(); ++j) {
          if (group.mask[j] == 0.0 && group.weight[j] != 0.0) {
            throw FormatError("masked weight stored nonzero (mask/weight coherence)");
          }
        }
      }
      group.weight_trainable = r.u8() != 0;
      group.bias_trainable = r.u8() != 0;
    }
  }
  const std::uint32_t history_count = r.u32();
  if (history_count > (1u << 24)) throw FormatError("history count out of range");
  m.history.resize(history_count);
  for (auto& e : m.history) {
    e.train_loss = r.f64();
    e.val_loss = r.f64();
    e.val_accuracy = r.f64();
  }
  if (r.pos != bytes.size()) throw FormatError("trailing bytes after model payload");
  return m;
}

void save_model(const Model& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace ecgprune
