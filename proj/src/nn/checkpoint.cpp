// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "prunekit/core/error.hpp"

namespace prunekit::nn {

namespace {

constexpr char kMagic[8] = {'P', 'K', 'C', 'K', 'P', 'T', '\0', '\0'};
constexpr std::uint64_t kVersion = 1;

enum class Tag : std::uint64_t { dense = 1, conv2d = 2, relu = 3, flatten = 4 };

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u64(std::uint64_t v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(b.data(), 8);
  }
  void real(Real v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void tensor(const Tensor& t) {
    for (Real v : t.values()) real(v);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t u64() {
    std::array<unsigned char, 8> b;
    read(b.data(), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  Real real() { return std::bit_cast<Real>(u64()); }
  void read(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("truncated checkpoint", offset_);
    offset_ += n;
  }
  void tensor(Tensor& t) {
    for (auto& v : t.values()) v = real();
  }
  std::size_t bounded(std::uint64_t limit, const char* what) {
    const std::size_t at = offset_;
    const std::uint64_t v = u64();
    if (v > limit) throw FormatError(std::string("implausible ") + what, at);
    return static_cast<std::size_t>(v);
  }
  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  Writer w(out);
  const Network& net = ckpt.network;
  w.bytes(kMagic, sizeof kMagic);
  w.u64(kVersion);
  w.u64(net.input_shape().size());
  for (auto d : net.input_shape()) w.u64(d);
  w.u64(net.layers().size());
  for (const Layer& layer : net.layers()) {
    if (const auto* d = std::get_if<Dense>(&layer.spec())) {
      w.u64(static_cast<std::uint64_t>(Tag::dense));
      w.u64(d->n_in);
      w.u64(d->n_out);
      w.u64(d->has_bias);
    } else if (const auto* c = std::get_if<Conv2D>(&layer.spec())) {
      w.u64(static_cast<std::uint64_t>(Tag::conv2d));
      for (auto v : {c->c_in, c->c_out, c->k_h, c->k_w, c->stride, c->padding}) w.u64(v);
      w.u64(c->has_bias);
    } else if (std::holds_alternative<ReLU>(layer.spec())) {
      w.u64(static_cast<std::uint64_t>(Tag::relu));
    } else {
      w.u64(static_cast<std::uint64_t>(Tag::flatten));
    }
  }
  for (const Parameter* p : net.parameters()) {
    w.u64(p->prunable);
    w.tensor(p->value);
    w.tensor(p->momentum);
    w.u64(p->mask.has_value());
    if (p->mask) w.bytes(p->mask->data(), p->mask->size());
  }
  w.u64(net.mask_mode() == MaskMode::soft);
  w.u64(ckpt.step);
  w.u64(ckpt.cycle);
  w.u64(ckpt.rng_state.size());
  w.bytes(ckpt.rng_state.data(), ckpt.rng_state.size());
  if (!out) throw Error("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError("not a prunekit checkpoint", 0);
  if (const auto at = r.offset(); r.u64() != kVersion) throw FormatError("unsupported checkpoint version", at);

  Shape input(r.bounded(8, "input rank"));
  for (auto& d : input) d = r.bounded(kMaxDim, "input dimension");
  std::vector<LayerSpec> specs(r.bounded(1 << 16, "layer count"));
  for (auto& spec : specs) {
    const std::size_t at = r.offset();
    switch (static_cast<Tag>(r.u64())) {
      case Tag::dense: {
        Dense d;
        d.n_in = r.bounded(kMaxDim, "dense size");
        d.n_out = r.bounded(kMaxDim, "dense size");
        d.has_bias = r.u64() != 0;
        spec = d;
        break;
      }
      case Tag::conv2d: {
        Conv2D c;
        for (auto* v : {&c.c_in, &c.c_out, &c.k_h, &c.k_w, &c.stride, &c.padding}) *v = r.bounded(kMaxDim, "conv field");
        c.has_bias = r.u64() != 0;
        spec = c;
        break;
      }
      case Tag::relu:
        spec = ReLU{};
        break;
      case Tag::flatten:
        spec = Flatten{};
        break;
      default:
        throw FormatError("unknown layer tag", at);
    }
  }
  Checkpoint ckpt;
  try {
    ckpt.network = Network(std::move(input), std::move(specs));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("inconsistent architecture: ") + e.what(), r.offset());
  }
  for (Parameter* p : ckpt.network.parameters()) {
    p->prunable = r.u64() != 0;
    r.tensor(p->value);
    r.tensor(p->momentum);
    if (r.u64() != 0) {
      p->mask.emplace(p->size());
      r.read(p->mask->data(), p->size());
    }
  }
  ckpt.network.set_mask_mode(r.u64() ? MaskMode::soft : MaskMode::hard);
  ckpt.step = r.u64();
  ckpt.cycle = r.u64();
  ckpt.rng_state.resize(r.bounded(1 << 20, "rng state length"));
  r.read(ckpt.rng_state.data(), ckpt.rng_state.size());
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace prunekit::nn
