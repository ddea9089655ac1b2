// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace forknet {

namespace {

constexpr char kMagic[8] = {'F', 'N', 'C', 'P', '0', '0', '0', '1'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw std::runtime_error("checkpoint: truncated file");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(buf[pos++]);
  }
};

void put_tensor_values(std::string& out, const Tensor& t) {
  for (long i = 0; i < t.numel(); ++i) put_f64(out, t[i]);
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_text, const ParamStore& params,
                     const TrainState* state) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<uint32_t>(config_text.size()));
  out.append(config_text);
  put_u64(out, static_cast<uint64_t>(params.size()));
  for (const std::string& name : params.names()) {
    const Tensor& t = params.at(name);
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    put_u32(out, static_cast<uint32_t>(t.rank()));
    for (long d = 0; d < t.rank(); ++d) put_u64(out, static_cast<uint64_t>(t.dim(d)));
    put_tensor_values(out, t);
  }
  out.push_back(state ? 1 : 0);
  if (state) {
    if (state->m.size() != params.names().size() || state->v.size() != params.names().size())
      throw std::invalid_argument("checkpoint: optimizer state not aligned with parameters");
    put_u64(out, state->adam_t);
    put_u64(out, state->next_epoch);
    put_u64(out, state->global_step);
    put_f64(out, state->best_val);
    for (const Tensor& t : state->m) put_tensor_values(out, t);
    for (const Tensor& t : state->v) put_tensor_values(out, t);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{buf};

  std::string magic = r.bytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic (not a checkpoint file): " + path);

  Checkpoint ck;
  ck.config_text = r.bytes(r.u32());
  uint64_t count = r.u64();
  for (uint64_t p = 0; p < count; ++p) {
    std::string name = r.bytes(r.u32());
    uint32_t rank = r.u32();
    if (rank > 8) throw std::runtime_error("checkpoint: implausible tensor rank");
    std::vector<long> shape;
    for (uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<long>(r.u64()));
    Tensor t(shape);
    for (long i = 0; i < t.numel(); ++i) t[i] = r.f64();
    ck.params.add(name, std::move(t));
  }
  ck.has_state = r.u8() != 0;
  if (ck.has_state) {
    ck.state.adam_t = r.u64();
    ck.state.next_epoch = r.u64();
    ck.state.global_step = r.u64();
    ck.state.best_val = r.f64();
    for (int half = 0; half < 2; ++half) {
      std::vector<Tensor>& dst = half == 0 ? ck.state.m : ck.state.v;
      for (const std::string& name : ck.params.names()) {
        Tensor t(ck.params.at(name).shape());
        for (long i = 0; i < t.numel(); ++i) t[i] = r.f64();
        dst.push_back(std::move(t));
      }
    }
  }
  if (r.pos != buf.size()) throw std::runtime_error("checkpoint: trailing bytes after payload");
  return ck;
}

}  // namespace forknet
