#include "ptgen/model_io.hpp"

#include <cstring>
#include <fstream>

#include "ptgen/errors.hpp"

namespace ptgen {

namespace {

// Explicit little-endian packing keeps the files portable across hosts.
void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(buf, bits);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  std::string what;

  void need(std::size_t n) {
    if (pos + n > buf.size()) throw IoError(what + ": truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
  }
  // Element count that must still fit in the buffer; rejects corrupt lengths
  // before they can drive an allocation.
  std::size_t count(std::size_t elem_bytes) {
    std::uint64_t n = u64();
    if (n > (buf.size() - pos) / elem_bytes) throw IoError(what + ": truncated file");
    return static_cast<std::size_t>(n);
  }
  void magic(const char* m) {
    need(4);
    if (std::memcmp(buf.data() + pos, m, 4) != 0)
      throw IoError(what + ": bad magic, not a " + std::string(m) + " file");
    pos += 4;
  }
};

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string(what) + ": cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return buf;
}

void write_file(const std::string& path, const std::string& buf, const char* what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(what) + ": cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(std::string(what) + ": write failed for " + path);
}

void put_model(std::string& buf, const NetworkParams& p) {
  buf += "PTGM";
  put_u32(buf, 1);  // format version
  put_u32(buf, static_cast<std::uint32_t>(p.input_dim));
  put_u32(buf, static_cast<std::uint32_t>(p.layer_sizes.size()));
  for (int h : p.layer_sizes) put_u32(buf, static_cast<std::uint32_t>(h));
  for (int i = 0; i < p.norm_mean.size(); ++i) put_f64(buf, p.norm_mean(i));
  for (int i = 0; i < p.norm_std.size(); ++i) put_f64(buf, p.norm_std(i));
  std::vector<double> flat = flatten(p);
  put_u64(buf, flat.size());
  for (double d : flat) put_f64(buf, d);
}

NetworkParams get_model(Reader& r) {
  r.magic("PTGM");
  std::uint32_t version = r.u32();
  if (version != 1) throw IoError(r.what + ": unsupported model format version " + std::to_string(version));
  int input_dim = static_cast<int>(r.u32());
  std::uint32_t n_layers = r.u32();
  if (input_dim < 1 || n_layers < 1 || n_layers > 64)
    throw IoError(r.what + ": implausible model header");
  std::vector<int> sizes(n_layers);
  for (auto& s : sizes) {
    s = static_cast<int>(r.u32());
    if (s < 1 || s > 1 << 16) throw IoError(r.what + ": implausible layer size");
  }
  NetworkParams p = zero_params(sizes, input_dim);
  for (int i = 0; i < input_dim; ++i) p.norm_mean(i) = r.f64();
  for (int i = 0; i < input_dim; ++i) p.norm_std(i) = r.f64();
  std::size_t n = r.count(8);
  if (n != static_cast<std::size_t>(p.n_params()))
    throw IoError(r.what + ": parameter count does not match architecture");
  std::vector<double> flat(n);
  for (auto& d : flat) d = r.f64();
  unflatten(flat, p);
  return p;
}

}  // namespace

void save_model(const std::string& path, const NetworkParams& params) {
  std::string buf;
  put_model(buf, params);
  write_file(path, buf, "save_model");
}

NetworkParams load_model(const std::string& path) {
  std::string buf = read_file(path, "load_model");
  Reader r{buf, 0, "load_model"};
  NetworkParams p = get_model(r);
  if (r.pos != buf.size()) throw IoError("load_model: trailing bytes in " + path);
  return p;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::string buf;
  buf += "PTGC";
  put_u32(buf, 1);
  put_model(buf, c.params);
  put_model(buf, c.best_params);
  put_u32(buf, c.opt.method == OptMethod::Sgd ? 0u : 1u);
  put_f64(buf, c.opt.alpha);
  put_f64(buf, c.opt.beta1);
  put_f64(buf, c.opt.beta2);
  put_f64(buf, c.opt.eps);
  put_u64(buf, c.opt.step);
  put_u64(buf, c.opt.m.size());
  for (double d : c.opt.m) put_f64(buf, d);
  for (double d : c.opt.v) put_f64(buf, d);
  put_u64(buf, static_cast<std::uint64_t>(c.epoch_next));
  put_u32(buf, static_cast<std::uint32_t>(c.diverge_count));
  put_u64(buf, static_cast<std::uint64_t>(static_cast<std::int64_t>(c.best_epoch)));
  put_f64(buf, c.best_inference);
  put_u64(buf, c.train_loss.size());
  for (double d : c.train_loss) put_f64(buf, d);
  put_u64(buf, c.inference_loss.size());
  for (double d : c.inference_loss) put_f64(buf, d);
  write_file(path, buf, "save_checkpoint");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::string buf = read_file(path, "load_checkpoint");
  Reader r{buf, 0, "load_checkpoint"};
  r.magic("PTGC");
  std::uint32_t version = r.u32();
  if (version != 1)
    throw IoError("load_checkpoint: unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.params = get_model(r);
  c.best_params = get_model(r);
  c.opt.method = r.u32() == 0 ? OptMethod::Sgd : OptMethod::Adam;
  c.opt.alpha = r.f64();
  c.opt.beta1 = r.f64();
  c.opt.beta2 = r.f64();
  c.opt.eps = r.f64();
  c.opt.step = r.u64();
  std::size_t nm = r.count(16);  // m and v back to back
  c.opt.m.resize(nm);
  for (auto& d : c.opt.m) d = r.f64();
  c.opt.v.resize(nm);
  for (auto& d : c.opt.v) d = r.f64();
  c.epoch_next = static_cast<int>(r.u64());
  c.diverge_count = static_cast<int>(r.u32());
  c.best_epoch = static_cast<int>(static_cast<std::int64_t>(r.u64()));
  c.best_inference = r.f64();
  c.train_loss.resize(r.count(8));
  for (auto& d : c.train_loss) d = r.f64();
  c.inference_loss.resize(r.count(8));
  for (auto& d : c.inference_loss) d = r.f64();
  if (r.pos != buf.size()) throw IoError("load_checkpoint: trailing bytes in " + path);
  return c;
}

}  // namespace ptgen
