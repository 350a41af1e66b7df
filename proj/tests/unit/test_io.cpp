#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ptgen/model_io.hpp"

using namespace ptgen;

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path(name) {}
  ~TempPath() { std::remove(path.c_str()); }
};

NetworkParams sample_params() {
  NetworkParams p = init_params({4, 3}, 77);
  p.norm_mean << 12.5, -0.25, 21.0;
  p.norm_std << 3.5, 1.25, 8.0;
  return p;
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("model files round trip bitwise") {
  NetworkParams p = sample_params();
  TempPath f("roundtrip_model.ptgm");
  save_model(f.path, p);
  NetworkParams q = load_model(f.path);

  CHECK(q.input_dim == p.input_dim);
  CHECK(q.layer_sizes == p.layer_sizes);
  std::vector<double> a = flatten(p), b = flatten(q);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  for (int i = 0; i < 3; ++i) {
    CHECK(q.norm_mean[i] == p.norm_mean[i]);
    CHECK(q.norm_std[i] == p.norm_std[i]);
  }

  // Saving the reloaded copy reproduces the file byte for byte.
  TempPath g("roundtrip_model2.ptgm");
  save_model(g.path, q);
  CHECK(slurp(f.path) == slurp(g.path));
}

TEST_CASE("model loader rejects damaged files") {
  NetworkParams p = sample_params();
  TempPath f("damage_base.ptgm");
  save_model(f.path, p);
  std::vector<char> bytes = slurp(f.path);
  REQUIRE(bytes.size() > 64);

  TempPath t("damage_trunc.ptgm");
  spit(t.path, std::vector<char>(bytes.begin(), bytes.begin() + bytes.size() / 2));
  CHECK_THROWS_AS(load_model(t.path), IoError);

  TempPath m("damage_magic.ptgm");
  std::vector<char> magic = bytes;
  magic[0] ^= 0x5a;
  spit(m.path, magic);
  CHECK_THROWS_AS(load_model(m.path), IoError);

  TempPath h("damage_header.ptgm");
  std::vector<char> header = bytes;
  header[8] = static_cast<char>(~header[8]);  // corrupt a header count field
  spit(h.path, header);
  CHECK_THROWS_AS(load_model(h.path), IoError);

  CHECK_THROWS_AS(load_model("no_such_model.ptgm"), IoError);
}

TEST_CASE("checkpoint files round trip the whole training state") {
  Checkpoint c;
  c.params = sample_params();
  c.best_params = init_params({4, 3}, 78);
  c.best_params.norm_mean = c.params.norm_mean;
  c.best_params.norm_std = c.params.norm_std;
  c.opt.method = OptMethod::Adam;
  c.opt.alpha = 2.5e-4;
  c.opt.step = 12;
  c.opt.m.assign(static_cast<std::size_t>(c.params.n_params()), 0.125);
  c.opt.v.assign(static_cast<std::size_t>(c.params.n_params()), 0.0625);
  c.epoch_next = 7;
  c.diverge_count = 1;
  c.best_epoch = 5;
  c.best_inference = 0.0375;
  c.train_loss = {3.0, 2.0, 1.5, 1.25, 1.0, 0.875, 0.75};
  c.inference_loss = {4.0, 2.5, 1.75, 1.5, 1.125, 0.9375, 0.8125};

  TempPath f("roundtrip_ckpt.ptgc");
  save_checkpoint(f.path, c);
  Checkpoint r = load_checkpoint(f.path);

  CHECK(flatten(r.params) == flatten(c.params));
  CHECK(flatten(r.best_params) == flatten(c.best_params));
  CHECK(r.params.layer_sizes == c.params.layer_sizes);
  CHECK(r.opt.method == c.opt.method);
  CHECK(r.opt.alpha == c.opt.alpha);
  CHECK(r.opt.beta1 == c.opt.beta1);
  CHECK(r.opt.beta2 == c.opt.beta2);
  CHECK(r.opt.eps == c.opt.eps);
  CHECK(r.opt.step == c.opt.step);
  CHECK(r.opt.m == c.opt.m);
  CHECK(r.opt.v == c.opt.v);
  CHECK(r.epoch_next == c.epoch_next);
  CHECK(r.diverge_count == c.diverge_count);
  CHECK(r.best_epoch == c.best_epoch);
  CHECK(r.best_inference == c.best_inference);
  CHECK(r.train_loss == c.train_loss);
  CHECK(r.inference_loss == c.inference_loss);
}

TEST_CASE("checkpoint loader rejects model files and vice versa") {
  NetworkParams p = sample_params();
  TempPath f("cross_model.ptgm");
  save_model(f.path, p);
  CHECK_THROWS_AS(load_checkpoint(f.path), IoError);

  Checkpoint c;
  c.params = p;
  c.best_params = p;
  TempPath g("cross_ckpt.ptgc");
  save_checkpoint(g.path, c);
  CHECK_THROWS_AS(load_model(g.path), IoError);
}

}  // TEST_SUITE
