#include "ptgen/network.hpp"

#include <cmath>

#include "ptgen/errors.hpp"
#include "ptgen/rng.hpp"

namespace ptgen {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::VectorXd obs_vector(const ObservationFeatures& obs) {
  Eigen::VectorXd x(3);
  x << obs.v_f, obs.dv, obs.dx;
  return x;
}

void check_shape(const NetworkParams& p) {
  if (p.layer_sizes.empty() || p.layers.size() != p.layer_sizes.size())
    throw UsageError("network params: empty or inconsistent layer list");
  if (p.norm_mean.size() != p.input_dim || p.norm_std.size() != p.input_dim)
    throw UsageError("network params: normalization size mismatch");
  if ((p.norm_std.array() <= 0.0).any())
    throw UsageError("network params: normalization std must be positive");
}

}  // namespace

int NetworkParams::n_params() const {
  int n = 0;
  int in = input_dim;
  for (int hidden : layer_sizes) {
    n += 4 * (hidden * in + hidden * hidden + hidden);
    in = hidden;
  }
  return n + layer_sizes.back() + 1;
}

NetworkParams zero_params(const std::vector<int>& layer_sizes, int input_dim) {
  if (layer_sizes.empty()) throw UsageError("network: need at least one layer");
  for (int h : layer_sizes)
    if (h < 1) throw UsageError("network: layer sizes must be positive");
  NetworkParams p;
  p.input_dim = input_dim;
  p.layer_sizes = layer_sizes;
  int in = input_dim;
  for (int hidden : layer_sizes) {
    LstmLayerParams lp;
    for (int g = 0; g < 4; ++g) {
      lp.W[g] = Eigen::MatrixXd::Zero(hidden, in);
      lp.U[g] = Eigen::MatrixXd::Zero(hidden, hidden);
      lp.b[g] = Eigen::VectorXd::Zero(hidden);
    }
    p.layers.push_back(std::move(lp));
    in = hidden;
  }
  p.head_w = Eigen::VectorXd::Zero(layer_sizes.back());
  p.head_b = 0.0;
  p.norm_mean = Eigen::VectorXd::Zero(input_dim);
  p.norm_std = Eigen::VectorXd::Ones(input_dim);
  return p;
}

NetworkParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed,
                          int input_dim) {
  NetworkParams p = zero_params(layer_sizes, input_dim);
  KeyedRng rng(seed);
  // Draw order is fixed (layers outer, gates inner, W then U row-major, then
  // the head) so a seed pins the whole initialization.
  for (auto& lp : p.layers) {
    double r = 1.0 / std::sqrt(static_cast<double>(lp.W[0].cols()));
    for (int g = 0; g < 4; ++g) {
      for (int i = 0; i < lp.W[g].rows(); ++i)
        for (int j = 0; j < lp.W[g].cols(); ++j) lp.W[g](i, j) = rng.uniform(-r, r);
      for (int i = 0; i < lp.U[g].rows(); ++i)
        for (int j = 0; j < lp.U[g].cols(); ++j) lp.U[g](i, j) = rng.uniform(-r, r);
    }
    lp.b[kGateForget].setOnes();
  }
  double r = 1.0 / std::sqrt(static_cast<double>(p.head_w.size()));
  for (int i = 0; i < p.head_w.size(); ++i) p.head_w(i) = rng.uniform(-r, r);
  return p;
}

MemoryState zero_memory(const NetworkParams& p) {
  MemoryState mem;
  for (int hidden : p.layer_sizes) {
    mem.h.push_back(Eigen::VectorXd::Zero(hidden));
    mem.c.push_back(Eigen::VectorXd::Zero(hidden));
  }
  return mem;
}

namespace {

// Shared by the plain and recorded forward passes; tape may be null.
std::pair<double, MemoryState> forward_impl(const NetworkParams& p,
                                            const ObservationFeatures& obs,
                                            const MemoryState& mem_in, GradientTape* tape) {
  check_shape(p);
  MemoryState mem = mem_in.empty() ? zero_memory(p) : mem_in;
  if (mem.h.size() != p.layers.size())
    throw UsageError("network: memory layer count does not match params");

  StepRecord rec;
  Eigen::VectorXd x = (obs_vector(obs) - p.norm_mean).cwiseQuotient(p.norm_std);
  MemoryState next;
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const LstmLayerParams& lp = p.layers[l];
    const Eigen::VectorXd& h_prev = mem.h[l];
    const Eigen::VectorXd& c_prev = mem.c[l];
    if (h_prev.size() != p.layer_sizes[l] || c_prev.size() != p.layer_sizes[l])
      throw UsageError("network: memory size does not match layer width");

    Eigen::VectorXd gi = sigmoid(lp.W[kGateInput] * x + lp.U[kGateInput] * h_prev + lp.b[kGateInput]);
    Eigen::VectorXd gf = sigmoid(lp.W[kGateForget] * x + lp.U[kGateForget] * h_prev + lp.b[kGateForget]);
    Eigen::VectorXd go = sigmoid(lp.W[kGateOutput] * x + lp.U[kGateOutput] * h_prev + lp.b[kGateOutput]);
    Eigen::VectorXd gc =
        (lp.W[kGateCandidate] * x + lp.U[kGateCandidate] * h_prev + lp.b[kGateCandidate])
            .array()
            .tanh();
    Eigen::VectorXd c = gf.cwiseProduct(c_prev) + gi.cwiseProduct(gc);
    Eigen::VectorXd tanh_c = c.array().tanh();
    Eigen::VectorXd h = go.cwiseProduct(tanh_c);

    if (tape) {
      LayerCache cache;
      cache.x = x;
      cache.h_prev = h_prev;
      cache.c_prev = c_prev;
      cache.gi = gi;
      cache.gf = gf;
      cache.go = go;
      cache.gc = gc;
      cache.c = c;
      cache.tanh_c = tanh_c;
      rec.layers.push_back(std::move(cache));
    }
    next.h.push_back(h);
    next.c.push_back(std::move(c));
    x = std::move(h);
  }
  double a = p.head_w.dot(x) + p.head_b;
  if (tape) tape->steps.push_back(std::move(rec));
  return {a, std::move(next)};
}

}  // namespace

std::pair<double, MemoryState> forward_step(const NetworkParams& p,
                                            const ObservationFeatures& obs,
                                            const MemoryState& mem) {
  return forward_impl(p, obs, mem, nullptr);
}

std::pair<double, MemoryState> forward_step_recorded(const NetworkParams& p,
                                                     const ObservationFeatures& obs,
                                                     const MemoryState& mem, GradientTape& tape) {
  return forward_impl(p, obs, mem, &tape);
}

std::vector<double> backward_rollout(const NetworkParams& p, const GradientTape& tape,
                                     const std::vector<double>& position_grads) {
  check_shape(p);
  if (position_grads.size() != tape.steps.size())
    throw UsageError("backward_rollout: one position gradient per recorded step required");

  NetworkParams grad = zero_params(p.layer_sizes, p.input_dim);
  size_t L = p.layers.size();
  // Recurrent gradients flowing from step j+1 back into step j, per layer.
  std::vector<Eigen::VectorXd> dh_next(L), dc_next(L);
  for (size_t l = 0; l < L; ++l) {
    dh_next[l] = Eigen::VectorXd::Zero(p.layer_sizes[l]);
    dc_next[l] = Eigen::VectorXd::Zero(p.layer_sizes[l]);
  }

  double dt2 = tape.dt * tape.dt;
  for (size_t j = tape.steps.size(); j-- > 0;) {
    const StepRecord& rec = tape.steps[j];
    if (rec.layers.size() != L)
      throw UsageError("backward_rollout: tape does not match params");
    // x_hat = x + (v + a*dt)*dt unless the velocity clamp fired, in which
    // case a no longer reaches the position.
    double da = rec.v_clamped ? 0.0 : position_grads[j] * dt2;

    const LayerCache& top = rec.layers.back();
    Eigen::VectorXd h_top = top.go.cwiseProduct(top.tanh_c);
    grad.head_w += da * h_top;
    grad.head_b += da;

    Eigen::VectorXd dh_from_above = da * p.head_w;
    for (size_t l = L; l-- > 0;) {
      const LayerCache& cc = rec.layers[l];
      const LstmLayerParams& lp = p.layers[l];
      LstmLayerParams& lg = grad.layers[l];

      Eigen::VectorXd dh = dh_from_above + dh_next[l];
      Eigen::VectorXd dc =
          dh.cwiseProduct(cc.go)
              .cwiseProduct((1.0 - cc.tanh_c.array().square()).matrix()) +
          dc_next[l];

      Eigen::VectorXd dzo = dh.cwiseProduct(cc.tanh_c)
                                .cwiseProduct(cc.go)
                                .cwiseProduct((1.0 - cc.go.array()).matrix());
      Eigen::VectorXd dzf = dc.cwiseProduct(cc.c_prev)
                                .cwiseProduct(cc.gf)
                                .cwiseProduct((1.0 - cc.gf.array()).matrix());
      Eigen::VectorXd dzi = dc.cwiseProduct(cc.gc)
                                .cwiseProduct(cc.gi)
                                .cwiseProduct((1.0 - cc.gi.array()).matrix());
      Eigen::VectorXd dzc =
          dc.cwiseProduct(cc.gi).cwiseProduct((1.0 - cc.gc.array().square()).matrix());

      lg.W[kGateInput] += dzi * cc.x.transpose();
      lg.W[kGateForget] += dzf * cc.x.transpose();
      lg.W[kGateOutput] += dzo * cc.x.transpose();
      lg.W[kGateCandidate] += dzc * cc.x.transpose();
      lg.U[kGateInput] += dzi * cc.h_prev.transpose();
      lg.U[kGateForget] += dzf * cc.h_prev.transpose();
      lg.U[kGateOutput] += dzo * cc.h_prev.transpose();
      lg.U[kGateCandidate] += dzc * cc.h_prev.transpose();
      lg.b[kGateInput] += dzi;
      lg.b[kGateForget] += dzf;
      lg.b[kGateOutput] += dzo;
      lg.b[kGateCandidate] += dzc;

      dh_next[l] = lp.U[kGateInput].transpose() * dzi + lp.U[kGateForget].transpose() * dzf +
                   lp.U[kGateOutput].transpose() * dzo +
                   lp.U[kGateCandidate].transpose() * dzc;
      dc_next[l] = dc.cwiseProduct(cc.gf);

      dh_from_above = lp.W[kGateInput].transpose() * dzi + lp.W[kGateForget].transpose() * dzf +
                      lp.W[kGateOutput].transpose() * dzo +
                      lp.W[kGateCandidate].transpose() * dzc;
      // After layer 0 this is the gradient w.r.t. the normalized observation,
      // which is an input, not a parameter.
    }
  }
  return flatten(grad);
}

std::vector<double> flatten(const NetworkParams& p) {
  std::vector<double> flat;
  flat.reserve(p.n_params());
  for (const auto& lp : p.layers) {
    for (int g = 0; g < 4; ++g) {
      for (int i = 0; i < lp.W[g].rows(); ++i)
        for (int j = 0; j < lp.W[g].cols(); ++j) flat.push_back(lp.W[g](i, j));
      for (int i = 0; i < lp.U[g].rows(); ++i)
        for (int j = 0; j < lp.U[g].cols(); ++j) flat.push_back(lp.U[g](i, j));
      for (int i = 0; i < lp.b[g].size(); ++i) flat.push_back(lp.b[g](i));
    }
  }
  for (int i = 0; i < p.head_w.size(); ++i) flat.push_back(p.head_w(i));
  flat.push_back(p.head_b);
  return flat;
}

void unflatten(const std::vector<double>& flat, NetworkParams& p) {
  if (static_cast<int>(flat.size()) != p.n_params())
    throw UsageError("unflatten: flat vector does not match parameter count");
  size_t k = 0;
  for (auto& lp : p.layers) {
    for (int g = 0; g < 4; ++g) {
      for (int i = 0; i < lp.W[g].rows(); ++i)
        for (int j = 0; j < lp.W[g].cols(); ++j) lp.W[g](i, j) = flat[k++];
      for (int i = 0; i < lp.U[g].rows(); ++i)
        for (int j = 0; j < lp.U[g].cols(); ++j) lp.U[g](i, j) = flat[k++];
      for (int i = 0; i < lp.b[g].size(); ++i) lp.b[g](i) = flat[k++];
    }
  }
  for (int i = 0; i < p.head_w.size(); ++i) p.head_w(i) = flat[k++];
  p.head_b = flat[k++];
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const NetworkParams&)>& loss, const NetworkParams& at,
    double step) {
  if (step <= 0.0) throw UsageError("finite_difference_gradient: step must be positive");
  std::vector<double> flat = flatten(at);
  std::vector<double> g(flat.size());
  NetworkParams probe = at;
  for (size_t k = 0; k < flat.size(); ++k) {
    double orig = flat[k];
    flat[k] = orig + step;
    unflatten(flat, probe);
    double up = loss(probe);
    flat[k] = orig - step;
    unflatten(flat, probe);
    double down = loss(probe);
    flat[k] = orig;
    g[k] = (up - down) / (2.0 * step);
  }
  unflatten(flat, probe);
  return g;
}

void optimizer_update(NetworkParams& params, const std::vector<double>& grads,
                      OptimizerState& opt) {
  std::vector<double> flat = flatten(params);
  if (grads.size() != flat.size())
    throw UsageError("optimizer_update: gradient size does not match parameter count");

  if (opt.method == OptMethod::Sgd) {
    for (size_t k = 0; k < flat.size(); ++k) flat[k] -= opt.alpha * grads[k];
    ++opt.step;
  } else {
    if (opt.m.empty()) {
      opt.m.assign(flat.size(), 0.0);
      opt.v.assign(flat.size(), 0.0);
    }
    if (opt.m.size() != flat.size())
      throw UsageError("optimizer_update: optimizer state size mismatch");
    ++opt.step;
    double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
    for (size_t k = 0; k < flat.size(); ++k) {
      opt.m[k] = opt.beta1 * opt.m[k] + (1.0 - opt.beta1) * grads[k];
      opt.v[k] = opt.beta2 * opt.v[k] + (1.0 - opt.beta2) * grads[k] * grads[k];
      double m_hat = opt.m[k] / bc1;
      double v_hat = opt.v[k] / bc2;
      flat[k] -= opt.alpha * m_hat / (std::sqrt(v_hat) + opt.eps);
    }
  }
  unflatten(flat, params);
}

}  // namespace ptgen
