#include "ptgen.h"

#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ptgen/config.hpp"
#include "ptgen/data.hpp"
#include "ptgen/errors.hpp"
#include "ptgen/eval.hpp"
#include "ptgen/model_io.hpp"
#include "ptgen/models.hpp"
#include "ptgen/network.hpp"
#include "ptgen/pipeline.hpp"

struct ptgen_model {
  std::unique_ptr<ptgen::CarFollowingModel> impl;
  bool is_lstm = false;
  ptgen::NetworkParams params;  // kept for save / n_params when is_lstm
};

struct ptgen_dataset {
  ptgen::Dataset ds;
};

struct ptgen_memory {
  ptgen::MemoryState mem;
};

namespace {

thread_local std::string g_error;

template <typename F>
ptgen_status guard(F&& body) noexcept {
  try {
    body();
    g_error.clear();
    return PTGEN_OK;
  } catch (const ptgen::UsageError& e) {
    g_error = e.what();
    return PTGEN_E_USAGE;
  } catch (const ptgen::DataError& e) {
    g_error = e.what();
    return PTGEN_E_DATA;
  } catch (const ptgen::NumericError& e) {
    g_error = e.what();
    return PTGEN_E_NUMERIC;
  } catch (const ptgen::IoError& e) {
    g_error = e.what();
    return PTGEN_E_IO;
  } catch (const std::exception& e) {
    g_error = e.what();
    return PTGEN_E_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return PTGEN_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ptgen::UsageError(what);
}

ptgen::RunConfig config_from(const ptgen_run_options* opt) {
  require(opt != nullptr, "run options are required");
  require(opt->out_dir != nullptr && *opt->out_dir != '\0', "out_dir is required");
  ptgen::RunConfig cfg = (opt->config_path && *opt->config_path)
                             ? ptgen::load_run_config(opt->config_path)
                             : ptgen::default_run_config();
  if (opt->seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt->seed);
  return cfg;
}

ptgen::VehicleState state_from(const double s[3]) { return {s[0], s[1], s[2]}; }

}  // namespace

extern "C" {

const char* ptgen_version(void) { return "1.0.0"; }

const char* ptgen_last_error(void) { return g_error.c_str(); }

// config_from validates opt and opt->out_dir, so it must run before either
// is dereferenced.
ptgen_status ptgen_cmd_synth(const ptgen_run_options* opt) {
  return guard([&] {
    const ptgen::RunConfig cfg = config_from(opt);
    ptgen::run_synth(cfg, opt->out_dir);
  });
}

ptgen_status ptgen_cmd_extract(const ptgen_run_options* opt) {
  return guard([&] {
    const ptgen::RunConfig cfg = config_from(opt);
    ptgen::run_extract(cfg, opt->out_dir);
  });
}

ptgen_status ptgen_cmd_train(const ptgen_run_options* opt) {
  return guard([&] {
    const ptgen::RunConfig cfg = config_from(opt);
    ptgen::run_train(cfg, opt->out_dir);
  });
}

ptgen_status ptgen_cmd_generate(const ptgen_run_options* opt) {
  return guard([&] {
    const ptgen::RunConfig cfg = config_from(opt);
    ptgen::run_generate(cfg, opt->out_dir);
  });
}

ptgen_status ptgen_cmd_evaluate(const ptgen_run_options* opt) {
  return guard([&] {
    const ptgen::RunConfig cfg = config_from(opt);
    ptgen::run_evaluate(cfg, opt->out_dir);
  });
}

ptgen_status ptgen_cmd_gradcheck(const ptgen_run_options* opt) {
  return guard([&] {
    const ptgen::RunConfig cfg = config_from(opt);
    const auto report = ptgen::run_gradcheck_cmd(cfg, opt->out_dir);
    if (!report.pass)
      throw ptgen::NumericError("gradient check failed, max relative error " +
                                std::to_string(report.max_rel_err));
  });
}

ptgen_status ptgen_resolve_config(const char* config_path, char** out_json) {
  return guard([&] {
    require(out_json != nullptr, "out_json is required");
    const ptgen::RunConfig cfg = (config_path && *config_path)
                                     ? ptgen::load_run_config(config_path)
                                     : ptgen::default_run_config();
    const std::string text = ptgen::dump_run_config(cfg);
    char* buf = static_cast<char*>(::operator new(text.size() + 1));
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out_json = buf;
  });
}

void ptgen_string_free(char* s) { ::operator delete(s); }

ptgen_status ptgen_model_load(const char* path, ptgen_model** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "path and out are required");
    auto handle = std::make_unique<ptgen_model>();
    handle->params = ptgen::load_model(path);
    handle->impl = std::make_unique<ptgen::LstmModel>(handle->params);
    handle->is_lstm = true;
    *out = handle.release();
  });
}

ptgen_status ptgen_model_save(const ptgen_model* model, const char* path) {
  return guard([&] {
    require(model != nullptr && path != nullptr, "model and path are required");
    require(model->is_lstm, "only lstm models can be saved");
    ptgen::save_model(path, model->params);
  });
}

ptgen_status ptgen_model_init_lstm(const int32_t* layer_sizes, size_t n_layers, uint64_t seed,
                                   ptgen_model** out) {
  return guard([&] {
    require(layer_sizes != nullptr && n_layers > 0 && out != nullptr,
            "layer_sizes and out are required");
    std::vector<int> sizes(layer_sizes, layer_sizes + n_layers);
    auto handle = std::make_unique<ptgen_model>();
    handle->params = ptgen::init_params(sizes, seed);
    handle->impl = std::make_unique<ptgen::LstmModel>(handle->params);
    handle->is_lstm = true;
    *out = handle.release();
  });
}

ptgen_status ptgen_model_idm(const double* params6, ptgen_model** out) {
  return guard([&] {
    require(out != nullptr, "out is required");
    ptgen::IdmParams p;
    if (params6) {
      p.a_max = params6[0];
      p.b = params6[1];
      p.v0 = params6[2];
      p.g_jam = params6[3];
      p.t_headway = params6[4];
      p.delta = params6[5];
    }
    auto handle = std::make_unique<ptgen_model>();
    handle->impl = std::make_unique<ptgen::IdmModel>(p);
    *out = handle.release();
  });
}

ptgen_status ptgen_model_n_params(const ptgen_model* model, uint64_t* out) {
  return guard([&] {
    require(model != nullptr && out != nullptr, "model and out are required");
    *out = model->is_lstm ? static_cast<uint64_t>(model->params.n_params()) : 6u;
  });
}

void ptgen_model_free(ptgen_model* model) { delete model; }

ptgen_status ptgen_memory_new(const ptgen_model* model, ptgen_memory** out) {
  return guard([&] {
    require(model != nullptr && out != nullptr, "model and out are required");
    *out = new ptgen_memory{model->impl->initial_memory()};
  });
}

void ptgen_memory_free(ptgen_memory* mem) { delete mem; }

ptgen_status ptgen_decide(const ptgen_model* model, const double follower[3],
                          const double leader[3], ptgen_memory* mem, double* accel_out) {
  return guard([&] {
    require(model && follower && leader && mem && accel_out,
            "model, states, memory and accel_out are required");
    auto [a, next] = model->impl->decide(state_from(follower), state_from(leader), mem->mem);
    mem->mem = std::move(next);
    *accel_out = a;
  });
}

ptgen_status ptgen_dataset_load(const char* path, ptgen_dataset** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "path and out are required");
    auto handle = std::make_unique<ptgen_dataset>();
    handle->ds = ptgen::load_dataset(path);
    *out = handle.release();
  });
}

ptgen_status ptgen_dataset_save(const ptgen_dataset* ds, const char* path) {
  return guard([&] {
    require(ds != nullptr && path != nullptr, "dataset and path are required");
    ptgen::save_dataset(path, ds->ds);
  });
}

ptgen_status ptgen_dataset_platoon_count(const ptgen_dataset* ds, size_t* out) {
  return guard([&] {
    require(ds != nullptr && out != nullptr, "dataset and out are required");
    *out = ds->ds.platoons.size();
  });
}

void ptgen_dataset_free(ptgen_dataset* ds) { delete ds; }

ptgen_status ptgen_generate(const ptgen_model* model, const ptgen_dataset* actual,
                            ptgen_dataset** out_generated) {
  return guard([&] {
    require(model && actual && out_generated, "model, actual and out_generated are required");
    auto handle = std::make_unique<ptgen_dataset>();
    handle->ds.platoons = ptgen::generate_dataset(*model->impl, actual->ds.platoons);
    handle->ds.platoon_lanes = actual->ds.platoon_lanes;
    handle->ds.meta = actual->ds.meta;
    handle->ds.meta.source = "generated";
    *out_generated = handle.release();
  });
}

ptgen_status ptgen_evaluate(const ptgen_dataset* actual, const ptgen_dataset* generated,
                            ptgen_metrics* out) {
  return guard([&] {
    require(actual && generated && out, "actual, generated and out are required");
    const auto rep = ptgen::compute_metrics(actual->ds.platoons, generated->ds.platoons);
    out->mae = rep.mae;
    out->mmaae = rep.mmaae;
    out->n_ae_samples = rep.ae_samples.size();
    out->n_pmaae_samples = rep.pmaae_samples.size();
  });
}

ptgen_status ptgen_error_samples(const ptgen_dataset* actual, const ptgen_dataset* generated,
                                 ptgen_sample_kind kind, double* buf, size_t buf_len,
                                 size_t* n_out) {
  return guard([&] {
    require(actual && generated && n_out, "actual, generated and n_out are required");
    require(kind == PTGEN_SAMPLES_AE || kind == PTGEN_SAMPLES_PMAAE, "unknown sample kind");
    const auto rep = ptgen::compute_metrics(actual->ds.platoons, generated->ds.platoons);
    const auto& samples = kind == PTGEN_SAMPLES_AE ? rep.ae_samples : rep.pmaae_samples;
    *n_out = samples.size();
    if (buf) {
      const size_t n = samples.size() < buf_len ? samples.size() : buf_len;
      std::memcpy(buf, samples.data(), n * sizeof(double));
    }
  });
}

}  // extern "C"
