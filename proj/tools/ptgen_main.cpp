// Command line front end; everything goes through the public C API.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ptgen.h"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = "out";
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config, "JSON config file; built-in defaults when omitted");
  cmd->add_option("-o,--out", args.out, "output directory")->capture_default_str();
  cmd->add_option("-s,--seed", args.seed, "override the config seed (non-negative)");
}

int run(ptgen_status (*fn)(const ptgen_run_options*), const CommonArgs& args) {
  ptgen_run_options opt{args.config.empty() ? nullptr : args.config.c_str(), args.out.c_str(),
                        args.seed};
  const ptgen_status st = fn(&opt);
  if (st != PTGEN_OK) std::fprintf(stderr, "ptgen: %s\n", ptgen_last_error());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"platoon trajectory generation: train car-following models and roll "
               "full platoons from a single leader trajectory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ptgen_version()));

  CommonArgs synth_args, extract_args, train_args, generate_args, evaluate_args, gradcheck_args;
  std::string print_config_path;

  auto* synth = app.add_subcommand("synth", "synthesize a dataset and split it");
  add_common(synth, synth_args);
  auto* extract = app.add_subcommand("extract", "extract platoons from a trajectory CSV");
  add_common(extract, extract_args);
  auto* train = app.add_subcommand("train", "train a model; train.sweep runs every family");
  add_common(train, train_args);
  auto* generate = app.add_subcommand("generate", "generate followers from each leader");
  add_common(generate, generate_args);
  auto* evaluate = app.add_subcommand("evaluate", "error metrics of generated vs actual");
  add_common(evaluate, evaluate_args);
  auto* gradcheck = app.add_subcommand("gradcheck", "audit the analytic gradient");
  add_common(gradcheck, gradcheck_args);
  auto* print_config = app.add_subcommand("print-config", "dump the fully resolved config");
  print_config->add_option("-c,--config", print_config_path,
                           "JSON config file; built-in defaults when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return PTGEN_E_USAGE;
  }

  if (synth->parsed()) return run(ptgen_cmd_synth, synth_args);
  if (extract->parsed()) return run(ptgen_cmd_extract, extract_args);
  if (train->parsed()) return run(ptgen_cmd_train, train_args);
  if (generate->parsed()) return run(ptgen_cmd_generate, generate_args);
  if (evaluate->parsed()) return run(ptgen_cmd_evaluate, evaluate_args);
  if (gradcheck->parsed()) {
    const int rc = run(ptgen_cmd_gradcheck, gradcheck_args);
    if (rc == 0)
      std::printf("gradient check passed (report: %s/gradcheck.txt)\n",
                  gradcheck_args.out.c_str());
    return rc;
  }
  if (print_config->parsed()) {
    char* text = nullptr;
    const ptgen_status st = ptgen_resolve_config(
        print_config_path.empty() ? nullptr : print_config_path.c_str(), &text);
    if (st != PTGEN_OK) {
      std::fprintf(stderr, "ptgen: %s\n", ptgen_last_error());
      return static_cast<int>(st);
    }
    std::fputs(text, stdout);
    ptgen_string_free(text);
    return 0;
  }
  return PTGEN_E_USAGE;
}
