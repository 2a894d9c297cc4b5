#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdt/sdt.h"

namespace {

int exit_code(sdt_status s) {
  switch (s) {
    case SDT_OK: return 0;
    case SDT_ERR_CONFIG:
    case SDT_ERR_INVALID_ARGUMENT:
    case SDT_ERR_IO: return 2;
    case SDT_ERR_NUMERICAL: return 3;
    case SDT_ERR_INFEASIBLE: return 4;
    case SDT_ERR_INTERNAL: return 1;
  }
  return 1;
}

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  int workers = 1;
  std::vector<std::string> inputs;
};

int report(sdt_status s, const std::string& what) {
  std::cerr << "sdt: " << what << ": " << sdt_last_error() << '\n';
  return exit_code(s);
}

sdt_config* open_config(const std::string& path, sdt_status& s) {
  sdt_config* cfg = nullptr;
  s = path.empty() ? sdt_config_default(&cfg) : sdt_config_load(path.c_str(), &cfg);
  return cfg;
}

int run(const std::string& command, const Args& a) {
  sdt_status s;
  sdt_config* cfg = open_config(a.config, s);
  if (s != SDT_OK) return report(s, "config");

  std::vector<const char*> inputs;
  for (const auto& in : a.inputs) inputs.push_back(in.c_str());
  sdt_run_options opts{};
  opts.out_dir = a.out.empty() ? nullptr : a.out.c_str();
  opts.format = a.format.empty() ? nullptr : a.format.c_str();
  opts.workers = a.workers;
  opts.has_seed = a.seed.has_value();
  opts.seed = a.seed.value_or(0);
  opts.inputs = inputs.data();
  opts.n_inputs = inputs.size();

  char* summary = nullptr;
  s = sdt_run_command(command.c_str(), cfg, &opts, &summary);
  sdt_config_free(cfg);
  if (s != SDT_OK) return report(s, command);
  std::cout << summary << '\n';
  sdt_string_free(summary);
  return 0;
}

int print_config(const Args& a) {
  sdt_status s;
  sdt_config* cfg = open_config(a.config, s);
  if (s != SDT_OK) return report(s, "config");
  char* text = nullptr;
  s = sdt_config_to_toml(cfg, &text);
  sdt_config_free(cfg);
  if (s != SDT_OK) return report(s, "print-config");
  std::cout << text;
  sdt_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-dependent transport simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string(sdt_version()));
  app.require_subcommand(1);

  Args args;
  std::uint64_t seed = 0;
  std::string chosen;

  for (const char* const* name = sdt_command_names(); *name; ++name) {
    auto* sub = app.add_subcommand(*name);
    sub->add_option("--config", args.config, "TOML run configuration (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed, overrides the config seed");
    sub->add_option("--out", args.out, "output directory (overrides output_dir)");
    sub->add_option("--format", args.format, "tabular format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", args.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--in", args.inputs, "transport CSV files or directories");
    sub->callback([&, sub, n = std::string(*name)] {
      chosen = n;
      if (sub->count("--seed")) args.seed = seed;
    });
  }
  auto* pc = app.add_subcommand("print-config", "print the resolved configuration as TOML");
  pc->add_option("--config", args.config, "TOML run configuration")->check(CLI::ExistingFile);
  pc->callback([&] { chosen = "print-config"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (chosen == "print-config") return print_config(args);
  return run(chosen, args);
}
