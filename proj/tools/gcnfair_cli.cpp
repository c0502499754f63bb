// gcnfair: command-line front end for the training, theory and fairness runs.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcnfair/error.hpp"
#include "gcnfair/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> filter;
  std::optional<int> layers;
  std::vector<double> lambda_fair;
  std::string out = "runs";
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Run a single seed");
  cmd->add_option("--filter", o.filter, "Propagation filter")->check(CLI::IsMember({"sym", "rw"}));
  cmd->add_option("--layers", o.layers, "Number of GCN layers")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda-fair", o.lambda_fair, "Fairness weight(s)")->expected(1, -1);
  cmd->add_option("--out", o.out, "Output root directory");
}

gcnfair::RunConfig resolve_config(const Overrides& o) {
  gcnfair::RunConfig c = gcnfair::load_run_config(o.config);
  if (o.seed) c.seeds = {*o.seed};
  if (o.filter) c.filter = gcnfair::parse_filter(*o.filter);
  if (o.layers) {
    c.layers = *o.layers;
    if (static_cast<int>(c.dims.size()) != c.layers) c.dims.clear();
  }
  if (!o.lambda_fair.empty()) {
    for (double l : o.lambda_fair) {
      if (!(l >= 0.0)) throw gcnfair::Error(gcnfair::ErrorCode::invalid_argument, "--lambda-fair must be >= 0");
    }
    c.lambda_fair = o.lambda_fair;
  }
  return c;
}

void print_ms(const char* name, const gcnfair::MeanStd& m) {
  std::printf("%s %.4f +- %.4f\n", name, m.mean, m.std);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GCN link prediction with theoretic scores and within-group fairness"};
  app.require_subcommand(1);
  Overrides o;
  auto* synth = app.add_subcommand("synth", "Write a synthetic planted-partition dataset");
  auto* train = app.add_subcommand("train", "Train encoders over the seed set");
  auto* theory = app.add_subcommand("validate-theory", "Compare theoretic and trained scores");
  auto* dcmp = app.add_subcommand("delta-compare", "Compare Delta-hat with Delta per group");
  auto* sweep = app.add_subcommand("fairness-sweep", "Train over a lambda_fair grid");
  for (auto* cmd : {synth, train, theory, dcmp, sweep}) add_common(cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    const gcnfair::RunConfig config = resolve_config(o);
    if (synth->parsed()) {
      if (!config.synth) {
        throw gcnfair::Error(gcnfair::ErrorCode::invalid_argument, "config has no synth section");
      }
      gcnfair::SynthConfig sc = *config.synth;
      if (o.seed) sc.seed = *o.seed;
      sc.self_loop_weight = config.self_loop_weight;
      const auto dir = std::filesystem::path(o.out) / config.dataset_name;
      const auto files = gcnfair::synth_write(sc, dir);
      std::printf("wrote %s %s %s\n", files.edges.c_str(), files.features.c_str(),
                  files.labels.c_str());
      return 0;
    }
    const std::string command = train->parsed()    ? "train"
                                : theory->parsed() ? "validate-theory"
                                : dcmp->parsed()   ? "delta-compare"
                                                   : "fairness-sweep";
    const auto dir = gcnfair::run_directory(o.out, command, config);
    if (train->parsed()) {
      const auto r = gcnfair::run_train(config, dir);
      print_ms("test_auc", r.test_auc);
    } else if (theory->parsed()) {
      const auto r = gcnfair::run_validate_theory(config, dir);
      print_ms("nrmse", r.nrmse);
      print_ms("pcc", r.pcc);
      print_ms("auc", r.auc);
    } else if (dcmp->parsed()) {
      const auto r = gcnfair::run_delta_comparison(config, dir);
      std::printf("rows %zu\npcc %.4f\nnrmse %.4f\n", r.rows.size(), r.pcc.value, r.nrmse.value);
    } else {
      const auto t = gcnfair::run_fairness_sweep(config, dir);
      std::printf("lambda_fair mean_delta test_auc\n");
      for (const auto& row : t.rows) {
        std::printf("%g %.4f+-%.4f %.4f+-%.4f\n", row.lambda_fair, row.mean_delta.mean,
                    row.mean_delta.std, row.test_auc.mean, row.test_auc.std);
      }
    }
    std::printf("output %s\n", dir.c_str());
  } catch (const gcnfair::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", gcnfair::to_string(e.code()), e.what());
    return 2;
  }
  return 0;
}
