// Command-line driver for the bigeometric class-analysis pipeline.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bigeo/error.hpp"
#include "bigeo/exact_emd.hpp"
#include "bigeo/parallel.hpp"
#include "bigeo/pipeline.hpp"

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
};

/// Without --config the pipeline runs on the built-in synthetic survey.
bigeo::PipelineConfig resolve_config(const GlobalFlags& flags) {
  bigeo::PipelineConfig config;
  if (!flags.config.empty()) {
    config = bigeo::load_config(flags.config);
  } else {
    config.synth = bigeo::SynthSettings{};
  }
  if (flags.seed) config.seed = *flags.seed;
  config.organize.seed = config.seed;
  if (!flags.out.empty()) config.output = flags.out;
  if (flags.threads) config.threads = *flags.threads;
  bigeo::set_thread_count(config.threads);
  return config;
}

bigeo::CovariateInput parse_covariate(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos) return {arg.substr(0, eq), arg.substr(eq + 1)};
  return {std::filesystem::path(arg).stem().string(), arg};
}

void add_global_flags(CLI::App* app, GlobalFlags& flags) {
  app->add_option("--config", flags.config, "JSON pipeline config");
  app->add_option("--seed", flags.seed, "Override the config seed");
  app->add_option("--out", flags.out, "Artifact directory");
  app->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bigeometric organization and class-level EMD analysis"};
  app.require_subcommand(1);
  GlobalFlags flags;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic survey with planted class groups");
  auto* organize = app.add_subcommand("organize", "Iterated diffusion / partition-tree organization");
  auto* class_emd = app.add_subcommand("class-emd", "Class histograms and pairwise class tree-EMD");
  auto* embed = app.add_subcommand("embed-classes", "Diffusion embedding of classes");
  auto* validate = app.add_subcommand("validate", "Permutation test of covariates against the class map");
  auto* oracle = app.add_subcommand("oracle-emd", "Exact EMD of a JSON transport instance");
  auto* exporter = app.add_subcommand("export", "Write plot-ready CSVs");
  auto* print = app.add_subcommand("print-config", "Print the resolved config with every default");
  auto* run = app.add_subcommand("run", "Run every stage in order");
  for (auto* sub : {synth, organize, class_emd, embed, validate, exporter, print, run}) add_global_flags(sub, flags);

  std::string embedding_path;
  std::vector<std::string> covariate_args;
  validate->add_option("--embedding", embedding_path, "Class embedding CSV (class_id, xi_1, ...)");
  validate->add_option("--covariate", covariate_args, "Covariate CSV as name=path or path")->take_all();

  std::string instance_path;
  oracle->add_option("instance", instance_path, "Instance JSON")->required();

  std::string which;
  exporter->add_option("--which", which, "class-map, null-hist or histograms")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle->parsed()) {
      std::ifstream in(instance_path);
      if (!in) throw bigeo::Error("cannot open '" + instance_path + "'");
      const auto instance = bigeo::TransportInstance::from_json(nlohmann::json::parse(in));
      const double value = bigeo::exact_emd(instance);
      std::cout << nlohmann::json{{"emd", value}, {"support", instance.support_size()}}.dump() << '\n';
      return 0;
    }

    const auto config = resolve_config(flags);
    if (print->parsed()) {
      std::cout << bigeo::config_to_json(config).dump(2) << '\n';
    } else if (synth->parsed()) {
      if (!config.synth) throw bigeo::Error("config has no input.synth section");
      bigeo::stage_synth(config);
    } else if (organize->parsed()) {
      bigeo::stage_organize(config);
    } else if (class_emd->parsed()) {
      bigeo::stage_class_emd(config);
    } else if (embed->parsed()) {
      bigeo::stage_embed_classes(config);
    } else if (validate->parsed()) {
      std::vector<bigeo::CovariateInput> covariates;
      for (const auto& arg : covariate_args) covariates.push_back(parse_covariate(arg));
      std::optional<std::filesystem::path> embedding;
      if (!embedding_path.empty()) embedding = embedding_path;
      bigeo::stage_validate(config, embedding, covariates);
    } else if (exporter->parsed()) {
      for (const auto& path : bigeo::export_plot_data(config.output, bigeo::export_kind_from_string(which)))
        std::cout << path.string() << '\n';
    } else if (run->parsed()) {
      bigeo::run_pipeline(config);
    }
  } catch (const bigeo::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
