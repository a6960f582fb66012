#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bigeo/bigeometric.hpp"
#include "bigeo/class_analysis.hpp"
#include "bigeo/core_data.hpp"
#include "bigeo/error.hpp"
#include "bigeo/tree_emd.hpp"

namespace bigeo {

struct SynthSettings {
  std::size_t groups = 3;
  std::size_t classes_per_group = 10;
  std::size_t points_per_class = 100;
  std::size_t features = 40;
  double noise = 0.5;
  double leak = 0.1;
  /// Writes covariate_group_signal.csv (a smooth function of the planted group)
  /// and validates against it.
  bool emit_group_covariate = true;
};

struct CovariateInput {
  std::string name;
  std::filesystem::path path;
};

struct PipelineConfig {
  // input
  std::optional<std::filesystem::path> data_path;
  std::optional<SynthSettings> synth;
  std::string label_column = "class";
  std::string id_column = "id";
  // normalization
  Scaling scaling = Scaling::zscore;
  Imputation imputation = Imputation::column_mean;
  // bigeometric organization
  OrganizeConfig organize;
  // classes
  std::size_t min_class_size = 50;
  EmdParams class_emd{-0.5, 1.0, {}};
  /// Class-EMD level choice when class_emd.levels is empty: interior or all.
  bool class_levels_interior = true;
  std::optional<double> class_sigma;
  std::size_t class_dims = 2;
  ClassKernelMode class_kernel = ClassKernelMode::markov;
  // validation
  double embedding_sigma = 0.5;
  std::size_t n_perm = 1000;
  std::size_t top_k = 10;
  std::vector<CovariateInput> covariates;
  // run
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::filesystem::path output = "out";

  /// Checks that the input data exists (covariates are checked by the
  /// validate stage).
  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& config);
/// Missing keys keep their defaults.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

/// Error raised by a pipeline stage; what() is prefixed by the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// Individual stages. Each reads its inputs from / writes its artifacts into
// config.output and refreshes manifest.json.
void stage_synth(const PipelineConfig& config);
void stage_organize(const PipelineConfig& config);
void stage_class_emd(const PipelineConfig& config);
void stage_embed_classes(const PipelineConfig& config);
/// Optional overrides replace the class embedding file and covariate list.
void stage_validate(const PipelineConfig& config, const std::optional<std::filesystem::path>& embedding = {},
                    const std::vector<CovariateInput>& covariates = {});

/// synth (when configured) -> organize -> class-emd -> embed-classes -> validate.
/// Throws StageError naming the failing stage; earlier artifacts stay on disk.
void run_pipeline(const PipelineConfig& config);

enum class ExportKind { class_map, null_hist, histograms };
ExportKind export_kind_from_string(const std::string& s);
/// Writes plot-ready CSVs into <dir>/export and returns their paths.
std::vector<std::filesystem::path> export_plot_data(const std::filesystem::path& artifact_dir, ExportKind which);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Rewrites manifest.json from the current artifacts in `dir`.
void write_manifest(const PipelineConfig& config);

}  // namespace bigeo
