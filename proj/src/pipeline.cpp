#include "bigeo/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "bigeo/csv.hpp"
#include "bigeo/error.hpp"
#include "bigeo/parallel.hpp"
#include "bigeo/random.hpp"

namespace fs = std::filesystem;

namespace bigeo {

namespace {

const char* to_string(Scaling s) { return s == Scaling::zscore ? "zscore" : "none"; }
const char* to_string(Imputation i) { return i == Imputation::column_mean ? "column-mean" : "drop-row"; }
const char* to_string(ClassKernelMode m) { return m == ClassKernelMode::direct ? "direct" : "markov"; }

Scaling scaling_from(const std::string& s) {
  if (s == "zscore") return Scaling::zscore;
  if (s == "none") return Scaling::none;
  throw Error("config: unknown scaling '" + s + "'");
}

Imputation imputation_from(const std::string& s) {
  if (s == "column-mean") return Imputation::column_mean;
  if (s == "drop-row") return Imputation::drop_row;
  throw Error("config: unknown imputation '" + s + "'");
}

ClassKernelMode kernel_mode_from(const std::string& s) {
  if (s == "direct") return ClassKernelMode::direct;
  if (s == "markov") return ClassKernelMode::markov;
  throw Error("config: unknown class kernel mode '" + s + "'");
}

std::optional<double> bandwidth_from(const nlohmann::json& j, const char* key, std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_null() || (v.is_string() && (v == "median-heuristic" || v == "auto"))) return std::nullopt;
  return v.get<double>();
}

nlohmann::json bandwidth_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json("median-heuristic");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return nlohmann::json::parse(in);
}

void write_coords_csv(const fs::path& path, const std::string& id_header, const std::vector<std::string>& ids,
                      const Eigen::MatrixXd& coords, const std::string& prefix) {
  std::ostringstream out;
  out << id_header;
  for (Eigen::Index c = 0; c < coords.cols(); ++c) out << ',' << prefix << (c + 1);
  out << '\n';
  for (Eigen::Index r = 0; r < coords.rows(); ++r) {
    out << csv::escape(ids[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < coords.cols(); ++c) out << ',' << csv::format_double(coords(r, c));
    out << '\n';
  }
  write_text(path, out.str());
}

struct LabeledTable {
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};

double parse_cell(const std::string& cell, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) throw ParseError("non-numeric value '" + cell + "'", line);
  return v;
}

LabeledTable read_table(const fs::path& path) {
  const auto records = csv::read_file(path);
  if (records.empty()) throw ParseError("missing header row in '" + path.string() + "'", 1);
  LabeledTable t;
  t.columns.assign(records[0].fields.begin() + 1, records[0].fields.end());
  t.values.resize(static_cast<Eigen::Index>(records.size() - 1), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != records[0].fields.size()) throw ParseError("wrong field count", rec.line);
    t.ids.push_back(rec.fields[0]);
    for (std::size_t c = 1; c < rec.fields.size(); ++c)
      t.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = parse_cell(rec.fields[c], rec.line);
  }
  return t;
}

std::string file_stem_for(const std::string& name) {
  std::string out;
  for (char ch : name) out.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_');
  return out.empty() ? "covariate" : out;
}

fs::path data_path_for(const PipelineConfig& config) {
  if (config.synth) return config.output / "data.csv";
  if (!config.data_path) throw Error("config: neither input.data nor input.synth is set");
  return *config.data_path;
}

/// Loads the input, normalizes it and aligns the labels with the kept rows.
LabeledData prepared_data(const PipelineConfig& config) {
  auto raw = load_matrix(data_path_for(config), {config.label_column, config.id_column});
  LabeledData out;
  out.matrix = normalize_features(raw.matrix, config.scaling, config.imputation);
  out.labeling = align_labels(raw.labeling, raw.matrix, out.matrix);
  out.labeling.min_class_size = config.min_class_size;
  return out;
}

std::vector<CovariateInput> covariates_for(const PipelineConfig& config) {
  auto list = config.covariates;
  if (config.synth && config.synth->emit_group_covariate)
    list.push_back({"group_signal", config.output / "covariate_group_signal.csv"});
  return list;
}

template <typename F>
void run_stage(const std::string& name, const PipelineConfig& config, F&& body) {
  try {
    fs::create_directories(config.output);
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  write_manifest(config);
}

}  // namespace

void PipelineConfig::validate() const {
  if (data_path && !synth && !fs::exists(*data_path)) throw Error("config: input file '" + data_path->string() + "' does not exist");
  if (!data_path && !synth) throw Error("config: neither input.data nor input.synth is set");
  if (n_perm == 0) throw Error("config: n_perm must be at least 1");
  if (!(embedding_sigma > 0.0)) throw Error("config: validation sigma must be positive");
  if (min_class_size == 0) throw Error("config: min_class_size must be positive");
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json input;
  input["data"] = c.data_path ? nlohmann::json(c.data_path->string()) : nlohmann::json(nullptr);
  input["label_column"] = c.label_column;
  input["id_column"] = c.id_column;
  if (c.synth) {
    input["synth"] = {{"groups", c.synth->groups},
                      {"classes_per_group", c.synth->classes_per_group},
                      {"points_per_class", c.synth->points_per_class},
                      {"features", c.synth->features},
                      {"noise", c.synth->noise},
                      {"leak", c.synth->leak},
                      {"emit_group_covariate", c.synth->emit_group_covariate}};
  } else {
    input["synth"] = nullptr;
  }
  nlohmann::json covs = nlohmann::json::array();
  for (const auto& cov : c.covariates) covs.push_back({{"name", cov.name}, {"path", cov.path.string()}});
  nlohmann::json class_levels = c.class_emd.levels.empty()
                                    ? nlohmann::json(c.class_levels_interior ? "interior" : "all")
                                    : nlohmann::json(c.class_emd.levels);
  auto organize = organize_config_json(c.organize);
  organize.erase("seed");
  return {
      {"input", input},
      {"normalization", {{"scaling", to_string(c.scaling)}, {"imputation", to_string(c.imputation)}}},
      {"organize", organize},
      {"classes",
       {{"min_class_size", c.min_class_size},
        {"emd", {{"alpha", c.class_emd.alpha}, {"beta", c.class_emd.beta}, {"levels", class_levels}}},
        {"sigma", bandwidth_json(c.class_sigma)},
        {"dims", c.class_dims},
        {"kernel", to_string(c.class_kernel)}}},
      {"validation",
       {{"sigma", c.embedding_sigma}, {"n_perm", c.n_perm}, {"top_k", c.top_k}, {"covariates", covs}}},
      {"seed", c.seed},
      {"threads", c.threads},
      {"output", c.output.string()},
  };
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (j.contains("input")) {
    const auto& in = j.at("input");
    if (in.contains("data") && !in.at("data").is_null()) c.data_path = in.at("data").get<std::string>();
    c.label_column = in.value("label_column", c.label_column);
    c.id_column = in.value("id_column", c.id_column);
    if (in.contains("synth") && !in.at("synth").is_null()) {
      const auto& s = in.at("synth");
      SynthSettings ss;
      ss.groups = s.value("groups", ss.groups);
      ss.classes_per_group = s.value("classes_per_group", ss.classes_per_group);
      ss.points_per_class = s.value("points_per_class", ss.points_per_class);
      ss.features = s.value("features", ss.features);
      ss.noise = s.value("noise", ss.noise);
      ss.leak = s.value("leak", ss.leak);
      ss.emit_group_covariate = s.value("emit_group_covariate", ss.emit_group_covariate);
      c.synth = ss;
    }
  }
  if (j.contains("normalization")) {
    const auto& n = j.at("normalization");
    c.scaling = scaling_from(n.value("scaling", std::string(to_string(c.scaling))));
    c.imputation = imputation_from(n.value("imputation", std::string(to_string(c.imputation))));
  }
  if (j.contains("organize")) c.organize = organize_config_from_json(j.at("organize"));
  if (j.contains("classes")) {
    const auto& k = j.at("classes");
    c.min_class_size = k.value("min_class_size", c.min_class_size);
    if (k.contains("emd")) {
      const auto& e = k.at("emd");
      c.class_emd.alpha = e.value("alpha", c.class_emd.alpha);
      c.class_emd.beta = e.value("beta", c.class_emd.beta);
      if (e.contains("levels")) {
        const auto& lv = e.at("levels");
        if (lv.is_string()) {
          if (lv == "interior") c.class_levels_interior = true;
          else if (lv == "all") c.class_levels_interior = false;
          else throw Error("config: classes.emd.levels must be 'interior', 'all' or a list");
          c.class_emd.levels.clear();
        } else {
          c.class_emd.levels = lv.get<std::vector<std::size_t>>();
        }
      }
    }
    c.class_sigma = bandwidth_from(k, "sigma", c.class_sigma);
    c.class_dims = k.value("dims", c.class_dims);
    if (k.contains("kernel")) c.class_kernel = kernel_mode_from(k.at("kernel").get<std::string>());
  }
  if (j.contains("validation")) {
    const auto& v = j.at("validation");
    c.embedding_sigma = v.value("sigma", c.embedding_sigma);
    c.n_perm = v.value("n_perm", c.n_perm);
    c.top_k = v.value("top_k", c.top_k);
    if (v.contains("covariates"))
      for (const auto& cov : v.at("covariates"))
        c.covariates.push_back({cov.at("name").get<std::string>(), cov.at("path").get<std::string>()});
  }
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  c.organize.seed = c.seed;
  return c;
}

PipelineConfig load_config(const fs::path& path) { return config_from_json(read_json(path)); }

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256: digest initialisation failed");
  }
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buffer, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx, digest, &length);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

void write_manifest(const PipelineConfig& config) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config.output))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& f : files)
    artifacts.push_back({{"name", f.filename().string()}, {"sha256", sha256_file(f)}, {"bytes", fs::file_size(f)}});
  auto cfg = config_to_json(config);
  cfg.erase("output");
  cfg.erase("threads");
  write_json(config.output / "manifest.json", {{"config", cfg}, {"artifacts", artifacts}});
}

void stage_synth(const PipelineConfig& config) {
  run_stage("synth", config, [&] {
    if (!config.synth) throw Error("config has no input.synth section");
    const auto& s = *config.synth;
    const auto spec = planted_groups_spec(s.groups, s.classes_per_group, s.points_per_class, s.features, s.noise,
                                          derive_seed(config.seed, 1000), s.leak);
    const auto result = synthesize_survey(spec);
    write_matrix(config.output / "data.csv", result.matrix, result.labeling, config.label_column, config.id_column);
    write_json(config.output / "ground_truth.json", result.ground_truth);
    if (s.emit_group_covariate) {
      std::ostringstream out;
      out << "class_id,value\n";
      for (std::size_t c = 0; c < spec.n_classes; ++c)
        out << result.labeling.class_ids[c] << ',' << csv::format_double(10.0 + 5.0 * static_cast<double>(spec.class_groups[c])) << '\n';
      write_text(config.output / "covariate_group_signal.csv", out.str());
    }
  });
}

void stage_organize(const PipelineConfig& config) {
  run_stage("organize", config, [&] {
    const auto data = prepared_data(config);
    auto org_cfg = config.organize;
    org_cfg.seed = config.seed;
    const auto state = bigeometric_organize(data.matrix, org_cfg);
    write_coords_csv(config.output / "feature_embedding.csv", "feature_id", data.matrix.feature_ids,
                     state.feature_embedding.coords, "coord_");
    write_json(config.output / "feature_eigenvalues.json", eigenvalues_json(state.feature_embedding));
    write_json(config.output / "feature_tree.json", tree_to_json(state.feature_tree, data.matrix.feature_ids));
    if (state.point_embedding) {
      write_coords_csv(config.output / "point_embedding.csv", "point_id", data.matrix.point_ids,
                       state.point_embedding->coords, "coord_");
      write_json(config.output / "point_eigenvalues.json", eigenvalues_json(*state.point_embedding));
      write_json(config.output / "point_tree.json", tree_to_json(*state.point_tree, data.matrix.point_ids));
    }
    nlohmann::json prov;
    prov["parameters"] = organize_config_json(org_cfg);
    prov["normalization"] = {{"scaling", to_string(config.scaling)}, {"imputation", to_string(config.imputation)}};
    prov["input"] = data_path_for(config).filename().string();
    prov["points"] = data.matrix.rows();
    prov["features"] = data.matrix.cols();
    prov["iterations"] = state.iterations;
    prov["stability_trace"] = state.stability_trace;
    prov["feature_tree_levels"] = state.feature_tree.level_count();
    if (state.point_tree) {
      std::vector<std::size_t> sizes;
      for (std::size_t l = 1; l <= state.point_tree->level_count(); ++l) sizes.push_back(state.point_tree->level(l).size());
      prov["point_tree_folders_per_level"] = sizes;
    }
    write_json(config.output / "organize_provenance.json", prov);
  });
}

void stage_class_emd(const PipelineConfig& config) {
  run_stage("class-emd", config, [&] {
    const auto data = prepared_data(config);
    std::vector<std::string> tree_ids;
    const auto tree = tree_from_json(read_json(config.output / "point_tree.json"), &tree_ids);
    if (tree_ids != data.matrix.point_ids) throw Error("point tree does not match the prepared data rows");

    const auto partition = partition_by_class(data.matrix, data.labeling);
    nlohmann::json dropped = nlohmann::json::array();
    for (const auto& [id, size] : partition.dropped) dropped.push_back({{"class_id", id}, {"size", size}});
    nlohmann::json retained = nlohmann::json::array();
    for (std::size_t c = 0; c < partition.members.size(); ++c)
      retained.push_back({{"class_id", partition.class_ids[c]}, {"size", partition.members[c].size()}});
    write_json(config.output / "retained_classes.json",
               {{"min_class_size", config.min_class_size}, {"retained", retained}, {"dropped", dropped}});

    EmdParams params = config.class_emd;
    if (params.levels.empty() && config.class_levels_interior) params.levels = interior_levels(tree);
    std::vector<ClassHistogram> histograms;
    nlohmann::json hist_json = nlohmann::json::array();
    for (std::size_t c = 0; c < partition.members.size(); ++c) {
      histograms.push_back(class_histogram(partition.members[c], tree));
      hist_json.push_back({{"class_id", partition.class_ids[c]}, {"levels", histogram_json(histograms.back())}});
    }
    write_json(config.output / "class_histograms.json", {{"levels_used", params.levels}, {"classes", hist_json}});

    const auto weights = folder_weights(tree);
    const auto distances = pairwise_class_emd(histograms, weights, params);
    std::ostringstream out;
    out << "class_id";
    for (const auto& id : partition.class_ids) out << ',' << csv::escape(id);
    out << '\n';
    for (Eigen::Index i = 0; i < distances.rows(); ++i) {
      out << csv::escape(partition.class_ids[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < distances.cols(); ++j) out << ',' << csv::format_double(distances(i, j));
      out << '\n';
    }
    write_text(config.output / "class_emd.csv", out.str());
  });
}

void stage_embed_classes(const PipelineConfig& config) {
  run_stage("embed-classes", config, [&] {
    const auto table = read_table(config.output / "class_emd.csv");
    if (table.values.rows() != table.values.cols()) throw Error("class_emd.csv is not square");
    const auto kernel = class_affinity(table.values, config.class_sigma);
    const auto embedding = class_embed(kernel, config.class_dims, config.class_kernel);
    write_coords_csv(config.output / "class_embedding.csv", "class_id", table.ids, embedding.coords, "xi_");
    write_json(config.output / "class_eigenvalues.json",
               {{"sigma_class", embedding.sigma},
                {"kernel", to_string(config.class_kernel)},
                {"eigenvalues", std::vector<double>(embedding.eigenvalues.data(),
                                                    embedding.eigenvalues.data() + embedding.eigenvalues.size())}});
  });
}

void stage_validate(const PipelineConfig& config, const std::optional<fs::path>& embedding_path,
                    const std::vector<CovariateInput>& override_covariates) {
  run_stage("validate", config, [&] {
    const auto embedding = read_table(embedding_path ? *embedding_path : config.output / "class_embedding.csv");
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < embedding.ids.size(); ++i) row_of.emplace(embedding.ids[i], i);

    const auto covariates = override_covariates.empty() ? covariates_for(config) : override_covariates;
    for (std::size_t k = 0; k < covariates.size(); ++k) {
      const auto& cov = covariates[k];
      if (!fs::exists(cov.path)) throw Error("covariate file '" + cov.path.string() + "' does not exist");
      const auto records = csv::read_file(cov.path);
      // Classes without a covariate value are left out of this test.
      std::vector<std::size_t> rows;
      std::vector<double> values;
      std::vector<std::string> ids;
      for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() < 2) throw ParseError("covariate row needs class_id,value", rec.line);
        if (rec.fields[1].empty()) continue;
        auto it = row_of.find(rec.fields[0]);
        if (it == row_of.end()) continue;
        rows.push_back(it->second);
        values.push_back(parse_cell(rec.fields[1], rec.line));
        ids.push_back(rec.fields[0]);
      }
      if (rows.size() < 2) throw Error("covariate '" + cov.name + "' matches fewer than 2 embedded classes");
      Eigen::MatrixXd coords(static_cast<Eigen::Index>(rows.size()), embedding.values.cols());
      for (std::size_t r = 0; r < rows.size(); ++r)
        coords.row(static_cast<Eigen::Index>(r)) = embedding.values.row(static_cast<Eigen::Index>(rows[r]));
      const Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));

      const auto kernel = embedding_kernel(coords, config.embedding_sigma);
      const auto report = permutation_test(f, kernel, config.n_perm, derive_seed(config.seed, 2000 + k), cov.name, ids);
      if (config.top_k > ids.size())
        std::cerr << "warning: top_k " << config.top_k << " exceeds " << ids.size() << " classes; clamped\n";
      auto j = report_json(report, 20, config.top_k);
      j["embedding_sigma"] = config.embedding_sigma;
      const std::string stem = file_stem_for(cov.name);
      write_json(config.output / ("validation_" + stem + ".json"), j);
      std::ostringstream out;
      out << "kind,error\n";
      for (double e : report.null_errors) out << "permutation," << csv::format_double(e) << '\n';
      out << "true," << csv::format_double(report.true_error) << '\n';
      write_text(config.output / ("null_" + stem + ".csv"), out.str());
    }
  });
}

void run_pipeline(const PipelineConfig& config) {
  config.validate();
  set_thread_count(config.threads);
  if (config.synth) stage_synth(config);
  stage_organize(config);
  stage_class_emd(config);
  stage_embed_classes(config);
  stage_validate(config);
}

ExportKind export_kind_from_string(const std::string& s) {
  if (s == "class-map") return ExportKind::class_map;
  if (s == "null-hist") return ExportKind::null_hist;
  if (s == "histograms") return ExportKind::histograms;
  throw Error("unknown export artifact '" + s + "' (expected class-map, null-hist or histograms)");
}

std::vector<fs::path> export_plot_data(const fs::path& dir, ExportKind which) {
  const fs::path out_dir = dir / "export";
  fs::create_directories(out_dir);
  std::vector<fs::path> written;

  std::vector<fs::path> reports;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("validation_", 0) == 0 && entry.path().extension() == ".json") reports.push_back(entry.path());
  }
  std::sort(reports.begin(), reports.end());

  switch (which) {
    case ExportKind::class_map: {
      const auto embedding = read_table(dir / "class_embedding.csv");
      std::vector<std::string> names;
      std::vector<std::map<std::string, double>> values;
      for (const auto& r : reports) {
        const auto j = read_json(r);
        names.push_back(j.at("covariate").get<std::string>());
        std::map<std::string, double> v;
        for (const auto& row : j.at("residuals")) v[row.at("class_id").get<std::string>()] = row.at("value").get<double>();
        values.push_back(std::move(v));
      }
      std::ostringstream out;
      out << "class_id,xi_1,xi_2";
      for (const auto& n : names) out << ',' << csv::escape(n);
      out << '\n';
      for (std::size_t i = 0; i < embedding.ids.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out << csv::escape(embedding.ids[i]) << ',' << csv::format_double(embedding.values(r, 0)) << ','
            << (embedding.values.cols() > 1 ? csv::format_double(embedding.values(r, 1)) : std::string("0"));
        for (const auto& v : values) {
          out << ',';
          auto it = v.find(embedding.ids[i]);
          if (it != v.end()) out << csv::format_double(it->second);
        }
        out << '\n';
      }
      written.push_back(out_dir / "class_map.csv");
      write_text(written.back(), out.str());
      break;
    }
    case ExportKind::null_hist: {
      if (reports.empty()) throw Error("no validation reports in '" + dir.string() + "'");
      for (const auto& r : reports) {
        const std::string stem = r.stem().string().substr(std::string("validation_").size());
        const fs::path src = dir / ("null_" + stem + ".csv");
        written.push_back(out_dir / ("null_hist_" + stem + ".csv"));
        fs::copy_file(src, written.back(), fs::copy_options::overwrite_existing);
      }
      break;
    }
    case ExportKind::histograms: {
      const auto j = read_json(dir / "class_histograms.json");
      std::ostringstream out;
      out << "class_id,level,folder,mass\n";
      for (const auto& cls : j.at("classes")) {
        const auto id = cls.at("class_id").get<std::string>();
        for (const auto& level : cls.at("levels")) {
          const auto l = level.at("level").get<std::size_t>();
          std::vector<std::pair<std::size_t, double>> entries;
          for (const auto& [folder, mass] : level.at("mass").items())
            entries.emplace_back(std::stoul(folder), mass.get<double>());
          std::sort(entries.begin(), entries.end());
          for (const auto& [folder, mass] : entries)
            out << csv::escape(id) << ',' << l << ',' << folder << ',' << csv::format_double(mass) << '\n';
        }
      }
      written.push_back(out_dir / "histograms.csv");
      write_text(written.back(), out.str());
      break;
    }
  }
  return written;
}

}  // namespace bigeo
