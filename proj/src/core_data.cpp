#include "bigeo/core_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "bigeo/csv.hpp"
#include "bigeo/error.hpp"
#include "bigeo/random.hpp"

namespace bigeo {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

bool DataMatrix::is_missing(std::size_t i, std::size_t j) const {
  return std::isnan(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
}

bool DataMatrix::has_missing() const { return values.hasNaN(); }

LabeledData read_matrix(std::istream& in, const LoadOptions& options) {
  const auto records = csv::read(in);
  if (records.empty()) throw ParseError("missing header row", 1);

  const auto& header = records.front();
  std::ptrdiff_t label_col = -1;
  std::ptrdiff_t id_col = -1;
  std::vector<std::size_t> feature_cols;
  std::unordered_set<std::string> seen_names;
  for (std::size_t c = 0; c < header.fields.size(); ++c) {
    const std::string name = trim(header.fields[c]);
    if (!seen_names.insert(name).second)
      throw ParseError("duplicate column name '" + name + "'", header.line);
    if (name == options.label_column) {
      label_col = static_cast<std::ptrdiff_t>(c);
    } else if (!options.id_column.empty() && name == options.id_column) {
      id_col = static_cast<std::ptrdiff_t>(c);
    } else {
      feature_cols.push_back(c);
    }
  }
  if (label_col < 0) throw Error("label column not found: '" + options.label_column + "'");

  LabeledData out;
  auto& m = out.matrix;
  for (std::size_t c : feature_cols) m.feature_ids.push_back(trim(header.fields[c]));

  const std::size_t n = records.size() - 1;
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
  std::unordered_map<std::string, std::size_t> class_index;
  std::unordered_set<std::string> point_seen;

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    if (rec.fields.size() != header.fields.size()) {
      throw ParseError("expected " + std::to_string(header.fields.size()) + " fields, found " +
                           std::to_string(rec.fields.size()),
                       rec.line);
    }
    std::string pid = id_col >= 0 ? trim(rec.fields[static_cast<std::size_t>(id_col)])
                                  : std::to_string(r + 1);
    if (!point_seen.insert(pid).second) throw ParseError("duplicate point id '" + pid + "'", rec.line);
    m.point_ids.push_back(std::move(pid));

    const std::string cls = trim(rec.fields[static_cast<std::size_t>(label_col)]);
    if (cls.empty()) throw ParseError("empty class label", rec.line);
    auto [it, inserted] = class_index.emplace(cls, out.labeling.class_ids.size());
    if (inserted) out.labeling.class_ids.push_back(cls);
    out.labeling.labels.push_back(it->second);

    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const std::string cell = trim(rec.fields[feature_cols[f]]);
      double v = kMissing;
      if (!cell.empty() && !parse_number(cell, v))
        throw NonNumericCellError(m.feature_ids[f], cell, rec.line);
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = v;
    }
  }
  return out;
}

LabeledData load_matrix(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_matrix(in, options);
}

void write_matrix(const std::filesystem::path& path, const DataMatrix& matrix,
                  const ClassLabeling& labeling, const std::string& label_column,
                  const std::string& id_column) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << csv::escape(id_column) << ',' << csv::escape(label_column);
  for (const auto& f : matrix.feature_ids) out << ',' << csv::escape(f);
  out << '\n';
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    out << csv::escape(matrix.point_ids[i]) << ','
        << csv::escape(labeling.class_ids[labeling.labels[i]]);
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      out << ',';
      if (!matrix.is_missing(i, j))
        out << csv::format_double(matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

DataMatrix normalize_features(const DataMatrix& matrix, Scaling scaling, Imputation imputation) {
  const Eigen::Index n = matrix.values.rows();
  const Eigen::Index m = matrix.values.cols();
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::Index present = 0;
    for (Eigen::Index i = 0; i < n; ++i) present += std::isnan(matrix.values(i, j)) ? 0 : 1;
    if (present == 0)
      throw Error("feature '" + matrix.feature_ids[static_cast<std::size_t>(j)] + "' is entirely missing");
    if (present < 2)
      throw Error("feature '" + matrix.feature_ids[static_cast<std::size_t>(j)] +
                  "' has fewer than 2 observed values");
  }

  DataMatrix out;
  out.feature_ids = matrix.feature_ids;
  if (imputation == Imputation::drop_row) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!matrix.values.row(i).hasNaN()) keep.push_back(i);
    out.values.resize(static_cast<Eigen::Index>(keep.size()), m);
    for (std::size_t r = 0; r < keep.size(); ++r) {
      out.values.row(static_cast<Eigen::Index>(r)) = matrix.values.row(keep[r]);
      out.point_ids.push_back(matrix.point_ids[static_cast<std::size_t>(keep[r])]);
    }
    if (out.values.rows() < 2) throw Error("fewer than 2 complete rows after dropping missing data");
  } else {
    out.values = matrix.values;
    out.point_ids = matrix.point_ids;
    for (Eigen::Index j = 0; j < m; ++j) {
      double sum = 0.0;
      Eigen::Index count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isnan(out.values(i, j))) {
          sum += out.values(i, j);
          ++count;
        }
      }
      const double mean = sum / static_cast<double>(count);
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::isnan(out.values(i, j))) out.values(i, j) = mean;
    }
  }

  if (scaling == Scaling::zscore) {
    const double rows = static_cast<double>(out.values.rows());
    for (Eigen::Index j = 0; j < m; ++j) {
      auto col = out.values.col(j);
      const double mean = col.sum() / rows;
      col.array() -= mean;
      const double sd = std::sqrt(col.squaredNorm() / rows);
      // Relative test so columns that are constant up to rounding also map to zero.
      if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        col.setZero();
      } else {
        col /= sd;
      }
    }
  }
  return out;
}

ClassLabeling align_labels(const ClassLabeling& labeling, const DataMatrix& original,
                           const DataMatrix& kept) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < original.point_ids.size(); ++i) row_of.emplace(original.point_ids[i], i);
  ClassLabeling out;
  out.class_ids = labeling.class_ids;
  out.min_class_size = labeling.min_class_size;
  for (const auto& id : kept.point_ids) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw Error("point '" + id + "' not present in the original matrix");
    out.labels.push_back(labeling.labels[it->second]);
  }
  return out;
}

void SynthSpec::validate() const {
  if (n_classes == 0 || n_archetypes == 0) throw Error("synth: need at least one class and archetype");
  if (feature_dim < 2) throw Error("synth: feature_dim must be at least 2");
  if (min_points_per_class == 0 || min_points_per_class > max_points_per_class)
    throw Error("synth: invalid points-per-class range");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw Error("synth: noise_scale must be >= 0");
  if (feature_blocks > feature_dim) throw Error("synth: more feature blocks than features");
  if (static_cast<std::size_t>(mixing.rows()) != n_classes ||
      static_cast<std::size_t>(mixing.cols()) != n_archetypes)
    throw Error("synth: mixing matrix must be n_classes x n_archetypes");
  for (Eigen::Index c = 0; c < mixing.rows(); ++c) {
    if ((mixing.row(c).array() < 0.0).any() || !mixing.row(c).allFinite())
      throw Error("synth: negative mixing weight for class " + std::to_string(c));
    if (std::abs(mixing.row(c).sum() - 1.0) > 1e-9)
      throw Error("synth: mixing weights for class " + std::to_string(c) + " do not sum to 1");
  }
  if (!class_groups.empty() && class_groups.size() != n_classes)
    throw Error("synth: class_groups must have one entry per class");
  if (n_classes * max_points_per_class < 2) throw Error("synth: fewer than 2 points");
}

SynthResult synthesize_survey(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed);

  const std::size_t blocks = spec.feature_blocks == 0 ? spec.feature_dim : spec.feature_blocks;
  SynthResult out;
  out.archetypes.resize(static_cast<Eigen::Index>(spec.n_archetypes),
                        static_cast<Eigen::Index>(spec.feature_dim));
  for (std::size_t a = 0; a < spec.n_archetypes; ++a) {
    std::vector<double> level(blocks);
    for (auto& v : level) v = standard_normal(rng);
    for (std::size_t f = 0; f < spec.feature_dim; ++f)
      out.archetypes(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f)) =
          level[f * blocks / spec.feature_dim];
  }

  std::vector<std::size_t> counts(spec.n_classes);
  for (auto& c : counts)
    c = spec.min_points_per_class +
        uniform_index(rng, spec.max_points_per_class - spec.min_points_per_class + 1);
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});

  auto& m = out.matrix;
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.feature_dim));
  for (std::size_t f = 0; f < spec.feature_dim; ++f) m.feature_ids.push_back("q" + std::to_string(f + 1));
  for (std::size_t c = 0; c < spec.n_classes; ++c) out.labeling.class_ids.push_back("c" + std::to_string(c + 1));

  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const auto weights = spec.mixing.row(static_cast<Eigen::Index>(c));
    for (std::size_t k = 0; k < counts[c]; ++k, ++row) {
      double u = uniform01(rng);
      std::size_t a = 0;
      for (; a + 1 < spec.n_archetypes; ++a) {
        u -= weights(static_cast<Eigen::Index>(a));
        if (u < 0.0) break;
      }
      // Skip zero-weight archetypes that rounding could otherwise land on.
      while (weights(static_cast<Eigen::Index>(a)) == 0.0 && a > 0) --a;
      out.point_archetype.push_back(a);
      for (std::size_t f = 0; f < spec.feature_dim; ++f) {
        m.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(f)) =
            out.archetypes(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f)) +
            spec.noise_scale * standard_normal(rng);
      }
      m.point_ids.push_back("p" + std::to_string(row + 1));
      out.labeling.labels.push_back(c);
    }
  }
  out.labeling.min_class_size = 1;

  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    nlohmann::json entry;
    entry["class_id"] = out.labeling.class_ids[c];
    entry["size"] = counts[c];
    std::vector<double> mix(spec.n_archetypes);
    for (std::size_t a = 0; a < spec.n_archetypes; ++a)
      mix[a] = spec.mixing(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a));
    entry["mixture"] = mix;
    if (!spec.class_groups.empty()) entry["group"] = spec.class_groups[c];
    classes.push_back(std::move(entry));
  }
  out.ground_truth["classes"] = std::move(classes);
  out.ground_truth["n_archetypes"] = spec.n_archetypes;
  out.ground_truth["noise_scale"] = spec.noise_scale;
  out.ground_truth["rng_seed"] = spec.rng_seed;
  return out;
}

SynthSpec planted_groups_spec(std::size_t n_groups, std::size_t classes_per_group,
                              std::size_t points_per_class, std::size_t feature_dim,
                              double noise_scale, std::uint64_t seed, double leak) {
  SynthSpec spec;
  spec.n_classes = n_groups * classes_per_group;
  spec.n_archetypes = 2 * n_groups;
  spec.min_points_per_class = spec.max_points_per_class = points_per_class;
  spec.feature_dim = feature_dim;
  spec.feature_blocks = std::min<std::size_t>(feature_dim, 8);
  spec.noise_scale = noise_scale;
  spec.rng_seed = seed;
  spec.mixing = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.n_classes),
                                      static_cast<Eigen::Index>(spec.n_archetypes));
  const std::size_t others = spec.n_archetypes - 2;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const std::size_t g = c / classes_per_group;
    spec.class_groups.push_back(g);
    const double own = others == 0 ? 1.0 : 1.0 - leak;
    // The two archetypes of a group get unequal shares so groups differ in shape.
    spec.mixing(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(2 * g)) = 0.6 * own;
    spec.mixing(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(2 * g + 1)) = 0.4 * own;
    for (std::size_t a = 0; a < spec.n_archetypes; ++a) {
      if (a / 2 != g) spec.mixing(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a)) = leak / static_cast<double>(others);
    }
  }
  return spec;
}

ClassPartition partition_by_class(const DataMatrix& matrix, const ClassLabeling& labeling) {
  if (labeling.labels.size() != matrix.rows())
    throw Error("labeling covers " + std::to_string(labeling.labels.size()) + " points, matrix has " +
                std::to_string(matrix.rows()));
  std::vector<std::vector<std::size_t>> by_class(labeling.class_count());
  for (std::size_t i = 0; i < labeling.labels.size(); ++i) {
    if (labeling.labels[i] >= by_class.size()) throw Error("label index out of range at row " + std::to_string(i));
    by_class[labeling.labels[i]].push_back(i);
  }
  ClassPartition out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) continue;
    if (by_class[c].size() < labeling.min_class_size) {
      out.dropped.emplace_back(labeling.class_ids[c], by_class[c].size());
    } else {
      out.members.push_back(std::move(by_class[c]));
      out.class_ids.push_back(labeling.class_ids[c]);
    }
  }
  if (out.members.empty()) throw Error("no classes retained");
  return out;
}

}  // namespace bigeo
