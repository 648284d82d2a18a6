#pragma once

#include "hdt/baselines.hpp"
#include "hdt/risk.hpp"
#include "hdt/tensor.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hdt {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Categorical levels per column: column name -> ordered level strings, coded
/// 1..k by list position.
struct LevelMap {
  std::vector<std::pair<std::string, std::vector<std::string>>> columns;

  const std::vector<std::string>* find(const std::string& column) const;
};

LevelMap read_level_map(const std::string& path);

/// Index table read from CSV. `values` is empty when the file has no y column.
struct IndexTable {
  int order = 0;
  std::vector<int> coords;
  std::vector<double> values;
  std::vector<int> max_level;
};

/// CSV with header x1..xp[,y]. Indices are 1-based integers, or level strings
/// when `levels` has an entry for the column. Throws ParseError naming the
/// line (1-based, header = line 1) on malformed rows.
IndexTable read_index_csv(const std::string& path, bool require_y, const LevelMap* levels = nullptr);

/// Observations with shape `dims` (or the observed maxima when absent).
ObservationSet read_observations_csv(const std::string& path, const std::optional<std::vector<int>>& dims,
                                     const LevelMap* levels = nullptr, bool allow_zero = false);
void write_observations_csv(const std::string& path, const ObservationSet& obs);

/// {"dims","entries"} or {"dims","facets","factors"[,"M"]}; facets without a
/// "kind" field are read as a partition when they form one.
struct TensorFile {
  TensorShape shape;
  std::optional<DenseTensor> dense;
  std::optional<FactorSet> factored;

  DenseTensor to_dense() const;
};

TensorFile read_tensor_json(const std::string& path);
void write_tensor_json(const std::string& path, const DenseTensor& tensor);

/// Complex from JSON text such as "[[1,2],[3]]": partition when the facets
/// cover 1..order disjointly, general otherwise.
PartitionComplex parse_complex(const std::string& text, int order);

using Model = std::variant<FactorSet, CpModel>;

/// {"dims","facets","factors","M"} for decompositions, {"dims","rank","factors"}
/// for CP models (factors as row-major r_i x q). `floor` is stored when set.
void write_model_json(const std::string& path, const Model& model, std::optional<double> floor = std::nullopt);
struct ModelFile {
  Model model;
  std::optional<double> floor;
};
/// Throws FormatError on an unrecognised layout.
ModelFile read_model_json(const std::string& path);

double model_eval(const Model& model, std::span<const int> x);
DenseTensor model_to_dense(const Model& model);
const TensorShape& model_shape(const Model& model);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace hdt
