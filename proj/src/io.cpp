#include "hdt/io.hpp"

#include "hdt/decomposition.hpp"
#include "hdt/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace hdt {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("failed writing " + path);
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(what + ": invalid JSON (" + e.what() + ")");
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

const std::vector<std::string>* LevelMap::find(const std::string& column) const {
  for (const auto& [name, lv] : columns)
    if (name == column) return &lv;
  return nullptr;
}

LevelMap read_level_map(const std::string& path) {
  const json j = parse_json(read_text(path), path);
  if (!j.is_object()) throw FormatError(path + ": level map must be an object of column -> [levels]");
  LevelMap map;
  for (const auto& [name, levels] : j.items()) {
    if (!levels.is_array()) throw FormatError(path + ": levels of '" + name + "' must be an array");
    std::vector<std::string> lv;
    for (const auto& l : levels) lv.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    map.columns.emplace_back(name, std::move(lv));
  }
  return map;
}

IndexTable read_index_csv(const std::string& path, bool require_y, const LevelMap* levels) {
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw ParseError(path + ": empty file, expected header x1..xp,y");

  std::map<int, std::size_t> xcol;  // position -> column
  std::optional<std::size_t> ycol;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "y") {
      ycol = c;
    } else if (h.size() > 1 && h[0] == 'x') {
      int pos = 0;
      auto res = std::from_chars(h.data() + 1, h.data() + h.size(), pos);
      if (res.ec != std::errc() || res.ptr != h.data() + h.size() || pos < 1)
        throw ParseError(path + ": " + at_line(lineno) + "unrecognised column '" + h + "'");
      if (!xcol.emplace(pos, c).second) throw ParseError(path + ": " + at_line(lineno) + "duplicate column '" + h + "'");
    } else {
      throw ParseError(path + ": " + at_line(lineno) + "unrecognised column '" + h + "'");
    }
  }
  if (require_y && !ycol) throw ParseError(path + ": missing column 'y'");
  const int p = static_cast<int>(xcol.size());
  if (p == 0 || xcol.rbegin()->first != p) throw ParseError(path + ": index columns must be x1..xp");

  IndexTable t;
  t.order = p;
  t.max_level.assign(static_cast<std::size_t>(p), 0);
  std::vector<const std::vector<std::string>*> lv(static_cast<std::size_t>(p), nullptr);
  if (levels)
    for (int j = 1; j <= p; ++j) lv[static_cast<std::size_t>(j - 1)] = levels->find("x" + std::to_string(j));

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(path + ": " + at_line(lineno) + "expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    for (int j = 1; j <= p; ++j) {
      const std::string& f = fields[xcol.at(j)];
      int v = 0;
      if (const auto* names = lv[static_cast<std::size_t>(j - 1)]) {
        auto it = std::find(names->begin(), names->end(), f);
        if (it == names->end()) throw ParseError(path + ": " + at_line(lineno) + "unknown level '" + f + "' in x" + std::to_string(j));
        v = static_cast<int>(it - names->begin()) + 1;
      } else {
        auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size())
          throw ParseError(path + ": " + at_line(lineno) + "x" + std::to_string(j) + " is not an integer: '" + f + "'");
        if (v < 1) throw ParseError(path + ": " + at_line(lineno) + "x" + std::to_string(j) + " must be >= 1");
      }
      t.coords.push_back(v);
      auto& mx = t.max_level[static_cast<std::size_t>(j - 1)];
      mx = std::max(mx, v);
    }
    if (ycol) {
      const std::string& f = fields[*ycol];
      double y = 0.0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), y);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw ParseError(path + ": " + at_line(lineno) + "y is not a number: '" + f + "'");
      t.values.push_back(y);
    }
  }
  for (int j = 0; j < p; ++j)
    if (lv[static_cast<std::size_t>(j)]) t.max_level[static_cast<std::size_t>(j)] = static_cast<int>(lv[static_cast<std::size_t>(j)]->size());
  return t;
}

ObservationSet read_observations_csv(const std::string& path, const std::optional<std::vector<int>>& dims,
                                     const LevelMap* levels, bool allow_zero) {
  IndexTable t = read_index_csv(path, true, levels);
  if (t.values.empty()) throw ParseError(path + ": no observation rows");
  std::vector<int> shape = dims ? *dims : t.max_level;
  if (static_cast<int>(shape.size()) != t.order)
    throw DimensionError(path + ": data has " + std::to_string(t.order) + " index columns, dims has " +
                         std::to_string(shape.size()));
  const auto p = static_cast<std::size_t>(t.order);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j)
      if (t.coords[i * p + j] > shape[j])
        throw DimensionError(path + ": row " + std::to_string(i + 1) + ": x" + std::to_string(j + 1) + "=" +
                             std::to_string(t.coords[i * p + j]) + " outside 1.." + std::to_string(shape[j]));
    const double y = t.values[i];
    if (!(y > 0.0) && !(allow_zero && y == 0.0))
      throw DomainError(path + ": row " + std::to_string(i + 1) + ": y must be positive, got " + format_double(y));
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Index>(t.values.size()));
  return ObservationSet(TensorShape(std::move(shape)), std::move(t.coords), std::move(y), allow_zero);
}

void write_observations_csv(const std::string& path, const ObservationSet& obs) {
  std::string out;
  const int p = obs.shape().order();
  for (int j = 1; j <= p; ++j) out += "x" + std::to_string(j) + ",";
  out += "y\n";
  for (Index i = 0; i < obs.size(); ++i) {
    for (int c : obs.index(i)) out += std::to_string(c) + ",";
    out += format_double(obs.value(i)) + "\n";
  }
  write_text(path, out);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> read_dims(const json& j, const std::string& what) {
  if (!j.contains("dims") || !j["dims"].is_array()) throw FormatError(what + ": missing \"dims\" array");
  std::vector<int> dims;
  for (const auto& d : j["dims"]) {
    if (!d.is_number_integer()) throw FormatError(what + ": dims must be integers");
    dims.push_back(d.get<int>());
  }
  return dims;
}

PartitionComplex complex_from_json(const json& facets, int order, const std::string& what) {
  if (!facets.is_array()) throw FormatError(what + ": \"facets\" must be an array of arrays");
  std::vector<std::vector<int>> f;
  for (const auto& fj : facets) {
    if (!fj.is_array()) throw FormatError(what + ": every facet must be an array of positions");
    std::vector<int> facet;
    for (const auto& v : fj) {
      if (!v.is_number_integer()) throw FormatError(what + ": facet positions must be integers");
      facet.push_back(v.get<int>());
    }
    f.push_back(std::move(facet));
  }
  std::vector<int> seen(static_cast<std::size_t>(std::max(order, 0)) + 1, 0);
  bool partition = true;
  for (const auto& facet : f)
    for (int j : facet) {
      if (j < 1 || j > order) partition = false;
      else if (++seen[static_cast<std::size_t>(j)] > 1) partition = false;
    }
  for (int j = 1; j <= order && partition; ++j) partition = seen[static_cast<std::size_t>(j)] == 1;
  return partition ? PartitionComplex::partition(std::move(f), order) : PartitionComplex::general(std::move(f), order);
}

std::vector<Eigen::VectorXd> factors_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": \"factors\" must be an array of arrays");
  std::vector<Eigen::VectorXd> out;
  for (const auto& fj : j) {
    if (!fj.is_array()) throw FormatError(what + ": every factor must be an array of numbers");
    Eigen::VectorXd v(static_cast<Index>(fj.size()));
    for (std::size_t i = 0; i < fj.size(); ++i) {
      if (!fj[i].is_number()) throw FormatError(what + ": factor entries must be numbers");
      v[static_cast<Index>(i)] = fj[i].get<double>();
    }
    out.push_back(std::move(v));
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

FactorSet factor_set_from_json(const json& j, const std::string& what) {
  FactorSet fs;
  fs.shape = TensorShape(read_dims(j, what));
  fs.complex = complex_from_json(j["facets"], fs.shape.order(), what);
  fs.factors = factors_from_json(j["factors"], what);
  if (j.contains("M")) fs.M = j["M"].get<double>();
  FacetLayout layout(fs.shape, fs.complex);
  if (static_cast<int>(fs.factors.size()) != layout.num_facets())
    throw FormatError(what + ": " + std::to_string(fs.factors.size()) + " factors for " +
                      std::to_string(layout.num_facets()) + " facets");
  for (int k = 0; k < layout.num_facets(); ++k)
    if (fs.factors[static_cast<std::size_t>(k)].size() != layout.facet_size(k))
      throw FormatError(what + ": factor " + std::to_string(k + 1) + " should have " +
                        std::to_string(layout.facet_size(k)) + " entries");
  return fs;
}

}  // namespace

DenseTensor TensorFile::to_dense() const { return dense ? *dense : hdt::to_dense(*factored); }

TensorFile read_tensor_json(const std::string& path) {
  const json j = parse_json(read_text(path), path);
  if (!j.is_object()) throw FormatError(path + ": tensor file must be a JSON object");
  TensorFile t;
  if (j.contains("entries")) {
    t.shape = TensorShape(read_dims(j, path));
    const json& e = j["entries"];
    if (!e.is_array()) throw FormatError(path + ": \"entries\" must be an array");
    Eigen::VectorXd v(static_cast<Index>(e.size()));
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i].is_number()) throw FormatError(path + ": entries must be numbers");
      v[static_cast<Index>(i)] = e[i].get<double>();
    }
    t.dense = DenseTensor(t.shape, std::move(v));
  } else if (j.contains("facets") && j.contains("factors")) {
    t.factored = factor_set_from_json(j, path);
    t.shape = t.factored->shape;
  } else {
    throw FormatError(path + ": expected {\"dims\",\"entries\"} or {\"dims\",\"facets\",\"factors\"}");
  }
  return t;
}

void write_tensor_json(const std::string& path, const DenseTensor& tensor) {
  json j;
  j["dims"] = tensor.shape.dims();
  j["entries"] = vector_json(tensor.entries);
  write_text(path, j.dump(1) + "\n");
}

PartitionComplex parse_complex(const std::string& text, int order) {
  return complex_from_json(parse_json(text, "facets"), order, "facets");
}

void write_model_json(const std::string& path, const Model& model, std::optional<double> floor) {
  json j;
  if (const auto* fs = std::get_if<FactorSet>(&model)) {
    j["dims"] = fs->shape.dims();
    if (!fs->complex.is_partition()) j["kind"] = "general";
    j["facets"] = fs->complex.facets();
    json factors = json::array();
    for (const auto& f : fs->factors) factors.push_back(vector_json(f));
    j["factors"] = factors;
    j["M"] = fs->M;
  } else {
    const auto& cp = std::get<CpModel>(model);
    j["dims"] = cp.shape.dims();
    j["rank"] = cp.rank;
    json factors = json::array();
    for (const auto& V : cp.factors) {
      json rows = json::array();
      for (Index a = 0; a < V.rows(); ++a)
        for (Index c = 0; c < V.cols(); ++c) rows.push_back(V(a, c));
      factors.push_back(rows);
    }
    j["factors"] = factors;
  }
  if (floor) j["floor"] = *floor;
  write_text(path, j.dump(1) + "\n");
}

ModelFile read_model_json(const std::string& path) {
  const json j = parse_json(read_text(path), path);
  if (!j.is_object()) throw FormatError(path + ": model file must be a JSON object");
  ModelFile mf;
  if (j.contains("floor")) mf.floor = j["floor"].get<double>();
  try {
    if (j.contains("rank") && j.contains("factors")) {
      CpModel cp;
      cp.shape = TensorShape(read_dims(j, path));
      cp.rank = j["rank"].get<int>();
      if (cp.rank < 1) throw FormatError(path + ": rank must be >= 1");
      const auto raw = factors_from_json(j["factors"], path);
      if (static_cast<int>(raw.size()) != cp.shape.order()) throw FormatError(path + ": need one factor per mode");
      for (int i = 0; i < cp.shape.order(); ++i) {
        const int r = cp.shape.dims()[static_cast<std::size_t>(i)];
        if (raw[static_cast<std::size_t>(i)].size() != static_cast<Index>(r) * cp.rank)
          throw FormatError(path + ": factor " + std::to_string(i + 1) + " must hold dims*rank entries");
        cp.factors.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            raw[static_cast<std::size_t>(i)].data(), r, cp.rank));
      }
      mf.model = std::move(cp);
    } else if (j.contains("facets") && j.contains("factors")) {
      mf.model = factor_set_from_json(j, path);
    } else {
      throw FormatError(path + ": unknown model layout (expected facets/factors or rank/factors)");
    }
  } catch (const DimensionError& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return mf;
}

double model_eval(const Model& model, std::span<const int> x) {
  if (const auto* fs = std::get_if<FactorSet>(&model)) return eval_decomposition(*fs, x);
  return cp_eval(std::get<CpModel>(model), x);
}

DenseTensor model_to_dense(const Model& model) {
  if (const auto* fs = std::get_if<FactorSet>(&model)) return to_dense(*fs);
  return cp_to_dense(std::get<CpModel>(model));
}

const TensorShape& model_shape(const Model& model) {
  if (const auto* fs = std::get_if<FactorSet>(&model)) return fs->shape;
  return std::get<CpModel>(model).shape;
}

}  // namespace hdt
