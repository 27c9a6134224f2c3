#include "sglpath/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sgl::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_index(std::string_view s, Index& out) {
  s = trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError(file, 0, "cannot open file");
  return in;
}

std::ofstream open_output(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

}  // namespace

InputError::InputError(const fs::path& file, std::size_t line, const std::string& message)
    : Error(file.string() + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      file_(file),
      line_(line) {}

DesignFormat parse_design_format(const std::string& name) {
  if (name == "auto") return DesignFormat::kAuto;
  if (name == "csv") return DesignFormat::kCsv;
  if (name == "mtx" || name == "matrixmarket") return DesignFormat::kMatrixMarket;
  throw Error("unknown design format '" + name + "' (expected auto, csv or mtx)");
}

DenseMatrix read_dense_csv(const fs::path& file) {
  auto in = open_input(file);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      width = split(line, ',').size();
      break;
    }
  }
  if (width == 0) throw InputError(file, line_no, "missing header row");

  std::vector<std::vector<double>> columns(width);
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != width) {
      throw InputError(file, line_no,
                       "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < width; ++j) {
      double v;
      if (!parse_double(fields[j], v)) {
        throw InputError(file, line_no, "field " + std::to_string(j + 1) + " is not a number: '" +
                                            std::string(trim(fields[j])) + "'");
      }
      if (!std::isfinite(v)) throw InputError(file, line_no, "non-finite value in design");
      columns[j].push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw InputError(file, line_no, "no data rows");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * width);
  for (const auto& c : columns) values.insert(values.end(), c.begin(), c.end());
  return DenseMatrix(rows, static_cast<Index>(width), std::move(values));
}

SparseColumnMatrix read_matrix_market(const fs::path& file) {
  auto in = open_input(file);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw InputError(file, 1, "empty file");
  ++line_no;
  std::string banner = line;
  std::transform(banner.begin(), banner.end(), banner.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto tokens = split_ws(banner);
  if (tokens.size() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix") {
    throw InputError(file, 1, "missing '%%MatrixMarket matrix' banner");
  }
  if (tokens[2] != "coordinate") throw InputError(file, 1, "only coordinate format is supported");
  const bool pattern = tokens[3] == "pattern";
  if (!pattern && tokens[3] != "real" && tokens[3] != "integer") {
    throw InputError(file, 1, "unsupported field type '" + std::string(tokens[3]) + "'");
  }
  const bool symmetric = tokens[4] == "symmetric";
  if (!symmetric && tokens[4] != "general") {
    throw InputError(file, 1, "unsupported symmetry '" + std::string(tokens[4]) + "'");
  }

  Index rows = -1, cols = -1, entries = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    const auto f = split_ws(t);
    if (f.size() != 3 || !parse_index(f[0], rows) || !parse_index(f[1], cols) ||
        !parse_index(f[2], entries) || rows < 0 || cols < 0 || entries < 0) {
      throw InputError(file, line_no, "malformed size line (expected: rows cols entries)");
    }
    break;
  }
  if (rows < 0) throw InputError(file, line_no, "missing size line");

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
  Index seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    const auto f = split_ws(t);
    Index r, c;
    double v = 1.0;
    if (f.size() != (pattern ? 2u : 3u) || !parse_index(f[0], r) || !parse_index(f[1], c) ||
        (!pattern && !parse_double(f[2], v))) {
      throw InputError(file, line_no, "malformed entry");
    }
    if (r < 1 || r > rows || c < 1 || c > cols) {
      throw InputError(file, line_no, "entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                          ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!std::isfinite(v)) throw InputError(file, line_no, "non-finite value");
    triplets.push_back({r - 1, c - 1, v});
    if (symmetric && r != c) triplets.push_back({c - 1, r - 1, v});
    ++seen;
  }
  if (seen != entries) {
    throw InputError(file, line_no, "header declares " + std::to_string(entries) +
                                        " entries, found " + std::to_string(seen));
  }
  return SparseColumnMatrix::from_triplets(rows, cols, triplets);
}

DesignMatrix read_design(const fs::path& file, DesignFormat format) {
  if (format == DesignFormat::kAuto) {
    format = file.extension() == ".mtx" ? DesignFormat::kMatrixMarket : DesignFormat::kCsv;
  }
  if (format == DesignFormat::kMatrixMarket) return read_matrix_market(file);
  return read_dense_csv(file);
}

std::vector<double> read_vector(const fs::path& file) {
  auto in = open_input(file);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> out;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    double v;
    if (!parse_double(t, v)) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError(file, line_no, "not a number: '" + std::string(t) + "'");
    }
    if (std::isnan(v)) throw InputError(file, line_no, "NaN is not allowed");
    first = false;
    out.push_back(v);
  }
  if (out.empty()) throw InputError(file, line_no, "no values");
  return out;
}

GroupStructure read_groups(const std::string& spec, Index n_features) {
  if (spec.rfind("size:", 0) == 0) {
    Index size;
    if (!parse_index(std::string_view(spec).substr(5), size) || size < 1) {
      throw Error("invalid group shorthand '" + spec + "' (expected size:k with k >= 1)");
    }
    return GroupStructure::equal_size(n_features, size);
  }
  const fs::path file(spec);
  const auto values = read_vector(file);
  std::vector<Index> ids;
  ids.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] != std::floor(values[k])) {
      throw InputError(file, 0, "group label " + std::to_string(k + 1) + " is not an integer");
    }
    ids.push_back(static_cast<Index>(values[k]));
  }
  if (static_cast<Index>(ids.size()) != n_features) {
    throw InputError(file, 0, "has " + std::to_string(ids.size()) + " labels but the design has " +
                                  std::to_string(n_features) + " columns");
  }
  try {
    return GroupStructure::from_ids(ids);
  } catch (const Error& e) {
    throw InputError(file, 0, e.what());
  }
}

std::pair<std::vector<double>, std::vector<double>> read_bounds(const fs::path& file) {
  auto in = open_input(file);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> lower, upper;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() == 1) fields = split_ws(line);
    double lo, hi;
    const bool ok = fields.size() == 2 && parse_double(fields[0], lo) && parse_double(fields[1], hi);
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError(file, line_no, "expected 'lower,upper'");
    }
    first = false;
    if (!(lo <= 0.0) || !(hi >= 0.0)) throw InputError(file, line_no, "bounds must satisfy lower <= 0 <= upper");
    lower.push_back(lo);
    upper.push_back(hi);
  }
  if (lower.empty()) throw InputError(file, line_no, "no bounds");
  return {std::move(lower), std::move(upper)};
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dense_csv(const fs::path& file, const DenseMatrix& x) {
  auto out = open_output(file);
  for (Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << "V" << j + 1;
  out << '\n';
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << format_double(x(i, j));
    out << '\n';
  }
}

void write_matrix_market(const fs::path& file, const SparseColumnMatrix& x) {
  auto out = open_output(file);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << x.rows() << ' ' << x.cols() << ' ' << x.nnz() << '\n';
  for (Index j = 0; j < x.cols(); ++j) {
    const auto r = x.column_rows(j);
    const auto v = x.column_values(j);
    for (std::size_t k = 0; k < r.size(); ++k) {
      out << r[k] + 1 << ' ' << j + 1 << ' ' << format_double(v[k]) << '\n';
    }
  }
}

void write_vector(const fs::path& file, const std::vector<double>& v, const std::string& header) {
  auto out = open_output(file);
  if (!header.empty()) out << header << '\n';
  for (double x : v) out << format_double(x) << '\n';
}

std::string file_digest(const fs::path& file) {
  auto in = open_input(file);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const auto got = in.gcount();
    for (std::streamsize k = 0; k < got; ++k) {
      hash ^= static_cast<unsigned char>(buf[k]);
      hash *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
  return hex;
}

void write_path(const fs::path& dir, const SolutionPath& path, const json& manifest) {
  fs::create_directories(dir);
  json j;
  j["format"] = "sglpath-fit";
  j["version"] = 1;
  j["family"] = std::string(family_name(path.family));
  j["alpha"] = path.alpha;
  j["intercept"] = path.intercept;
  j["lambda_max"] = path.lambda_max;
  j["n_features"] = path.n_features();
  j["lambdas"] = path.lambdas;
  j["intercepts"] = path.intercepts;
  j["nnzero"] = path.nnzero;
  j["active_groups"] = path.active_groups;
  std::vector<Index> sizes;
  for (Index g = 0; g < path.groups.n_groups(); ++g) sizes.push_back(path.groups.size(g));
  j["group_sizes"] = sizes;
  j["group_weights"] = path.group_weights;
  j["feature_weights"] = path.feature_weights;
  j["class_levels"] = path.class_levels;
  j["truncated"] = path.truncated;
  json diags = json::array();
  for (const auto& d : path.diagnostics) {
    diags.push_back({{"converged", d.converged},
                     {"sweeps", d.sweeps},
                     {"group_visits", d.group_visits},
                     {"kkt_loops", d.kkt_loops},
                     {"max_change", d.max_change},
                     {"strong_set_size", d.strong_set_size},
                     {"active_set_size", d.active_set_size}});
  }
  j["diagnostics"] = diags;
  j["manifest"] = manifest;
  open_output(dir / "path.json") << j.dump(2) << '\n';

  auto out = open_output(dir / "coefs.csv");
  out << "lambda_index,feature,value\n";
  for (Index m = 0; m < path.size(); ++m) {
    const auto r = path.coefficients.column_rows(m);
    const auto v = path.coefficients.column_values(m);
    for (std::size_t k = 0; k < r.size(); ++k) {
      out << m + 1 << ',' << r[k] + 1 << ',' << format_double(v[k]) << '\n';
    }
  }
}

StoredFit read_path(const fs::path& dir) {
  const auto json_file = dir / "path.json";
  auto in = open_input(json_file);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(json_file, 0, std::string("invalid JSON: ") + e.what());
  }
  StoredFit fit;
  auto& path = fit.path;
  try {
    if (j.at("format") != "sglpath-fit") throw InputError(json_file, 0, "not a fit directory");
    path.family = parse_family(j.at("family").get<std::string>());
    path.alpha = j.at("alpha").get<double>();
    path.intercept = j.at("intercept").get<bool>();
    path.lambda_max = j.at("lambda_max").get<double>();
    path.lambdas = j.at("lambdas").get<std::vector<double>>();
    path.intercepts = j.at("intercepts").get<std::vector<double>>();
    path.group_weights = j.at("group_weights").get<std::vector<double>>();
    path.feature_weights = j.at("feature_weights").get<std::vector<double>>();
    path.class_levels = j.at("class_levels").get<std::array<double, 2>>();
    path.truncated = j.at("truncated").get<bool>();
    std::vector<Index> ids;
    Index label = 1;
    for (Index size : j.at("group_sizes").get<std::vector<Index>>()) {
      ids.insert(ids.end(), static_cast<std::size_t>(size), label++);
    }
    path.groups = GroupStructure::from_ids(ids);
    for (const auto& d : j.at("diagnostics")) {
      LambdaDiagnostics diag;
      diag.converged = d.at("converged").get<bool>();
      diag.sweeps = d.at("sweeps").get<Index>();
      diag.group_visits = d.at("group_visits").get<Index>();
      diag.kkt_loops = d.at("kkt_loops").get<int>();
      diag.max_change = d.at("max_change").get<double>();
      diag.strong_set_size = d.at("strong_set_size").get<Index>();
      diag.active_set_size = d.at("active_set_size").get<Index>();
      path.diagnostics.push_back(diag);
    }
    fit.manifest = j.value("manifest", json::object());
  } catch (const json::exception& e) {
    throw InputError(json_file, 0, std::string("missing or invalid field: ") + e.what());
  }

  const Index p = j.at("n_features").get<Index>();
  const auto m = static_cast<Index>(path.lambdas.size());
  const auto coef_file = dir / "coefs.csv";
  auto cin = open_input(coef_file);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Triplet> triplets;
  while (std::getline(cin, line)) {
    ++line_no;
    if (line_no == 1 || trim(line).empty()) continue;
    const auto f = split(line, ',');
    Index lam, feat;
    double v;
    if (f.size() != 3 || !parse_index(f[0], lam) || !parse_index(f[1], feat) || !parse_double(f[2], v)) {
      throw InputError(coef_file, line_no, "expected lambda_index,feature,value");
    }
    if (lam < 1 || lam > m || feat < 1 || feat > p) throw InputError(coef_file, line_no, "index out of range");
    triplets.push_back({feat - 1, lam - 1, v});
  }
  path.coefficients = SparseColumnMatrix::from_triplets(p, m, triplets);
  path.finalize();
  return fit;
}

}  // namespace sgl::io
