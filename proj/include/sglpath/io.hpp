#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sglpath/groups.hpp"
#include "sglpath/linalg.hpp"
#include "sglpath/model.hpp"

namespace sgl::io {

/// Malformed input file; carries the offending file and 1-based line (0 if not line-specific).
class InputError : public Error {
 public:
  InputError(const std::filesystem::path& file, std::size_t line, const std::string& message);

  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_;
};

enum class DesignFormat { kAuto, kCsv, kMatrixMarket };

DesignFormat parse_design_format(const std::string& name);

/// Dense CSV with a header row of column names.
DenseMatrix read_dense_csv(const std::filesystem::path& file);

/// MatrixMarket coordinate file (real, integer or pattern; general or symmetric).
SparseColumnMatrix read_matrix_market(const std::filesystem::path& file);

/// kAuto picks MatrixMarket for a .mtx extension and CSV otherwise.
DesignMatrix read_design(const std::filesystem::path& file, DesignFormat format = DesignFormat::kAuto);

/// One number per line; a non-numeric first line is taken as a header.
std::vector<double> read_vector(const std::filesystem::path& file);

/// Group labels from a file (one per feature) or the "size:k" shorthand.
GroupStructure read_groups(const std::string& spec, Index n_features);

/// Two columns (lower, upper) per feature; "inf"/"-inf" allowed.
std::pair<std::vector<double>, std::vector<double>> read_bounds(const std::filesystem::path& file);

/// 17 significant digits.
std::string format_double(double v);

void write_dense_csv(const std::filesystem::path& file, const DenseMatrix& x);
void write_matrix_market(const std::filesystem::path& file, const SparseColumnMatrix& x);
void write_vector(const std::filesystem::path& file, const std::vector<double>& v,
                  const std::string& header);

/// FNV-1a 64-bit digest of the file contents, as 16 hex digits.
std::string file_digest(const std::filesystem::path& file);

/// Writes path.json (with `manifest` embedded) and coefs.csv into `dir`.
void write_path(const std::filesystem::path& dir, const SolutionPath& path,
                const nlohmann::json& manifest);

struct StoredFit {
  SolutionPath path;
  nlohmann::json manifest;
};

/// Reads what write_path wrote.
StoredFit read_path(const std::filesystem::path& dir);

}  // namespace sgl::io
