#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trish/problems.hpp"

namespace trish {

/// One LIBSVM record. Indices are 1-based and strictly increasing.
struct SparseRow {
  double label = 0.0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

struct ParsedDataset {
  std::vector<SparseRow> rows;
  std::size_t max_index = 0;
};

/// Reads `<label> <index>:<value> ...` records line by line. Blank lines and
/// lines starting with '#' are skipped, as is anything after a '#' token.
/// Throws ParseError carrying the 1-based line and column of the offending
/// token.
ParsedDataset parse_libsvm(std::istream& in);
ParsedDataset parse_libsvm_string(const std::string& text);
/// Throws IoError if the file cannot be opened.
ParsedDataset parse_libsvm_file(const std::string& path);

/// Canonical text: single spaces, shortest round-trip float representation,
/// one record per line with a trailing newline.
std::string serialize_libsvm(const std::vector<SparseRow>& rows);

struct DatasetStats {
  std::size_t count = 0;
  std::size_t max_index = 0;
  std::size_t nnz = 0;
  double label_balance = 0.0;  // fraction of rows labelled +1

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const std::vector<SparseRow>& rows);
std::string format_stats(const DatasetStats& stats);

struct LabelConversion {
  LabeledData data;
  std::size_t remapped_labels = 0;  // labels that were not exactly +1 or -1
};

/// Builds CSR features with `cols` columns. Labels map as: exactly +1/-1
/// unchanged, anything > 0 to +1, everything else (0 included) to -1.
LabelConversion to_labeled_data(const std::vector<SparseRow>& rows, std::size_t cols);

struct LoadedLogistic {
  LogisticProblem problem;
  std::size_t remapped_labels = 0;
};

/// Parses train (and optionally test) files into one problem whose feature
/// dimension is the maximum index over both files.
LoadedLogistic load_logistic_problem(const std::string& train_path,
                                     const std::optional<std::string>& test_path);

}  // namespace trish
