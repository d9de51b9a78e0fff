#include "trish/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <sstream>
#include <string_view>

#include "trish/errors.hpp"

namespace trish {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_index(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void parse_line(std::string_view line, std::size_t line_no, ParsedDataset& out) {
  std::size_t pos = 0;
  auto next_token = [&](std::size_t& start) -> std::string_view {
    while (pos < line.size() && is_space(line[pos])) ++pos;
    start = pos;
    while (pos < line.size() && !is_space(line[pos])) ++pos;
    return line.substr(start, pos - start);
  };

  std::size_t col = 0;
  std::string_view tok = next_token(col);
  if (tok.empty() || tok.front() == '#') return;

  SparseRow row;
  if (!parse_double(tok, row.label) || !std::isfinite(row.label)) {
    throw ParseError("non-numeric label", line_no, col + 1);
  }
  long long prev = 0;
  while (true) {
    tok = next_token(col);
    if (tok.empty() || tok.front() == '#') break;
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos) throw ParseError("malformed pair", line_no, col + 1);
    long long index = 0;
    if (!parse_index(tok.substr(0, colon), index)) {
      throw ParseError("malformed pair", line_no, col + 1);
    }
    if (index <= 0) throw ParseError("non-positive index", line_no, col + 1);
    if (index > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError("index out of range", line_no, col + 1);
    }
    if (index == prev) throw ParseError("duplicate index", line_no, col + 1);
    if (index < prev) throw ParseError("non-increasing index", line_no, col + 1);
    double value = 0.0;
    if (!parse_double(tok.substr(colon + 1), value)) {
      throw ParseError("malformed pair", line_no, col + colon + 2);
    }
    if (!std::isfinite(value)) throw ParseError("non-finite value", line_no, col + colon + 2);
    row.indices.push_back(static_cast<std::uint32_t>(index));
    row.values.push_back(value);
    prev = index;
  }
  if (prev > 0) out.max_index = std::max<std::size_t>(out.max_index, static_cast<std::size_t>(prev));
  out.rows.push_back(std::move(row));
}

void append_double(std::string& s, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, ptr);
}

}  // namespace

ParsedDataset parse_libsvm(std::istream& in) {
  ParsedDataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    parse_line(line, line_no, out);
  }
  if (in.bad()) throw IoError("read failure while parsing LIBSVM data");
  return out;
}

ParsedDataset parse_libsvm_string(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

ParsedDataset parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return parse_libsvm(in);
}

std::string serialize_libsvm(const std::vector<SparseRow>& rows) {
  std::string s;
  for (const SparseRow& r : rows) {
    append_double(s, r.label);
    for (std::size_t j = 0; j < r.indices.size(); ++j) {
      s += ' ';
      s += std::to_string(r.indices[j]);
      s += ':';
      append_double(s, r.values[j]);
    }
    s += '\n';
  }
  return s;
}

DatasetStats dataset_stats(const std::vector<SparseRow>& rows) {
  DatasetStats st;
  st.count = rows.size();
  std::size_t positive = 0;
  for (const SparseRow& r : rows) {
    st.nnz += r.indices.size();
    if (!r.indices.empty()) st.max_index = std::max<std::size_t>(st.max_index, r.indices.back());
    if (r.label == 1.0) ++positive;
  }
  if (st.count > 0) st.label_balance = static_cast<double>(positive) / static_cast<double>(st.count);
  return st;
}

std::string format_stats(const DatasetStats& st) {
  std::ostringstream os;
  os << "count=" << st.count << "\n"
     << "max_index=" << st.max_index << "\n"
     << "nnz=" << st.nnz << "\n"
     << "label_balance=" << std::setprecision(9) << st.label_balance << "\n";
  return os.str();
}

LabelConversion to_labeled_data(const std::vector<SparseRow>& rows, std::size_t cols) {
  LabelConversion out;
  SparseMatrix& m = out.data.features;
  m.cols = cols;
  m.row_ptr.assign(1, 0);
  for (const SparseRow& r : rows) {
    for (std::size_t j = 0; j < r.indices.size(); ++j) {
      if (r.indices[j] > cols) throw UsageError("feature index exceeds the declared dimension");
      m.col.push_back(r.indices[j] - 1);
      m.val.push_back(r.values[j]);
    }
    m.row_ptr.push_back(m.col.size());
    double y = r.label;
    if (y != 1.0 && y != -1.0) {
      ++out.remapped_labels;
      y = y > 0.0 ? 1.0 : -1.0;
    }
    out.data.labels.push_back(y);
  }
  return out;
}

LoadedLogistic load_logistic_problem(const std::string& train_path,
                                     const std::optional<std::string>& test_path) {
  ParsedDataset train = parse_libsvm_file(train_path);
  std::optional<ParsedDataset> test;
  if (test_path) test = parse_libsvm_file(*test_path);
  const std::size_t cols = std::max(train.max_index, test ? test->max_index : 0);
  LabelConversion tr = to_labeled_data(train.rows, cols);
  std::size_t remapped = tr.remapped_labels;
  std::optional<LabeledData> te;
  if (test) {
    LabelConversion conv = to_labeled_data(test->rows, cols);
    remapped += conv.remapped_labels;
    te = std::move(conv.data);
  }
  return LoadedLogistic{LogisticProblem(std::move(tr.data), std::move(te)), remapped};
}

}  // namespace trish
