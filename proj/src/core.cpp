#include "mfas/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mfas {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + " contain non-finite values");
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    auto first = field.find_first_not_of(" \t\r");
    auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("csv line " + std::to_string(line_no) + ": cannot parse '" + field + "'");
  }
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (table.header.empty()) {
      // Strip a UTF-8 byte order mark if present.
      if (fields[0].size() >= 3 && fields[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
        fields[0] = fields[0].substr(3);
      }
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InvalidArgument("csv input is empty");
  return table;
}

bool is_column(const std::string& name, char prefix, std::size_t index) {
  return name == std::string(1, prefix) + std::to_string(index);
}

// Number of leading x1..xm columns.
std::size_t count_input_columns(const std::vector<std::string>& header) {
  std::size_t m = 0;
  while (m < header.size() && is_column(header[m], 'x', m + 1)) ++m;
  return m;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Box::Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0) {
    throw InvalidArgument("box bounds must be nonempty and of equal length");
  }
  for (Index j = 0; j < lower_.size(); ++j) {
    if (!(lower_[j] < upper_[j])) {
      throw InvalidArgument("box requires lower < upper in coordinate " + std::to_string(j));
    }
  }
}

Box Box::centered(Index dim) { return Box(Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0)); }

Box Box::unit(Index dim) { return Box(Vector::Zero(dim), Vector::Ones(dim)); }

bool Box::contains(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) return false;
  return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

Matrix Box::to_centered(const Matrix& x) const {
  if (x.cols() != dim()) throw InvalidArgument("box dimension mismatch");
  Eigen::RowVectorXd mid = (0.5 * (lower_ + upper_)).transpose();
  Eigen::RowVectorXd half = (0.5 * width()).transpose();
  return ((x.rowwise() - mid).array().rowwise() / half.array()).matrix();
}

Matrix Box::from_centered(const Matrix& t) const {
  if (t.cols() != dim()) throw InvalidArgument("box dimension mismatch");
  Eigen::RowVectorXd mid = (0.5 * (lower_ + upper_)).transpose();
  Eigen::RowVectorXd half = (0.5 * width()).transpose();
  return ((t.array().rowwise() * half.array()).rowwise() + mid.array()).matrix();
}

Matrix Box::from_unit(const Matrix& t) const {
  if (t.cols() != dim()) throw InvalidArgument("box dimension mismatch");
  Eigen::RowVectorXd w = width().transpose();
  return ((t.array().rowwise() * w.array()).rowwise() + lower_.transpose().array()).matrix();
}

Dataset::Dataset(Matrix inputs, Vector outputs, std::optional<Matrix> gradients)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), gradients_(std::move(gradients)) {
  if (inputs_.rows() < 1 || inputs_.cols() < 1) {
    throw InvalidArgument("dataset needs at least one sample and one input dimension");
  }
  if (outputs_.size() != inputs_.rows()) {
    throw InvalidArgument("dataset has " + std::to_string(inputs_.rows()) + " input rows but " +
                          std::to_string(outputs_.size()) + " outputs");
  }
  if (gradients_ && (gradients_->rows() != inputs_.rows() || gradients_->cols() != inputs_.cols())) {
    throw InvalidArgument("dataset gradients must have the same shape as the inputs");
  }
  require_finite(inputs_, "dataset inputs");
  require_finite(outputs_, "dataset outputs");
  if (gradients_) require_finite(*gradients_, "dataset gradients");
}

const Matrix& Dataset::gradients() const {
  if (!gradients_) throw InvalidArgument("dataset carries no gradients");
  return *gradients_;
}

Dataset Dataset::head(Index n) const {
  if (n < 1 || n > size()) throw InvalidArgument("head: row count out of range");
  std::optional<Matrix> g;
  if (gradients_) g = gradients_->topRows(n);
  return Dataset(inputs_.topRows(n), outputs_.head(n), std::move(g));
}

std::optional<Index> Dataset::find_row(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) return std::nullopt;
  for (Index i = 0; i < size(); ++i) {
    if ((inputs_.row(i).transpose().array() == x.array()).all()) return i;
  }
  return std::nullopt;
}

std::optional<Index> first_missing_row(const Dataset& low, const Dataset& high) {
  if (low.dim() != high.dim()) {
    throw InvalidArgument("hierarchy check: datasets have dimensions " + std::to_string(low.dim()) +
                          " and " + std::to_string(high.dim()));
  }
  for (Index i = 0; i < high.size(); ++i) {
    if (!low.find_row(high.inputs().row(i).transpose())) return i;
  }
  return std::nullopt;
}

bool validate_hierarchy(const Dataset& low, const Dataset& high) {
  return !first_missing_row(low, high).has_value();
}

FidelityPair::FidelityPair(Dataset low_fidelity, Dataset high_fidelity)
    : low(std::move(low_fidelity)), high(std::move(high_fidelity)) {
  if (auto row = first_missing_row(low, high)) {
    throw HierarchyError(1, *row,
                         "high-fidelity row " + std::to_string(*row) + " is not a low-fidelity input");
  }
}

Dataset read_dataset_csv(std::istream& in) {
  CsvTable table = read_table(in);
  const std::size_t m = count_input_columns(table.header);
  if (m == 0) throw InvalidArgument("csv header must start with x1");
  if (table.header.size() <= m || table.header[m] != "y") {
    throw InvalidArgument("csv header must have a y column after x1..x" + std::to_string(m));
  }
  bool with_gradients = table.header.size() == 2 * m + 1;
  if (!with_gradients && table.header.size() != m + 1) {
    throw InvalidArgument("csv header must be x1..xm,y or x1..xm,y,g1..gm");
  }
  if (with_gradients) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!is_column(table.header[m + 1 + j], 'g', j + 1)) {
        throw InvalidArgument("csv gradient columns must be named g1..g" + std::to_string(m));
      }
    }
  }
  const auto n = static_cast<Index>(table.rows.size());
  if (n == 0) throw InvalidArgument("csv contains no samples");
  Matrix x(n, static_cast<Index>(m));
  Vector y(n);
  Matrix g(with_gradients ? n : 0, with_gradients ? static_cast<Index>(m) : 0);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < m; ++j) x(i, static_cast<Index>(j)) = row[j];
    y[i] = row[m];
    if (with_gradients) {
      for (std::size_t j = 0; j < m; ++j) g(i, static_cast<Index>(j)) = row[m + 1 + j];
    }
  }
  if (with_gradients) return Dataset(std::move(x), std::move(y), std::move(g));
  return Dataset(std::move(x), std::move(y));
}

Dataset read_dataset_csv(const std::string& path) {
  auto in = open_input(path);
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const Index m = data.dim();
  for (Index j = 0; j < m; ++j) out << 'x' << j + 1 << ',';
  out << 'y';
  if (data.has_gradients()) {
    for (Index j = 0; j < m; ++j) out << ",g" << j + 1;
  }
  out << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < m; ++j) out << format_double(data.inputs()(i, j)) << ',';
    out << format_double(data.outputs()[i]);
    if (data.has_gradients()) {
      for (Index j = 0; j < m; ++j) out << ',' << format_double(data.gradients()(i, j));
    }
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  write_dataset_csv(out, data);
}

Matrix read_inputs_csv(std::istream& in) {
  CsvTable table = read_table(in);
  const std::size_t m = count_input_columns(table.header);
  if (m == 0) throw InvalidArgument("csv header must start with x1");
  const auto n = static_cast<Index>(table.rows.size());
  if (n == 0) throw InvalidArgument("csv contains no samples");
  Matrix x(n, static_cast<Index>(m));
  for (Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) x(i, static_cast<Index>(j)) = table.rows[static_cast<std::size_t>(i)][j];
  }
  require_finite(x, "csv inputs");
  return x;
}

Matrix read_inputs_csv(const std::string& path) {
  auto in = open_input(path);
  return read_inputs_csv(in);
}

void write_inputs_csv(std::ostream& out, const Matrix& inputs) {
  for (Index j = 0; j < inputs.cols(); ++j) out << (j ? "," : "") << 'x' << j + 1;
  out << '\n';
  for (Index i = 0; i < inputs.rows(); ++i) {
    for (Index j = 0; j < inputs.cols(); ++j) out << (j ? "," : "") << format_double(inputs(i, j));
    out << '\n';
  }
}

}  // namespace mfas
