#include "rmcst/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rmcst/error.hpp"

namespace rmcst {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string cell_ref(std::size_t row, std::string_view col) {
  return "row " + std::to_string(row) + ", column '" + std::string(col) + "'";
}

}  // namespace

ObservationalDataset::ObservationalDataset(Eigen::MatrixXd covariates, Eigen::VectorXi treat,
                                           Eigen::VectorXd time, Eigen::VectorXi event,
                                           std::vector<std::string> covariate_names)
    : x_(std::move(covariates)),
      treat_(std::move(treat)),
      time_(std::move(time)),
      event_(std::move(event)),
      names_(std::move(covariate_names)) {
  const Eigen::Index n = time_.size();
  if (treat_.size() != n || event_.size() != n || x_.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "dataset columns differ in length");
  }
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < x_.cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names_.size()) != x_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "covariate name count does not match columns");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (treat_[i] != 0 && treat_[i] != 1) {
      throw Error(ErrorCode::InvalidIndicator, "treatment must be 0 or 1 at row " + std::to_string(i));
    }
    if (event_[i] != 0 && event_[i] != 1) {
      throw Error(ErrorCode::InvalidIndicator, "event must be 0 or 1 at row " + std::to_string(i));
    }
    if (!std::isfinite(time_[i])) {
      throw Error(ErrorCode::NonNumericCell, "non-finite time at row " + std::to_string(i));
    }
    if (time_[i] < 0.0) {
      throw Error(ErrorCode::NegativeTime, "negative time at row " + std::to_string(i));
    }
  }
  if (!x_.allFinite()) throw Error(ErrorCode::NonNumericCell, "non-finite covariate value");
  if (count_arm(1) == 0 || count_arm(0) == 0) {
    throw Error(ErrorCode::EmptyArm, "both treatment arms must be non-empty");
  }
  for (Eigen::Index j = 0; j < x_.cols(); ++j) {
    if (n > 0 && (x_.col(j).array() == x_(0, j)).all()) {
      warnings_.push_back("covariate '" + names_[static_cast<std::size_t>(j)] + "' has zero variance");
    }
  }
}

Eigen::Index ObservationalDataset::count_arm(int arm) const {
  return (treat_.array() == arm).count();
}

ObservationalDataset ObservationalDataset::subset(std::span<const Eigen::Index> rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(m, p());
  Eigen::VectorXi a(m), d(m);
  Eigen::VectorXd u(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = rows[static_cast<std::size_t>(k)];
    x.row(k) = x_.row(i);
    a[k] = treat_[i];
    u[k] = time_[i];
    d[k] = event_[i];
  }
  return ObservationalDataset(std::move(x), std::move(a), std::move(u), std::move(d), names_);
}

ObservationalDataset parse_dataset(std::string_view text, const ColumnSchema& schema) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto pos = text.find('\n', start);
      auto line = text.substr(start, pos == std::string_view::npos ? text.size() - start : pos - start);
      if (!trim(line).empty()) lines.push_back(line);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::MissingColumn, "input has no header line");

  const char delim = lines.front().find('\t') != std::string_view::npos ? '\t' : ',';
  const auto header = split(lines.front(), delim);
  auto find_column = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + std::string(name) + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t treat_col = find_column(schema.treat);
  const std::size_t time_col = find_column(schema.time);
  const std::size_t event_col = find_column(schema.event);
  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  if (schema.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != treat_col && c != time_col && c != event_col) {
        cov_cols.push_back(c);
        cov_names.emplace_back(header[c]);
      }
    }
  } else {
    for (const auto& name : schema.covariates) {
      cov_cols.push_back(find_column(name));
      cov_names.push_back(name);
    }
  }

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  const auto p = static_cast<Eigen::Index>(cov_cols.size());
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXi a(n), d(n);
  Eigen::VectorXd u(n);

  auto number = [&](const std::vector<std::string_view>& cells, std::size_t row, std::size_t col) {
    if (col >= cells.size()) {
      throw Error(ErrorCode::NonNumericCell, "missing cell at " + cell_ref(row, header[col]));
    }
    std::string_view cell = cells[col];
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::NonNumericCell, "cannot parse '" + std::string(cells[col]) + "' at " + cell_ref(row, header[col]));
    }
    return value;
  };
  auto indicator = [&](double value, std::size_t row, std::size_t col) {
    if (value != 0.0 && value != 1.0) {
      throw Error(ErrorCode::InvalidIndicator, "expected 0 or 1 at " + cell_ref(row, header[col]));
    }
    return static_cast<int>(value);
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i) + 1;
    const auto cells = split(lines[row], delim);
    a[i] = indicator(number(cells, row, treat_col), row, treat_col);
    u[i] = number(cells, row, time_col);
    if (u[i] < 0.0) throw Error(ErrorCode::NegativeTime, "negative time at " + cell_ref(row, header[time_col]));
    d[i] = indicator(number(cells, row, event_col), row, event_col);
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = number(cells, row, cov_cols[static_cast<std::size_t>(j)]);
  }
  return ObservationalDataset(std::move(x), std::move(a), std::move(u), std::move(d), std::move(cov_names));
}

ObservationalDataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), schema);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_dataset(const ObservationalDataset& data, const ColumnSchema& schema) {
  std::string out = schema.treat + "," + schema.time + "," + schema.event;
  for (const auto& name : data.covariate_names()) out += "," + name;
  out += '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out += std::to_string(data.treat()[i]) + "," + format_double(data.time()[i]) + "," +
           std::to_string(data.event()[i]);
    for (Eigen::Index j = 0; j < data.p(); ++j) out += "," + format_double(data.x()(i, j));
    out += '\n';
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const ObservationalDataset& data,
                  const ColumnSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << format_dataset(data, schema);
}

}  // namespace rmcst
