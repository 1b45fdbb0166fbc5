#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rmcst {

/// Column mapping used when reading a delimited file. An empty covariate list
/// selects every column not claimed by the treatment, time or event columns.
struct ColumnSchema {
  std::string treat = "treat";
  std::string time = "time";
  std::string event = "event";
  std::vector<std::string> covariates;
};

/// Right-censored observational data: covariates X, treatment A, observed
/// time U = min(T, C) and event indicator delta = I(T <= C).
///
/// Instances are validated on construction and immutable afterwards.
class ObservationalDataset {
 public:
  ObservationalDataset(Eigen::MatrixXd covariates, Eigen::VectorXi treat, Eigen::VectorXd time,
                       Eigen::VectorXi event, std::vector<std::string> covariate_names = {});

  Eigen::Index n() const noexcept { return time_.size(); }
  Eigen::Index p() const noexcept { return x_.cols(); }

  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const Eigen::VectorXi& treat() const noexcept { return treat_; }
  const Eigen::VectorXd& time() const noexcept { return time_; }
  const Eigen::VectorXi& event() const noexcept { return event_; }
  const std::vector<std::string>& covariate_names() const noexcept { return names_; }

  /// Non-fatal findings such as zero-variance covariate columns.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  Eigen::Index count_arm(int arm) const;

  /// Rows in the given order (duplicates allowed). Throws EmptyArm if a
  /// treatment arm ends up empty.
  ObservationalDataset subset(std::span<const Eigen::Index> rows) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXi treat_;
  Eigen::VectorXd time_;
  Eigen::VectorXi event_;
  std::vector<std::string> names_;
  std::vector<std::string> warnings_;
};

ObservationalDataset load_dataset(const std::filesystem::path& path,
                                  const ColumnSchema& schema = {});

/// Same as load_dataset but reads from an in-memory buffer.
ObservationalDataset parse_dataset(std::string_view text, const ColumnSchema& schema = {});

/// Writes comma-delimited text using shortest round-trip number formatting.
void save_dataset(const std::filesystem::path& path, const ObservationalDataset& data,
                  const ColumnSchema& schema = {});
std::string format_dataset(const ObservationalDataset& data, const ColumnSchema& schema = {});

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace rmcst
