#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ssr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  InvalidArgument,
  Dimension,
  Precondition,
  Config,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCode::Dimension, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

/// A set of sensor indices, 1-based, strictly increasing.
///
/// Every public interface of the library speaks in 1-based sensor numbers;
/// `zero_based()` is provided for the few places that index Eigen storage.
class SensorSet {
 public:
  SensorSet() = default;
  SensorSet(std::initializer_list<std::size_t> indices);
  explicit SensorSet(std::vector<std::size_t> indices);

  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(std::size_t sensor) const noexcept;
  std::size_t max() const noexcept { return indices_.empty() ? 0 : indices_.back(); }

  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

  /// Sensors of {1..q} not in this set, in increasing order.
  SensorSet complement(std::size_t q) const;
  bool is_subset_of(const SensorSet& other) const;

  /// Throws DimensionError unless every index lies in {1..q}.
  void require_within(std::size_t q) const;

  std::string to_string() const;

  friend bool operator==(const SensorSet&, const SensorSet&) = default;
  friend auto operator<=>(const SensorSet&, const SensorSet&) = default;

 private:
  std::vector<std::size_t> indices_;
};

class NotObservableError : public Error {
 public:
  NotObservableError(const std::string& what, SensorSet failing)
      : Error(ErrorCode::Precondition, what), failing_(std::move(failing)) {}
  const SensorSet& failing_subset() const noexcept { return failing_; }

 private:
  SensorSet failing_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ErrorCode::Precondition, what) {}
};

}  // namespace ssr
