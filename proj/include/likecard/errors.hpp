#pragma once

#include <stdexcept>
#include <string>

namespace likecard {

/// No (tree threshold, layer count, false-positive rate) meets the requested
/// empty-answer identification probability.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while decoding a serialized model.
class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { NotAModel, UnsupportedVersion, Truncated, ChecksumMismatch };

  ModelFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A prefix or suffix query longer than the model's max length was asked of a
/// model built without the companion substring statistics.
class LongQueryUnsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace likecard
