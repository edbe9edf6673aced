#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace girf {

enum class Transform { kIdentity, kLog, kLogit };
enum class ParamKind { kRegular, kIvp, kFixed };

std::string_view to_string(Transform t);
std::string_view to_string(ParamKind k);
Transform parse_transform(std::string_view s);
ParamKind parse_kind(std::string_view s);

/// Natural scale -> estimation scale for one value. Throws DomainError.
double to_estimation(Transform t, double value);
double from_estimation(Transform t, double value);

struct ParamEntry {
  std::string name;
  double value = 0.0;
  Transform transform = Transform::kIdentity;
  ParamKind kind = ParamKind::kRegular;
};

/// Named parameter values with per-entry transform and kind. Model
/// callbacks receive the natural-scale values as a span in entry order.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<ParamEntry> entries);

  /// Appends an entry; throws DomainError on duplicate names or values
  /// outside the transform's domain.
  ParamVector& add(std::string name, double value, Transform transform = Transform::kIdentity,
                   ParamKind kind = ParamKind::kRegular);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const ParamEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<ParamEntry>& entries() const noexcept { return entries_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;  ///< throws ConfigError when missing
  double value(std::string_view name) const { return entries_[index(name)].value; }
  void set(std::string_view name, double value);
  void set_value(std::size_t i, double value);
  void set_kind(std::string_view name, ParamKind kind) { entries_[index(name)].kind = kind; }
  void set_transform(std::string_view name, Transform transform);

  std::vector<double> values() const;
  /// Same names, transforms and kinds, in the same order.
  bool same_layout(const ParamVector& other) const;

 private:
  void check_domain(const ParamEntry& e) const;
  std::vector<ParamEntry> entries_;
};

/// Non-fixed entries mapped to the estimation scale (log / logit applied).
std::vector<double> transform_to_estimation_scale(const ParamVector& p);

/// Inverse of transform_to_estimation_scale: non-fixed entries of `layout`
/// replaced by from_estimation(estimated[i]).
ParamVector inverse_transform(const ParamVector& layout, std::span<const double> estimated);

}  // namespace girf
