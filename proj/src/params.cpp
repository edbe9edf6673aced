#include "girf/params.hpp"

#include <cmath>

#include "girf/errors.hpp"

namespace girf {

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::kIdentity: return "identity";
    case Transform::kLog: return "log";
    case Transform::kLogit: return "logit";
  }
  return "identity";
}

std::string_view to_string(ParamKind k) {
  switch (k) {
    case ParamKind::kRegular: return "regular";
    case ParamKind::kIvp: return "ivp";
    case ParamKind::kFixed: return "fixed";
  }
  return "regular";
}

Transform parse_transform(std::string_view s) {
  if (s == "identity") return Transform::kIdentity;
  if (s == "log") return Transform::kLog;
  if (s == "logit") return Transform::kLogit;
  throw ConfigError("unknown transform '" + std::string(s) + "'");
}

ParamKind parse_kind(std::string_view s) {
  if (s == "regular") return ParamKind::kRegular;
  if (s == "ivp") return ParamKind::kIvp;
  if (s == "fixed") return ParamKind::kFixed;
  throw ConfigError("unknown parameter kind '" + std::string(s) + "'");
}

double to_estimation(Transform t, double value) {
  switch (t) {
    case Transform::kIdentity: return value;
    case Transform::kLog:
      if (!(value > 0.0)) throw DomainError("log transform requires a positive value");
      return std::log(value);
    case Transform::kLogit:
      if (!(value > 0.0 && value < 1.0)) throw DomainError("logit transform requires a value in (0,1)");
      return std::log(value / (1.0 - value));
  }
  return value;
}

double from_estimation(Transform t, double value) {
  switch (t) {
    case Transform::kIdentity: return value;
    case Transform::kLog: return std::exp(value);
    case Transform::kLogit: return 1.0 / (1.0 + std::exp(-value));
  }
  return value;
}

ParamVector::ParamVector(std::vector<ParamEntry> entries) {
  for (auto& e : entries) add(std::move(e.name), e.value, e.transform, e.kind);
}

ParamVector& ParamVector::add(std::string name, double value, Transform transform, ParamKind kind) {
  if (find(name)) throw DomainError("duplicate parameter name '" + name + "'");
  ParamEntry e{std::move(name), value, transform, kind};
  check_domain(e);
  entries_.push_back(std::move(e));
  return *this;
}

void ParamVector::check_domain(const ParamEntry& e) const {
  if (e.transform == Transform::kLog && !(e.value > 0.0)) {
    throw DomainError("parameter '" + e.name + "' is log-transformed but not positive");
  }
  if (e.transform == Transform::kLogit && !(e.value > 0.0 && e.value < 1.0)) {
    throw DomainError("parameter '" + e.name + "' is logit-transformed but outside (0,1)");
  }
}

std::optional<std::size_t> ParamVector::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamVector::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

void ParamVector::set(std::string_view name, double value) { set_value(index(name), value); }

void ParamVector::set_value(std::size_t i, double value) {
  ParamEntry candidate = entries_.at(i);
  candidate.value = value;
  check_domain(candidate);
  entries_[i].value = value;
}

void ParamVector::set_transform(std::string_view name, Transform transform) {
  ParamEntry candidate = entries_[index(name)];
  candidate.transform = transform;
  check_domain(candidate);
  entries_[index(name)].transform = transform;
}

std::vector<double> ParamVector::values() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.value);
  return out;
}

bool ParamVector::same_layout(const ParamVector& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.transform != b.transform || a.kind != b.kind) return false;
  }
  return true;
}

std::vector<double> transform_to_estimation_scale(const ParamVector& p) {
  std::vector<double> out;
  for (const auto& e : p.entries()) {
    if (e.kind == ParamKind::kFixed) continue;
    out.push_back(to_estimation(e.transform, e.value));
  }
  return out;
}

ParamVector inverse_transform(const ParamVector& layout, std::span<const double> estimated) {
  ParamVector out = layout;
  std::size_t j = 0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = layout[i];
    if (e.kind == ParamKind::kFixed) continue;
    if (j >= estimated.size()) throw DomainError("estimation vector too short");
    out.set_value(i, from_estimation(e.transform, estimated[j++]));
  }
  if (j != estimated.size()) throw DomainError("estimation vector too long");
  return out;
}

}  // namespace girf
