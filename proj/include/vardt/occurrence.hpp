#pragma once

#include <compare>
#include <string>
#include <tuple>

namespace vardt {

enum class OccKind {
  kProgramVariable,
  kTempCondition,
  kTempReturnArg,
  kPredicateFeature,
};

const char* to_string(OccKind k);
OccKind occ_kind_from_string(const std::string& s);

// A variable at a source line of one method. Predicate features (null check,
// type, length, array elements) carry the projection in `feature` and name
// their base variable in `variable`.
struct VarOccurrence {
  std::string method;
  std::string variable;
  int line = 0;
  OccKind kind = OccKind::kProgramVariable;
  std::string feature;  // "", "null", "type", "length" or "[<i>]"
  OccKind base_kind = OccKind::kProgramVariable;  // features only; not part of identity

  bool is_feature() const { return kind == OccKind::kPredicateFeature; }
  bool is_temp() const { return kind == OccKind::kTempCondition || kind == OccKind::kTempReturnArg; }

  // Base occurrence for a predicate feature; identity otherwise.
  VarOccurrence base() const;
  VarOccurrence with_feature(const std::string& f) const;

  // `x`, `x==null`, `type(x)`, `length(x)`, `x[2]`.
  std::string name() const;
  std::string display() const { return name() + "@" + std::to_string(line); }

  auto key() const { return std::tie(method, line, variable, feature, kind); }
  friend bool operator==(const VarOccurrence& a, const VarOccurrence& b) { return a.key() == b.key(); }
  friend bool operator<(const VarOccurrence& a, const VarOccurrence& b) { return a.key() < b.key(); }
};

}  // namespace vardt
