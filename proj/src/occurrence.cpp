#include "vardt/occurrence.hpp"

#include <stdexcept>

namespace vardt {

const char* to_string(OccKind k) {
  switch (k) {
    case OccKind::kProgramVariable: return "var";
    case OccKind::kTempCondition: return "tmp-cond";
    case OccKind::kTempReturnArg: return "tmp-ret";
    case OccKind::kPredicateFeature: return "feature";
  }
  return "?";
}

OccKind occ_kind_from_string(const std::string& s) {
  if (s == "var") return OccKind::kProgramVariable;
  if (s == "tmp-cond") return OccKind::kTempCondition;
  if (s == "tmp-ret") return OccKind::kTempReturnArg;
  if (s == "feature") return OccKind::kPredicateFeature;
  throw std::invalid_argument("unknown occurrence kind '" + s + "'");
}

VarOccurrence VarOccurrence::base() const {
  VarOccurrence b = *this;
  if (!is_feature()) return b;
  b.feature.clear();
  b.kind = base_kind;
  b.base_kind = OccKind::kProgramVariable;
  return b;
}

VarOccurrence VarOccurrence::with_feature(const std::string& f) const {
  VarOccurrence o = *this;
  o.feature = f;
  o.base_kind = is_feature() ? base_kind : kind;
  o.kind = OccKind::kPredicateFeature;
  return o;
}

std::string VarOccurrence::name() const {
  if (!is_feature()) return variable;
  if (feature == "null") return variable + "==null";
  if (feature == "type") return "type(" + variable + ")";
  if (feature == "length") return "length(" + variable + ")";
  return variable + feature;  // element: x[3]
}

}  // namespace vardt
