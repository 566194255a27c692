#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "vardt/profiler.hpp"

namespace vardt::profile {

using nlohmann::json;

namespace {

ObservedValue::Kind value_kind_from_string(const std::string& s) {
  using K = ObservedValue::Kind;
  for (K k : {K::kNumeric, K::kBoolean, K::kNullCheck, K::kTypeTag, K::kSize, K::kElement, K::kNominal}) {
    if (s == to_string(k)) return k;
  }
  throw std::runtime_error("unknown value kind '" + s + "'");
}

json occurrence_json(const VarOccurrence& o) {
  json j = {{"method", o.method}, {"var", o.variable}, {"line", o.line}, {"kind", to_string(o.kind)}};
  if (o.is_feature()) {
    j["feature"] = o.feature;
    j["base_kind"] = to_string(o.base_kind);
  }
  return j;
}

VarOccurrence occurrence_from(const json& j) {
  VarOccurrence o;
  o.method = j.at("method").get<std::string>();
  o.variable = j.at("var").get<std::string>();
  o.line = j.at("line").get<int>();
  o.kind = occ_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("feature")) {
    o.feature = j.at("feature").get<std::string>();
    o.base_kind = occ_kind_from_string(j.at("base_kind").get<std::string>());
  }
  return o;
}

json value_json(const ObservedValue& v) {
  return {{"kind", to_string(v.kind)}, {"number", v.number}, {"flag", v.flag},
          {"text", v.text},           {"index", v.index},   {"elem_bool", v.elem_is_bool}};
}

ObservedValue value_from(const json& j) {
  ObservedValue v;
  v.kind = value_kind_from_string(j.at("kind").get<std::string>());
  v.number = j.at("number").get<std::int64_t>();
  v.flag = j.at("flag").get<bool>();
  v.text = j.at("text").get<std::string>();
  v.index = j.at("index").get<std::int64_t>();
  v.elem_is_bool = j.at("elem_bool").get<bool>();
  return v;
}

}  // namespace

void write_traces(std::ostream& os, const std::vector<TestRunTrace>& traces) {
  for (const TestRunTrace& t : traces) {
    json obs = json::array();
    for (const VariableObservation& o : t.observations) {
      obs.push_back({{"occ", occurrence_json(o.occurrence)}, {"seq", o.sequence_index}, {"value", value_json(o.value)}});
    }
    json j = {{"test", t.test_id},
              {"label", to_string(t.label)},
              {"lines", t.per_method},
              {"failure_site", t.failure_site},
              {"budget_exhausted", t.budget_exhausted},
              {"error", t.error},
              {"observations", std::move(obs)}};
    os << j.dump() << '\n';
  }
}

std::vector<TestRunTrace> read_traces(std::istream& is) {
  std::vector<TestRunTrace> out;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      TestRunTrace t;
      t.test_id = j.at("test").get<std::string>();
      const auto label = j.at("label").get<std::string>();
      if (label != "PASS" && label != "FAIL") throw std::runtime_error("bad label '" + label + "'");
      t.label = label == "PASS" ? Label::kPass : Label::kFail;
      t.per_method = j.at("lines").get<std::map<std::string, std::vector<int>>>();
      t.failure_site = j.at("failure_site").get<std::map<std::string, int>>();
      t.budget_exhausted = j.at("budget_exhausted").get<bool>();
      t.error = j.at("error").get<std::string>();
      for (const json& o : j.at("observations")) {
        t.observations.push_back(VariableObservation{occurrence_from(o.at("occ")), t.test_id,
                                                     o.at("seq").get<std::int64_t>(), value_from(o.at("value"))});
      }
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vardt::profile
