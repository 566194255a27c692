#include "vardt/patch_filter.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vardt/dependence.hpp"

namespace vardt::patch {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw PatchError("patch line " + std::to_string(line) + ": " + msg);
}

}  // namespace

std::vector<PatchDiff> parse_patches(std::string_view text) {
  std::vector<PatchDiff> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int n = 0;
  std::set<std::string> ids;
  while (std::getline(in, raw)) {
    ++n;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("PATCH ", 0) == 0) {
      std::istringstream ls(line);
      std::string kw, id, label_kw, label;
      if (!(ls >> kw >> id >> label_kw >> label) || label_kw != "LABEL") fail(n, "expected 'PATCH <id> LABEL <label>'");
      if (label != "correct" && label != "incorrect") fail(n, "label must be correct or incorrect");
      if (!ids.insert(id).second) fail(n, "duplicate patch id '" + id + "'");
      out.push_back(PatchDiff{id, label == "correct" ? Correctness::kCorrect : Correctness::kIncorrect, {}});
      continue;
    }
    if (out.empty()) fail(n, "hunk before any PATCH header");
    if (line.rfind("METHOD ", 0) == 0) {
      out.back().hunks.push_back(Hunk{trim(line.substr(7)), {}, {}});
      continue;
    }
    if (out.back().hunks.empty()) fail(n, "edit before any METHOD line");
    Hunk& h = out.back().hunks.back();
    if (line[0] == '-') {
      std::istringstream ls(line.substr(1));
      int l = 0;
      if (!(ls >> l) || l <= 0) fail(n, "removed line needs a line number");
      std::string rest;
      std::getline(ls, rest);
      h.removed.push_back(RemovedLine{l, trim(rest)});
    } else if (line[0] == '+') {
      h.inserted.push_back(trim(line.substr(1)));
    } else {
      fail(n, "unexpected '" + line + "'");
    }
  }
  return out;
}

std::vector<std::string> fragment_variables(std::string_view text) {
  static const std::set<std::string> kSkip = {"if",    "else",  "while", "return", "throw",  "assert",
                                              "true",  "false", "null",  "method", "length", "charAt",
                                              "indexOf", "substring", "array", "abs", "min", "max"};
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"') {
      ++i;
      while (i < text.size() && text[i] != '"') i += text[i] == '\\' ? 2 : 1;
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      std::string word(text.substr(i, j - i));
      std::size_t k = j;
      while (k < text.size() && text[k] == ' ') ++k;
      const bool callee = k < text.size() && text[k] == '(';
      if (!callee && !kSkip.count(word) && std::find(out.begin(), out.end(), word) == out.end()) out.push_back(word);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
      continue;
    }
    ++i;
  }
  return out;
}

namespace {

// Occurrences of the (transformed) program's statements at a line.
std::vector<VarOccurrence> line_occurrences(const lang::Program& p, const std::string& method, int line) {
  std::vector<VarOccurrence> out;
  const lang::Method* m = p.find(method);
  if (!m) return out;
  lang::for_each_stmt(m->body, [&](const lang::Stmt& s) {
    if (s.line != line) return;
    auto occ = analysis::statement_occurrences(method, s);
    out.insert(out.end(), occ.begin(), occ.end());
  });
  return out;
}

bool involves_one(const Hunk& h, const rank::RankedVariable& v, const lang::Program& program) {
  if (h.method != v.method) return false;
  const VarOccurrence base = v.representative.base();
  const bool temp = base.is_temp();
  for (const auto& r : h.removed) {
    if (temp && v.lines.count(r.line)) return true;
    for (const auto& o : line_occurrences(program, h.method, r.line)) {
      if (o.variable == base.variable) return true;
    }
    for (const auto& name : fragment_variables(r.text)) {
      if (name == base.variable) return true;
    }
  }
  if (temp) return false;
  for (const auto& ins : h.inserted) {
    for (const auto& name : fragment_variables(ins)) {
      if (name == base.variable) return true;
    }
  }
  return false;
}

}  // namespace

bool involves(const PatchDiff& p, const std::vector<rank::RankedVariable>& vars, const lang::Program& program) {
  if (vars.empty()) throw std::invalid_argument("involves: empty variable list");
  for (const auto& h : p.hunks) {
    for (const auto& v : vars) {
      if (involves_one(h, v, program)) return true;
    }
  }
  return false;
}

std::optional<double> FilterReport::precision() const {
  if (n_fi + n_fc == 0) return std::nullopt;
  return static_cast<double>(n_fi) / (n_fi + n_fc);
}

std::optional<double> FilterReport::recall() const {
  if (n_fi + n_ni == 0) return std::nullopt;
  return static_cast<double>(n_fi) / (n_fi + n_ni);
}

FilterReport report_from_counts(int n_fi, int n_fc, int n_ni, int n_nc) { return FilterReport{n_fi, n_fc, n_ni, n_nc}; }

std::vector<rank::RankedVariable> top_variables(const std::vector<rank::RankedVariable>& ranking, int n) {
  if (n < 1) throw std::invalid_argument("top-n must be at least 1");
  const auto k = std::min(ranking.size(), static_cast<std::size_t>(n));
  return {ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k)};
}

FilterResult filter(const std::vector<PatchDiff>& patches, const std::vector<rank::RankedVariable>& vars,
                    const lang::Program& program) {
  FilterResult r;
  for (const auto& p : patches) {
    const bool keep = involves(p, vars, program);
    const bool correct = p.label == Correctness::kCorrect;
    (keep ? r.kept : r.filtered).push_back(p.id);
    if (keep) {
      (correct ? r.report.n_nc : r.report.n_ni)++;
    } else {
      (correct ? r.report.n_fc : r.report.n_fi)++;
    }
  }
  return r;
}

namespace {

std::string pct(std::optional<double> v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", *v * 100.0);
  return buf;
}

}  // namespace

void write_filter_report(std::ostream& os, const FilterResult& r) {
  os << "kept";
  for (const auto& id : r.kept) os << ' ' << id;
  os << "\nfiltered";
  for (const auto& id : r.filtered) os << ' ' << id;
  os << "\nn_fi " << r.report.n_fi << "\nn_fc " << r.report.n_fc << "\nn_ni " << r.report.n_ni << "\nn_nc "
     << r.report.n_nc << "\nprecision " << pct(r.report.precision()) << "\nrecall " << pct(r.report.recall()) << '\n';
}

void write_filter_json(std::ostream& os, const FilterResult& r) {
  auto opt = [](std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  nlohmann::json j = {{"kept", r.kept},
                      {"filtered", r.filtered},
                      {"n_fi", r.report.n_fi},
                      {"n_fc", r.report.n_fc},
                      {"n_ni", r.report.n_ni},
                      {"n_nc", r.report.n_nc},
                      {"precision", opt(r.report.precision())},
                      {"recall", opt(r.report.recall())}};
  os << j.dump(2) << '\n';
}

}  // namespace vardt::patch
