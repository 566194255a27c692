#include "vardt/sbfl.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

namespace vardt::sbfl {

CoverageMatrix build_matrix(const std::vector<profile::TestRunTrace>& traces) {
  CoverageMatrix m;
  std::map<std::string, std::pair<int, int>> method_hits;  // (failed, passed)
  std::map<std::pair<std::string, int>, std::pair<int, int>> line_hits;
  for (const auto& t : traces) {
    const bool failed = t.label == profile::Label::kFail;
    (failed ? m.failed : m.passed)++;
    for (const auto& [method, lines] : t.per_method) {
      auto& h = method_hits[method];
      (failed ? h.first : h.second)++;
      for (int l : std::set<int>(lines.begin(), lines.end())) {
        auto& lh = line_hits[{method, l}];
        (failed ? lh.first : lh.second)++;
      }
    }
  }
  if (m.failed == 0) throw NothingToLocalize();
  auto spectrum = [&](std::pair<int, int> h) { return Spectrum{h.first, h.second, m.failed - h.first, m.passed - h.second}; };
  for (const auto& [k, h] : method_hits) m.methods[k] = spectrum(h);
  for (const auto& [k, h] : line_hits) m.lines[k] = spectrum(h);
  return m;
}

double ochiai(const Spectrum& s) {
  const double denom = std::sqrt(static_cast<double>(s.ef + s.nf) * static_cast<double>(s.ef + s.ep));
  if (s.ef == 0 || denom == 0.0) return 0.0;
  return s.ef / denom;
}

double dstar(const Spectrum& s, int star) {
  if (s.ef == 0) return 0.0;
  const double num = std::pow(static_cast<double>(s.ef), star);
  const int denom = s.ep + s.nf;
  if (denom == 0) return std::numeric_limits<double>::infinity();
  return num / denom;
}

Formula formula_from_string(const std::string& name) {
  if (name == "ochiai") return Formula::kOchiai;
  if (name == "dstar") return Formula::kDStar;
  throw std::invalid_argument("unknown SBFL formula '" + name + "'");
}

const char* to_string(Formula f) { return f == Formula::kOchiai ? "ochiai" : "dstar"; }

std::vector<MethodScore> rank_methods(const CoverageMatrix& m, Formula f, int k) {
  std::vector<MethodScore> out;
  for (const auto& [name, s] : m.methods) out.push_back({name, f == Formula::kOchiai ? ochiai(s) : dstar(s)});
  double finite_max = 0.0;
  for (const auto& e : out) {
    if (std::isfinite(e.score)) finite_max = std::max(finite_max, e.score);
  }
  const double sentinel = finite_max > 0.0 ? finite_max : 1.0;
  double max = 0.0;
  for (auto& e : out) {
    if (std::isinf(e.score)) e.score = sentinel;
    max = std::max(max, e.score);
  }
  if (max > 0.0) {
    for (auto& e : out) e.score /= max;
  }
  std::stable_sort(out.begin(), out.end(), [](const MethodScore& a, const MethodScore& b) {
    return a.score != b.score ? a.score > b.score : a.method < b.method;
  });
  if (k >= 0 && out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
  return out;
}

void write_method_ranking(std::ostream& os, const std::vector<MethodScore>& ranking) {
  int rank = 0;
  for (const auto& e : ranking) {
    os << ++rank << ' ' << e.method << ' ' << std::setprecision(6) << std::fixed << e.score << '\n';
  }
  os.unsetf(std::ios::fixed);
}

}  // namespace vardt::sbfl
