#include "vardt/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace vardt::eval {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::set<int> parse_lines(const std::string& s, int n) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int l = std::stoi(item, &used);
      if (used != item.size() || l <= 0) throw std::invalid_argument("bad");
      out.insert(l);
    } catch (const std::exception&) {
      throw TruthError("truth line " + std::to_string(n) + ": bad line number '" + item + "'");
    }
  }
  if (out.empty()) throw TruthError("truth line " + std::to_string(n) + ": empty line set");
  return out;
}

}  // namespace

GroundTruth parse_truth(std::string_view text, const std::string& bug_id) {
  GroundTruth g;
  g.bug_id = bug_id;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string method;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "METHOD") {
      if (!(ls >> method)) throw TruthError("truth line " + std::to_string(n) + ": METHOD needs a name");
      continue;
    }
    std::string name, lines_kw, lines, rule_kw;
    int rule = 0;
    if (kw != "VAR" || !(ls >> name >> lines_kw >> lines >> rule_kw >> rule) || lines_kw != "LINES" ||
        rule_kw != "RULE") {
      throw TruthError("truth line " + std::to_string(n) + ": expected 'VAR <name> LINES <l,..> RULE <1-4>'");
    }
    if (rule < 1 || rule > 4) throw TruthError("truth line " + std::to_string(n) + ": rule must be 1-4");
    std::string rest;
    if (ls >> rest) throw TruthError("truth line " + std::to_string(n) + ": trailing text '" + rest + "'");
    g.entries.push_back(TruthEntry{name, parse_lines(lines, n), rule, method});
  }
  if (g.entries.empty()) throw TruthError("ground truth for " + bug_id + " is empty");
  return g;
}

void write_truth(std::ostream& os, const GroundTruth& g) {
  std::string method;
  for (const auto& e : g.entries) {
    if (e.method != method) {
      os << "METHOD " << e.method << '\n';
      method = e.method;
    }
    os << "VAR " << e.name << " LINES ";
    bool first = true;
    for (int l : e.lines) {
      os << (first ? "" : ",") << l;
      first = false;
    }
    os << " RULE " << e.rule << '\n';
  }
}

bool matches(const rank::RankedVariable& v, const TruthEntry& e) {
  if (v.name != e.name) return false;
  if (!e.method.empty() && v.method != e.method) return false;
  return std::any_of(v.lines.begin(), v.lines.end(), [&](int l) { return e.lines.count(l) > 0; });
}

namespace {

std::optional<double> entry_rank(const std::vector<rank::RankedVariable>& ranking, const TruthEntry& e) {
  std::optional<double> best;
  for (const auto& v : ranking) {
    if (matches(v, e) && (!best || v.rank < *best)) best = v.rank;
  }
  return best;
}

}  // namespace

std::optional<double> first_rank(const std::vector<rank::RankedVariable>& ranking, const GroundTruth& g) {
  std::optional<double> best;
  for (const auto& e : g.entries) {
    const auto r = entry_rank(ranking, e);
    if (r && (!best || *r < *best)) best = r;
  }
  return best;
}

std::optional<double> average_rank(const std::vector<rank::RankedVariable>& ranking, const GroundTruth& g) {
  double sum = 0.0;
  int found = 0;
  for (const auto& e : g.entries) {
    if (const auto r = entry_rank(ranking, e)) {
      sum += *r;
      ++found;
    }
  }
  if (found == 0) return std::nullopt;
  return sum / found;
}

double topn_recall(const Rankings& rankings, const Truths& truths, double n) {
  if (truths.empty()) return 0.0;
  int hits = 0;
  for (const auto& [bug, truth] : truths) {
    auto it = rankings.find(bug);
    if (it == rankings.end()) continue;
    const auto r = first_rank(it->second, truth);
    if (r && *r <= n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truths.size());
}

namespace {

template <typename Fn>
std::optional<double> mean_over_included(const Rankings& rankings, const Truths& truths, Fn&& per_bug) {
  double sum = 0.0;
  int included = 0;
  for (const auto& [bug, truth] : truths) {
    auto it = rankings.find(bug);
    if (it == rankings.end()) continue;
    if (const auto r = per_bug(it->second, truth)) {
      sum += *r;
      ++included;
    }
  }
  if (included == 0) return std::nullopt;
  return sum / included;
}

}  // namespace

std::optional<double> mfr(const Rankings& rankings, const Truths& truths) {
  return mean_over_included(rankings, truths, first_rank);
}

std::optional<double> mar(const Rankings& rankings, const Truths& truths) {
  return mean_over_included(rankings, truths, average_rank);
}

MetricsReport compute_metrics(const Rankings& rankings, const Truths& truths,
                              const std::map<std::string, std::string>& errors) {
  MetricsReport r;
  for (const auto& [bug, truth] : truths) {
    BugMetrics b;
    b.bug_id = bug;
    if (auto e = errors.find(bug); e != errors.end()) b.error = e->second;
    if (auto it = rankings.find(bug); it != rankings.end()) {
      b.first = first_rank(it->second, truth);
      b.average = average_rank(it->second, truth);
    }
    if (!b.first) r.excluded.push_back(bug);
    r.bugs.push_back(std::move(b));
  }
  for (int n : {1, 3, 5, 10}) r.top[n] = topn_recall(rankings, truths, n);
  r.mfr = mfr(rankings, truths);
  r.mar = mar(rankings, truths);
  return r;
}

namespace {

std::string fmt(std::optional<double> v, const char* format = "%.3f") {
  if (!v) return "undefined";
  char buf[48];
  std::snprintf(buf, sizeof buf, format, *v);
  return buf;
}

nlohmann::json opt_json(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

void write_metrics(std::ostream& os, const MetricsReport& r) {
  os << "bugs " << r.bugs.size() << '\n';
  for (const auto& [n, v] : r.top) os << "top-" << n << ' ' << fmt(v) << '\n';
  os << "mfr " << fmt(r.mfr) << '\n';
  os << "mar " << fmt(r.mar) << '\n';
  if (r.mean_reduction) os << "slice-reduction " << fmt(r.mean_reduction) << '\n';
  os << "excluded";
  for (const auto& b : r.excluded) os << ' ' << b;
  os << '\n';
  for (const auto& b : r.bugs) {
    os << "bug " << b.bug_id << " first=" << fmt(b.first, "%g") << " average=" << fmt(b.average, "%g");
    if (!b.error.empty()) os << " error=\"" << b.error << '"';
    os << '\n';
  }
}

void write_metrics_json(std::ostream& os, const MetricsReport& r) {
  nlohmann::json j;
  for (const auto& [n, v] : r.top) j["top"][std::to_string(n)] = v;
  j["mfr"] = opt_json(r.mfr);
  j["mar"] = opt_json(r.mar);
  j["slice_reduction"] = opt_json(r.mean_reduction);
  j["excluded"] = r.excluded;
  j["bugs"] = nlohmann::json::array();
  for (const auto& b : r.bugs) {
    j["bugs"].push_back({{"id", b.bug_id}, {"first", opt_json(b.first)}, {"average", opt_json(b.average)},
                         {"error", b.error}});
  }
  os << j.dump(2) << '\n';
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<CorpusBug> load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("corpus directory not found: " + dir.string());
  std::vector<CorpusBug> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const fs::path d = entry.path();
    if (!fs::exists(d / "buggy.mini")) continue;
    CorpusBug b;
    b.id = d.filename().string();
    b.dir = d;
    b.buggy_source = read_file(d / "buggy.mini");
    b.fixed_source = read_file(d / "fixed.mini");
    b.tests_source = read_file(d / "tests.mini");
    if (fs::exists(d / "patches.txt")) b.patches_source = read_file(d / "patches.txt");
    if (fs::exists(d / "notes.txt")) b.notes = read_file(d / "notes.txt");
    b.truth = parse_truth(read_file(d / "truth.txt"), b.id);
    out.push_back(std::move(b));
  }
  std::sort(out.begin(), out.end(), [](const CorpusBug& a, const CorpusBug& b) { return a.id < b.id; });
  return out;
}

std::filesystem::path default_corpus_dir() {
  if (const char* env = std::getenv("VARDT_CORPUS")) return env;
  return VARDT_CORPUS_DIR;
}

std::vector<CorpusBug> seed_corpus() { return load_corpus(default_corpus_dir()); }

}  // namespace vardt::eval
