#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vardt/profiler.hpp"

namespace vardt::sbfl {

struct Spectrum {
  int ef = 0;  // failed tests executing the entity
  int ep = 0;
  int nf = 0;  // failed tests not executing it
  int np = 0;
  friend bool operator==(const Spectrum&, const Spectrum&) = default;
};

struct CoverageMatrix {
  int failed = 0;
  int passed = 0;
  std::map<std::string, Spectrum> methods;
  std::map<std::pair<std::string, int>, Spectrum> lines;
};

class NothingToLocalize : public std::runtime_error {
 public:
  NothingToLocalize() : std::runtime_error("nothing to localize") {}
};

CoverageMatrix build_matrix(const std::vector<profile::TestRunTrace>& traces);

double ochiai(const Spectrum& s);

// +infinity when ep + nf == 0 and ef > 0; rank_methods resolves it.
double dstar(const Spectrum& s, int star = 2);

enum class Formula { kOchiai, kDStar };
Formula formula_from_string(const std::string& name);
const char* to_string(Formula f);

struct MethodScore {
  std::string method;
  double score = 0.0;
};

// Scores divided by the maximum so they land in [0,1]; an infinite DStar
// score first becomes the largest finite score present (or 1 if none).
// Sorted descending, ties by name, truncated to k.
std::vector<MethodScore> rank_methods(const CoverageMatrix& m, Formula f, int k);

// `<rank> <method> <score>` per line.
void write_method_ranking(std::ostream& os, const std::vector<MethodScore>& ranking);

}  // namespace vardt::sbfl
