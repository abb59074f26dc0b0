#pragma once

#include "mmlyap/inclusion.hpp"
#include "mmlyap/maxmin.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmlyap {

/// S-procedure multipliers tau_{i,k}(rho) and beta_i(rho); absent entries are zero.
struct Multipliers {
  std::map<std::pair<int, Permutation>, Vec> tau;
  std::map<std::pair<int, Permutation>, double> beta;

  Vec tau_of(int mode, const Permutation& rho) const;
  double beta_of(int mode, const Permutation& rho) const;
  bool empty() const { return tau.empty() && beta.empty(); }
};

struct Config {
  SwitchedSystem system;
  std::optional<Basis> basis;
  std::optional<MaxMinSpec> spec;
  Multipliers multipliers;
  std::vector<std::pair<std::string, double>> constants;
  /// Free-form key/value lines of a trailing [report] section.
  std::vector<std::pair<std::string, std::string>> report;
};

/// Parses the configuration language. Throws ParseError with line and column.
Config parse_config(const std::string& text);

/// Emits text that parse_config reads back to an equivalent configuration.
std::string to_text(const Config& cfg);

std::string matrix_text(const Mat& m);
std::string vector_text(const Vec& v);
std::string permutation_text(const Permutation& p);

}  // namespace mmlyap
