#pragma once

#include <string>
#include <vector>

#include "mixdual/problem.hpp"

namespace mixdual {

struct CatalogEntry {
  std::string name;
  std::string text;  ///< problem-file text, see ProblemSpec
};

/// Built-in problems, in listing order.
const std::vector<CatalogEntry>& catalog();

/// Parses the named catalog problem. Throws UnknownIdentifier.
ProblemSpec catalog_problem(const std::string& name);

}  // namespace mixdual
