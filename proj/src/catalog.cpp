#include "mixdual/catalog.hpp"

#include "mixdual/errors.hpp"

namespace mixdual {

namespace {

// P1: convex; g.2 is active on a middle interval at balanced weights.
constexpr const char* kP1 = R"(name = P1
note = convex quadratic
n = 2
p = 2
m = 2
boundary = fixed_zero
f.1 = 0.5*(xd0^2 + xd1^2) + 5*(x0^2 + x1^2) - 8*x0 - 2*x1
f.2 = 0.5*(xd0^2 + xd1^2) + 5*(x0^2 + x1^2) - 2*x0 - 8*x1
B.1 = 1, 0; 0, 1
B.2 = 1, 0; 0, 0
g.1 = -x0 - 1
g.2 = x0 + x1 - 0.45
)";

// P2: fourth-order Euler-Lagrange equation through xdd in f.
constexpr const char* kP2 = R"(name = P2
note = convex, second-derivative integrand
n = 1
p = 2
m = 2
boundary = fixed_zero
f.1 = 0.5*xdd0^2 + 50*x0^2 - 100*x0
f.2 = 0.5*xdd0^2 + 50*x0^2 - 80*cos(t)*x0
B.1 = 1
B.2 = 0.25
g.1 = x0 - 2
g.2 = -x0 - 1
)";

constexpr const char* kP2N = R"(name = P2N
note = convex, second-derivative integrand, free endpoints
n = 1
p = 2
m = 2
boundary = natural
f.1 = 0.5*xdd0^2 + 50*x0^2 - 100*x0
f.2 = 0.5*xdd0^2 + 50*x0^2 - 80*cos(t)*x0
B.1 = 1
B.2 = 0.25
g.1 = x0 - 2
g.2 = -x0 - 1
)";

// P3: the sin term makes the weighted functional non-invex.
constexpr const char* kP3 = R"(name = P3
note = nonconvex
n = 1
p = 2
m = 1
boundary = fixed_zero
f.1 = 0.05*xd0^2 + 2*sin(3*x0) - x0
f.2 = 0.05*xd0^2 + (x0 - 1)^2
B.1 = 0.1
B.2 = 0
g.1 = x0 - 3
)";

constexpr const char* kS1 = R"(name = S1
note = convex, static
n = 2
p = 2
m = 2
boundary = natural
f.1 = (x0 - 2)^2 + (x1 - 1)^2
f.2 = (x0 + 1)^2 + (x1 - 2)^2
B.1 = 1, 0; 0, 1
B.2 = 0, 0; 0, 1
g.1 = x0^2 + x1^2 - 4
g.2 = -x1
)";

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"P1", kP1}, {"P2", kP2}, {"P2N", kP2N}, {"P3", kP3}, {"S1", kS1},
  };
  return entries;
}

ProblemSpec catalog_problem(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return ProblemSpec::parse(e.text);
  throw UnknownIdentifier("unknown catalog problem '" + name + "'");
}

}  // namespace mixdual
