#include "mixdual/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mixdual {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0 so outputs stay byte-stable
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

Check& Report::add(Check check) {
  checks_.push_back(std::move(check));
  return checks_.back();
}

Check& Report::add_upper(std::string name, double value, double bound, std::string detail) {
  return add({std::move(name), value, bound, value <= bound, true, std::move(detail)});
}

Check& Report::add_lower(std::string name, double value, double bound, std::string detail) {
  return add({std::move(name), value, bound, value >= bound, true, std::move(detail)});
}

void Report::append(const Report& other, std::string_view prefix) {
  for (Check c : other.checks_) {
    if (!prefix.empty()) c.name = std::string(prefix) + c.name;
    checks_.push_back(std::move(c));
  }
}

bool Report::passed() const {
  for (const auto& c : checks_)
    if (c.gating && !c.passed) return false;
  return true;
}

const Check* Report::find(std::string_view name) const {
  for (const auto& c : checks_)
    if (c.name == name) return &c;
  return nullptr;
}

const Check& Report::at(std::string_view name) const {
  if (const Check* c = find(name)) return *c;
  throw std::out_of_range("report '" + title_ + "' has no check '" + std::string(name) + "'");
}

std::string Report::summary() const {
  std::ostringstream os;
  os << title_ << ": " << (passed() ? "PASS" : "FAIL") << '\n';
  for (const auto& c : checks_) {
    os << "  [" << (c.passed ? "ok" : (c.gating ? "FAIL" : "note")) << "] " << c.name << " = " << format_double(c.value)
       << " (bound " << format_double(c.bound) << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
  }
  return os.str();
}

std::string Report::to_csv(bool header) const {
  std::ostringstream os;
  if (header) os << "report,check,value,bound,passed,gating,detail\n";
  for (const auto& c : checks_) {
    os << csv_field(title_) << ',' << csv_field(c.name) << ',' << format_double(c.value) << ','
       << format_double(c.bound) << ',' << (c.passed ? 1 : 0) << ',' << (c.gating ? 1 : 0) << ','
       << csv_field(c.detail) << '\n';
  }
  return os.str();
}

}  // namespace mixdual
