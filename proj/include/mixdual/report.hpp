#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mixdual {

/// Lossless text form of a double: 17 significant digits, '.' separator.
std::string format_double(double v);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string_view text);

/// One measured quantity compared against a threshold.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;
  /// Informational checks are reported but do not decide Report::passed().
  bool gating = true;
  std::string detail;
};

/// Structured residual/violation record emitted by every checker.
class Report {
 public:
  explicit Report(std::string title) : title_(std::move(title)) {}

  const std::string& title() const { return title_; }

  Check& add(Check check);
  /// Adds a check that passes iff value <= bound.
  Check& add_upper(std::string name, double value, double bound, std::string detail = {});
  /// Adds a check that passes iff value >= bound.
  Check& add_lower(std::string name, double value, double bound, std::string detail = {});
  void append(const Report& other, std::string_view prefix = {});

  bool passed() const;
  const std::vector<Check>& checks() const { return checks_; }
  /// nullptr when absent.
  const Check* find(std::string_view name) const;
  /// Throws std::out_of_range when absent.
  const Check& at(std::string_view name) const;

  std::string summary() const;
  /// Header `report,check,value,bound,passed,gating,detail`.
  std::string to_csv(bool header = true) const;

 private:
  std::string title_;
  std::vector<Check> checks_;
};

}  // namespace mixdual
