#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gfield {

struct Metric {
  std::string name;
  std::string parameters;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Flat list of validation records.
class Report {
 public:
  void add(Metric m) { metrics_.push_back(std::move(m)); }
  const std::vector<Metric>& metrics() const { return metrics_; }
  bool all_pass() const;

  /// Header `metric,parameters,value,tolerance,pass`; floats with 17 digits.
  void write_csv(std::ostream& out) const;
  /// JSON object {"metrics": [...], "pass": bool}.
  void write_json(std::ostream& out) const;

 private:
  std::vector<Metric> metrics_;
};

}  // namespace gfield
