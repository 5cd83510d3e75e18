#include "gfield/report.hpp"

#include <algorithm>
#include <cmath>

#include "gfield/sampler.hpp"
#include "json.hpp"

namespace gfield {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

}  // namespace

bool Report::all_pass() const {
  return std::all_of(metrics_.begin(), metrics_.end(), [](const Metric& m) { return m.pass; });
}

void Report::write_csv(std::ostream& out) const {
  out << "metric,parameters,value,tolerance,pass\n";
  for (const auto& m : metrics_)
    out << csv_field(m.name) << ',' << csv_field(m.parameters) << ',' << format_double(m.value) << ','
        << format_double(m.tolerance) << ',' << (m.pass ? "true" : "false") << '\n';
}

void Report::write_json(std::ostream& out) const {
  out << "{\n  \"metrics\": [";
  for (std::size_t i = 0; i < metrics_.size(); ++i) {
    const auto& m = metrics_[i];
    out << (i ? ",\n    " : "\n    ") << "{\"metric\": " << nlohmann::json(m.name).dump()
        << ", \"parameters\": " << nlohmann::json(m.parameters).dump() << ", \"value\": " << json_number(m.value)
        << ", \"tolerance\": " << json_number(m.tolerance) << ", \"pass\": " << (m.pass ? "true" : "false") << "}";
  }
  out << (metrics_.empty() ? "" : "\n  ") << "],\n  \"pass\": " << (all_pass() ? "true" : "false") << "\n}\n";
}

}  // namespace gfield
