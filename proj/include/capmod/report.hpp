#pragma once

// Structured result of a study or verification run. JSON output has sorted
// keys and no wall-clock data unless timing is requested, so equal inputs
// give byte-identical reports.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace capmod {

inline constexpr const char* kReportSchema = "capmod/report/1";

struct CheckRecord {
  std::string name;
  nlohmann::json expected;
  nlohmann::json actual;
  double tolerance = 0.0;
  bool pass = false;
};

class Report {
 public:
  explicit Report(std::string scenario, std::string reproduces = {})
      : scenario_(std::move(scenario)), reproduces_(std::move(reproduces)) {}

  const std::string& scenario() const { return scenario_; }
  nlohmann::json& parameters() { return parameters_; }
  const nlohmann::json& parameters() const { return parameters_; }
  nlohmann::json& data() { return data_; }
  const nlohmann::json& data() const { return data_; }
  const std::vector<CheckRecord>& checks() const { return checks_; }

  bool check(std::string name, nlohmann::json expected, nlohmann::json actual, double tolerance, bool pass) {
    checks_.push_back({std::move(name), std::move(expected), std::move(actual), tolerance, pass});
    return pass;
  }

  // |actual - expected| ≤ tolerance.
  bool check_close(std::string name, double expected, double actual, double tolerance) {
    return check(std::move(name), expected, actual, tolerance, std::abs(actual - expected) <= tolerance);
  }

  bool check_true(std::string name, bool condition, nlohmann::json actual = nullptr) {
    return check(std::move(name), true, actual.is_null() ? nlohmann::json(condition) : std::move(actual), 0.0,
                 condition);
  }

  void merge(const Report& other) {
    for (const auto& c : other.checks_) {
      CheckRecord r = c;
      r.name = other.scenario_ + "/" + c.name;
      checks_.push_back(std::move(r));
    }
    data_[other.scenario_] = other.data_;
  }

  bool pass() const {
    for (const auto& c : checks_)
      if (!c.pass) return false;
    return true;
  }
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : checks_) n += c.pass ? 0 : 1;
    return n;
  }

  void set_runtime(double seconds) { runtime_ = seconds; }

  nlohmann::json to_json(bool include_timing = false) const {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["scenario"] = scenario_;
    j["reproduces"] = reproduces_;
    j["parameters"] = parameters_.is_null() ? nlohmann::json::object() : parameters_;
    j["data"] = data_.is_null() ? nlohmann::json::object() : data_;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks_)
      j["checks"].push_back(
          {{"name", c.name}, {"expected", c.expected}, {"actual", c.actual}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    j["pass"] = pass();
    if (include_timing) j["runtime_seconds"] = runtime_;
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "scenario,check,expected,actual,tolerance,pass\n";
    for (const auto& c : checks_)
      os << scenario_ << ',' << quote(c.name) << ',' << quote(c.expected.dump()) << ',' << quote(c.actual.dump())
         << ',' << c.tolerance << ',' << (c.pass ? "true" : "false") << '\n';
    return os.str();
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  }

  std::string scenario_;
  std::string reproduces_;
  nlohmann::json parameters_;
  nlohmann::json data_;
  std::vector<CheckRecord> checks_;
  double runtime_ = 0.0;
};

}  // namespace capmod
