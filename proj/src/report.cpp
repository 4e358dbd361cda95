#include "switchinv/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace switchinv {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Skipped:
      return "skipped";
  }
  return "unknown";
}

const char* to_string(CheckRole r) {
  switch (r) {
    case CheckRole::Hypothesis:
      return "hypothesis";
    case CheckRole::Conclusion:
      return "conclusion";
    case CheckRole::Consistency:
      return "consistency";
  }
  return "unknown";
}

void AggregateReport::add(std::string name, CheckRole role, bool passed, std::string detail) {
  checks.push_back({std::move(name), role, passed ? CheckStatus::Pass : CheckStatus::Fail, std::move(detail)});
}

void AggregateReport::skip(std::string name, CheckRole role, std::string detail) {
  checks.push_back({std::move(name), role, CheckStatus::Skipped, std::move(detail)});
}

void AggregateReport::finalize() {
  hypotheses_established = true;
  guas_observed = true;
  for (const auto& c : checks) {
    if (c.status != CheckStatus::Fail) continue;
    if (c.role == CheckRole::Hypothesis) hypotheses_established = false;
    if (c.role == CheckRole::Conclusion) guas_observed = false;
  }
}

const CheckEntry* AggregateReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string AggregateReport::verdict() const { return guas_observed ? "GUAS-observed" : "GUAS-not-observed"; }

void AggregateReport::write_text(std::ostream& os) const {
  os << "scenario: " << scenario << "\n";
  os << "verdict: " << verdict() << "\n";
  os << "hypotheses: " << (hypotheses_established ? "established" : "not established") << "\n";
  os << "note: sampled evidence on a finite batch, not a proof\n";
  os << "parameters:\n";
  for (const auto& [k, v] : parameters) os << "  " << k << " = " << v << "\n";
  for (CheckRole role : {CheckRole::Hypothesis, CheckRole::Conclusion, CheckRole::Consistency}) {
    os << to_string(role) << " checks:\n";
    for (const auto& c : checks) {
      if (c.role != role) continue;
      os << "  [" << to_string(c.status) << "] " << c.name;
      if (!c.detail.empty()) os << ": " << c.detail;
      os << "\n";
    }
  }
  os << "artifacts:\n";
  for (const auto& a : artifacts) os << "  " << a << "\n";
}

void AggregateReport::write_records(std::ostream& os) const {
  os << "scenario=" << scenario << "\n";
  os << "verdict=" << verdict() << "\n";
  os << "hypotheses_established=" << (hypotheses_established ? "true" : "false") << "\n";
  os << "guas_observed=" << (guas_observed ? "true" : "false") << "\n";
  for (const auto& [k, v] : parameters) os << "param." << k << "=" << v << "\n";
  for (const auto& c : checks) {
    os << "check." << c.name << ".role=" << to_string(c.role) << "\n";
    os << "check." << c.name << ".status=" << to_string(c.status) << "\n";
    os << "check." << c.name << ".detail=" << c.detail << "\n";
  }
  for (const auto& a : artifacts) os << "artifact=" << a << "\n";
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace switchinv
