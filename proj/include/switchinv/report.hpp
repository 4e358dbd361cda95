#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace switchinv {

enum class CheckStatus { Pass, Fail, Skipped };

const char* to_string(CheckStatus s);

/// What a check contributes to the verdict.
enum class CheckRole { Hypothesis, Conclusion, Consistency };

const char* to_string(CheckRole r);

struct CheckEntry {
  std::string name;
  CheckRole role = CheckRole::Hypothesis;
  CheckStatus status = CheckStatus::Skipped;
  std::string detail;
};

/// Evidential verdict for one scenario: per-hypothesis and per-conclusion status.
/// Never a proof; every universally quantified claim was checked on a finite batch.
struct AggregateReport {
  std::string scenario;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<CheckEntry> checks;
  bool hypotheses_established = false;
  bool guas_observed = false;
  std::vector<std::string> artifacts;

  void add(std::string name, CheckRole role, bool passed, std::string detail);
  void skip(std::string name, CheckRole role, std::string detail);
  /// Recomputes the two verdict flags from the entries.
  void finalize();

  const CheckEntry* find(const std::string& name) const;
  std::string verdict() const;

  /// Human-readable structured text.
  void write_text(std::ostream& os) const;
  /// One `key=value` record per line, stable order.
  void write_records(std::ostream& os) const;
};

/// %.17g formatting used by every text artifact.
std::string format_number(double v);

}  // namespace switchinv
