#pragma once

#include <functional>
#include <string>
#include <vector>

namespace clsnet {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;  // measured values, failing checks first
  double seconds = 0.0;
};

/// Criterion ids in run order (1..13).
std::vector<int> acceptance_ids();
std::string criterion_title(int id);

/// "all", a single id or a comma list ("1,4,13"); config error otherwise.
std::vector<int> parse_selector(const std::string& selector);

struct AcceptanceOptions {
  std::vector<int> selection;  // empty: every criterion
  /// Runs the suite with a sign-flipped propagator (PropagatorSignFault).
  bool inject_propagator_fault = false;
  /// Called after each criterion, in order.
  std::function<void(const CriterionResult&)> on_result;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// {"criteria": [{id, title, passed, detail}], "passed": bool}; no timings,
/// so repeated runs compare equal.
std::string acceptance_json(const std::vector<CriterionResult>& results);

/// "PASS  6  <title>  <detail>  (1.23 s)"
std::string format_result_line(const CriterionResult& result);

}  // namespace clsnet
