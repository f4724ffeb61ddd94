#pragma once

#include <functional>
#include <string>
#include <vector>

#include "emoface/nn/grad_check.hpp"

namespace emoface::eval {

struct CheckOutcome {
  bool passed = false;
  /// Max relative error for gradient checks, worst deviation for invariants.
  double metric = 0.0;
  std::string detail;
};

struct NamedCheck {
  std::string name;
  std::function<CheckOutcome()> run;
};

struct CheckResult {
  std::string name;
  CheckOutcome outcome;
};

struct CheckReport {
  std::vector<CheckResult> results;
  bool passed() const;
  std::size_t failures() const;
  /// One line per check, "PASS <name> ..." or "FAIL <name> ...", then a
  /// summary line. Contains no timings, so equal runs give equal text.
  std::string text() const;
};

inline constexpr double kGradTolerance = 1e-4;

/// Passes when max_rel_error < tolerance; the detail names the worst
/// parameter and both gradient values.
CheckOutcome grad_outcome(const nn::GradCheckResult& r, double tolerance = kGradTolerance);

/// Finite-difference checks of every shipped layer and loss path, each on a
/// small seeded instance.
std::vector<NamedCheck> gradient_checks(double tolerance = kGradTolerance);

/// Randomized property checks; `cases` draws per property.
std::vector<NamedCheck> invariant_checks(std::size_t cases = 10000);

/// Runs every check. An exception inside a check is reported as its failure.
CheckReport run_checks(const std::vector<NamedCheck>& checks);

/// The check called `name`; throws InvalidArgument if absent.
const NamedCheck& find_check(const std::vector<NamedCheck>& checks, const std::string& name);

}  // namespace emoface::eval
