#pragma once

#include <cstdlib>
#include <string>

#include "epimu/errors.hpp"

namespace epimu {

/// Resource budgets and output knobs shared by the CLI commands.
struct Config {
  long state_budget = 100000;  // max states of any subset construction
  long node_budget = 1000000;  // max nodes of a bounded unfolding
  int fuel = 16;               // max fixpoint approximants in the oracle
  int oracle_depth = 6;        // default unfolding depth
  unsigned long seed = 1;      // randomized suites only
  bool json = false;

  void validate() const {
    if (state_budget <= 0 || node_budget <= 0 || fuel <= 0 || oracle_depth <= 0)
      throw input_error("all budgets must be positive");
  }

  /// EPIMU_BUDGET_STATES overrides the state cap when set.
  void apply_env() {
    if (const char* v = std::getenv("EPIMU_BUDGET_STATES")) {
      char* end = nullptr;
      long b = std::strtol(v, &end, 10);
      if (!end || *end != '\0' || b <= 0)
        throw input_error("EPIMU_BUDGET_STATES must be a positive integer");
      state_budget = b;
    }
  }
};

} // namespace epimu
