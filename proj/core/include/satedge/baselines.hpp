#pragma once

#include <cstdint>
#include <stdexcept>

#include "satedge/admm.hpp"

namespace satedge {

/// Thrown when J^N exceeds the enumeration cap.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  EnumerationCapExceeded(std::uint64_t count, std::uint64_t cap);
  std::uint64_t count;
  std::uint64_t cap;
};

struct ExhaustiveOptions {
  std::uint64_t cap = 1'000'000;
  int threads = 1;
  BarrierSettings barrier{};
};

struct BaselineResult {
  Assignment x;
  BandwidthPlan plan;
  double energy = 0.0;
  ConstraintResiduals residuals;
  std::uint64_t enumerated = 0;  // assignments visited
  std::uint64_t feasible = 0;    // assignments admitting a plan
};

/// Optimal bandwidth for every assignment, minimum kept; ties go to the
/// lowest assignment index.
Outcome<BaselineResult> exhaustive_search(const Scenario& s, const ExhaustiveOptions& opt = {});

/// Fixed equal split (access over all UEs, backhaul over satellite-served
/// UEs) with the assignment chosen by `solver`. Agent solvers train on the
/// equal-split energy for settings.first_episodes episodes.
Outcome<BaselineResult> equal_bandwidth(const Scenario& s, XSolverKind solver, const AdmmSettings& settings = {},
                                        std::uint64_t seed = 0);

}  // namespace satedge
