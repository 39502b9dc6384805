#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fmcq/formula.hpp"
#include "fmcq/model.hpp"

namespace fmcq {

/// Boolean CSP over the canonical feature list. Domains are bitmasks:
/// bit 0 allows value 0, bit 1 allows value 1.
struct CspProblem {
  const ConstraintSet* constraints = nullptr;
  std::vector<std::uint8_t> domains;
};

/// Seeds cr bindings as unit domains.
CspProblem make_csp(const ConstraintSet& cf, std::span<const Binding> cr = {});

struct CspStats {
  std::uint64_t nodes = 0;
  std::uint64_t prunings = 0;
};

/// Depth-first backtracking in canonical variable order, value order (1, 0),
/// forward checking after every assignment. Values left single by pruning are
/// assigned and propagated in turn. Deterministic.
std::optional<Configuration> csp_solve(const CspProblem& p, CspStats* stats = nullptr);

/// Visits solutions in search order until the visitor returns false.
void csp_enumerate(const CspProblem& p, const std::function<bool(const Configuration&)>& visit,
                   CspStats* stats = nullptr);

/// Number of solutions, stopping at cap when given.
std::uint64_t csp_count(const CspProblem& p, std::optional<std::uint64_t> cap = std::nullopt);

inline constexpr std::size_t kBruteForceLimit = 24;

/// Test oracle: tests all 2^n assignments against every formula and cr.
/// Order is descending binary with the first canonical feature as most
/// significant bit (1 before 0). Throws CapacityError above kBruteForceLimit.
std::vector<Configuration> brute_force_enumerate(const ConstraintSet& cf, std::span<const Binding> cr = {});

}  // namespace fmcq
