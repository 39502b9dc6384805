#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "fmcq/formula.hpp"
#include "fmcq/model.hpp"

namespace fmcq {

struct AnalysisOptions {
  /// Models up to this many features get an exact configuration count.
  std::size_t exhaustive_threshold = 24;
};

struct AnalysisResult {
  bool void_model = false;
  std::set<std::string> dead;
  std::set<std::string> false_optional;
  /// Features included in every configuration.
  std::set<std::string> core;
  std::optional<std::uint64_t> configuration_count;
};

/// Dead, false-optional and core detection by one CSP probe per feature and
/// question; the count (when enabled) comes from a bit-sliced scan.
AnalysisResult analyze(const FeatureModel& fm, const AnalysisOptions& options = {});
AnalysisResult analyze(const ConstraintSet& cf, const AnalysisOptions& options = {});

/// Exact count by scanning all 2^n assignments with the active kernel.
std::uint64_t scan_count(const ConstraintSet& cf);

}  // namespace fmcq
