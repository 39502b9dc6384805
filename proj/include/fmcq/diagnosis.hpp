#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fmcq/formula.hpp"
#include "fmcq/model.hpp"
#include "fmcq/representations.hpp"

namespace fmcq {

struct Diagnosis {
  /// Bindings of cr that disagree with the witness, canonical order.
  std::vector<Binding> delta;
  Configuration witness;
  /// The witness's value for every delta member, canonical order.
  std::vector<Binding> suggested;

  bool operator==(const Diagnosis&) const = default;
};

/// For every configuration the set of cr bindings it violates. Returns the
/// set-minimal deltas, deduplicated (first witness wins) and ordered by size,
/// then canonical order; at most max_results entries. A cr consistent with
/// some configuration yields a single empty delta.
/// Throws Error("no configurations available") when configs is empty.
std::vector<Diagnosis> diagnose(const FeatureModel& fm, const Requirements& cr, std::span<const Configuration> configs,
                                std::size_t max_results = 10);

/// cr with the delta bindings replaced by the suggested values.
Requirements apply_diagnosis(const FeatureModel& fm, const Requirements& cr, const Diagnosis& d);

struct DiagnoseOptions {
  std::size_t max_results = 10;
  /// Models with at most this many features scan the full configuration table.
  std::size_t all_configs_limit = 20;
  /// Solutions drawn from the per-feature representation for larger models.
  std::uint64_t stream_limit = 1000;
  /// Prebuilt all-configs representation to scan instead of building one.
  const Representation* all_configs = nullptr;
};

struct DiagnosisReport {
  std::vector<Diagnosis> diagnoses;
  std::uint64_t scanned = 0;
  /// True when every configuration of the model was scanned.
  bool complete = false;
  std::string source;
};

/// Picks the configuration source (full table or a bounded solution stream
/// with cr dropped) and runs diagnose().
DiagnosisReport diagnose_model(const ConstraintSet& cf, const Requirements& cr, const DiagnoseOptions& options = {});

}  // namespace fmcq
