#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmcq/analysis.hpp"
#include "fmcq/formula.hpp"
#include "fmcq/model.hpp"
#include "fmcq/query.hpp"

namespace fmcq {

enum class ReprKind { kAllConfigs, kPerFeature, kPerConstraint };

enum class Optimization { kRootReduction, kDeadReduction, kFalseOptionalReduction, kPairwisePruning };

std::string_view to_string(ReprKind k);
std::string_view to_string(Optimization o);

/// One table encoding of a configuration space.
struct Representation {
  ReprKind kind = ReprKind::kPerFeature;
  FeatureModel model;
  std::vector<std::shared_ptr<const Table>> tables;
  /// Non-empty only for per-constraint: star pattern anchored at each
  /// feature's first occurrence.
  std::vector<Equality> join_equalities;
  /// Per canonical feature index; the first entry is the anchor attribute.
  std::vector<std::vector<AttrRef>> attr_of_feature;
  std::set<Optimization> optimizations_applied;
  /// Model constraints over table attributes (per-feature only).
  Predicate constraint_predicate = Predicate::constant(true);

  /// Throws NotFound.
  const Table& table(std::string_view name) const;
};

struct ConfigTask {
  Requirements cr;
  /// Feature ids to project; empty selects every feature.
  std::vector<std::string> projection;
  std::optional<std::uint64_t> limit;
};

struct AllConfigsOptions {
  std::size_t threshold = 24;
  /// Larger models are enumerated through the per-feature evaluator.
  std::size_t raw_scan_limit = 20;
  bool root_reduction = true;
};

struct PerFeatureOptions {
  bool root_reduction = false;
  bool dead_reduction = false;
  bool false_optional_reduction = false;

  static PerFeatureOptions all() { return {true, true, true}; }
};

struct PerConstraintOptions {
  bool prune_pairwise = false;
  /// Largest constraint scope enumerated into a local table.
  std::size_t max_scope = 24;
};

/// Single table F with one row per configuration, ordered descending binary
/// with the first canonical feature as most significant bit. Throws
/// CapacityError ("configuration space too large") above options.threshold.
Representation build_all_configs(const ConstraintSet& cf, const AllConfigsOptions& options = {});

/// One table per feature with attribute `val`. Dead/false-optional reductions
/// use `analysis` when given and compute it otherwise. The false-optional
/// reduction fixes only features that are also core.
Representation build_per_feature(const ConstraintSet& cf, const PerFeatureOptions& options = {},
                                 const std::optional<AnalysisResult>& analysis = std::nullopt);

/// One local-consistency table per formula, rows enumerated with the first
/// attribute varying fastest and 1 before 0.
Representation build_per_constraint(const ConstraintSet& cf, const PerConstraintOptions& options = {});

/// Throws NotFound when cr or the projection mention unknown features.
ConjunctiveQuery compile_query(const Representation& repr, const ConfigTask& task);

/// First configuration in enumeration order, or nullopt (UNSAT).
std::optional<Configuration> solve(const Representation& repr, const ConfigTask& task, EvalStats* stats = nullptr);

/// Number of configurations satisfying cr (limit and projection ignored).
std::uint64_t count(const Representation& repr, const ConfigTask& task,
                    std::optional<std::uint64_t> cap = std::nullopt);

/// Streams configurations satisfying cr until the visitor returns false.
void enumerate(const Representation& repr, const ConfigTask& task,
               const std::function<bool(const Configuration&)>& visit);

}  // namespace fmcq
