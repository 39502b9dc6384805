#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fmcq/formula.hpp"
#include "fmcq/model.hpp"

namespace fmcq {

/// Pinned generator: std::mt19937_64 with an explicit bounded draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

struct SamplePlan {
  std::uint64_t seed = 141982;
  std::size_t sample_count = 25000;
  double coverage_lo = 0.40;
  double coverage_hi = 0.60;
  std::size_t pick_unsat = 10;
  std::size_t pick_sat = 10;
};

/// Admissible number of bound leaves: ceil(lo*L) .. floor(hi*L).
/// Throws Error when the range is empty or admits k = 0.
std::pair<std::size_t, std::size_t> coverage_range(std::size_t leaves, const SamplePlan& plan);

/// plan.sample_count requirement sets over leaf features, each binding k
/// leaves (k uniform over coverage_range) with uniform values.
std::vector<Requirements> sample_requirements(const FeatureModel& fm, const SamplePlan& plan);

struct Probe {
  std::size_t id = 0;
  Requirements cr;
  /// Verdict from the oracle used during selection.
  bool sat = false;
};

/// Splits samples by verdict (order kept) and takes indices floor(i*N/k) from
/// each part: pick_unsat UNSAT probes followed by pick_sat SAT probes.
/// Throws Error naming the shortfall when a part is too small.
std::vector<Probe> systematic_select(const std::vector<Requirements>& samples,
                                     const std::function<bool(const Requirements&)>& verdict,
                                     const SamplePlan& plan);

enum class Approach { kAllConfigs, kPerFeature, kPerConstraint, kCsp };

std::string_view to_string(Approach a);
/// Accepts "all", "all-configs", "per-feature", "per-constraint", "csp".
Approach parse_approach(std::string_view name);
inline const std::vector<Approach> kAllApproaches = {Approach::kAllConfigs, Approach::kPerFeature,
                                                     Approach::kPerConstraint, Approach::kCsp};

struct BenchOptions {
  std::size_t warmup = 5;
  std::size_t reps = 50;
  /// Feature count above which the all-configs cell is reported as "-".
  std::size_t all_configs_threshold = 24;
  bool prune_pairwise = true;
};

struct ModelStats {
  std::string name;
  std::size_t features = 0;
  std::size_t leaves = 0;
  std::size_t cross_tree_constraints = 0;
  std::size_t formulas = 0;
  std::optional<std::uint64_t> configurations;
};

struct ApproachResult {
  Approach approach = Approach::kCsp;
  bool skipped = false;
  std::string skip_reason;
  double build_ms = 0;
  std::vector<double> probe_ms;
  std::vector<bool> verdicts;
  double mean_ms = 0;
};

struct BenchReport {
  ModelStats model;
  std::vector<Probe> probes;
  std::vector<ApproachResult> results;
};

inline constexpr std::uint64_t kStatsCountCap = 1'000'000;

/// Configurations are counted by scan up to kBruteForceLimit features and by
/// CSP enumeration beyond; left empty when the count reaches kStatsCountCap.
ModelStats model_stats(const ConstraintSet& cf, std::string name);

/// Times every approach on every probe (warmup runs discarded). Representation
/// build time is kept apart from query time. Throws Error when an approach
/// disagrees with a probe's verdict.
BenchReport run_benchmark(const ConstraintSet& cf, std::string model_name, const std::vector<Probe>& probes,
                          const std::vector<Approach>& approaches, const BenchOptions& options = {});

/// model,approach,probe_id,verdict,mean_ms
std::string render_csv(const std::vector<BenchReport>& reports);
/// Approaches as rows, models as columns, mean milliseconds per cell.
std::string render_table(const std::vector<BenchReport>& reports);

struct RandomModelOptions {
  std::size_t features = 10;
  /// Cross-tree constraints per feature.
  double ctc_ratio = 0.2;
  std::size_t max_group = 4;
  /// Percent of attachment steps that create a group.
  unsigned group_percent = 30;
};

/// Seeded random valid feature model with features named f0..f{n-1}.
FeatureModel random_model(std::uint64_t seed, const RandomModelOptions& options = {});

}  // namespace fmcq
