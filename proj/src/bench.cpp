#include "fmcq/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "fmcq/analysis.hpp"
#include "fmcq/csp.hpp"
#include "fmcq/error.hpp"
#include "fmcq/representations.hpp"

namespace fmcq {

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % n;
  }
}

std::pair<std::size_t, std::size_t> coverage_range(std::size_t leaves, const SamplePlan& plan) {
  if (!(plan.coverage_lo > 0) || plan.coverage_lo > plan.coverage_hi || plan.coverage_hi > 1)
    throw Error("coverage interval must satisfy 0 < lo <= hi <= 1");
  constexpr double kEps = 1e-9;
  const double lo = std::ceil(plan.coverage_lo * static_cast<double>(leaves) - kEps);
  const double hi = std::floor(plan.coverage_hi * static_cast<double>(leaves) + kEps);
  if (hi < lo) throw Error("coverage interval admits no leaf count for " + std::to_string(leaves) + " leaves");
  if (lo < 1) throw Error("coverage interval yields k=0");
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

std::vector<Requirements> sample_requirements(const FeatureModel& fm, const SamplePlan& plan) {
  std::vector<std::string> leaves = leaf_features(fm);
  if (leaves.empty()) throw Error("model has no leaf features");
  const auto [lo, hi] = coverage_range(leaves.size(), plan);
  Rng rng(plan.seed);
  std::vector<Requirements> out;
  out.reserve(plan.sample_count);
  for (std::size_t s = 0; s < plan.sample_count; ++s) {
    const std::size_t k = lo + rng.below(hi - lo + 1);
    std::vector<std::string> pool = leaves;
    Requirements cr;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      cr.set(pool[i], rng.coin() ? 1 : 0);
    }
    out.push_back(std::move(cr));
  }
  return out;
}

std::vector<Probe> systematic_select(const std::vector<Requirements>& samples,
                                     const std::function<bool(const Requirements&)>& verdict,
                                     const SamplePlan& plan) {
  std::vector<const Requirements*> unsat, sat;
  for (const Requirements& s : samples) (verdict(s) ? sat : unsat).push_back(&s);
  if (unsat.size() < plan.pick_unsat || sat.size() < plan.pick_sat) {
    std::string msg = "insufficient samples:";
    if (unsat.size() < plan.pick_unsat)
      msg += " need " + std::to_string(plan.pick_unsat) + " UNSAT, have " + std::to_string(unsat.size()) + ";";
    if (sat.size() < plan.pick_sat)
      msg += " need " + std::to_string(plan.pick_sat) + " SAT, have " + std::to_string(sat.size()) + ";";
    msg.pop_back();
    throw Error(msg);
  }
  std::vector<Probe> out;
  auto pick = [&](const std::vector<const Requirements*>& part, std::size_t k, bool is_sat) {
    const std::size_t n = part.size();
    for (std::size_t i = 0; i < k; ++i) out.push_back({out.size(), *part[i * n / k], is_sat});
  };
  pick(unsat, plan.pick_unsat, false);
  pick(sat, plan.pick_sat, true);
  return out;
}

std::string_view to_string(Approach a) {
  switch (a) {
    case Approach::kAllConfigs: return "all-configs";
    case Approach::kPerFeature: return "per-feature";
    case Approach::kPerConstraint: return "per-constraint";
    case Approach::kCsp: return "csp";
  }
  return "?";
}

Approach parse_approach(std::string_view name) {
  if (name == "all" || name == "all-configs") return Approach::kAllConfigs;
  if (name == "per-feature") return Approach::kPerFeature;
  if (name == "per-constraint") return Approach::kPerConstraint;
  if (name == "csp") return Approach::kCsp;
  throw Error("unknown approach '" + std::string(name) + "' (expected all, per-feature, per-constraint or csp)");
}

ModelStats model_stats(const ConstraintSet& cf, std::string name) {
  const FeatureModel& fm = cf.model();
  ModelStats s;
  s.name = std::move(name);
  s.features = fm.size();
  s.leaves = leaf_features(fm).size();
  s.cross_tree_constraints = fm.ctcs().size();
  s.formulas = cf.size();
  if (fm.size() <= kBruteForceLimit) {
    s.configurations = scan_count(cf);
  } else {
    const std::uint64_t n = csp_count(make_csp(cf), kStatsCountCap);
    if (n < kStatsCountCap) s.configurations = n;
  }
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

BenchReport run_benchmark(const ConstraintSet& cf, std::string model_name, const std::vector<Probe>& probes,
                          const std::vector<Approach>& approaches, const BenchOptions& options) {
  BenchReport report;
  report.model = model_stats(cf, std::move(model_name));
  report.probes = probes;
  const std::size_t reps = std::max<std::size_t>(options.reps, 1);

  for (Approach a : approaches) {
    ApproachResult r;
    r.approach = a;
    std::optional<Representation> repr;
    const auto build_start = Clock::now();
    if (a == Approach::kAllConfigs) {
      if (cf.model().size() > options.all_configs_threshold) {
        r.skipped = true;
        r.skip_reason = "configuration space too large: " + std::to_string(cf.model().size()) +
                        " features exceed the threshold of " + std::to_string(options.all_configs_threshold);
        report.results.push_back(std::move(r));
        continue;
      }
      AllConfigsOptions ao;
      ao.threshold = options.all_configs_threshold;
      repr = build_all_configs(cf, ao);
    } else if (a == Approach::kPerFeature) {
      repr = build_per_feature(cf, PerFeatureOptions::all());
    } else if (a == Approach::kPerConstraint) {
      repr = build_per_constraint(cf, PerConstraintOptions{options.prune_pairwise});
    }
    r.build_ms = ms_since(build_start);

    auto run = [&](const Requirements& cr) {
      if (repr) return solve(*repr, ConfigTask{cr, {}, 1}).has_value();
      return csp_solve(make_csp(cf, resolve(cf.model(), cr))).has_value();
    };
    for (const Probe& p : probes) {
      const bool verdict = run(p.cr);
      if (verdict != p.sat)
        throw Error("verdict disagreement: " + std::string(to_string(a)) + " reports " +
                    (verdict ? "SAT" : "UNSAT") + " on probe " + std::to_string(p.id) + ", expected " +
                    (p.sat ? "SAT" : "UNSAT"));
      for (std::size_t w = 0; w < options.warmup; ++w) run(p.cr);
      const auto start = Clock::now();
      for (std::size_t k = 0; k < reps; ++k) run(p.cr);
      r.probe_ms.push_back(ms_since(start) / static_cast<double>(reps));
      r.verdicts.push_back(verdict);
    }
    if (!r.probe_ms.empty())
      r.mean_ms = std::accumulate(r.probe_ms.begin(), r.probe_ms.end(), 0.0) / static_cast<double>(r.probe_ms.size());
    report.results.push_back(std::move(r));
  }
  return report;
}

namespace {

std::string fixed3(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << v;
  return out.str();
}

}  // namespace

std::string render_csv(const std::vector<BenchReport>& reports) {
  std::ostringstream out;
  out << "model,approach,probe_id,verdict,mean_ms\n";
  for (const BenchReport& rep : reports) {
    for (const ApproachResult& r : rep.results) {
      if (r.skipped) {
        out << rep.model.name << ',' << to_string(r.approach) << ",-,-,-\n";
        continue;
      }
      for (std::size_t i = 0; i < r.probe_ms.size(); ++i)
        out << rep.model.name << ',' << to_string(r.approach) << ',' << rep.probes[i].id << ','
            << (r.verdicts[i] ? "SAT" : "UNSAT") << ',' << fixed3(r.probe_ms[i]) << '\n';
    }
  }
  return out.str();
}

std::string render_table(const std::vector<BenchReport>& reports) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  for (const BenchReport& rep : reports) header.push_back(rep.model.name);
  rows.push_back(header);
  auto stat_row = [&](std::string label, auto get) {
    std::vector<std::string> row{std::move(label)};
    for (const BenchReport& rep : reports) row.push_back(get(rep.model));
    rows.push_back(std::move(row));
  };
  stat_row("#features", [](const ModelStats& s) { return std::to_string(s.features); });
  stat_row("#leaf features", [](const ModelStats& s) { return std::to_string(s.leaves); });
  stat_row("#cross-tree constraints", [](const ModelStats& s) { return std::to_string(s.cross_tree_constraints); });
  stat_row("#configurations",
           [](const ModelStats& s) { return s.configurations ? std::to_string(*s.configurations) : std::string("-"); });
  const std::size_t separator = rows.size();

  for (Approach a : kAllApproaches) {
    std::vector<std::string> row{std::string(to_string(a)) + " (ms)"};
    bool any = false;
    for (const BenchReport& rep : reports) {
      std::string cell = "";
      for (const ApproachResult& r : rep.results) {
        if (r.approach != a) continue;
        any = true;
        cell = r.skipped ? "-" : fixed3(r.mean_ms);
      }
      row.push_back(cell);
    }
    if (any) rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == 1 || r == separator) {
      for (std::size_t c = 0; c < width.size(); ++c) out << (c ? "  " : "") << std::string(width[c], '-');
      out << '\n';
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out << "  ";
      if (c == 0)
        out << std::left << std::setw(static_cast<int>(width[c])) << rows[r][c];
      else
        out << std::right << std::setw(static_cast<int>(width[c])) << rows[r][c];
    }
    out << '\n';
  }
  for (const BenchReport& rep : reports)
    for (const ApproachResult& r : rep.results)
      if (r.skipped) out << "- " << rep.model.name << '/' << to_string(r.approach) << ": " << r.skip_reason << '\n';
  return out.str();
}

FeatureModel random_model(std::uint64_t seed, const RandomModelOptions& options) {
  if (options.features == 0) throw Error("random model needs at least one feature");
  Rng rng(seed);
  ModelBuilder b;
  auto name = [](std::size_t i) { return "f" + std::to_string(i); };
  b.root(name(0));
  std::size_t next = 1;
  while (next < options.features) {
    const std::string parent = name(rng.below(next));
    const std::size_t remaining = options.features - next;
    if (remaining >= 2 && options.max_group >= 2 && rng.below(100) < options.group_percent) {
      const std::size_t size = 2 + rng.below(std::min(options.max_group, remaining) - 1);
      std::vector<std::string> members;
      for (std::size_t k = 0; k < size; ++k) members.push_back(name(next++));
      if (rng.coin())
        b.alternative(parent, std::move(members));
      else
        b.or_group(parent, std::move(members));
    } else if (rng.below(10) < 3) {
      b.mandatory(name(next++), parent);
    } else {
      b.optional(name(next++), parent);
    }
  }
  const auto ctcs = static_cast<std::size_t>(std::llround(options.ctc_ratio * static_cast<double>(options.features)));
  if (options.features >= 2) {
    for (std::size_t k = 0; k < ctcs; ++k) {
      const std::size_t a = rng.below(options.features);
      std::size_t c = rng.below(options.features - 1);
      if (c >= a) ++c;
      if (rng.coin())
        b.require(name(a), name(c));
      else
        b.excludes(name(a), name(c));
    }
  }
  FeatureModel fm = b.build();
  require_valid(fm);
  return fm;
}

}  // namespace fmcq
