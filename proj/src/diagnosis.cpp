#include "fmcq/diagnosis.hpp"

#include <algorithm>
#include <unordered_set>

#include "fmcq/error.hpp"

namespace fmcq {

std::vector<Diagnosis> diagnose(const FeatureModel& fm, const Requirements& cr, std::span<const Configuration> configs,
                                std::size_t max_results) {
  if (configs.empty()) throw Error("no configurations available");
  const std::vector<Binding> bindings = resolve(fm, cr);

  struct Candidate {
    std::vector<bool> mask;
    std::size_t size;
    std::size_t witness;
  };
  std::vector<Candidate> candidates;
  std::unordered_set<std::vector<bool>> seen;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::vector<bool> mask(bindings.size());
    std::size_t size = 0;
    for (std::size_t b = 0; b < bindings.size(); ++b) {
      if (configs[i].values.at(bindings[b].feature) != bindings[b].value) {
        mask[b] = true;
        ++size;
      }
    }
    if (seen.insert(mask).second) candidates.push_back({std::move(mask), size, i});
  }

  // Size first, then lexicographic over canonical positions.
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.size != b.size) return a.size < b.size;
    for (std::size_t k = 0; k < a.mask.size(); ++k)
      if (a.mask[k] != b.mask[k]) return static_cast<bool>(a.mask[k]);
    return false;
  });

  std::vector<const Candidate*> kept;
  for (const Candidate& c : candidates) {
    const bool superset = std::any_of(kept.begin(), kept.end(), [&](const Candidate* k) {
      for (std::size_t b = 0; b < c.mask.size(); ++b)
        if (k->mask[b] && !c.mask[b]) return false;
      return true;
    });
    if (!superset) kept.push_back(&c);
  }

  std::vector<Diagnosis> out;
  for (const Candidate* c : kept) {
    if (out.size() == max_results) break;
    Diagnosis d;
    d.witness = configs[c->witness];
    for (std::size_t b = 0; b < bindings.size(); ++b) {
      if (!c->mask[b]) continue;
      d.delta.push_back(bindings[b]);
      d.suggested.push_back({bindings[b].feature, d.witness.values[bindings[b].feature]});
    }
    out.push_back(std::move(d));
  }
  return out;
}

Requirements apply_diagnosis(const FeatureModel& fm, const Requirements& cr, const Diagnosis& d) {
  Requirements out = cr;
  for (const Binding& b : d.suggested) out.set(fm.feature(b.feature).id, b.value);
  return out;
}

DiagnosisReport diagnose_model(const ConstraintSet& cf, const Requirements& cr, const DiagnoseOptions& options) {
  const FeatureModel& fm = cf.model();
  resolve(fm, cr);
  DiagnosisReport report;
  std::vector<Configuration> configs;
  if (options.all_configs || fm.size() <= options.all_configs_limit) {
    std::optional<Representation> built;
    if (!options.all_configs) {
      AllConfigsOptions ao;
      ao.threshold = options.all_configs_limit;
      built = build_all_configs(cf, ao);
    }
    const Representation& repr = options.all_configs ? *options.all_configs : *built;
    for (const Tuple& row : repr.tables.front()->rows()) configs.push_back(Configuration{row});
    report.complete = true;
    report.source = "all-configs";
  } else {
    const Representation repr = build_per_feature(cf, PerFeatureOptions::all());
    enumerate(repr, ConfigTask{{}, {}, options.stream_limit}, [&](const Configuration& c) {
      configs.push_back(c);
      return true;
    });
    report.source = "per-feature stream";
    report.complete = configs.size() < options.stream_limit;
  }
  report.scanned = configs.size();
  report.diagnoses = diagnose(fm, cr, configs, options.max_results);
  return report;
}

}  // namespace fmcq
