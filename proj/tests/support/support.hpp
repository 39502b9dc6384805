#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fmcq/bench.hpp"
#include "fmcq/model.hpp"
#include "fmcq/query.hpp"

namespace fmcq::testing {

/// The survey product line: s root; p, q mandatory; t, st optional;
/// {l, n} alternative under p; {m, mm} or under q; excludes(t, n); requires(t, st).
FeatureModel survey_model();

/// Reference predicates for c_0..c_8 written out over (s,p,l,n,t,st,q,m,mm).
using SurveyPredicate = std::function<bool(const std::vector<Value>&)>;
std::vector<SurveyPredicate> survey_predicates();

/// Feature-model semantics read directly off the tree, independent of translate().
bool textbook_valid(const FeatureModel& fm, const std::vector<Value>& conf);
std::vector<Configuration> textbook_enumerate(const FeatureModel& fm, const Requirements& cr = {});

/// Random partial assignment over the model's features.
Requirements random_requirements(const FeatureModel& fm, Rng& rng, std::size_t max_bound);

/// Materialises the full product, filters by direct predicate evaluation,
/// projects with duplicate removal (product order) and truncates to the limit.
std::vector<Tuple> naive_evaluate(const ConjunctiveQuery& q);

/// Random query over 1-4 random tables with product size at most 2^16.
ConjunctiveQuery random_query(Rng& rng);

}  // namespace fmcq::testing
