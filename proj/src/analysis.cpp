#include "fmcq/analysis.hpp"

#include <numeric>

#include "fmcq/csp.hpp"
#include "fmcq/error.hpp"
#include "fmcq/kernels.hpp"

namespace fmcq {

namespace {

bool satisfiable(const ConstraintSet& cf, std::initializer_list<Binding> cr) {
  std::vector<Binding> bindings(cr);
  return csp_solve(make_csp(cf, bindings)).has_value();
}

}  // namespace

std::uint64_t scan_count(const ConstraintSet& cf) {
  const std::size_t n = cf.model().size();
  if (n > 40) throw CapacityError("scan_count limited to 40 features");
  std::vector<std::uint32_t> var(n);
  std::iota(var.begin(), var.end(), 0u);
  std::vector<const Expr*> exprs;
  for (const Formula& f : cf.formulas()) exprs.push_back(&f.expr);
  return kernels::count_space(compile_conjunction(exprs, var), static_cast<unsigned>(n));
}

AnalysisResult analyze(const ConstraintSet& cf, const AnalysisOptions& options) {
  const FeatureModel& fm = cf.model();
  AnalysisResult r;
  if (!satisfiable(cf, {})) {
    r.void_model = true;
    for (const Feature& f : fm.features()) r.dead.insert(f.id);
    if (fm.size() <= options.exhaustive_threshold) r.configuration_count = 0;
    return r;
  }
  std::vector<bool> dead(fm.size(), false);
  for (std::size_t i = 0; i < fm.size(); ++i) {
    dead[i] = !satisfiable(cf, {{i, 1}});
    if (dead[i]) r.dead.insert(fm.feature(i).id);
    else if (!satisfiable(cf, {{i, 0}})) r.core.insert(fm.feature(i).id);
  }
  for (std::size_t i = 0; i < fm.size(); ++i) {
    const Feature& f = fm.feature(i);
    if (dead[i] || f.decomposition == Decomposition::kMandatory || f.decomposition == Decomposition::kRoot) continue;
    const std::size_t parent = *fm.parent_index(i);
    if (!satisfiable(cf, {{i, 0}, {parent, 1}})) r.false_optional.insert(f.id);
  }
  if (fm.size() <= options.exhaustive_threshold) r.configuration_count = scan_count(cf);
  return r;
}

AnalysisResult analyze(const FeatureModel& fm, const AnalysisOptions& options) {
  return analyze(translate(fm), options);
}

}  // namespace fmcq
