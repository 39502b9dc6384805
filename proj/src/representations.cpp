#include "fmcq/representations.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "fmcq/error.hpp"
#include "fmcq/kernels.hpp"

namespace fmcq {

std::string_view to_string(ReprKind k) {
  switch (k) {
    case ReprKind::kAllConfigs: return "all-configs";
    case ReprKind::kPerFeature: return "per-feature";
    case ReprKind::kPerConstraint: return "per-constraint";
  }
  return "?";
}

std::string_view to_string(Optimization o) {
  switch (o) {
    case Optimization::kRootReduction: return "root-reduction";
    case Optimization::kDeadReduction: return "dead-reduction";
    case Optimization::kFalseOptionalReduction: return "false-optional-reduction";
    case Optimization::kPairwisePruning: return "pairwise-pruning";
  }
  return "?";
}

const Table& Representation::table(std::string_view name) const {
  for (const auto& t : tables)
    if (t->name() == name) return *t;
  throw NotFound("no table named '" + std::string(name) + "'");
}

namespace {

Predicate to_predicate(const Expr& e, const Representation& repr) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::kTrue: return Predicate::constant(true);
    case K::kFalse: return Predicate::constant(false);
    case K::kAtom: return Predicate::eq(repr.attr_of_feature.at(e.feature()).front(), e.value());
    case K::kNot: return Predicate::negate(to_predicate(e.operands().front(), repr));
    case K::kAnd:
    case K::kOr: {
      std::vector<Predicate> ops;
      for (const Expr& op : e.operands()) ops.push_back(to_predicate(op, repr));
      return e.kind() == K::kAnd ? Predicate::all(std::move(ops)) : Predicate::any(std::move(ops));
    }
  }
  return Predicate::constant(false);
}

std::vector<AttrRef> full_projection(const Representation& repr) {
  std::vector<AttrRef> out;
  for (const auto& attrs : repr.attr_of_feature) out.push_back(attrs.front());
  return out;
}

Configuration to_config(const Tuple& t) { return Configuration{t}; }

}  // namespace

Representation build_per_feature(const ConstraintSet& cf, const PerFeatureOptions& options,
                                 const std::optional<AnalysisResult>& analysis) {
  const FeatureModel& fm = cf.model();
  Representation repr;
  repr.kind = ReprKind::kPerFeature;
  repr.model = fm;

  std::optional<AnalysisResult> facts = analysis;
  if (!facts && (options.dead_reduction || options.false_optional_reduction)) facts = analyze(cf);

  for (std::size_t i = 0; i < fm.size(); ++i) {
    const std::string& id = fm.feature(i).id;
    std::vector<Value> domain{1, 0};
    if (options.root_reduction && i == fm.root_index()) {
      domain = {1};
      repr.optimizations_applied.insert(Optimization::kRootReduction);
    }
    if (options.dead_reduction && facts->dead.contains(id)) {
      domain = {0};
      repr.optimizations_applied.insert(Optimization::kDeadReduction);
    }
    if (options.false_optional_reduction && facts->false_optional.contains(id) && facts->core.contains(id)) {
      domain = {1};
      repr.optimizations_applied.insert(Optimization::kFalseOptionalReduction);
    }
    auto t = std::make_shared<Table>(TableSchema{id, {"val"}});
    for (Value v : domain) t->insert(std::span<const Value>(&v, 1));
    repr.tables.push_back(std::move(t));
    repr.attr_of_feature.push_back({AttrRef{id, "val"}});
  }
  if (options.dead_reduction) repr.optimizations_applied.insert(Optimization::kDeadReduction);
  if (options.false_optional_reduction) repr.optimizations_applied.insert(Optimization::kFalseOptionalReduction);

  std::vector<Predicate> preds;
  for (const Formula& f : cf.formulas()) preds.push_back(to_predicate(f.expr, repr));
  repr.constraint_predicate = Predicate::all(std::move(preds));
  return repr;
}

Representation build_all_configs(const ConstraintSet& cf, const AllConfigsOptions& options) {
  const FeatureModel& fm = cf.model();
  const std::size_t n = fm.size();
  if (n > options.threshold)
    throw CapacityError("configuration space too large: " + std::to_string(n) + " features exceed the threshold of " +
                        std::to_string(options.threshold));

  Representation repr;
  repr.kind = ReprKind::kAllConfigs;
  repr.model = fm;
  TableSchema schema{"F", {}};
  for (const Feature& f : fm.features()) {
    schema.attributes.push_back(f.id);
    repr.attr_of_feature.push_back({AttrRef{"F", f.id}});
  }
  auto table = std::make_shared<Table>(std::move(schema));
  if (options.root_reduction) repr.optimizations_applied.insert(Optimization::kRootReduction);

  if (n <= options.raw_scan_limit) {
    // Feature k is kernel variable n-1-k, so descending indices give
    // descending binary order with feature 0 as the most significant bit.
    std::vector<std::uint32_t> var(n);
    for (std::size_t k = 0; k < n; ++k) var[k] = static_cast<std::uint32_t>(n - 1 - k);
    std::vector<const Expr*> exprs;
    for (const Formula& f : cf.formulas()) exprs.push_back(&f.expr);
    const kernels::Program prog = compile_conjunction(exprs, var);

    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t lo = 0;
    std::vector<std::uint64_t> bits;
    if (options.root_reduction && n >= 7) {
      // Root is the top bit: scan only the upper half of the space.
      lo = total / 2;
      bits.assign(static_cast<std::size_t>(lo / 64), 0);
      kernels::scan_blocks(prog, lo / 64, bits.size(), bits.data());
    } else {
      bits = kernels::scan_space(prog, static_cast<unsigned>(n));
    }
    Tuple row(n);
    for (std::uint64_t i = total; i-- > lo;) {
      const std::uint64_t off = i - lo;
      if (!((bits[off / 64] >> (off % 64)) & 1)) continue;
      for (std::size_t k = 0; k < n; ++k) row[k] = static_cast<Value>((i >> (n - 1 - k)) & 1);
      table->insert(row);
    }
  } else {
    PerFeatureOptions pf;
    pf.root_reduction = options.root_reduction;
    Representation per_feature = build_per_feature(cf, pf);
    std::vector<Tuple> rows = evaluate(compile_query(per_feature, ConfigTask{}));
    std::sort(rows.begin(), rows.end(), std::greater<>());
    for (const Tuple& r : rows) table->insert(r);
  }
  repr.tables.push_back(std::move(table));
  return repr;
}

Representation build_per_constraint(const ConstraintSet& cf, const PerConstraintOptions& options) {
  const FeatureModel& fm = cf.model();
  Representation repr;
  repr.kind = ReprKind::kPerConstraint;
  repr.model = fm;
  repr.attr_of_feature.resize(fm.size());

  struct Local {
    TableSchema schema;
    std::vector<Tuple> rows;
  };
  std::vector<Local> locals;
  std::unordered_set<std::string> names;
  std::vector<bool> covered(fm.size(), false);

  for (const Formula& f : cf.formulas()) {
    const std::vector<std::size_t> scope = f.expr.features();
    if (scope.size() > options.max_scope)
      throw CapacityError("constraint " + f.label + " spans " + std::to_string(scope.size()) +
                          " features, above the local table limit of " + std::to_string(options.max_scope));
    Local local;
    for (std::size_t k = 0; k < scope.size(); ++k) {
      if (k) local.schema.name += '-';
      local.schema.name += fm.feature(scope[k]).id;
      local.schema.attributes.push_back(fm.feature(scope[k]).id);
      covered[scope[k]] = true;
    }
    if (scope.empty()) local.schema.name = f.label;
    if (!names.insert(local.schema.name).second) {
      local.schema.name += "#" + f.label;
      names.insert(local.schema.name);
    }

    // Attribute j is kernel variable j; descending indices make the first
    // attribute vary fastest with 1 before 0.
    std::vector<std::uint32_t> var(fm.size(), 0);
    for (std::size_t k = 0; k < scope.size(); ++k) var[scope[k]] = static_cast<std::uint32_t>(k);
    const Expr* e = &f.expr;
    const kernels::Program prog = compile_conjunction(std::span<const Expr* const>(&e, 1), var);
    const std::vector<std::uint64_t> bits = kernels::scan_space(prog, static_cast<unsigned>(scope.size()));
    Tuple row(scope.size());
    for (std::uint64_t i = std::uint64_t{1} << scope.size(); i-- > 0;) {
      if (!((bits[i / 64] >> (i % 64)) & 1)) continue;
      for (std::size_t k = 0; k < scope.size(); ++k) row[k] = static_cast<Value>((i >> k) & 1);
      local.rows.push_back(row);
    }
    locals.push_back(std::move(local));
  }
  for (std::size_t i = 0; i < fm.size(); ++i) {
    if (covered[i]) continue;
    const std::string& id = fm.feature(i).id;
    locals.push_back({TableSchema{id, {id}}, {{1}, {0}}});
  }

  if (options.prune_pairwise) {
    repr.optimizations_applied.insert(Optimization::kPairwisePruning);
    // Semi-join filtering between every pair of tables sharing attributes,
    // repeated until no table changes.
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t a = 0; a < locals.size(); ++a) {
        for (std::size_t b = 0; b < locals.size(); ++b) {
          if (a == b) continue;
          std::vector<std::pair<std::size_t, std::size_t>> shared;
          for (std::size_t ca = 0; ca < locals[a].schema.attributes.size(); ++ca)
            if (auto cb = locals[b].schema.find(locals[a].schema.attributes[ca])) shared.emplace_back(ca, *cb);
          if (shared.empty()) continue;
          std::unordered_set<std::string> keys;
          for (const Tuple& r : locals[b].rows) {
            std::string key;
            for (auto [ca, cb] : shared) key.push_back(static_cast<char>(r[cb]));
            keys.insert(std::move(key));
          }
          auto& rows = locals[a].rows;
          const std::size_t before = rows.size();
          rows.erase(std::remove_if(rows.begin(), rows.end(),
                                    [&](const Tuple& r) {
                                      std::string key;
                                      for (auto [ca, cb] : shared) key.push_back(static_cast<char>(r[ca]));
                                      return !keys.contains(key);
                                    }),
                     rows.end());
          if (rows.size() != before) changed = true;
        }
      }
    }
  }

  for (Local& local : locals) {
    auto t = std::make_shared<Table>(local.schema);
    for (const Tuple& r : local.rows) t->insert(r);
    for (const std::string& attr : local.schema.attributes) {
      auto& occurrences = repr.attr_of_feature[fm.index_of(attr)];
      AttrRef ref{local.schema.name, attr};
      if (!occurrences.empty()) repr.join_equalities.push_back({occurrences.front(), ref});
      occurrences.push_back(std::move(ref));
    }
    repr.tables.push_back(std::move(t));
  }
  return repr;
}

ConjunctiveQuery compile_query(const Representation& repr, const ConfigTask& task) {
  ConjunctiveQuery q;
  q.from = repr.tables;
  std::vector<Predicate> where;
  if (repr.kind == ReprKind::kPerFeature) where.push_back(repr.constraint_predicate);
  if (repr.kind == ReprKind::kPerConstraint)
    for (const Equality& e : repr.join_equalities) where.push_back(Predicate::join(e.lhs, e.rhs));
  for (const Binding& b : resolve(repr.model, task.cr))
    where.push_back(Predicate::eq(repr.attr_of_feature.at(b.feature).front(), b.value));
  q.where = Predicate::all(std::move(where));
  if (task.projection.empty()) {
    q.select = full_projection(repr);
  } else {
    for (const std::string& id : task.projection)
      q.select.push_back(repr.attr_of_feature.at(repr.model.index_of(id)).front());
  }
  q.limit = task.limit;
  return q;
}

std::optional<Configuration> solve(const Representation& repr, const ConfigTask& task, EvalStats* stats) {
  ConfigTask full{task.cr, {}, 1};
  std::vector<Tuple> rows = evaluate(compile_query(repr, full), stats);
  if (rows.empty()) return std::nullopt;
  return to_config(rows.front());
}

std::uint64_t count(const Representation& repr, const ConfigTask& task, std::optional<std::uint64_t> cap) {
  return count_results(compile_query(repr, ConfigTask{task.cr, {}, std::nullopt}), cap);
}

void enumerate(const Representation& repr, const ConfigTask& task,
               const std::function<bool(const Configuration&)>& visit) {
  ConjunctiveQuery q = compile_query(repr, ConfigTask{task.cr, {}, task.limit});
  evaluate_stream(q, [&](const Tuple& t) { return visit(to_config(t)); });
}

}  // namespace fmcq
