#include "support.hpp"

#include <set>

#include "fmcq/error.hpp"

namespace fmcq::testing {

FeatureModel survey_model() {
  return ModelBuilder()
      .root("s")
      .mandatory("p", "s")
      .alternative("p", {"l", "n"})
      .optional("t", "s")
      .optional("st", "s")
      .mandatory("q", "s")
      .or_group("q", {"m", "mm"})
      .excludes("t", "n")
      .require("t", "st")
      .build();
}

std::vector<SurveyPredicate> survey_predicates() {
  enum { s, p, l, n, t, st, q, m, mm };
  using V = const std::vector<Value>&;
  return {
      [](V x) { return x[s] == 1; },
      [](V x) { return (x[s] == 1 && x[p] == 1) || (x[s] == 0 && x[p] == 0); },
      [](V x) { return !(x[t] == 1) || x[s] == 1; },
      [](V x) { return !(x[st] == 1) || x[s] == 1; },
      [](V x) { return (x[s] == 1 && x[q] == 1) || (x[s] == 0 && x[q] == 0); },
      [](V x) { return (x[q] == 1 && (x[m] == 1 || x[mm] == 1)) || (x[q] == 0 && x[m] == 0 && x[mm] == 0); },
      [](V x) {
        return ((!(x[l] == 1) || (x[n] == 0 && x[p] == 1)) && (!(x[n] == 0 && x[p] == 1) || x[l] == 1)) &&
               ((!(x[n] == 1) || (x[l] == 0 && x[p] == 1)) && (!(x[l] == 0 && x[p] == 1) || x[n] == 1));
      },
      [](V x) { return !(x[t] == 1) || !(x[n] == 1); },
      [](V x) { return !(x[t] == 1) || x[st] == 1; },
  };
}

bool textbook_valid(const FeatureModel& fm, const std::vector<Value>& conf) {
  if (conf[fm.root_index()] != 1) return false;
  for (std::size_t i = 0; i < fm.size(); ++i) {
    const Feature& f = fm.feature(i);
    if (!f.parent) continue;
    const Value parent = conf[fm.index_of(*f.parent)];
    if (conf[i] && !parent) return false;
    if (f.decomposition == Decomposition::kMandatory && parent && !conf[i]) return false;
  }
  for (const Group& g : fm.groups()) {
    if (!conf[fm.index_of(g.parent)]) continue;
    std::size_t on = 0;
    for (const std::string& m : g.members) on += conf[fm.index_of(m)];
    if (g.kind == GroupKind::kAlternative ? on != 1 : on == 0) return false;
  }
  for (const CrossTreeConstraint& c : fm.ctcs()) {
    const Value a = conf[fm.index_of(c.lhs)], b = conf[fm.index_of(c.rhs)];
    if (c.kind == CtcKind::kRequires && a && !b) return false;
    if (c.kind == CtcKind::kExcludes && a && b) return false;
  }
  return true;
}

std::vector<Configuration> textbook_enumerate(const FeatureModel& fm, const Requirements& cr) {
  const auto bindings = resolve(fm, cr);
  const std::size_t n = fm.size();
  std::vector<Configuration> out;
  std::vector<Value> conf(n);
  for (std::uint64_t i = std::uint64_t{1} << n; i-- > 0;) {
    for (std::size_t k = 0; k < n; ++k) conf[k] = static_cast<Value>((i >> (n - 1 - k)) & 1);
    Configuration c{conf};
    if (textbook_valid(fm, conf) && satisfies(c, bindings)) out.push_back(std::move(c));
  }
  return out;
}

Requirements random_requirements(const FeatureModel& fm, Rng& rng, std::size_t max_bound) {
  Requirements cr;
  const std::size_t k = rng.below(std::min(max_bound, fm.size()) + 1);
  for (std::size_t j = 0; j < k; ++j) cr.set(fm.feature(rng.below(fm.size())).id, rng.coin() ? 1 : 0);
  return cr;
}

namespace {

struct Flat {
  std::vector<std::string> names;  // qualified
  std::size_t index(const AttrRef& a) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == a.qualified()) return i;
    throw QueryError("unresolved attribute '" + a.qualified() + "'");
  }
};

bool eval(const Predicate& p, const Flat& f, const Tuple& row) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::kTrue: return true;
    case K::kFalse: return false;
    case K::kEq: return row[f.index(p.lhs())] == p.value();
    case K::kJoin: return row[f.index(p.lhs())] == row[f.index(p.rhs())];
    case K::kNot: return !eval(p.operands()[0], f, row);
    case K::kAnd:
      for (const auto& op : p.operands())
        if (!eval(op, f, row)) return false;
      return true;
    case K::kOr:
      for (const auto& op : p.operands())
        if (eval(op, f, row)) return true;
      return false;
  }
  return false;
}

}  // namespace

std::vector<Tuple> naive_evaluate(const ConjunctiveQuery& q) {
  Flat flat;
  std::vector<Tuple> product{{}};
  for (const auto& t : q.from) {
    for (std::size_t c = 0; c < t->arity(); ++c) flat.names.push_back(t->schema().qualified(c));
    std::vector<Tuple> next;
    for (const Tuple& prefix : product)
      for (std::size_t r = 0; r < t->size(); ++r) {
        Tuple row = prefix;
        auto cells = t->row(r);
        row.insert(row.end(), cells.begin(), cells.end());
        next.push_back(std::move(row));
      }
    product = std::move(next);
  }
  std::vector<std::size_t> cols;
  for (const AttrRef& a : q.select) cols.push_back(flat.index(a));
  std::vector<Tuple> out;
  std::set<Tuple> seen;
  for (const Tuple& row : product) {
    if (q.limit && out.size() >= *q.limit) break;
    if (!eval(q.where, flat, row)) continue;
    Tuple proj;
    for (std::size_t c : cols) proj.push_back(row[c]);
    if (!seen.insert(proj).second) continue;
    out.push_back(std::move(proj));
  }
  return out;
}

ConjunctiveQuery random_query(Rng& rng) {
  ConjunctiveQuery q;
  const std::size_t ntables = 1 + rng.below(4);
  std::vector<AttrRef> attrs;
  std::size_t product = 1;
  for (std::size_t t = 0; t < ntables; ++t) {
    TableSchema schema{"t" + std::to_string(t), {}};
    const std::size_t arity = 1 + rng.below(4);
    for (std::size_t a = 0; a < arity; ++a) schema.attributes.push_back("a" + std::to_string(a));
    auto table = std::make_shared<Table>(schema);
    // Keep the product within 2^16.
    const std::size_t cap = std::min<std::size_t>(std::size_t{1} << arity, (std::size_t{1} << 16) / product);
    Tuple row(arity);
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << arity); ++i) {
      if (table->size() >= cap || rng.below(4) == 0) continue;
      for (std::size_t a = 0; a < arity; ++a) row[a] = static_cast<Value>((i >> a) & 1);
      table->insert(row);
    }
    product *= std::max<std::size_t>(table->size(), 1);
    for (const auto& a : schema.attributes) attrs.push_back({schema.name, a});
    q.from.push_back(std::move(table));
  }
  std::function<Predicate(int)> term = [&](int depth) -> Predicate {
    const auto pick = rng.below(depth > 0 ? 6 : 3);
    const AttrRef& a = attrs[rng.below(attrs.size())];
    switch (pick) {
      case 0: return Predicate::eq(a, rng.coin());
      case 1: return Predicate::join(a, attrs[rng.below(attrs.size())]);
      case 2: return Predicate::eq(a, rng.coin());
      case 3: return Predicate::negate(term(depth - 1));
      case 4: return Predicate::all({term(depth - 1), term(depth - 1)});
      default: return Predicate::any({term(depth - 1), term(depth - 1)});
    }
  };
  std::vector<Predicate> conj;
  const std::size_t nconj = rng.below(5);
  for (std::size_t k = 0; k < nconj; ++k) conj.push_back(term(2));
  q.where = Predicate::all(std::move(conj));
  for (const AttrRef& a : attrs)
    if (rng.below(3) != 0) q.select.push_back(a);
  if (rng.below(4) == 0) q.limit = rng.below(5);
  return q;
}

}  // namespace fmcq::testing
