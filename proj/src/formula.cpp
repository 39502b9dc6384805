#include "fmcq/formula.hpp"

#include <algorithm>
#include <sstream>

#include "fmcq/error.hpp"

namespace fmcq {

Expr Expr::constant(bool value) {
  Expr e;
  e.kind_ = value ? Kind::kTrue : Kind::kFalse;
  return e;
}

Expr Expr::atom(std::size_t feature, Value value) {
  Expr e;
  e.kind_ = Kind::kAtom;
  e.feature_ = feature;
  e.value_ = value;
  return e;
}

Expr Expr::negate(Expr operand) {
  Expr e;
  e.kind_ = Kind::kNot;
  e.operands_.push_back(std::move(operand));
  return e;
}

Expr Expr::all(std::vector<Expr> operands) {
  if (operands.empty()) return constant(true);
  if (operands.size() == 1) return std::move(operands.front());
  Expr e;
  e.kind_ = Kind::kAnd;
  e.operands_ = std::move(operands);
  return e;
}

Expr Expr::any(std::vector<Expr> operands) {
  if (operands.empty()) return constant(false);
  if (operands.size() == 1) return std::move(operands.front());
  Expr e;
  e.kind_ = Kind::kOr;
  e.operands_ = std::move(operands);
  return e;
}

std::vector<std::size_t> Expr::features() const {
  std::vector<std::size_t> out;
  std::vector<const Expr*> stack{this};
  while (!stack.empty()) {
    const Expr* e = stack.back();
    stack.pop_back();
    if (e->kind_ == Kind::kAtom) out.push_back(e->feature_);
    for (const Expr& op : e->operands_) stack.push_back(&op);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Expr::eval(std::span<const Value> conf) const {
  switch (kind_) {
    case Kind::kTrue: return true;
    case Kind::kFalse: return false;
    case Kind::kAtom: return conf[feature_] == value_;
    case Kind::kNot: return !operands_.front().eval(conf);
    case Kind::kAnd:
      return std::all_of(operands_.begin(), operands_.end(), [&](const Expr& e) { return e.eval(conf); });
    case Kind::kOr:
      return std::any_of(operands_.begin(), operands_.end(), [&](const Expr& e) { return e.eval(conf); });
  }
  return false;
}

Expr::Truth Expr::eval_partial(std::span<const std::int8_t> partial) const {
  switch (kind_) {
    case Kind::kTrue: return Truth::kTrue;
    case Kind::kFalse: return Truth::kFalse;
    case Kind::kAtom: {
      const std::int8_t v = partial[feature_];
      if (v == kUnbound) return Truth::kUnknown;
      return v == static_cast<std::int8_t>(value_) ? Truth::kTrue : Truth::kFalse;
    }
    case Kind::kNot: {
      const Truth t = operands_.front().eval_partial(partial);
      if (t == Truth::kUnknown) return t;
      return t == Truth::kTrue ? Truth::kFalse : Truth::kTrue;
    }
    case Kind::kAnd: {
      Truth acc = Truth::kTrue;
      for (const Expr& op : operands_) {
        const Truth t = op.eval_partial(partial);
        if (t == Truth::kFalse) return t;
        if (t == Truth::kUnknown) acc = t;
      }
      return acc;
    }
    case Kind::kOr: {
      Truth acc = Truth::kFalse;
      for (const Expr& op : operands_) {
        const Truth t = op.eval_partial(partial);
        if (t == Truth::kTrue) return t;
        if (t == Truth::kUnknown) acc = t;
      }
      return acc;
    }
  }
  return Truth::kUnknown;
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::kRoot: return "root";
    case Origin::kMandatory: return "mandatory";
    case Origin::kOptional: return "optional";
    case Origin::kAlternative: return "alternative";
    case Origin::kOr: return "or";
    case Origin::kRequires: return "requires";
    case Origin::kExcludes: return "excludes";
  }
  return "?";
}

const Formula& ConstraintSet::by_label(std::string_view label) const {
  for (const Formula& f : formulas_)
    if (f.label == label) return f;
  throw NotFound("no constraint labelled '" + std::string(label) + "'");
}

bool ConstraintSet::satisfied_by(std::span<const Value> conf) const {
  return std::all_of(formulas_.begin(), formulas_.end(), [&](const Formula& f) { return f.expr.eval(conf); });
}

std::string ConstraintSet::to_string() const {
  std::string out;
  for (const Formula& f : formulas_) {
    out += render(f, model_);
    out += '\n';
  }
  return out;
}

namespace {

Expr is(std::size_t f, Value v) { return Expr::atom(f, v); }

// (ci=1) <-> (p=1 & all others 0), written as two implications in the order
// (!ci=1 | (others=0 & p=1)) & (!(others=0 & p=1) | ci=1).
Expr alternative_member(std::size_t parent, const std::vector<std::size_t>& members, std::size_t i) {
  auto condition = [&] {
    std::vector<Expr> parts;
    for (std::size_t j = 0; j < members.size(); ++j)
      if (j != i) parts.push_back(is(members[j], 0));
    parts.push_back(is(parent, 1));
    return Expr::all(std::move(parts));
  };
  Expr forward = Expr::any({Expr::negate(is(members[i], 1)), condition()});
  Expr backward = Expr::any({Expr::negate(condition()), is(members[i], 1)});
  return Expr::all({std::move(forward), std::move(backward)});
}

}  // namespace

ConstraintSet translate(const FeatureModel& fm) {
  require_valid(fm);
  std::vector<Formula> out;
  auto emit = [&](Origin origin, Expr e) {
    out.push_back({"c_" + std::to_string(out.size()), origin, std::move(e)});
  };

  emit(Origin::kRoot, is(fm.root_index(), 1));

  for (std::size_t c = 0; c < fm.size(); ++c) {
    const Feature& f = fm.feature(c);
    if (f.decomposition != Decomposition::kMandatory && f.decomposition != Decomposition::kOptional) continue;
    const std::size_t p = *fm.parent_index(c);
    if (f.decomposition == Decomposition::kMandatory) {
      emit(Origin::kMandatory,
           Expr::any({Expr::all({is(p, 1), is(c, 1)}), Expr::all({is(p, 0), is(c, 0)})}));
    } else {
      emit(Origin::kOptional, Expr::any({Expr::negate(is(c, 1)), is(p, 1)}));
    }
  }

  auto members_of = [&](const Group& g) {
    std::vector<std::size_t> m;
    for (const std::string& id : g.members) m.push_back(fm.index_of(id));
    return m;
  };

  for (const Group& g : fm.groups()) {
    if (g.kind != GroupKind::kOr) continue;
    const std::size_t p = fm.index_of(g.parent);
    const std::vector<std::size_t> members = members_of(g);
    std::vector<Expr> some, none{is(p, 0)};
    for (std::size_t m : members) {
      some.push_back(is(m, 1));
      none.push_back(is(m, 0));
    }
    emit(Origin::kOr, Expr::any({Expr::all({is(p, 1), Expr::any(std::move(some))}), Expr::all(std::move(none))}));
  }

  for (const Group& g : fm.groups()) {
    if (g.kind != GroupKind::kAlternative) continue;
    const std::size_t p = fm.index_of(g.parent);
    const std::vector<std::size_t> members = members_of(g);
    std::vector<Expr> parts;
    for (std::size_t i = 0; i < members.size(); ++i) parts.push_back(alternative_member(p, members, i));
    emit(Origin::kAlternative, Expr::all(std::move(parts)));
  }

  for (const CrossTreeConstraint& ctc : fm.ctcs()) {
    const std::size_t a = fm.index_of(ctc.lhs);
    const std::size_t b = fm.index_of(ctc.rhs);
    if (ctc.kind == CtcKind::kRequires)
      emit(Origin::kRequires, Expr::any({Expr::negate(is(a, 1)), is(b, 1)}));
    else
      emit(Origin::kExcludes, Expr::any({Expr::negate(is(a, 1)), Expr::negate(is(b, 1))}));
  }
  return ConstraintSet(fm, std::move(out));
}

namespace {

void render_into(const Expr& e, const FeatureModel& fm, std::ostringstream& os, bool nested) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::kTrue: os << "true"; return;
    case K::kFalse: os << "false"; return;
    case K::kAtom: os << fm.feature(e.feature()).id << '=' << int(e.value()); return;
    case K::kNot:
      os << "!(";
      render_into(e.operands().front(), fm, os, false);
      os << ')';
      return;
    case K::kAnd:
    case K::kOr: {
      const char* sep = e.kind() == K::kAnd ? " & " : " | ";
      if (nested) os << '(';
      for (std::size_t i = 0; i < e.operands().size(); ++i) {
        if (i) os << sep;
        render_into(e.operands()[i], fm, os, true);
      }
      if (nested) os << ')';
      return;
    }
  }
}

}  // namespace

std::string render(const Expr& e, const FeatureModel& fm) {
  std::ostringstream os;
  render_into(e, fm, os, false);
  return os.str();
}

std::string render(const Formula& f, const FeatureModel& fm) { return f.label + ": " + render(f.expr, fm); }

bool eval_formula(const FeatureModel& fm, const Formula& f, const Assignment& a) {
  std::vector<Value> conf(fm.size(), 0);
  for (std::size_t i : f.expr.features()) {
    auto v = a.get(fm.feature(i).id);
    if (!v) throw Error("unbound feature '" + fm.feature(i).id + "' in " + f.label);
    conf[i] = *v;
  }
  return f.expr.eval(conf);
}

void compile_into(const Expr& e, std::span<const std::uint32_t> var_of_feature, kernels::Program& out) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::kTrue: out.push_const(true); return;
    case K::kFalse: out.push_const(false); return;
    case K::kAtom: out.push_var(var_of_feature[e.feature()], e.value() == 0); return;
    case K::kNot:
      compile_into(e.operands().front(), var_of_feature, out);
      out.negate();
      return;
    case K::kAnd:
    case K::kOr:
      for (const Expr& op : e.operands()) compile_into(op, var_of_feature, out);
      if (e.kind() == K::kAnd)
        out.conjoin(static_cast<std::uint32_t>(e.operands().size()));
      else
        out.disjoin(static_cast<std::uint32_t>(e.operands().size()));
      return;
  }
}

kernels::Program compile_conjunction(std::span<const Expr* const> exprs,
                                     std::span<const std::uint32_t> var_of_feature) {
  kernels::Program p;
  for (const Expr* e : exprs) compile_into(*e, var_of_feature, p);
  p.conjoin(static_cast<std::uint32_t>(exprs.size()));
  p.finish();
  return p;
}

}  // namespace fmcq
