#include "fmcq/table.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include "fmcq/error.hpp"
#include "fmcq/kernels.hpp"

namespace fmcq {

std::optional<std::size_t> TableSchema::find(std::string_view attribute) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i] == attribute) return i;
  return std::nullopt;
}

Table::Table(TableSchema schema) : schema_(std::move(schema)) {
  std::unordered_set<std::string> seen;
  for (const std::string& a : schema_.attributes)
    if (!seen.insert(a).second) throw QueryError("duplicate attribute '" + a + "' in table " + schema_.name);
}

Table::Table(TableSchema schema, std::initializer_list<std::initializer_list<int>> rows) : Table(std::move(schema)) {
  for (const auto& r : rows) {
    Tuple t;
    for (int v : r) t.push_back(static_cast<Value>(v));
    insert(t);
  }
}

bool Table::insert(std::span<const Value> row) {
  if (row.size() != arity())
    throw QueryError("row arity " + std::to_string(row.size()) + " does not match table " + name());
  for (Value v : row)
    if (v > 1) throw QueryError("table values must be 0 or 1");
  std::string key(row.begin(), row.end());
  if (!keys_.insert(std::move(key)).second) return false;
  if (arity() == 0) ++rows_without_columns_;
  cells_.insert(cells_.end(), row.begin(), row.end());
  return true;
}

std::vector<Tuple> Table::rows() const {
  std::vector<Tuple> out;
  out.reserve(size());
  for (std::size_t r = 0; r < size(); ++r) out.emplace_back(row(r).begin(), row(r).end());
  return out;
}

std::vector<std::uint64_t> Table::packed_column(std::size_t c) const {
  std::vector<std::uint64_t> bits((size() + 63) / 64, 0);
  for (std::size_t r = 0; r < size(); ++r)
    if (at(r, c)) bits[r / 64] |= std::uint64_t{1} << (r % 64);
  return bits;
}

AttrRef AttrRef::parse(std::string_view qualified) {
  const auto dot = qualified.rfind('.');
  if (dot == std::string_view::npos) return {"", std::string(qualified)};
  return {std::string(qualified.substr(0, dot)), std::string(qualified.substr(dot + 1))};
}

Predicate Predicate::constant(bool value) {
  Predicate p;
  p.kind_ = value ? Kind::kTrue : Kind::kFalse;
  return p;
}

Predicate Predicate::eq(AttrRef attr, Value value) {
  Predicate p;
  p.kind_ = Kind::kEq;
  p.lhs_ = std::move(attr);
  p.value_ = value;
  return p;
}

Predicate Predicate::join(AttrRef lhs, AttrRef rhs) {
  Predicate p;
  p.kind_ = Kind::kJoin;
  p.lhs_ = std::move(lhs);
  p.rhs_ = std::move(rhs);
  return p;
}

Predicate Predicate::negate(Predicate op) {
  Predicate p;
  p.kind_ = Kind::kNot;
  p.operands_.push_back(std::move(op));
  return p;
}

Predicate Predicate::all(std::vector<Predicate> ps) {
  if (ps.empty()) return constant(true);
  if (ps.size() == 1) return std::move(ps.front());
  Predicate p;
  p.kind_ = Kind::kAnd;
  p.operands_ = std::move(ps);
  return p;
}

Predicate Predicate::any(std::vector<Predicate> ps) {
  if (ps.empty()) return constant(false);
  if (ps.size() == 1) return std::move(ps.front());
  Predicate p;
  p.kind_ = Kind::kOr;
  p.operands_ = std::move(ps);
  return p;
}

std::vector<Predicate> Predicate::conjuncts() const {
  std::vector<Predicate> out;
  std::function<void(const Predicate&)> walk = [&](const Predicate& p) {
    if (p.kind_ == Kind::kTrue) return;
    if (p.kind_ == Kind::kAnd) {
      for (const Predicate& op : p.operands_) walk(op);
      return;
    }
    out.push_back(p);
  };
  walk(*this);
  return out;
}

std::vector<AttrRef> Predicate::attributes() const {
  std::vector<AttrRef> out;
  std::function<void(const Predicate&)> walk = [&](const Predicate& p) {
    auto add = [&](const AttrRef& a) {
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    };
    if (p.kind_ == Kind::kEq) add(p.lhs_);
    if (p.kind_ == Kind::kJoin) {
      add(p.lhs_);
      add(p.rhs_);
    }
    for (const Predicate& op : p.operands_) walk(op);
  };
  walk(*this);
  return out;
}

namespace {

std::size_t column_of(const Table& t, const AttrRef& a) {
  if (!a.table.empty() && a.table != t.name())
    throw QueryError("attribute '" + a.qualified() + "' does not belong to table " + t.name());
  auto c = t.schema().find(a.attribute);
  if (!c) throw QueryError("unknown attribute '" + a.qualified() + "' in table " + t.name());
  return *c;
}

void compile_predicate(const Predicate& p, const Table& t, kernels::Program& out) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::kTrue: out.push_const(true); return;
    case K::kFalse: out.push_const(false); return;
    case K::kEq: out.push_var(static_cast<std::uint32_t>(column_of(t, p.lhs())), p.value() == 0); return;
    case K::kJoin: {
      const auto a = static_cast<std::uint32_t>(column_of(t, p.lhs()));
      const auto b = static_cast<std::uint32_t>(column_of(t, p.rhs()));
      out.push_var(a);
      out.push_var(b);
      out.conjoin(2);
      out.push_var(a, true);
      out.push_var(b, true);
      out.conjoin(2);
      out.disjoin(2);
      return;
    }
    case K::kNot:
      compile_predicate(p.operands().front(), t, out);
      out.negate();
      return;
    case K::kAnd:
    case K::kOr:
      for (const Predicate& op : p.operands()) compile_predicate(op, t, out);
      if (p.kind() == K::kAnd)
        out.conjoin(static_cast<std::uint32_t>(p.operands().size()));
      else
        out.disjoin(static_cast<std::uint32_t>(p.operands().size()));
      return;
  }
}

}  // namespace

std::vector<std::uint32_t> matching_rows(const Table& t, const Predicate& p) {
  kernels::Program prog;
  compile_predicate(p, t, prog);
  prog.finish();
  std::vector<std::uint32_t> out;
  if (t.empty()) return out;

  std::vector<std::vector<std::uint64_t>> columns;
  std::vector<const std::uint64_t*> ptrs;
  columns.reserve(prog.num_vars());
  for (std::size_t c = 0; c < prog.num_vars(); ++c) columns.push_back(t.packed_column(c));
  for (const auto& col : columns) ptrs.push_back(col.data());
  const std::size_t nwords = (t.size() + 63) / 64;
  std::vector<std::uint64_t> mask(nwords);
  kernels::eval_columns(prog, ptrs, nwords, mask.data());
  for (std::size_t r = 0; r < t.size(); ++r)
    if ((mask[r / 64] >> (r % 64)) & 1) out.push_back(static_cast<std::uint32_t>(r));
  return out;
}

Table select(const Table& t, const Predicate& p) {
  Table out(t.schema());
  for (std::uint32_t r : matching_rows(t, p)) out.insert(t.row(r));
  return out;
}

Table project(const Table& t, std::span<const std::string> attrs) {
  std::vector<std::size_t> cols;
  TableSchema schema{t.name(), {}};
  for (const std::string& a : attrs) {
    cols.push_back(column_of(t, AttrRef::parse(a)));
    schema.attributes.push_back(AttrRef::parse(a).attribute);
  }
  Table out(std::move(schema));
  Tuple buf(cols.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) buf[k] = t.at(r, cols[k]);
    out.insert(buf);
  }
  return out;
}

Table join(std::span<const Table* const> ts, std::span<const Equality> equalities) {
  std::unordered_map<std::string, std::size_t> by_name;
  TableSchema schema{"join", {}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!by_name.emplace(ts[i]->name(), i).second) throw QueryError("ambiguous table '" + ts[i]->name() + "'");
    for (std::size_t c = 0; c < ts[i]->arity(); ++c) schema.attributes.push_back(ts[i]->schema().qualified(c));
  }
  struct Resolved {
    std::size_t lt, lc, rt, rc;
  };
  std::vector<Resolved> eqs;
  auto resolve = [&](const AttrRef& a) {
    auto it = by_name.find(a.table);
    if (it == by_name.end()) throw QueryError("unresolved attribute '" + a.qualified() + "'");
    return std::pair{it->second, column_of(*ts[it->second], a)};
  };
  for (const Equality& e : equalities) {
    auto [lt, lc] = resolve(e.lhs);
    auto [rt, rc] = resolve(e.rhs);
    if (lt == rt) throw QueryError("join equality must reference two distinct tables");
    eqs.push_back({lt, lc, rt, rc});
  }

  Table out(std::move(schema));
  std::vector<std::size_t> cur(ts.size());
  Tuple buf;
  std::function<void(std::size_t)> loop = [&](std::size_t level) {
    if (level == ts.size()) {
      buf.clear();
      for (std::size_t i = 0; i < ts.size(); ++i) {
        auto r = ts[i]->row(cur[i]);
        buf.insert(buf.end(), r.begin(), r.end());
      }
      out.insert(buf);
      return;
    }
    for (std::size_t r = 0; r < ts[level]->size(); ++r) {
      cur[level] = r;
      bool ok = true;
      for (const Resolved& e : eqs) {
        if (std::max(e.lt, e.rt) != level) continue;
        if (ts[e.lt]->at(cur[e.lt], e.lc) != ts[e.rt]->at(cur[e.rt], e.rc)) {
          ok = false;
          break;
        }
      }
      if (ok) loop(level + 1);
    }
  };
  loop(0);
  return out;
}

}  // namespace fmcq
