#include "fmcq/query.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <tuple>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fmcq/error.hpp"

namespace fmcq {

namespace {

struct Column {
  std::uint32_t table;
  std::uint32_t col;
};

// Predicate with attributes resolved to (table, column) positions.
struct Node {
  Predicate::Kind kind;
  Column lhs{};
  Column rhs{};
  Value value = 0;
  std::vector<Node> operands;
};

class Plan {
 public:
  explicit Plan(const ConjunctiveQuery& q) : q_(q) {
    for (std::size_t i = 0; i < q.from.size(); ++i) {
      if (!q.from[i]) throw QueryError("null table in FROM list");
      if (!by_name_.emplace(q.from[i]->name(), i).second)
        throw QueryError("ambiguous table '" + q.from[i]->name() + "' in FROM list");
    }
    for (const AttrRef& a : q.select) select_.push_back(resolve(a));

    const std::size_t n = q.from.size();
    candidates_.resize(n);
    std::vector<std::vector<Predicate>> local(n);
    struct Multi {
      Node node;
      std::vector<std::size_t> tables;
    };
    std::vector<Multi> multi;

    for (const Predicate& c : q.where.conjuncts()) {
      std::vector<std::size_t> tables;
      for (const AttrRef& a : c.attributes()) tables.push_back(resolve(a).table);
      std::sort(tables.begin(), tables.end());
      tables.erase(std::unique(tables.begin(), tables.end()), tables.end());
      if (tables.empty()) {
        Node node = build(c);
        if (!eval(node, {})) unsatisfiable_ = true;
      } else if (tables.size() == 1) {
        local[tables.front()].push_back(c);
      } else {
        multi.push_back({build(c), std::move(tables)});
      }
      if (c.kind() == Predicate::Kind::kJoin) joins_.emplace_back(resolve(c.lhs()), resolve(c.rhs()));
      if (c.kind() == Predicate::Kind::kEq) fixed_.push_back(resolve(c.lhs()));
    }

    for (std::size_t t = 0; t < n; ++t) {
      if (local[t].empty()) {
        candidates_[t].resize(q.from[t]->size());
        std::iota(candidates_[t].begin(), candidates_[t].end(), 0u);
      } else {
        candidates_[t] = matching_rows(*q.from[t], Predicate::all(local[t]));
      }
      if (candidates_[t].empty()) unsatisfiable_ = true;
    }

    // Greedy connectivity order: most single-table atoms first, then the table
    // completing the most conjuncts, then sharing the most, then FROM order.
    std::vector<bool> chosen(n, false);
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t best = n;
      std::tuple<std::size_t, std::size_t, std::size_t> best_score{};
      for (std::size_t t = 0; t < n; ++t) {
        if (chosen[t]) continue;
        std::size_t completes = 0, shares = 0;
        for (const Multi& m : multi) {
          if (!std::binary_search(m.tables.begin(), m.tables.end(), t)) continue;
          std::size_t bound = 0;
          for (std::size_t u : m.tables) bound += chosen[u] ? 1 : 0;
          if (bound > 0) ++shares;
          if (bound + 1 == m.tables.size()) ++completes;
        }
        auto score = step == 0 ? std::tuple{local[t].size(), std::size_t{0}, std::size_t{0}}
                               : std::tuple{completes, shares, local[t].size()};
        if (best == n || score > best_score) {
          best = t;
          best_score = score;
        }
      }
      chosen[best] = true;
      order_.push_back(best);
    }

    std::vector<std::size_t> level_of(n);
    for (std::size_t l = 0; l < n; ++l) level_of[order_[l]] = l;
    checks_.resize(n);
    check_levels_.resize(n);
    for (Multi& m : multi) {
      std::size_t level = 0;
      for (std::size_t t : m.tables) level = std::max(level, level_of[t]);
      std::vector<std::size_t> others;
      for (std::size_t t : m.tables)
        if (level_of[t] != level) others.push_back(level_of[t]);
      checks_[level].push_back(std::move(m.node));
      check_levels_[level].push_back(std::move(others));
    }
    words_ = (n + 63) / 64;
    injective_ = projection_injective();
  }

  void run(const std::function<bool(const Tuple&)>& visit, std::optional<std::uint64_t> limit, EvalStats* stats) {
    EvalStats local_stats;
    EvalStats& st = stats ? *stats : local_stats;
    st = EvalStats{};
    st.join_order = order_;
    if (unsatisfiable_ || (limit && *limit == 0)) return;
    cur_.assign(q_.from.size(), 0);
    visit_ = &visit;
    limit_ = limit;
    stats_ = &st;
    stop_ = false;
    if (q_.from.empty()) {
      emit();
      return;
    }
    descend(0);
  }

 private:
  Column resolve(const AttrRef& a) {
    auto it = by_name_.find(a.table);
    if (it == by_name_.end()) throw QueryError("unresolved attribute '" + a.qualified() + "'");
    auto col = q_.from[it->second]->schema().find(a.attribute);
    if (!col) throw QueryError("unresolved attribute '" + a.qualified() + "'");
    return {static_cast<std::uint32_t>(it->second), static_cast<std::uint32_t>(*col)};
  }

  Node build(const Predicate& p) {
    Node n;
    n.kind = p.kind();
    if (p.kind() == Predicate::Kind::kEq || p.kind() == Predicate::Kind::kJoin) n.lhs = resolve(p.lhs());
    if (p.kind() == Predicate::Kind::kJoin) n.rhs = resolve(p.rhs());
    n.value = p.value();
    for (const Predicate& op : p.operands()) n.operands.push_back(build(op));
    return n;
  }

  Value value_at(Column c, std::span<const std::uint32_t> cur) const {
    return q_.from[c.table]->at(cur[c.table], c.col);
  }

  bool eval(const Node& n, std::span<const std::uint32_t> cur) const {
    using K = Predicate::Kind;
    switch (n.kind) {
      case K::kTrue: return true;
      case K::kFalse: return false;
      case K::kEq: return value_at(n.lhs, cur) == n.value;
      case K::kJoin: return value_at(n.lhs, cur) == value_at(n.rhs, cur);
      case K::kNot: return !eval(n.operands.front(), cur);
      case K::kAnd:
        return std::all_of(n.operands.begin(), n.operands.end(), [&](const Node& o) { return eval(o, cur); });
      case K::kOr:
        return std::any_of(n.operands.begin(), n.operands.end(), [&](const Node& o) { return eval(o, cur); });
    }
    return false;
  }

  // Distinct bindings map to distinct tuples when every column is selected,
  // equated to a selected column, or fixed by an atom.
  bool projection_injective() const {
    std::vector<std::size_t> base(q_.from.size() + 1, 0);
    for (std::size_t t = 0; t < q_.from.size(); ++t) base[t + 1] = base[t] + q_.from[t]->arity();
    std::vector<std::size_t> parent(base.back());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto id = [&](Column c) { return base[c.table] + c.col; };
    for (const auto& [a, b] : joins_) parent[find(id(a))] = find(id(b));
    std::unordered_set<std::size_t> covered;
    for (Column c : select_) covered.insert(find(id(c)));
    for (Column c : fixed_) covered.insert(find(id(c)));
    for (std::size_t t = 0; t < q_.from.size(); ++t) {
      if (candidates_[t].size() <= 1) continue;
      for (std::size_t c = 0; c < q_.from[t]->arity(); ++c)
        if (!covered.contains(find(base[t] + c))) return false;
    }
    return true;
  }

  bool emit() {
    tuple_.clear();
    for (Column c : select_) tuple_.push_back(value_at(c, cur_));
    if (!injective_) {
      std::string key(tuple_.begin(), tuple_.end());
      if (!seen_.insert(std::move(key)).second) return true;
      ++stats_->dedup_buffered;
    }
    ++stats_->emitted;
    if (!(*visit_)(tuple_)) return false;
    return !limit_ || stats_->emitted < *limit_;
  }

  // Levels whose bindings a dead end depends on, one bit per level.
  using Conflict = std::vector<std::uint64_t>;

  static void add(Conflict& c, std::size_t level) { c[level / 64] |= std::uint64_t{1} << (level % 64); }
  static bool has(const Conflict& c, std::size_t level) { return (c[level / 64] >> (level % 64)) & 1; }

  // Every level above `level`: a subtree that produced output may never be jumped over.
  Conflict all_above(std::size_t level) const {
    Conflict c(words_, 0);
    for (std::size_t l = 0; l < level; ++l) add(c, l);
    return c;
  }

  // Nested loops with conflict-directed backjumping: when no row at a level
  // survives and the failure does not involve the parent level, the parent's
  // remaining rows are skipped. Only solution-free subtrees are skipped, so
  // output and its order are unchanged. Sets stop_ when enumeration must end.
  Conflict descend(std::size_t level) {
    const std::size_t table = order_[level];
    stats_->peak_live_bindings = std::max(stats_->peak_live_bindings, level + 1);
    Conflict conflict(words_, 0);
    for (std::uint32_t row : candidates_[table]) {
      cur_[table] = row;
      ++stats_->bindings_tried;
      bool ok = true;
      for (std::size_t i = 0; i < checks_[level].size(); ++i) {
        ++stats_->conjunct_checks;
        if (!eval(checks_[level][i], cur_)) {
          for (std::size_t l : check_levels_[level][i]) add(conflict, l);
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      if (level + 1 == order_.size()) {
        if (!emit()) stop_ = true;
        conflict = all_above(level);
      } else {
        Conflict child = descend(level + 1);
        if (stop_) return child;
        if (!has(child, level)) return child;
        for (std::size_t w = 0; w < words_; ++w) conflict[w] |= child[w];
        conflict[level / 64] &= ~(std::uint64_t{1} << (level % 64));
      }
      if (stop_) return conflict;
    }
    return conflict;
  }

  const ConjunctiveQuery& q_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<Column> select_;
  std::vector<std::pair<Column, Column>> joins_;
  std::vector<Column> fixed_;
  std::vector<std::vector<std::uint32_t>> candidates_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<Node>> checks_;
  std::vector<std::vector<std::vector<std::size_t>>> check_levels_;
  std::size_t words_ = 0;
  bool unsatisfiable_ = false;
  bool injective_ = false;

  std::vector<std::uint32_t> cur_;
  Tuple tuple_;
  std::unordered_set<std::string> seen_;
  const std::function<bool(const Tuple&)>* visit_ = nullptr;
  std::optional<std::uint64_t> limit_;
  EvalStats* stats_ = nullptr;
  bool stop_ = false;
};

}  // namespace

void evaluate_stream(const ConjunctiveQuery& q, const std::function<bool(const Tuple&)>& visit, EvalStats* stats) {
  Plan(q).run(visit, q.limit, stats);
}

std::vector<Tuple> evaluate(const ConjunctiveQuery& q, EvalStats* stats) {
  std::vector<Tuple> out;
  evaluate_stream(
      q,
      [&](const Tuple& t) {
        out.push_back(t);
        return true;
      },
      stats);
  return out;
}

std::uint64_t count_results(const ConjunctiveQuery& q, std::optional<std::uint64_t> cap, EvalStats* stats) {
  std::uint64_t n = 0;
  Plan(q).run(
      [&](const Tuple&) {
        ++n;
        return true;
      },
      cap, stats);
  return n;
}

namespace {

std::string ident(const std::string& s) {
  const bool plain = !s.empty() && !std::isdigit(static_cast<unsigned char>(s[0])) &&
                     std::all_of(s.begin(), s.end(), [](char c) {
                       return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                     });
  if (plain) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string attr(const AttrRef& a) {
  return a.table.empty() ? ident(a.attribute) : ident(a.table) + "." + ident(a.attribute);
}

void render_into(const Predicate& p, std::ostringstream& os, bool nested) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::kTrue: os << "TRUE"; return;
    case K::kFalse: os << "FALSE"; return;
    case K::kEq: os << attr(p.lhs()) << " = " << int(p.value()); return;
    case K::kJoin: os << attr(p.lhs()) << " = " << attr(p.rhs()); return;
    case K::kNot:
      os << "NOT (";
      render_into(p.operands().front(), os, false);
      os << ')';
      return;
    case K::kAnd:
    case K::kOr: {
      const char* sep = p.kind() == K::kAnd ? " AND " : " OR ";
      if (nested) os << '(';
      for (std::size_t i = 0; i < p.operands().size(); ++i) {
        if (i) os << sep;
        render_into(p.operands()[i], os, true);
      }
      if (nested) os << ')';
      return;
    }
  }
}

}  // namespace

std::string render_sql(const Predicate& p) {
  std::ostringstream os;
  const std::vector<Predicate> cs = p.conjuncts();
  if (cs.empty()) return "TRUE";
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (i) os << " AND ";
    render_into(cs[i], os, cs.size() > 1);
  }
  return os.str();
}

std::string render_sql(const ConjunctiveQuery& q) {
  std::ostringstream os;
  os << "SELECT ";
  if (q.select.empty()) os << '1';
  for (std::size_t i = 0; i < q.select.size(); ++i) os << (i ? ", " : "") << attr(q.select[i]);
  os << " FROM ";
  for (std::size_t i = 0; i < q.from.size(); ++i) os << (i ? ", " : "") << ident(q.from[i]->name());
  if (!q.where.conjuncts().empty()) os << " WHERE " << render_sql(q.where);
  if (q.limit) os << " LIMIT " << *q.limit;
  return os.str();
}

}  // namespace fmcq
