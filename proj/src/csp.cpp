#include "fmcq/csp.hpp"

#include <array>
#include <string>

#include "fmcq/error.hpp"

namespace fmcq {

CspProblem make_csp(const ConstraintSet& cf, std::span<const Binding> cr) {
  CspProblem p;
  p.constraints = &cf;
  p.domains.assign(cf.model().size(), 0b11);
  for (const Binding& b : cr) p.domains.at(b.feature) &= static_cast<std::uint8_t>(1u << b.value);
  return p;
}

namespace {

// Set of decision variables, one bit per canonical index.
class Bits {
 public:
  explicit Bits(std::size_t n = 0, bool all = false) : words_((n + 63) / 64, all ? ~std::uint64_t{0} : 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }
  Bits& operator|=(const Bits& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }

 private:
  std::vector<std::uint64_t> words_;
};

// Search with forward checking, propagation of forced values and
// conflict-directed backjumping. Every assignment records the decisions it
// depends on; a failed value whose conflict does not involve the current
// decision skips that decision's other value. Only solution-free subtrees are
// skipped, so solutions and their order are those of plain backtracking.
class Solver {
 public:
  Solver(const CspProblem& p, CspStats* stats) : p_(p), stats_(stats) {
    const auto& formulas = p.constraints->formulas();
    const std::size_t n = p.domains.size();
    domains_ = p.domains;
    partial_.assign(n, Expr::kUnbound);
    deps_.assign(n, Bits(n));
    removed_.assign(n, {Bits(n), Bits(n)});
    incident_.resize(n);
    scope_.resize(formulas.size());
    unbound_.resize(formulas.size());
    for (std::size_t c = 0; c < formulas.size(); ++c) {
      scope_[c] = formulas[c].expr.features();
      unbound_[c] = scope_[c].size();
      for (std::size_t v : scope_[c]) incident_[v].push_back(c);
    }
  }

  void run(const std::function<bool(const Configuration&)>& visit) {
    visit_ = &visit;
    for (std::uint8_t d : domains_)
      if (d == 0) return;
    for (std::size_t c = 0; c < scope_.size(); ++c) queue_.push_back(c);
    for (std::size_t v = 0; v < domains_.size(); ++v)
      if (domains_[v] != 0b11) assign(v, domains_[v] == 0b10 ? 1 : 0, Bits(domains_.size()));
    Bits conflict;
    if (propagate(conflict)) search(0);
  }

 private:
  struct Undo {
    std::size_t var;
    std::uint8_t domain;
    bool assigned;
  };

  void assign(std::size_t var, Value val, Bits deps) {
    trail_.push_back({var, domains_[var], true});
    domains_[var] = static_cast<std::uint8_t>(1u << val);
    partial_[var] = static_cast<std::int8_t>(val);
    deps_[var] = std::move(deps);
    for (std::size_t c : incident_[var]) {
      --unbound_[c];
      queue_.push_back(c);
    }
  }

  Bits deps_of_bound(std::size_t c) const {
    Bits out(domains_.size());
    for (std::size_t v : scope_[c])
      if (partial_[v] != Expr::kUnbound) out |= deps_[v];
    return out;
  }

  // Checks constraint c under the partial assignment and removes the values
  // of its last free variable that would falsify it. On failure `conflict`
  // holds the decisions responsible.
  bool check(std::size_t c, Bits& conflict) {
    const Expr& e = p_.constraints->formulas()[c].expr;
    if (unbound_[c] != 1) {
      if (e.eval_partial(partial_) != Expr::Truth::kFalse) return true;
      conflict = deps_of_bound(c);
      return false;
    }
    std::size_t free = 0;
    for (std::size_t v : scope_[c])
      if (partial_[v] == Expr::kUnbound) free = v;
    for (Value val : {Value{1}, Value{0}}) {
      const std::uint8_t bit = static_cast<std::uint8_t>(1u << val);
      if (!(domains_[free] & bit)) continue;
      partial_[free] = static_cast<std::int8_t>(val);
      const bool ok = e.eval_partial(partial_) != Expr::Truth::kFalse;
      partial_[free] = Expr::kUnbound;
      if (!ok) {
        trail_.push_back({free, domains_[free], false});
        domains_[free] &= static_cast<std::uint8_t>(~bit);
        removed_[free][val] = deps_of_bound(c);
        if (stats_) ++stats_->prunings;
      }
    }
    if (domains_[free] == 0) {
      conflict = removed_[free][0];
      conflict |= removed_[free][1];
      return false;
    }
    // A single remaining value is forced.
    if (domains_[free] != 0b11) {
      const Value val = domains_[free] == 0b10 ? 1 : 0;
      assign(free, val, removed_[free][1 - val]);
    }
    return true;
  }

  bool propagate(Bits& conflict) {
    while (!queue_.empty()) {
      const std::size_t c = queue_.back();
      queue_.pop_back();
      if (!check(c, conflict)) {
        queue_.clear();
        return false;
      }
    }
    return true;
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      const Undo u = trail_.back();
      trail_.pop_back();
      domains_[u.var] = u.domain;
      if (u.assigned) {
        partial_[u.var] = Expr::kUnbound;
        for (std::size_t c : incident_[u.var]) ++unbound_[c];
      }
    }
  }

  // Returns the conflict set of the subtree; all bits once a solution was
  // found below. Sets stop_ when the visitor asks to stop.
  Bits search(std::size_t var) {
    const std::size_t n = domains_.size();
    while (var < n && partial_[var] != Expr::kUnbound) ++var;
    if (var == n) {
      Configuration conf;
      conf.values.reserve(partial_.size());
      for (std::int8_t v : partial_) conf.values.push_back(static_cast<Value>(v));
      if (!(*visit_)(conf)) stop_ = true;
      return Bits(n, true);
    }
    Bits here(n);
    for (Value val : {Value{1}, Value{0}}) {
      if (stats_) ++stats_->nodes;
      const std::size_t mark = trail_.size();
      Bits decision(n);
      decision.set(var);
      assign(var, val, std::move(decision));
      Bits conflict(n);
      if (propagate(conflict)) conflict = search(var + 1);
      undo_to(mark);
      if (stop_ || !conflict.test(var)) return conflict;
      conflict.reset(var);
      here |= conflict;
    }
    return here;
  }

  const CspProblem& p_;
  CspStats* stats_;
  const std::function<bool(const Configuration&)>* visit_ = nullptr;
  std::vector<std::uint8_t> domains_;
  std::vector<std::int8_t> partial_;
  std::vector<Bits> deps_;
  std::vector<std::array<Bits, 2>> removed_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::vector<std::size_t>> scope_;
  std::vector<std::size_t> unbound_;
  std::vector<Undo> trail_;
  std::vector<std::size_t> queue_;
  bool stop_ = false;
};

}  // namespace

void csp_enumerate(const CspProblem& p, const std::function<bool(const Configuration&)>& visit, CspStats* stats) {
  Solver(p, stats).run(visit);
}

std::optional<Configuration> csp_solve(const CspProblem& p, CspStats* stats) {
  std::optional<Configuration> found;
  csp_enumerate(
      p,
      [&](const Configuration& c) {
        found = c;
        return false;
      },
      stats);
  return found;
}

std::uint64_t csp_count(const CspProblem& p, std::optional<std::uint64_t> cap) {
  std::uint64_t n = 0;
  csp_enumerate(p, [&](const Configuration&) {
    ++n;
    return !cap || n < *cap;
  });
  return n;
}

std::vector<Configuration> brute_force_enumerate(const ConstraintSet& cf, std::span<const Binding> cr) {
  const std::size_t n = cf.model().size();
  if (n > kBruteForceLimit)
    throw CapacityError("brute force limited to " + std::to_string(kBruteForceLimit) + " features, model has " +
                        std::to_string(n));
  std::vector<Configuration> out;
  Configuration conf;
  conf.values.resize(n);
  for (std::uint64_t i = std::uint64_t{1} << n; i-- > 0;) {
    for (std::size_t k = 0; k < n; ++k) conf.values[k] = static_cast<Value>((i >> (n - 1 - k)) & 1);
    if (satisfies(conf, cr) && cf.satisfied_by(conf.values)) out.push_back(conf);
  }
  return out;
}

}  // namespace fmcq
