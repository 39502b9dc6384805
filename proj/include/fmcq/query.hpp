#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fmcq/table.hpp"

namespace fmcq {

/// F_[c]S: tables, selection condition, projection and optional limit.
struct ConjunctiveQuery {
  std::vector<std::shared_ptr<const Table>> from;
  Predicate where = Predicate::constant(true);
  std::vector<AttrRef> select;
  std::optional<std::uint64_t> limit;
};

/// Instrumentation filled by evaluate(). peak_live_bindings counts tables
/// bound simultaneously on the current enumeration path; it never exceeds
/// from.size().
struct EvalStats {
  std::size_t peak_live_bindings = 0;
  std::uint64_t bindings_tried = 0;
  std::uint64_t conjunct_checks = 0;
  std::uint64_t emitted = 0;
  /// Tuples buffered for duplicate elimination (0 when the projection is injective).
  std::uint64_t dedup_buffered = 0;
  std::vector<std::size_t> join_order;
};

/// Streams result tuples in enumeration order until the visitor returns false
/// or the limit is reached. The Cartesian product is never materialised:
/// tables are enumerated in nested loops (greedy connectivity order) and each
/// top-level conjunct is checked as soon as all its tables are bound.
/// Throws QueryError for unresolved attributes or ambiguous table names.
void evaluate_stream(const ConjunctiveQuery& q, const std::function<bool(const Tuple&)>& visit,
                     EvalStats* stats = nullptr);

std::vector<Tuple> evaluate(const ConjunctiveQuery& q, EvalStats* stats = nullptr);

/// Number of distinct result tuples, ignoring q.limit; stops at cap when given.
std::uint64_t count_results(const ConjunctiveQuery& q, std::optional<std::uint64_t> cap = std::nullopt,
                            EvalStats* stats = nullptr);

/// Portable SQL-like rendering (SELECT/FROM/WHERE/LIMIT) for inspection.
std::string render_sql(const ConjunctiveQuery& q);
std::string render_sql(const Predicate& p);

}  // namespace fmcq
