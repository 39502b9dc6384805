#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fmcq/model.hpp"

namespace fmcq {

using Tuple = std::vector<Value>;

struct TableSchema {
  std::string name;
  std::vector<std::string> attributes;

  std::optional<std::size_t> find(std::string_view attribute) const;
  std::string qualified(std::size_t column) const { return name + "." + attributes.at(column); }

  bool operator==(const TableSchema&) const = default;
};

/// Duplicate-free relation over {0,1} values. Rows keep insertion order.
class Table {
 public:
  /// Throws QueryError when attribute names repeat.
  explicit Table(TableSchema schema);
  Table(TableSchema schema, std::initializer_list<std::initializer_list<int>> rows);

  /// Returns false (and stores nothing) for a duplicate row. Throws QueryError
  /// on arity mismatch or values outside {0,1}.
  bool insert(std::span<const Value> row);

  const TableSchema& schema() const noexcept { return schema_; }
  const std::string& name() const noexcept { return schema_.name; }
  std::size_t arity() const noexcept { return schema_.attributes.size(); }
  std::size_t size() const noexcept { return arity() ? cells_.size() / arity() : rows_without_columns_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const Value> row(std::size_t r) const { return {cells_.data() + r * arity(), arity()}; }
  Value at(std::size_t r, std::size_t c) const { return cells_[r * arity() + c]; }
  std::vector<Tuple> rows() const;

  /// Column c packed as a bitset, bit r = value of row r.
  std::vector<std::uint64_t> packed_column(std::size_t c) const;

  bool operator==(const Table& other) const { return schema_ == other.schema_ && cells_ == other.cells_; }

 private:
  TableSchema schema_;
  std::vector<Value> cells_;
  std::unordered_set<std::string> keys_;
  std::size_t rows_without_columns_ = 0;
};

/// Qualified attribute reference `table.attribute`.
struct AttrRef {
  std::string table;
  std::string attribute;

  /// Splits at the last '.'; without a dot the table part stays empty.
  static AttrRef parse(std::string_view qualified);
  std::string qualified() const { return table.empty() ? attribute : table + "." + attribute; }

  bool operator==(const AttrRef&) const = default;
  auto operator<=>(const AttrRef&) const = default;
};

/// Boolean selection condition over qualified attributes.
class Predicate {
 public:
  enum class Kind : std::uint8_t { kTrue, kFalse, kEq, kJoin, kNot, kAnd, kOr };

  Predicate() = default;
  static Predicate constant(bool value);
  /// attr = value
  static Predicate eq(AttrRef attr, Value value);
  /// lhs = rhs
  static Predicate join(AttrRef lhs, AttrRef rhs);
  static Predicate negate(Predicate p);
  static Predicate all(std::vector<Predicate> ps);
  static Predicate any(std::vector<Predicate> ps);

  Kind kind() const noexcept { return kind_; }
  const AttrRef& lhs() const noexcept { return lhs_; }
  const AttrRef& rhs() const noexcept { return rhs_; }
  Value value() const noexcept { return value_; }
  const std::vector<Predicate>& operands() const noexcept { return operands_; }

  /// Top-level conjuncts with nested conjunctions flattened; `true` yields none.
  std::vector<Predicate> conjuncts() const;
  /// Every attribute mentioned, in first-occurrence order, without repeats.
  std::vector<AttrRef> attributes() const;

  bool operator==(const Predicate&) const = default;

 private:
  Kind kind_ = Kind::kTrue;
  AttrRef lhs_;
  AttrRef rhs_;
  Value value_ = 0;
  std::vector<Predicate> operands_;
};

struct Equality {
  AttrRef lhs;
  AttrRef rhs;

  bool operator==(const Equality&) const = default;
};

/// Indices of rows of t satisfying p, ascending. Evaluated column-wise by the
/// active kernel.
std::vector<std::uint32_t> matching_rows(const Table& t, const Predicate& p);

/// Rows of t satisfying p, order preserved. Attributes may be qualified with
/// t's name or left unqualified. Evaluated column-wise by the active kernel.
Table select(const Table& t, const Predicate& p);

/// Columns restricted to attrs (requested order), duplicates removed keeping
/// first occurrences.
Table project(const Table& t, std::span<const std::string> attrs);

/// Equi-join in nested-loop order over ts. The result schema is the
/// concatenation of qualified names of every input attribute.
Table join(std::span<const Table* const> ts, std::span<const Equality> equalities);

}  // namespace fmcq
