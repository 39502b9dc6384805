#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fmcq/kernels.hpp"
#include "fmcq/model.hpp"

namespace fmcq {

/// Propositional expression over atoms (feature = value).
class Expr {
 public:
  enum class Kind : std::uint8_t { kTrue, kFalse, kAtom, kNot, kAnd, kOr };

  static Expr constant(bool value);
  static Expr atom(std::size_t feature, Value value);
  static Expr negate(Expr operand);
  static Expr all(std::vector<Expr> operands);
  static Expr any(std::vector<Expr> operands);

  Kind kind() const noexcept { return kind_; }
  std::size_t feature() const noexcept { return feature_; }
  Value value() const noexcept { return value_; }
  const std::vector<Expr>& operands() const noexcept { return operands_; }

  /// Distinct feature indices, ascending.
  std::vector<std::size_t> features() const;

  /// Every feature index must be within conf.
  bool eval(std::span<const Value> conf) const;

  /// Kleene evaluation over a partial assignment; kUnbound marks free features.
  static constexpr std::int8_t kUnbound = -1;
  enum class Truth : std::uint8_t { kFalse, kTrue, kUnknown };
  Truth eval_partial(std::span<const std::int8_t> partial) const;

  bool operator==(const Expr&) const = default;

 private:
  Kind kind_ = Kind::kTrue;
  std::size_t feature_ = 0;
  Value value_ = 0;
  std::vector<Expr> operands_;
};

enum class Origin { kRoot, kMandatory, kOptional, kAlternative, kOr, kRequires, kExcludes };

std::string_view to_string(Origin o);

struct Formula {
  std::string label;
  Origin origin = Origin::kRoot;
  Expr expr;

  bool operator==(const Formula&) const = default;
};

/// The model-derived constraint set cf.
class ConstraintSet {
 public:
  ConstraintSet(FeatureModel model, std::vector<Formula> formulas)
      : model_(std::move(model)), formulas_(std::move(formulas)) {}

  const FeatureModel& model() const noexcept { return model_; }
  const std::vector<Formula>& formulas() const noexcept { return formulas_; }
  std::size_t size() const noexcept { return formulas_.size(); }
  const Formula& operator[](std::size_t i) const { return formulas_.at(i); }
  /// Throws NotFound.
  const Formula& by_label(std::string_view label) const;

  /// True when conf satisfies every formula.
  bool satisfied_by(std::span<const Value> conf) const;

  /// One line per formula, e.g. "c_7: !(t=1) | !(n=1)".
  std::string to_string() const;

 private:
  FeatureModel model_;
  std::vector<Formula> formulas_;
};

/// Translates a valid model into its labelled constraint set.
///
/// Order: c_0 is the root constraint, followed by mandatory/optional edges in
/// canonical order, or-groups, alternative groups, and finally cross-tree
/// constraints in declaration order. Throws ModelError for invalid models.
ConstraintSet translate(const FeatureModel& fm);

std::string render(const Expr& e, const FeatureModel& fm);
std::string render(const Formula& f, const FeatureModel& fm);

/// Evaluates f under a; throws Error when a feature of f is unbound.
bool eval_formula(const FeatureModel& fm, const Formula& f, const Assignment& a);

/// Appends e to a kernel program. var_of_feature maps feature index to kernel
/// variable; atoms with value 0 become negated variables.
void compile_into(const Expr& e, std::span<const std::uint32_t> var_of_feature, kernels::Program& out);

/// Kernel program for the conjunction of exprs.
kernels::Program compile_conjunction(std::span<const Expr* const> exprs,
                                     std::span<const std::uint32_t> var_of_feature);

}  // namespace fmcq
