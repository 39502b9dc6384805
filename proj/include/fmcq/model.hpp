#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fmcq {

/// Feature values: 1 = included, 0 = excluded.
using Value = std::uint8_t;

enum class Decomposition { kRoot, kMandatory, kOptional, kGroupMember };
enum class GroupKind { kAlternative, kOr };
enum class CtcKind { kRequires, kExcludes };

std::string_view to_string(Decomposition d);
std::string_view to_string(GroupKind k);
std::string_view to_string(CtcKind k);

struct Feature {
  std::string id;
  std::string name;
  std::optional<std::string> parent;
  Decomposition decomposition = Decomposition::kOptional;

  bool operator==(const Feature&) const = default;
};

struct Group {
  std::string parent;
  GroupKind kind = GroupKind::kOr;
  std::vector<std::string> members;

  bool operator==(const Group&) const = default;
};

struct CrossTreeConstraint {
  CtcKind kind = CtcKind::kRequires;
  std::string lhs;
  std::string rhs;

  bool operator==(const CrossTreeConstraint&) const = default;
};

/// Lowercases and maps every non-alphanumeric character to '_'.
std::string slugify(std::string_view name);

/// Feature tree plus groups and cross-tree constraints.
///
/// The constructor accepts arbitrary (possibly invalid) parts; see
/// validate_model(). When the parts form a valid tree the
/// features are reordered into canonical order: preorder, siblings in
/// declaration order, with the members of a group kept together at the
/// position of the first declared member. Groups are reordered by the
/// canonical position of their first member. Index-based accessors refer to
/// this canonical order and are only meaningful for valid models.
class FeatureModel {
 public:
  FeatureModel() = default;
  FeatureModel(std::vector<Feature> features, std::vector<Group> groups,
               std::vector<CrossTreeConstraint> ctcs);

  const std::vector<Feature>& features() const noexcept { return features_; }
  const std::vector<Group>& groups() const noexcept { return groups_; }
  const std::vector<CrossTreeConstraint>& ctcs() const noexcept { return ctcs_; }

  std::size_t size() const noexcept { return features_.size(); }
  const Feature& feature(std::size_t index) const { return features_.at(index); }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws NotFound for unknown ids.
  std::size_t index_of(std::string_view id) const;

  /// True when construction found a single well-formed tree.
  bool canonical() const noexcept { return canonical_; }

  std::size_t root_index() const noexcept { return 0; }
  std::optional<std::size_t> parent_index(std::size_t index) const;
  std::span<const std::size_t> children(std::size_t index) const;
  /// Index into groups() of the group the feature belongs to, if any.
  std::optional<std::size_t> group_of(std::size_t index) const;

  bool operator==(const FeatureModel& other) const {
    return features_ == other.features_ && groups_ == other.groups_ && ctcs_ == other.ctcs_;
  }

 private:
  void canonicalize();
  void index();

  std::vector<Feature> features_;
  std::vector<Group> groups_;
  std::vector<CrossTreeConstraint> ctcs_;
  bool canonical_ = false;

  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::optional<std::size_t>> group_of_;
};

/// Convenience builder keyed by display names; ids are slugs of the names.
class ModelBuilder {
 public:
  ModelBuilder& root(std::string name);
  ModelBuilder& mandatory(std::string name, std::string_view parent);
  ModelBuilder& optional(std::string name, std::string_view parent);
  ModelBuilder& alternative(std::string_view parent, std::vector<std::string> members);
  ModelBuilder& or_group(std::string_view parent, std::vector<std::string> members);
  ModelBuilder& require(std::string_view lhs, std::string_view rhs);
  ModelBuilder& excludes(std::string_view lhs, std::string_view rhs);

  FeatureModel build() const;

 private:
  ModelBuilder& add(std::string name, std::optional<std::string_view> parent, Decomposition d);
  ModelBuilder& group(std::string_view parent, GroupKind kind, std::vector<std::string> members);

  std::vector<Feature> features_;
  std::vector<Group> groups_;
  std::vector<CrossTreeConstraint> ctcs_;
};

struct ValidationIssue {
  std::string message;
  std::vector<std::string> ids;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  /// True when some issue carries exactly this message.
  bool has(std::string_view message) const;
  std::string to_string() const;
};

ValidationReport validate_model(const FeatureModel& fm);

/// Throws ModelError carrying the report text when validation fails.
void require_valid(const FeatureModel& fm);

/// Features without children, in canonical order.
std::vector<std::string> leaf_features(const FeatureModel& fm);

/// Partial assignment of feature ids to values.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::initializer_list<std::pair<const std::string, Value>> init);

  void set(std::string id, Value value);
  /// Returns true when a binding was removed.
  bool unset(std::string_view id);
  std::optional<Value> get(std::string_view id) const;

  const std::map<std::string, Value, std::less<>>& bindings() const noexcept { return bindings_; }
  std::size_t size() const noexcept { return bindings_.size(); }
  bool empty() const noexcept { return bindings_.empty(); }

  bool operator==(const Assignment&) const = default;

 private:
  std::map<std::string, Value, std::less<>> bindings_;
};

using Requirements = Assignment;

/// A requirement resolved against a model: canonical feature index plus value.
struct Binding {
  std::size_t feature = 0;
  Value value = 0;

  bool operator==(const Binding&) const = default;
  auto operator<=>(const Binding&) const = default;
};

/// Resolves ids to canonical indices, sorted by index. Throws NotFound.
std::vector<Binding> resolve(const FeatureModel& fm, const Assignment& cr);

/// Total assignment in canonical feature order.
struct Configuration {
  std::vector<Value> values;

  bool operator==(const Configuration&) const = default;
  auto operator<=>(const Configuration&) const = default;
};

Assignment to_assignment(const FeatureModel& fm, const Configuration& conf);
/// Throws Error when the assignment is not total over the model.
Configuration to_configuration(const FeatureModel& fm, const Assignment& a);
/// True when every binding of cr agrees with conf.
bool satisfies(const Configuration& conf, std::span<const Binding> cr);

}  // namespace fmcq
