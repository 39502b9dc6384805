#include "fmcq/model.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fmcq/error.hpp"

namespace fmcq {

std::string_view to_string(Decomposition d) {
  switch (d) {
    case Decomposition::kRoot: return "root";
    case Decomposition::kMandatory: return "mandatory";
    case Decomposition::kOptional: return "optional";
    case Decomposition::kGroupMember: return "member";
  }
  return "?";
}

std::string_view to_string(GroupKind k) {
  return k == GroupKind::kAlternative ? "alternative" : "or";
}

std::string_view to_string(CtcKind k) { return k == CtcKind::kRequires ? "requires" : "excludes"; }

std::string slugify(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (unsigned char c : name) {
    out.push_back(std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_');
  }
  return out;
}

namespace {

void add_issue(ValidationReport& r, std::string message, std::vector<std::string> ids) {
  r.issues.push_back({std::move(message), std::move(ids)});
}

ValidationReport validate_parts(const std::vector<Feature>& features,
                                const std::vector<Group>& groups,
                                const std::vector<CrossTreeConstraint>& ctcs) {
  ValidationReport report;
  std::unordered_map<std::string, std::size_t> by_id;
  std::unordered_set<std::string> names;

  for (std::size_t i = 0; i < features.size(); ++i) {
    const Feature& f = features[i];
    if (f.id.empty()) add_issue(report, "empty id", {f.name});
    if (!by_id.emplace(f.id, i).second) add_issue(report, "duplicate id", {f.id});
    if (!names.insert(f.name).second) add_issue(report, "duplicate name", {f.name});
  }

  std::vector<std::string> roots;
  for (const Feature& f : features) {
    if (!f.parent) {
      roots.push_back(f.id);
      if (f.decomposition != Decomposition::kRoot) add_issue(report, "parentless feature not marked root", {f.id});
    } else {
      if (f.decomposition == Decomposition::kRoot) add_issue(report, "root has parent", {f.id});
      if (!by_id.contains(*f.parent)) add_issue(report, "unknown feature", {f.id, *f.parent});
      if (*f.parent == f.id) add_issue(report, "cycle", {f.id});
    }
  }
  if (features.empty() || roots.empty()) add_issue(report, "no root", {});
  if (roots.size() > 1) add_issue(report, "multiple roots", roots);

  // Reachability from the root detects cycles once every parent resolves.
  if (roots.size() == 1) {
    std::unordered_map<std::string, std::vector<std::string>> kids;
    for (const Feature& f : features)
      if (f.parent) kids[*f.parent].push_back(f.id);
    std::unordered_set<std::string> seen{roots.front()};
    std::vector<std::string> stack{roots.front()};
    while (!stack.empty()) {
      std::string cur = std::move(stack.back());
      stack.pop_back();
      for (const std::string& k : kids[cur])
        if (seen.insert(k).second) stack.push_back(k);
    }
    std::vector<std::string> unreachable;
    for (const Feature& f : features)
      if (!seen.contains(f.id) && f.parent && by_id.contains(*f.parent) && *f.parent != f.id)
        unreachable.push_back(f.id);
    if (!unreachable.empty()) add_issue(report, "cycle", unreachable);
  }

  std::unordered_map<std::string, std::size_t> member_of;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& grp = groups[g];
    if (!by_id.contains(grp.parent)) add_issue(report, "unknown feature", {grp.parent});
    if (grp.members.size() < 2) {
      std::vector<std::string> ids{grp.parent};
      ids.insert(ids.end(), grp.members.begin(), grp.members.end());
      add_issue(report, "group too small", ids);
    }
    for (const std::string& m : grp.members) {
      auto it = by_id.find(m);
      if (it == by_id.end()) {
        add_issue(report, "unknown feature", {m});
        continue;
      }
      const Feature& f = features[it->second];
      if (f.parent != grp.parent) add_issue(report, "group member parent mismatch", {m, grp.parent});
      if (f.decomposition != Decomposition::kGroupMember)
        add_issue(report, "group member decomposition", {m});
      if (!member_of.emplace(m, g).second) add_issue(report, "feature in multiple groups", {m});
    }
  }
  for (const Feature& f : features)
    if (f.decomposition == Decomposition::kGroupMember && !member_of.contains(f.id))
      add_issue(report, "ungrouped group member", {f.id});

  for (const CrossTreeConstraint& c : ctcs) {
    for (const std::string* ref : {&c.lhs, &c.rhs})
      if (!by_id.contains(*ref)) add_issue(report, "unknown feature", {*ref});
    if (c.lhs == c.rhs) add_issue(report, "self constraint", {c.lhs});
  }
  return report;
}

}  // namespace

FeatureModel::FeatureModel(std::vector<Feature> features, std::vector<Group> groups,
                           std::vector<CrossTreeConstraint> ctcs)
    : features_(std::move(features)), groups_(std::move(groups)), ctcs_(std::move(ctcs)) {
  if (validate_parts(features_, groups_, ctcs_).ok()) {
    canonicalize();
    canonical_ = true;
  }
  index();
}

void FeatureModel::canonicalize() {
  std::unordered_map<std::string, std::vector<std::size_t>> kids;
  std::size_t root = 0;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].parent)
      kids[*features_[i].parent].push_back(i);
    else
      root = i;
  }
  std::unordered_map<std::string, std::size_t> decl;
  for (std::size_t i = 0; i < features_.size(); ++i) decl.emplace(features_[i].id, i);
  std::unordered_map<std::string, std::size_t> group_by_member;
  for (std::size_t g = 0; g < groups_.size(); ++g)
    for (const std::string& m : groups_[g].members) group_by_member.emplace(m, g);

  std::vector<std::size_t> order;
  order.reserve(features_.size());
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    order.push_back(i);
    std::vector<bool> group_done(groups_.size(), false);
    for (std::size_t child : kids[features_[i].id]) {
      auto g = group_by_member.find(features_[child].id);
      if (g == group_by_member.end()) {
        visit(child);
      } else if (!group_done[g->second]) {
        group_done[g->second] = true;
        for (const std::string& m : groups_[g->second].members) visit(decl.at(m));
      }
    }
  };
  visit(root);

  std::vector<Feature> sorted;
  sorted.reserve(features_.size());
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i : order) {
    position.emplace(features_[i].id, sorted.size());
    sorted.push_back(std::move(features_[i]));
  }
  features_ = std::move(sorted);
  std::stable_sort(groups_.begin(), groups_.end(), [&](const Group& a, const Group& b) {
    return position.at(a.members.front()) < position.at(b.members.front());
  });
}

void FeatureModel::index() {
  by_id_.clear();
  for (std::size_t i = 0; i < features_.size(); ++i) by_id_.emplace(features_[i].id, i);
  parent_.assign(features_.size(), std::nullopt);
  children_.assign(features_.size(), {});
  group_of_.assign(features_.size(), std::nullopt);
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!features_[i].parent) continue;
    auto it = by_id_.find(*features_[i].parent);
    if (it == by_id_.end()) continue;
    parent_[i] = it->second;
    children_[it->second].push_back(i);
  }
  for (std::size_t g = 0; g < groups_.size(); ++g)
    for (const std::string& m : groups_[g].members)
      if (auto it = by_id_.find(m); it != by_id_.end() && !group_of_[it->second]) group_of_[it->second] = g;
}

std::optional<std::size_t> FeatureModel::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureModel::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw NotFound("unknown feature '" + std::string(id) + "'");
}

std::optional<std::size_t> FeatureModel::parent_index(std::size_t index) const {
  return parent_.at(index);
}

std::span<const std::size_t> FeatureModel::children(std::size_t index) const {
  return children_.at(index);
}

std::optional<std::size_t> FeatureModel::group_of(std::size_t index) const {
  return group_of_.at(index);
}

ModelBuilder& ModelBuilder::add(std::string name, std::optional<std::string_view> parent,
                                Decomposition d) {
  Feature f;
  f.id = slugify(name);
  f.name = std::move(name);
  if (parent) f.parent = slugify(*parent);
  f.decomposition = d;
  features_.push_back(std::move(f));
  return *this;
}

ModelBuilder& ModelBuilder::root(std::string name) {
  return add(std::move(name), std::nullopt, Decomposition::kRoot);
}

ModelBuilder& ModelBuilder::mandatory(std::string name, std::string_view parent) {
  return add(std::move(name), parent, Decomposition::kMandatory);
}

ModelBuilder& ModelBuilder::optional(std::string name, std::string_view parent) {
  return add(std::move(name), parent, Decomposition::kOptional);
}

ModelBuilder& ModelBuilder::group(std::string_view parent, GroupKind kind,
                                  std::vector<std::string> members) {
  Group g{slugify(parent), kind, {}};
  for (std::string& m : members) {
    g.members.push_back(slugify(m));
    add(std::move(m), parent, Decomposition::kGroupMember);
  }
  groups_.push_back(std::move(g));
  return *this;
}

ModelBuilder& ModelBuilder::alternative(std::string_view parent, std::vector<std::string> members) {
  return group(parent, GroupKind::kAlternative, std::move(members));
}

ModelBuilder& ModelBuilder::or_group(std::string_view parent, std::vector<std::string> members) {
  return group(parent, GroupKind::kOr, std::move(members));
}

ModelBuilder& ModelBuilder::require(std::string_view lhs, std::string_view rhs) {
  ctcs_.push_back({CtcKind::kRequires, slugify(lhs), slugify(rhs)});
  return *this;
}

ModelBuilder& ModelBuilder::excludes(std::string_view lhs, std::string_view rhs) {
  ctcs_.push_back({CtcKind::kExcludes, slugify(lhs), slugify(rhs)});
  return *this;
}

FeatureModel ModelBuilder::build() const { return FeatureModel(features_, groups_, ctcs_); }

bool ValidationReport::has(std::string_view message) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.message == message; });
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].message;
    if (!issues[i].ids.empty()) {
      os << " (";
      for (std::size_t k = 0; k < issues[i].ids.size(); ++k) os << (k ? ", " : "") << issues[i].ids[k];
      os << ")";
    }
  }
  return os.str();
}

ValidationReport validate_model(const FeatureModel& fm) {
  return validate_parts(fm.features(), fm.groups(), fm.ctcs());
}

void require_valid(const FeatureModel& fm) {
  ValidationReport r = validate_model(fm);
  if (!r.ok()) throw ModelError("invalid feature model: " + r.to_string());
}

std::vector<std::string> leaf_features(const FeatureModel& fm) {
  std::vector<std::string> leaves;
  for (std::size_t i = 0; i < fm.size(); ++i)
    if (fm.children(i).empty()) leaves.push_back(fm.feature(i).id);
  return leaves;
}

Assignment::Assignment(std::initializer_list<std::pair<const std::string, Value>> init)
    : bindings_(init.begin(), init.end()) {}

void Assignment::set(std::string id, Value value) { bindings_[std::move(id)] = value; }

bool Assignment::unset(std::string_view id) {
  auto it = bindings_.find(id);
  if (it == bindings_.end()) return false;
  bindings_.erase(it);
  return true;
}

std::optional<Value> Assignment::get(std::string_view id) const {
  auto it = bindings_.find(id);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

std::vector<Binding> resolve(const FeatureModel& fm, const Assignment& cr) {
  std::vector<Binding> out;
  out.reserve(cr.size());
  for (const auto& [id, v] : cr.bindings()) {
    if (v > 1) throw Error("value for '" + id + "' must be 0 or 1");
    out.push_back({fm.index_of(id), v});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Assignment to_assignment(const FeatureModel& fm, const Configuration& conf) {
  Assignment a;
  for (std::size_t i = 0; i < fm.size() && i < conf.values.size(); ++i) a.set(fm.feature(i).id, conf.values[i]);
  return a;
}

Configuration to_configuration(const FeatureModel& fm, const Assignment& a) {
  Configuration conf;
  conf.values.resize(fm.size());
  for (std::size_t i = 0; i < fm.size(); ++i) {
    auto v = a.get(fm.feature(i).id);
    if (!v) throw Error("assignment does not bind '" + fm.feature(i).id + "'");
    conf.values[i] = *v;
  }
  return conf;
}

bool satisfies(const Configuration& conf, std::span<const Binding> cr) {
  return std::all_of(cr.begin(), cr.end(),
                     [&](const Binding& b) { return conf.values.at(b.feature) == b.value; });
}

}  // namespace fmcq
