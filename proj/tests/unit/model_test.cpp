#include <gtest/gtest.h>

#include "fmcq/error.hpp"
#include "fmcq/model.hpp"
#include "support.hpp"

namespace fmcq {
namespace {

std::vector<std::string> ids(const FeatureModel& fm) {
  std::vector<std::string> out;
  for (const Feature& f : fm.features()) out.push_back(f.id);
  return out;
}

TEST(Model, SurveyIsValidAndCanonical) {
  const FeatureModel fm = testing::survey_model();
  EXPECT_TRUE(validate_model(fm).ok()) << validate_model(fm).to_string();
  EXPECT_TRUE(fm.canonical());
  EXPECT_EQ(ids(fm), (std::vector<std::string>{"s", "p", "l", "n", "t", "st", "q", "m", "mm"}));
  EXPECT_EQ(fm.groups().size(), 2u);
  EXPECT_EQ(fm.ctcs().size(), 2u);
}

TEST(Model, LeafFeatures) {
  EXPECT_EQ(leaf_features(testing::survey_model()),
            (std::vector<std::string>{"l", "n", "t", "st", "m", "mm"}));
  EXPECT_EQ(leaf_features(ModelBuilder().root("r").build()), std::vector<std::string>{"r"});
}

TEST(Model, CanonicalOrderIsPreorderWithGroupsTogether) {
  // Declared out of preorder: children of b before b's siblings are complete.
  std::vector<Feature> fs = {
      {"c", "c", "a", Decomposition::kGroupMember},
      {"b1", "b1", "b", Decomposition::kOptional},
      {"a", "a", std::nullopt, Decomposition::kRoot},
      {"b", "b", "a", Decomposition::kMandatory},
      {"d", "d", "a", Decomposition::kGroupMember},
  };
  FeatureModel fm(fs, {{"a", GroupKind::kOr, {"c", "d"}}}, {});
  ASSERT_TRUE(validate_model(fm).ok()) << validate_model(fm).to_string();
  EXPECT_EQ(ids(fm), (std::vector<std::string>{"a", "c", "d", "b", "b1"}));
  EXPECT_EQ(fm.children(0).size(), 3u);
  EXPECT_EQ(fm.parent_index(4), std::optional<std::size_t>(3));
}

TEST(Model, MultipleRoots) {
  FeatureModel fm({{"a", "a", std::nullopt, Decomposition::kRoot}, {"b", "b", std::nullopt, Decomposition::kRoot}},
                  {}, {});
  EXPECT_TRUE(validate_model(fm).has("multiple roots"));
}

TEST(Model, UnknownFeatureInConstraint) {
  FeatureModel fm({{"a", "a", std::nullopt, Decomposition::kRoot}}, {}, {{CtcKind::kRequires, "a", "b"}});
  const ValidationReport r = validate_model(fm);
  ASSERT_TRUE(r.has("unknown feature"));
  EXPECT_THROW(require_valid(fm), ModelError);
}

TEST(Model, StructuralErrors) {
  using D = Decomposition;
  auto report = [](std::vector<Feature> fs, std::vector<Group> gs = {}, std::vector<CrossTreeConstraint> cs = {}) {
    return validate_model(FeatureModel(std::move(fs), std::move(gs), std::move(cs)));
  };
  EXPECT_TRUE(report({}).has("no root"));
  EXPECT_TRUE(report({{"a", "a", std::nullopt, D::kRoot}, {"a", "b", "a", D::kOptional}}).has("duplicate id"));
  EXPECT_TRUE(report({{"a", "a", std::nullopt, D::kRoot}, {"b", "a", "a", D::kOptional}}).has("duplicate name"));
  EXPECT_TRUE(report({{"a", "a", std::nullopt, D::kRoot}, {"b", "b", "zz", D::kOptional}}).has("unknown feature"));
  EXPECT_TRUE(report({{"a", "a", std::nullopt, D::kRoot},
                      {"b", "b", "c", D::kOptional},
                      {"c", "c", "b", D::kOptional}})
                  .has("cycle"));
  EXPECT_TRUE(report({{"a", "a", std::nullopt, D::kRoot}, {"b", "b", "a", D::kGroupMember}},
                     {{"a", GroupKind::kOr, {"b"}}})
                  .has("group too small"));
  EXPECT_TRUE(report({{"a", "a", std::nullopt, D::kRoot}, {"b", "b", "a", D::kOptional}},
                     {}, {{CtcKind::kExcludes, "b", "b"}})
                  .has("self constraint"));
  EXPECT_TRUE(report({{"a", "a", std::nullopt, D::kRoot}, {"b", "b", "a", D::kGroupMember}}).has(
      "ungrouped group member"));
}

TEST(Model, SlugIds) {
  EXPECT_EQ(slugify("AB Testing"), "ab_testing");
  const FeatureModel fm = ModelBuilder().root("Survey App").optional("AB-Test", "Survey App").build();
  EXPECT_EQ(fm.feature(1).id, "ab_test");
  EXPECT_EQ(*fm.feature(1).parent, "survey_app");
}

TEST(Model, AssignmentAndResolve) {
  const FeatureModel fm = testing::survey_model();
  Requirements cr{{"mm", 0}, {"s", 1}};
  EXPECT_EQ(resolve(fm, cr), (std::vector<Binding>{{0, 1}, {8, 0}}));
  cr.set("zz", 1);
  EXPECT_THROW(resolve(fm, cr), NotFound);
  EXPECT_TRUE(cr.unset("zz"));
  EXPECT_FALSE(cr.unset("zz"));

  const Configuration conf{{1, 1, 0, 1, 0, 1, 1, 1, 0}};
  EXPECT_EQ(to_configuration(fm, to_assignment(fm, conf)), conf);
  EXPECT_THROW(to_configuration(fm, Requirements{{"s", 1}}), Error);
}

}  // namespace
}  // namespace fmcq
