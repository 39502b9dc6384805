#include <gtest/gtest.h>

#include "fmcq/error.hpp"
#include "fmcq/io.hpp"
#include "support.hpp"

namespace fmcq {
namespace {

constexpr const char* kSurveyNative = R"(# survey
feature s root
  feature p mandatory
    group alternative
      feature l
      feature n
  feature t optional

  feature st optional   # statistics
  feature q mandatory
    group or
      feature m
      feature mm
constraints
  excludes t n
  requires t st
)";

TEST(Native, ParsesSurvey) { EXPECT_EQ(parse_native(kSurveyNative), testing::survey_model()); }

TEST(Native, RoundTripSurvey) {
  const FeatureModel fm = testing::survey_model();
  EXPECT_EQ(parse_native(serialize_native(fm)), fm);
}

TEST(Native, RoundTripRandomModels) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const FeatureModel fm = random_model(seed, {.features = 3 + seed % 20});
    const std::string text = serialize_native(fm);
    EXPECT_EQ(parse_native(text), fm) << text;
    EXPECT_EQ(serialize_native(parse_native(text)), text);
  }
}

TEST(Native, QuotedNames) {
  const FeatureModel fm = ModelBuilder().root("Survey App").optional("A \"quoted\" #1", "Survey App").build();
  const std::string text = serialize_native(fm);
  EXPECT_NE(text.find("\"Survey App\""), std::string::npos);
  EXPECT_EQ(parse_native(text), fm);
}

TEST(Native, UnknownParentIsParseError) {
  try {
    parse_native("feature r root\n      feature x optional\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_native("  feature x optional\n"), ParseError);
}

TEST(Native, Errors) {
  EXPECT_THROW(parse_native("feature r root\n  feature a optional\n  feature a mandatory\n"), ParseError);
  EXPECT_THROW(parse_native("feature r root\n feature a optional\n"), ParseError);
  EXPECT_THROW(parse_native("feature r root\n  feature a sometimes\n"), ParseError);
  EXPECT_THROW(parse_native("feature r root\nconstraints\n  requires r zz\n"), ParseError);
  EXPECT_THROW(parse_native("feature r root\n  group xor\n"), ParseError);
  EXPECT_THROW(parse_native("feature r root\nfeature q root\n"), ParseError);
  EXPECT_THROW(parse_native(""), ParseError);
  // A one-member group parses but fails validation.
  EXPECT_THROW(parse_native("feature r root\n  group or\n    feature a\n"), ModelError);
  try {
    parse_native("feature r root\n  feature a optional\n  feature a mandatory\n");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 11u);
    EXPECT_NE(std::string(e.what()).find("duplicate name"), std::string::npos);
  }
}

constexpr const char* kSxfm = R"(<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<feature_model name="Survey">
<meta>
<data name="author">someone</data>
</meta>
<feature_tree>
:r Survey (_r)
	:m Pricing (_r_1)
		:g (_r_1_2) [1,1]
			: License (_r_1_2_3)
			: No License (_r_1_2_4)
	:o AB Testing (_r_5)
	:o Statistics (_r_6)
	:m Questions (_r_7)
		:g (_r_7_8) [1,*]
			: Multiple Choice (_r_7_8_9)
			: Multimedia (_r_7_8_10)
</feature_tree>
<constraints>
constraint_1:~_r_5 or ~_r_1_2_4
constraint_2:~_r_5 or _r_6
</constraints>
</feature_model>
)";

TEST(Sxfm, ParsesSurveyShape) {
  const FeatureModel fm = parse_sxfm(kSxfm);
  EXPECT_EQ(fm.size(), 9u);
  EXPECT_EQ(fm.groups().size(), 2u);
  EXPECT_EQ(fm.groups()[0].kind, GroupKind::kAlternative);
  EXPECT_EQ(fm.groups()[1].kind, GroupKind::kOr);
  ASSERT_EQ(fm.ctcs().size(), 2u);
  EXPECT_EQ(fm.ctcs()[0], (CrossTreeConstraint{CtcKind::kExcludes, "ab_testing", "no_license"}));
  EXPECT_EQ(fm.ctcs()[1], (CrossTreeConstraint{CtcKind::kRequires, "ab_testing", "statistics"}));
  EXPECT_EQ(fm.feature(0).name, "Survey");
  EXPECT_EQ(leaf_features(fm).size(), 6u);
}

TEST(Sxfm, MinimalDocument) {
  const FeatureModel fm = parse_sxfm("<feature_model name=\"x\">\n<feature_tree>\n:r Root (r)\n</feature_tree>\n</feature_model>\n");
  EXPECT_EQ(fm.size(), 1u);
  EXPECT_TRUE(fm.groups().empty());
  EXPECT_TRUE(fm.ctcs().empty());
}

TEST(Sxfm, RequiresWithPositiveLiteralFirst) {
  const FeatureModel fm = parse_sxfm(
      "<feature_model>\n<feature_tree>\n:r R (r)\n\t:o A (a)\n\t:o B (b)\n</feature_tree>\n"
      "<constraints>\nc1: b or ~a\n</constraints>\n</feature_model>\n");
  ASSERT_EQ(fm.ctcs().size(), 1u);
  EXPECT_EQ(fm.ctcs()[0], (CrossTreeConstraint{CtcKind::kRequires, "a", "b"}));
}

TEST(Sxfm, UnsupportedCardinality) {
  EXPECT_THROW(parse_sxfm("<feature_model>\n<feature_tree>\n:r R (r)\n\t:g (g) [2,3]\n\t\t: A (a)\n\t\t: B (b)\n"
                          "\t\t: C (c)\n</feature_tree>\n</feature_model>\n"),
               UnsupportedConstruct);
}

TEST(Sxfm, UnsupportedClause) {
  EXPECT_THROW(parse_sxfm("<feature_model>\n<feature_tree>\n:r R (r)\n\t:o A (a)\n\t:o B (b)\n\t:o C (c)\n"
                          "</feature_tree>\n<constraints>\nc1: ~a or b or c\n</constraints>\n</feature_model>\n"),
               UnsupportedConstruct);
  EXPECT_THROW(parse_sxfm("<feature_model>\n<feature_tree>\n:r R (r)\n\t:o A (a)\n\t:o B (b)\n"
                          "</feature_tree>\n<constraints>\nc1: a or b\n</constraints>\n</feature_model>\n"),
               UnsupportedConstruct);
}

TEST(Sxfm, ParseErrorsCarryLocation) {
  try {
    parse_sxfm("<feature_model>\n<feature_tree>\n:r R (r)\n\t:x A (a)\n</feature_tree>\n</feature_model>\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_EQ(e.column(), 2u);
  }
  EXPECT_THROW(parse_sxfm("<feature_model>\n<feature_tree>\n:r R (r)\n"), ParseError);
  EXPECT_THROW(parse_sxfm("no markup"), ParseError);
  EXPECT_THROW(parse_sxfm("<feature_model>\n</feature_model>\n"), ParseError);
}

TEST(Sxfm, SingleMemberGroupBecomesMandatoryAndNamesAreDisambiguated) {
  const FeatureModel fm = parse_sxfm(
      "<feature_model>\n<feature_tree>\n:r R (r)\n\t:o X (x1)\n\t:o Y (y)\n\t\t:o X (x2)\n\t\t:g (g) [1,1]\n"
      "\t\t\t: Only (o)\n\t\t:g [1,2]\n\t\t\t: P (p)\n\t\t\t: Q (q)\n</feature_tree>\n</feature_model>\n");
  EXPECT_TRUE(fm.find("x"));
  EXPECT_TRUE(fm.find("x__x2_"));
  EXPECT_EQ(fm.feature(fm.index_of("only")).decomposition, Decomposition::kMandatory);
  ASSERT_EQ(fm.groups().size(), 1u);
  EXPECT_EQ(fm.groups()[0].kind, GroupKind::kOr);
  EXPECT_EQ(parse_native(serialize_native(fm)), fm);
}

TEST(Documents, DetectFormat) {
  EXPECT_EQ(detect_format(kSxfm), ModelFormat::kSxfm);
  EXPECT_EQ(detect_format(kSurveyNative), ModelFormat::kNative);
  EXPECT_EQ(parse_document(kSurveyNative).model, testing::survey_model());
  EXPECT_THROW(load_model("/nonexistent/model.fm"), NotFound);
  EXPECT_THROW(parse_format("uvl"), Error);
}

}  // namespace
}  // namespace fmcq
