#include <gtest/gtest.h>

#include <algorithm>

#include "fmcq/csp.hpp"
#include "fmcq/diagnosis.hpp"
#include "fmcq/error.hpp"
#include "support.hpp"

namespace fmcq {
namespace {

std::vector<Configuration> all_of(const ConstraintSet& cf) { return brute_force_enumerate(cf); }

TEST(Diagnose, SurveyExample) {
  const FeatureModel fm = testing::survey_model();
  const ConstraintSet cf = translate(fm);
  const auto configs = all_of(cf);
  const Requirements cr{{"s", 1}, {"p", 1}, {"l", 0}, {"n", 1}, {"t", 1}};
  const auto ds = diagnose(fm, cr, configs);
  ASSERT_EQ(ds.size(), 2u);
  const std::size_t l = fm.index_of("l"), n = fm.index_of("n"), t = fm.index_of("t");
  EXPECT_EQ(ds[0].delta, (std::vector<Binding>{{t, 1}}));
  EXPECT_EQ(ds[0].suggested, (std::vector<Binding>{{t, 0}}));
  EXPECT_EQ(ds[1].delta, (std::vector<Binding>{{l, 0}, {n, 1}}));
  EXPECT_EQ(ds[1].suggested, (std::vector<Binding>{{l, 1}, {n, 0}}));
  for (const Diagnosis& d : ds) {
    EXPECT_TRUE(cf.satisfied_by(d.witness.values));
    const Requirements repaired = apply_diagnosis(fm, cr, d);
    EXPECT_FALSE(testing::textbook_enumerate(fm, repaired).empty());
  }
  EXPECT_EQ(apply_diagnosis(fm, cr, ds[0]).get("t"), std::optional<Value>(0));
  EXPECT_EQ(apply_diagnosis(fm, cr, ds[0]).size(), cr.size());
}

TEST(Diagnose, ConsistentYieldsEmptyDelta) {
  const FeatureModel fm = testing::survey_model();
  const auto configs = all_of(translate(fm));
  const auto ds = diagnose(fm, {{"s", 1}, {"p", 1}, {"n", 1}, {"mm", 0}}, configs);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_TRUE(ds[0].delta.empty());
  EXPECT_TRUE(diagnose(fm, {}, configs)[0].delta.empty());
}

TEST(Diagnose, RootAgainstEveryConfiguration) {
  const FeatureModel fm = testing::survey_model();
  const auto configs = all_of(translate(fm));
  const auto ds = diagnose(fm, {{"s", 0}}, configs);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].delta, (std::vector<Binding>{{0, 0}}));
  EXPECT_EQ(ds[0].suggested, (std::vector<Binding>{{0, 1}}));
}

TEST(Diagnose, Errors) {
  const FeatureModel fm = testing::survey_model();
  EXPECT_THROW(diagnose(fm, {{"s", 1}}, std::span<const Configuration>{}), Error);
  const auto configs = all_of(translate(fm));
  EXPECT_THROW(diagnose(fm, {{"nope", 1}}, configs), NotFound);
}

TEST(Diagnose, MinimalityAndRepairProperty) {
  Rng rng(5);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const FeatureModel fm = random_model(seed, {.features = 3 + seed % 10, .ctc_ratio = 0.3});
    const ConstraintSet cf = translate(fm);
    const auto configs = all_of(cf);
    if (configs.empty()) continue;
    for (int k = 0; k < 5; ++k) {
      const Requirements cr = testing::random_requirements(fm, rng, fm.size());
      const auto ds = diagnose(fm, cr, configs, 1000);
      ASSERT_FALSE(ds.empty());
      const bool consistent = !testing::textbook_enumerate(fm, cr).empty();
      EXPECT_EQ(ds[0].delta.empty(), consistent);
      for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_FALSE(testing::textbook_enumerate(fm, apply_diagnosis(fm, cr, ds[i])).empty());
        if (i > 0) EXPECT_LE(ds[i - 1].delta.size(), ds[i].delta.size());
        for (std::size_t j = 0; j < ds.size(); ++j) {
          if (i == j) continue;
          // No delta contains another.
          const auto& a = ds[i].delta;
          const auto& b = ds[j].delta;
          EXPECT_FALSE(std::includes(a.begin(), a.end(), b.begin(), b.end()));
        }
      }
    }
  }
}

TEST(DiagnoseModel, SourcesAndLimits) {
  const ConstraintSet cf = translate(testing::survey_model());
  const Requirements cr{{"t", 1}, {"n", 1}};
  const DiagnosisReport full = diagnose_model(cf, cr);
  EXPECT_EQ(full.source, "all-configs");
  EXPECT_TRUE(full.complete);
  EXPECT_EQ(full.scanned, 15u);
  ASSERT_EQ(full.diagnoses.size(), 2u);

  DiagnoseOptions stream;
  stream.all_configs_limit = 0;
  const DiagnosisReport partial = diagnose_model(cf, cr, stream);
  EXPECT_EQ(partial.source, "per-feature stream");
  EXPECT_EQ(partial.scanned, 15u);
  ASSERT_EQ(partial.diagnoses.size(), full.diagnoses.size());
  for (std::size_t i = 0; i < full.diagnoses.size(); ++i)
    EXPECT_EQ(partial.diagnoses[i].delta, full.diagnoses[i].delta);

  DiagnoseOptions capped;
  capped.max_results = 1;
  EXPECT_EQ(diagnose_model(cf, cr, capped).diagnoses.size(), 1u);
}

TEST(DiagnoseModel, LargeModelUsesStream) {
  const ConstraintSet cf = translate(random_model(3, {.features = 60, .ctc_ratio = 0.0}));
  const DiagnosisReport r = diagnose_model(cf, {{"f0", 0}});
  EXPECT_EQ(r.source, "per-feature stream");
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.scanned, 1000u);
  ASSERT_FALSE(r.diagnoses.empty());
  EXPECT_EQ(r.diagnoses[0].delta, (std::vector<Binding>{{0, 0}}));
}

}  // namespace
}  // namespace fmcq
