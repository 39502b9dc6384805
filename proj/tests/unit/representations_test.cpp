#include <gtest/gtest.h>

#include <algorithm>

#include "fmcq/csp.hpp"
#include "fmcq/error.hpp"
#include "fmcq/representations.hpp"
#include "support.hpp"

namespace fmcq {
namespace {

const Requirements kExampleCr{{"s", 1}, {"p", 1}, {"n", 1}, {"mm", 0}};

std::vector<Representation> all_reprs(const ConstraintSet& cf) {
  return {build_all_configs(cf), build_per_feature(cf), build_per_feature(cf, PerFeatureOptions::all()),
          build_per_constraint(cf), build_per_constraint(cf, {.prune_pairwise = true})};
}

TEST(AllConfigs, Survey) {
  const ConstraintSet cf = translate(testing::survey_model());
  const Representation r = build_all_configs(cf);
  ASSERT_EQ(r.tables.size(), 1u);
  const Table& f = r.table("F");
  EXPECT_EQ(f.schema().attributes, (std::vector<std::string>{"s", "p", "l", "n", "t", "st", "q", "m", "mm"}));
  EXPECT_EQ(f.size(), 15u);
  const auto rows = f.rows();
  EXPECT_NE(std::find(rows.begin(), rows.end(), Tuple{1, 1, 0, 1, 0, 1, 1, 1, 0}), rows.end());
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(), std::greater<>()));
  for (const Tuple& row : rows) EXPECT_EQ(row[0], 1);
  EXPECT_TRUE(r.optimizations_applied.contains(Optimization::kRootReduction));
}

TEST(AllConfigs, VoidModelAndGuard) {
  const ConstraintSet v =
      translate(ModelBuilder().root("r").mandatory("a", "r").mandatory("b", "r").excludes("a", "b").build());
  EXPECT_TRUE(build_all_configs(v).table("F").empty());
  const ConstraintSet big = translate(random_model(1, {.features = 30}));
  try {
    build_all_configs(big);
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("configuration space too large"), std::string::npos);
  }
}

TEST(AllConfigs, EvaluatorPathMatchesScan) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ConstraintSet cf = translate(random_model(seed, {.features = 8 + seed % 8}));
    AllConfigsOptions scan, eval;
    eval.raw_scan_limit = 0;
    EXPECT_EQ(build_all_configs(cf, scan).table("F"), build_all_configs(cf, eval).table("F")) << seed;
    AllConfigsOptions no_root;
    no_root.root_reduction = false;
    EXPECT_EQ(build_all_configs(cf, no_root).table("F"), build_all_configs(cf, scan).table("F")) << seed;
  }
}

TEST(PerFeature, Tables) {
  const ConstraintSet cf = translate(testing::survey_model());
  const Representation r = build_per_feature(cf);
  ASSERT_EQ(r.tables.size(), 9u);
  for (const auto& t : r.tables) {
    EXPECT_EQ(t->schema().attributes, std::vector<std::string>{"val"});
    EXPECT_EQ(t->rows(), (std::vector<Tuple>{{1}, {0}}));
  }
  EXPECT_TRUE(r.optimizations_applied.empty());
  PerFeatureOptions root;
  root.root_reduction = true;
  EXPECT_EQ(build_per_feature(cf, root).table("s").rows(), std::vector<Tuple>{{1}});
}

TEST(PerFeature, DeadAndFalseOptionalReductions) {
  const ConstraintSet dead = translate(ModelBuilder().root("r").optional("a", "r").excludes("a", "r").build());
  const Representation rd = build_per_feature(dead, PerFeatureOptions::all());
  EXPECT_EQ(rd.table("a").rows(), std::vector<Tuple>{{0}});
  EXPECT_TRUE(rd.optimizations_applied.contains(Optimization::kDeadReduction));

  const ConstraintSet fo = translate(ModelBuilder().root("r").optional("a", "r").require("r", "a").build());
  EXPECT_EQ(build_per_feature(fo, PerFeatureOptions::all()).table("a").rows(), std::vector<Tuple>{{1}});

  // False-optional below an optional parent: fixing it to 1 would lose the parent=0 configurations.
  const ConstraintSet nested =
      translate(ModelBuilder().root("r").optional("p", "r").optional("c", "p").require("p", "c").build());
  const Representation rn = build_per_feature(nested, PerFeatureOptions::all());
  EXPECT_EQ(rn.table("c").size(), 2u);
  EXPECT_EQ(count(rn, {}), 2u);
}

TEST(PerConstraint, SurveyTables) {
  const ConstraintSet cf = translate(testing::survey_model());
  const Representation r = build_per_constraint(cf);
  EXPECT_EQ(r.table("t-st").rows(), (std::vector<Tuple>{{1, 1}, {0, 1}, {0, 0}}));
  EXPECT_EQ(r.table("n-t").rows(), (std::vector<Tuple>{{0, 1}, {1, 0}, {0, 0}}));
  EXPECT_EQ(r.table("s-p").rows(), (std::vector<Tuple>{{1, 1}, {0, 0}}));
  EXPECT_EQ(r.tables.size(), 9u);
  EXPECT_EQ(r.table("s").rows(), std::vector<Tuple>{{1}});
}

TEST(PerConstraint, LocalConsistencyAndStarEqualities) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const FeatureModel fm = random_model(seed, {.features = 3 + seed % 12, .ctc_ratio = 0.3});
    const ConstraintSet cf = translate(fm);
    const Representation r = build_per_constraint(cf);
    std::vector<std::size_t> occurrences(fm.size(), 0);
    for (const auto& t : r.tables)
      for (const auto& a : t->schema().attributes) ++occurrences[fm.index_of(a)];
    std::size_t expected_equalities = 0;
    for (std::size_t i = 0; i < fm.size(); ++i) {
      ASSERT_GE(occurrences[i], 1u);
      expected_equalities += occurrences[i] - 1;
      EXPECT_EQ(r.attr_of_feature[i].size(), occurrences[i]);
    }
    EXPECT_EQ(r.join_equalities.size(), expected_equalities);
    for (std::size_t k = 0; k < cf.size(); ++k) {
      const Table& t = *r.tables[k];
      const auto scope = cf[k].expr.features();
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << scope.size()); ++i) {
        std::vector<Value> conf(fm.size(), 0), row;
        for (std::size_t j = 0; j < scope.size(); ++j) {
          conf[scope[j]] = static_cast<Value>((i >> j) & 1);
          row.push_back(conf[scope[j]]);
        }
        const auto rows = t.rows();
        EXPECT_EQ(std::find(rows.begin(), rows.end(), row) != rows.end(), cf[k].expr.eval(conf));
      }
    }
  }
}

TEST(PerConstraint, PruningPreservesSolutions) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const ConstraintSet cf = translate(random_model(seed, {.features = 3 + seed % 12, .ctc_ratio = 0.3}));
    const Representation plain = build_per_constraint(cf);
    const Representation pruned = build_per_constraint(cf, {.prune_pairwise = true});
    EXPECT_EQ(count(plain, {}), count(pruned, {}));
    std::size_t before = 0, after = 0;
    for (const auto& t : plain.tables) before += t->size();
    for (const auto& t : pruned.tables) after += t->size();
    EXPECT_LE(after, before);
  }
}

TEST(CompileQuery, WhereClauses) {
  const ConstraintSet cf = translate(testing::survey_model());
  const auto all = compile_query(build_all_configs(cf), {kExampleCr, {}, std::nullopt});
  EXPECT_EQ(all.where.conjuncts().size(), 4u);
  EXPECT_EQ(all.select.size(), 9u);

  const auto pf = compile_query(build_per_feature(cf), {});
  EXPECT_GE(pf.where.conjuncts().size(), cf.size());
  const auto pf_cr = compile_query(build_per_feature(cf), {kExampleCr, {"s", "mm"}, 1});
  EXPECT_EQ(pf_cr.where.conjuncts().size(), pf.where.conjuncts().size() + 4);
  EXPECT_EQ(pf_cr.select, (std::vector<AttrRef>{{"s", "val"}, {"mm", "val"}}));
  EXPECT_EQ(pf_cr.limit, std::optional<std::uint64_t>(1));

  const Representation pc = build_per_constraint(cf);
  const auto pcq = compile_query(pc, {});
  EXPECT_EQ(pcq.where.conjuncts().size(), pc.join_equalities.size());
  for (const auto& c : pcq.where.conjuncts()) EXPECT_EQ(c.kind(), Predicate::Kind::kJoin);

  EXPECT_THROW(compile_query(pc, {{{"xyz", 1}}, {}, std::nullopt}), NotFound);
  EXPECT_THROW(compile_query(pc, {{}, {"xyz"}, std::nullopt}), NotFound);
}

TEST(Solve, ExampleOnEveryRepresentation) {
  const ConstraintSet cf = translate(testing::survey_model());
  for (const Representation& r : all_reprs(cf)) {
    const auto conf = solve(r, {kExampleCr, {}, std::nullopt});
    ASSERT_TRUE(conf) << to_string(r.kind);
    EXPECT_TRUE(cf.satisfied_by(conf->values));
    EXPECT_EQ(conf->values[2], 0);  // l
    EXPECT_EQ(conf->values[4], 0);  // t
    EXPECT_EQ(conf->values[7], 1);  // m
    EXPECT_EQ(count(r, {kExampleCr, {}, std::nullopt}), 2u);
    EXPECT_FALSE(solve(r, {{{"t", 1}, {"n", 1}}, {}, std::nullopt}));
    EXPECT_EQ(count(r, {{{"t", 1}, {"n", 1}}, {}, std::nullopt}), 0u);
    EXPECT_EQ(count(r, {}), 15u);
    EXPECT_EQ(count(r, {{{"mm", 0}}, {}, std::nullopt}), 5u);
    const auto any = solve(r, {});
    ASSERT_TRUE(any);
    EXPECT_TRUE(cf.satisfied_by(any->values));
  }
}

TEST(Solve, EnumerateListsBothExampleSolutions) {
  const ConstraintSet cf = translate(testing::survey_model());
  for (const Representation& r : all_reprs(cf)) {
    std::vector<Configuration> seen;
    enumerate(r, {kExampleCr, {}, std::nullopt}, [&](const Configuration& c) {
      seen.push_back(c);
      return true;
    });
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, (std::vector<Configuration>{{{1, 1, 0, 1, 0, 0, 1, 1, 0}}, {{1, 1, 0, 1, 0, 1, 1, 1, 0}}}));
  }
}

TEST(Solve, CrossRepresentationAgreement) {
  Rng rng(77);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const FeatureModel fm = random_model(seed, {.features = 1 + seed % 14, .ctc_ratio = 0.3});
    const ConstraintSet cf = translate(fm);
    const auto reprs = all_reprs(cf);
    for (int k = 0; k < 10; ++k) {
      const Requirements cr = testing::random_requirements(fm, rng, 4);
      const auto oracle = testing::textbook_enumerate(fm, cr);
      for (const Representation& r : reprs) {
        const auto conf = solve(r, {cr, {}, std::nullopt});
        ASSERT_EQ(conf.has_value(), !oracle.empty()) << to_string(r.kind) << " seed " << seed;
        if (conf) EXPECT_NE(std::find(oracle.begin(), oracle.end(), *conf), oracle.end());
        EXPECT_EQ(count(r, {cr, {}, std::nullopt}), oracle.size()) << to_string(r.kind) << " seed " << seed;
      }
    }
  }
}

}  // namespace
}  // namespace fmcq
