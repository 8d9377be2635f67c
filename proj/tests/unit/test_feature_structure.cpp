#include <gtest/gtest.h>

#include <random>

#include "anyparse/feature_structure.hpp"
#include "anyparse/fs_notation.hpp"
#include "fs_oracle.hpp"

namespace anyparse {
namespace {

FeatureStructure fs(std::string_view text) { return parse_feature_structure(text); }

TEST(Unify, EmptyIsIdentity) {
  const auto x = fs("[subj: #1[num: sg], agr: #1, tense: past]");
  EXPECT_EQ(*unify(FeatureStructure(), x), x);
  EXPECT_EQ(*unify(x, FeatureStructure()), x);
}

TEST(Unify, AtomClashReportsPath) {
  auto r = unify(fs("[num: sg]"), fs("[num: pl]"));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.failure().path, (Path{"num"}));
  EXPECT_EQ(r.failure().reason, "atom clash: sg vs pl");
}

TEST(Unify, AtomVersusComplex) {
  auto r = unify(fs("[agr: sg]"), fs("[agr: [num: sg]]"));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.failure().path, (Path{"agr"}));
  EXPECT_EQ(r.failure().reason, "atom vs complex");
}

TEST(Unify, LeftmostShortestFailure) {
  // Clashes at <a x y> and <b>; the shorter one wins.  Among equal lengths the
  // feature-order first wins.
  auto r = unify(fs("[a: [x: [y: p]], b: p, c: p]"), fs("[a: [x: [y: q]], b: q, c: q]"));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.failure().path, (Path{"b"}));
}

TEST(Unify, CoreferencePropagates) {
  const auto a = fs("[subj: #1[num: sg], agr: #1]");
  const auto b = fs("[agr: [pers: 3rd]]");
  auto r = unify(a, b);
  ASSERT_TRUE(r);
  EXPECT_EQ(to_string(*r), "[agr: #1[num: sg, pers: 3rd], subj: #1]");
  EXPECT_EQ(*follow(*r, {"subj"}), *follow(*r, {"agr"}));
  EXPECT_EQ(*r, fs("[subj: #1[num: sg, pers: 3rd], agr: #1]"));
}

TEST(Unify, CoreferencePropagationToAtoms) {
  auto r = unify(fs("[a: #1[], b: #1]"), fs("[b: x]"));
  ASSERT_TRUE(r);
  EXPECT_EQ(*follow(*r, {"a"}), *follow(*r, {"b"}));
  EXPECT_TRUE(r->is_atomic(*follow(*r, {"a"})));
}

TEST(Unify, InputsUntouched) {
  const auto a = fs("[subj: #1[num: sg], agr: #1]");
  const auto b = fs("[agr: [pers: 3rd]]");
  const auto a0 = copy(a), b0 = copy(b);
  (void)unify(a, b);
  EXPECT_TRUE(isomorphic(a, a0));
  EXPECT_TRUE(isomorphic(b, b0));
}

TEST(Unify, CycleThrows) {
  EXPECT_THROW((void)unify(fs("[a: #1[], b: [c: #1]]"), fs("[a: #2[], b: #2]")),
               CyclicStructureError);
}

TEST(Subsumes, Basics) {
  EXPECT_TRUE(subsumes(FeatureStructure(), fs("[a: b]")));
  EXPECT_TRUE(subsumes(fs("[num: sg]"), fs("[num: sg, pers: 3rd]")));
  EXPECT_FALSE(subsumes(fs("[num: sg, pers: 3rd]"), fs("[num: sg]")));
}

TEST(Subsumes, SharedVersusEqualCopies) {
  EXPECT_FALSE(subsumes(fs("[a: #1[], b: #1]"), fs("[a: [f: v], b: [f: v]]")));
  EXPECT_TRUE(subsumes(fs("[a: [f: v], b: [f: v]]"), fs("[a: #1[f: v], b: #1]")));
}

TEST(Subsumes, EmptyNodeUnderAtom) {
  EXPECT_TRUE(subsumes(fs("[a: []]"), fs("[a: x]")));
  EXPECT_FALSE(subsumes(fs("[a: x]"), fs("[a: []]")));
}

TEST(Disjunct, PicksAlternative) {
  Disjunction d({fs("[num: sg]"), fs("[num: pl]")}, "test");
  EXPECT_FALSE(unify_one_disjunct(fs("[num: pl]"), d, 0));
  EXPECT_EQ(*unify_one_disjunct(fs("[num: pl]"), d, 1), fs("[num: pl]"));
  EXPECT_EQ(*unify_one_disjunct(FeatureStructure(), d, 0), fs("[num: sg]"));
  EXPECT_THROW((void)unify_one_disjunct(FeatureStructure(), d, 2), std::out_of_range);
  EXPECT_THROW(Disjunction({}, "x"), std::invalid_argument);
}

TEST(Follow, Paths) {
  const auto x = fs("[a: [b: x]]");
  auto n = follow(x, {"a", "b"});
  ASSERT_TRUE(n);
  EXPECT_EQ(x.node(*n).atom, "x");
  EXPECT_EQ(follow(x, {}), x.root());
  EXPECT_FALSE(follow(fs("[a: x]"), {"a", "b"}));
  EXPECT_FALSE(follow(fs("[a: x]"), {"z"}));
}

TEST(Copy, PreservesSharing) {
  EXPECT_TRUE(copy(FeatureStructure()).is_empty());
  const auto x = fs("[subj: #1[num: sg], agr: #1]");
  const auto c = copy(x);
  EXPECT_EQ(follow(c, {"subj"}), follow(c, {"agr"}));
  EXPECT_TRUE(isomorphic(*unify(c, x), x));
}

TEST(Embed, WrapsStructure) {
  EXPECT_EQ(fs("[num: sg]").embed({"1", "head-fs"}), fs("[1: [head-fs: [num: sg]]]"));
}

TEST(Notation, RoundTrip) {
  for (const char* text : {"[]", "x", "[a: #1[b: c], d: #1]", "[a: #1 x, b: #1]",
                           "[agr: #1[], s: [agr: #1], t: [t: #2[], u: #2]]"}) {
    const auto x = fs(text);
    EXPECT_EQ(fs(to_string(x)), x) << text;
  }
  EXPECT_EQ(to_string(fs("[b: 1, a: 2]")), "[a: 2, b: 1]");
  EXPECT_THROW(fs("[a: b"), NotationError);
  EXPECT_THROW(fs("[a: #1, b: #1[x: y], c: #1[z: w]]"), NotationError);
  EXPECT_THROW(fs("[a: b, a: c]"), NotationError);
  EXPECT_THROW(fs("#1[a: #1]"), CyclicStructureError);
}

// Randomized agreement with the path-constraint oracle.

class FsProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20241017};
  FeatureStructure gen() { return oracle::random_structure(rng); }
};

TEST_F(FsProperties, AgreesWithOracle) {
  for (int i = 0; i < 2000; ++i) {
    const auto a = gen(), b = gen();
    const auto expected = oracle::unify(a, b);
    if (std::holds_alternative<oracle::OracleCycle>(expected)) {
      EXPECT_THROW((void)unify(a, b), CyclicStructureError) << to_string(a) << " + " << to_string(b);
      continue;
    }
    auto r = unify(a, b);
    ASSERT_EQ(r.ok(), std::holds_alternative<oracle::NormalForm>(expected))
        << to_string(a) << " + " << to_string(b);
    if (r) EXPECT_EQ(oracle::normal_form(*r), std::get<oracle::NormalForm>(expected));
  }
}

TEST_F(FsProperties, SubsumptionAgreesWithOracle) {
  for (int i = 0; i < 2000; ++i) {
    const auto a = gen(), b = gen();
    EXPECT_EQ(subsumes(a, b), oracle::subsumes(oracle::normal_form(a), oracle::normal_form(b)))
        << to_string(a) << " vs " << to_string(b);
  }
}

TEST_F(FsProperties, NormalFormRoundTrip) {
  for (int i = 0; i < 500; ++i) {
    const auto a = gen();
    EXPECT_EQ(oracle::realize(oracle::normal_form(a)), a);
    EXPECT_EQ(fs(to_string(a)), a);
  }
}

}  // namespace
}  // namespace anyparse
