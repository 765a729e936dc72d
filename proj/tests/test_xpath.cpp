#include <gtest/gtest.h>

#include "common.hpp"

using namespace xproj;
using namespace xproj::testing;
using xpath::ExprKind;
using xpath::FullAxis;
using xpath::FullTest;

namespace {

std::string approx(std::string_view q) { return ell_to_text(approximate_to_ell(q)); }

}  // namespace

TEST(ParseQuery, ChildSteps)
{
    auto q = xpath::parse_query("/doc/a/b");
    ASSERT_EQ(q.expr.kind, ExprKind::Path);
    const auto& p = q.expr.path;
    EXPECT_TRUE(p.absolute);
    ASSERT_EQ(p.steps.size(), 3u);
    const char* tags[] = {"doc", "a", "b"};
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(p.steps[i].axis, FullAxis::Child);
        EXPECT_EQ(p.steps[i].test.kind, FullTest::Kind::Name);
        EXPECT_EQ(p.steps[i].test.name, tags[i]);
        EXPECT_TRUE(p.steps[i].predicates.empty());
    }
}

TEST(ParseQuery, DoubleSlashExpands)
{
    auto q = xpath::parse_query("//c");
    const auto& p = q.expr.path;
    ASSERT_EQ(p.steps.size(), 2u);
    EXPECT_EQ(p.steps[0].axis, FullAxis::DescendantOrSelf);
    EXPECT_EQ(p.steps[0].test.kind, FullTest::Kind::Node);
    EXPECT_EQ(p.steps[1].axis, FullAxis::Child);
    EXPECT_EQ(p.steps[1].test.name, "c");
}

TEST(ParseQuery, UnionWithConjunction)
{
    auto q = xpath::parse_query("/doc/a[c and b]/b | //c");
    ASSERT_EQ(q.expr.kind, ExprKind::Union);
    ASSERT_EQ(q.expr.operands.size(), 2u);
    const auto& first = q.expr.operands[0].path;
    ASSERT_EQ(first.steps.size(), 3u);
    ASSERT_EQ(first.steps[1].predicates.size(), 1u);
    const auto& pred = first.steps[1].predicates[0];
    ASSERT_EQ(pred.kind, ExprKind::And);
    ASSERT_EQ(pred.operands.size(), 2u);
    EXPECT_EQ(pred.operands[0].kind, ExprKind::Path);
    EXPECT_EQ(pred.operands[0].path.steps[0].test.name, "c");
    EXPECT_EQ(pred.operands[1].path.steps[0].test.name, "b");
}

TEST(ParseQuery, Abbreviations)
{
    auto q = xpath::parse_query("./../@id");
    const auto& s = q.expr.path.steps;
    ASSERT_EQ(s.size(), 3u);
    EXPECT_FALSE(q.expr.path.absolute);
    EXPECT_EQ(s[0].axis, FullAxis::Self);
    EXPECT_EQ(s[0].test.kind, FullTest::Kind::Node);
    EXPECT_EQ(s[1].axis, FullAxis::Parent);
    EXPECT_EQ(s[2].axis, FullAxis::Attribute);
    EXPECT_EQ(s[2].test.name, "id");
}

TEST(ParseQuery, AllThirteenAxes)
{
    const char* axes[] = {"ancestor", "ancestor-or-self", "attribute", "child", "descendant",
                          "descendant-or-self", "following", "following-sibling", "namespace",
                          "parent", "preceding", "preceding-sibling", "self"};
    for (const char* a : axes) {
        auto q = xpath::parse_query(std::string(a) + "::node()");
        ASSERT_EQ(q.expr.path.steps.size(), 1u);
        EXPECT_EQ(xpath::axis_name(q.expr.path.steps[0].axis), a);
    }
}

TEST(ParseQuery, FunctionsAndOperators)
{
    auto q = xpath::parse_query("count(//a) > 2 and not(contains(/doc, 'x'))");
    ASSERT_EQ(q.expr.kind, ExprKind::And);
    EXPECT_EQ(q.expr.operands[0].kind, ExprKind::Greater);
    EXPECT_EQ(q.expr.operands[0].operands[0].kind, ExprKind::Function);
    EXPECT_EQ(q.expr.operands[0].operands[0].text, "count");
    EXPECT_EQ(q.expr.operands[1].text, "not");
    // Operator names are names where an operand is expected.
    auto r = xpath::parse_query("/div/mod * 2");
    EXPECT_EQ(r.expr.kind, ExprKind::Multiply);
    EXPECT_EQ(r.expr.operands[0].path.steps[1].test.name, "mod");
}

TEST(ParseQuery, SyntaxErrorPosition)
{
    try {
        xpath::parse_query("/doc/a[");
        FAIL();
    } catch (const xpath::XPathError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_EQ(e.column(), 8u);
    }
    EXPECT_THROW(xpath::parse_query("/doc/a]"), xpath::XPathError);
    EXPECT_THROW(xpath::parse_query(""), xpath::XPathError);
}

TEST(ParseQuery, UnsupportedProductionIsNamed)
{
    try {
        xpath::parse_query("$x/a");
        FAIL();
    } catch (const xpath::XPathError& e) {
        EXPECT_NE(std::string(e.what()).find("unsupported grammar production: variable reference"),
                  std::string::npos);
    }
}

TEST(ParseQuery, Batch)
{
    auto qs = xpath::parse_query_batch("# comment\n/doc/a\n\n  //c  \n# another\n");
    ASSERT_EQ(qs.size(), 2u);
    EXPECT_EQ(qs[0].source, "/doc/a");
    EXPECT_EQ(qs[1].source, "//c");
    try {
        xpath::parse_query_batch("/doc\n/doc/[\n");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(EllText, CanonicalForms)
{
    EXPECT_EQ(approx("/doc/a/b"), "/child::doc/child::a/child::b");
    EXPECT_EQ(approx("/doc/a[c and b]/b | //c"),
              "/child::doc/child::a[child::c and child::b]/child::b | /descendant-or-self::node()/child::c");
    EXPECT_EQ(approx("/doc/a[b or c]"), "/child::doc/child::a[child::b or child::c]");
    EXPECT_EQ(approx("/doc/a[b and (c or b)]"), "/child::doc/child::a[child::b and (child::c or child::b)]");
    EXPECT_EQ(approx("/doc/a/text()"), "/child::doc/child::a/child::text()");
    EXPECT_EQ(approx("/*/a/.."), "/child::*/child::a/parent::node()");
}

TEST(Approximate, FragmentIsKept)
{
    for (const char* q : {"/doc/a/b", "/doc/descendant::b/ancestor-or-self::a", "//b/ancestor::doc/self::doc",
                          "/doc/a[b[text()] and (c or b/parent::a)]"}) {
        auto ell = approximate_to_ell(q);
        ASSERT_EQ(ell.branches.size(), 1u) << q;
        EXPECT_EQ(approximate_to_ell(ell_to_text(ell)), ell) << q;
    }
}

TEST(Approximate, PositionalPredicate)
{
    // Deciding position() needs the candidate's siblings that share its test.
    EXPECT_EQ(approx("/doc/a[position()=2]/b"), "/child::doc/child::a[parent::node()/child::a]/child::b");
    EXPECT_EQ(approx("/doc/a[last()]"), "/child::doc/child::a[parent::node()/child::a]");
}

TEST(Approximate, FunctionArgumentsKeepSubtrees)
{
    EXPECT_EQ(approx("/doc/a[contains(c,'y')]/b"),
              "/child::doc/child::a[child::c/descendant-or-self::node()]/child::b");
    EXPECT_EQ(approx("/doc/a[b = 'x']"), "/child::doc/child::a[child::b/descendant-or-self::node()]");
    EXPECT_EQ(approx("/doc/a[not(c)]"), "/child::doc/child::a[self::node() or child::c/descendant-or-self::node()]");
}

TEST(Approximate, SiblingAndDocumentOrderAxes)
{
    EXPECT_EQ(approx("//b/following-sibling::c"),
              "/descendant-or-self::node()/child::b/parent::node()/child::c");
    EXPECT_EQ(approx("//b/preceding::c"), "/descendant-or-self::node()/child::b/ancestor-or-self::node()/"
                                          "parent::node()/child::node()/descendant-or-self::c");
}

TEST(Approximate, AttributesAreDropped)
{
    EXPECT_EQ(approx("/doc/a/@id"), "/child::doc/child::a");
    EXPECT_EQ(approx("//a[@id]"), "/descendant-or-self::node()/child::a");
}

TEST(Approximate, AbsolutePathsInPredicatesBecomeBranches)
{
    EXPECT_EQ(approx("/doc/a[/doc/a/c]/b"), "/child::doc/child::a/child::c | /child::doc/child::a/child::b");
}

TEST(Approximate, FallbacksAndConstants)
{
    EXPECT_EQ(approx("id('x')"), "/descendant-or-self::node()");
    EXPECT_EQ(approx("count(//a)"), "/descendant-or-self::node()/child::a/descendant-or-self::node()");
    EXPECT_TRUE(approximate_to_ell("1 + 2").branches.empty());
}

TEST(Approximate, TotalAndIdempotentOnBatches)
{
    for (const char* name : {"g0", "any", "xmark", "recursive", "mixed"}) {
        for (const auto& q : data_queries(name)) {
            QueryEll ell = approximate_to_ell(q);
            if (ell.branches.empty())
                continue;
            QueryEll again = approximate_to_ell(ell_to_text(ell));
            EXPECT_EQ(again, ell) << name << ": " << q.source << " => " << ell_to_text(ell);
        }
    }
}
