#include <gtest/gtest.h>

#include "common.hpp"

using namespace xproj;
using namespace xproj::testing;

namespace {

const Axis all_axes[] = {Axis::Self,   Axis::Child,    Axis::Descendant,    Axis::DescendantOrSelf,
                         Axis::Parent, Axis::Ancestor, Axis::AncestorOrSelf};

std::vector<NodeTest> tests_for(const Grammar& g)
{
    std::vector<NodeTest> out{NodeTest::wildcard(), NodeTest::text(), NodeTest::node(), NodeTest::named("nosuch")};
    for (const auto& rule : g.rules())
        if (rule.is_element() && !rule.label.is_wildcard())
            out.push_back(NodeTest::named(rule.label.tag_name()));
    return out;
}

RuleSet subset(std::uint32_t mask, std::uint32_t n)
{
    RuleSet s;
    for (std::uint32_t i = 0; i < n; ++i)
        if (mask >> i & 1)
            s.insert(RuleId{i});
    return s;
}

}  // namespace

TEST(StepTransition, Examples)
{
    Grammar g = g0();
    EXPECT_EQ(step_transition({r(1)}, Axis::Child, NodeTest::named("a"), g), RuleSet{r(2)});
    EXPECT_EQ(step_transition({r(3)}, Axis::Parent, NodeTest::wildcard(), g), RuleSet{r(2)});
    EXPECT_EQ(step_transition({r(2)}, Axis::Self, NodeTest::named("b"), g), RuleSet{});
    EXPECT_EQ(step_transition({r(1)}, Axis::Descendant, NodeTest::wildcard(), g), (RuleSet{r(2), r(3), r(5)}));
}

TEST(StepTransition, Tests)
{
    Grammar g = g0();
    EXPECT_EQ(step_transition({r(3)}, Axis::Child, NodeTest::text(), g), RuleSet{r(4)});
    EXPECT_EQ(step_transition({r(3)}, Axis::Child, NodeTest::wildcard(), g), RuleSet{});
    EXPECT_EQ(step_transition({r(2)}, Axis::Child, NodeTest::node(), g), (RuleSet{r(3), r(5)}));
    EXPECT_EQ(step_transition({r(4)}, Axis::AncestorOrSelf, NodeTest::node(), g), (RuleSet{r(1), r(2), r(3), r(4)}));
}

TEST(StepTransition, UpwardAxesIgnoreUnreachableParents)
{
    Grammar g = parse_dtd("<!ELEMENT r (b)> <!ELEMENT orphan (b)> <!ELEMENT b EMPTY>");
    RuleId b = g.rules_of(*g.find_name("B"))[0];
    RuleSet parents = step_transition({b}, Axis::Parent, NodeTest::wildcard(), g);
    ASSERT_EQ(parents.size(), 1u);
    EXPECT_EQ(g.rule(*parents.begin()).label.tag_name(), "r");
}

TEST(StepTransition, ChildParentDuality)
{
    for (const char* name : {"g0", "any", "recursive", "mixed"}) {
        Grammar g = data_grammar(name);
        const RuleSet& live = g.reachable_from_start();
        for (std::uint32_t a = 0; a < g.rule_count(); ++a)
            for (std::uint32_t b = 0; b < g.rule_count(); ++b) {
                if (!live.count(RuleId{a}))
                    continue;
                bool down = step_transition({RuleId{a}}, Axis::Child, NodeTest::node(), g).count(RuleId{b});
                bool up = step_transition({RuleId{b}}, Axis::Parent, NodeTest::node(), g).count(RuleId{a});
                EXPECT_EQ(down, up) << name << " " << a << " " << b;
            }
    }
}

TEST(StepTransition, Monotone)
{
    Grammar g = g0();
    const auto n = static_cast<std::uint32_t>(g.rule_count());
    auto tests = tests_for(g);
    for (Axis axis : all_axes)
        for (const auto& t : tests)
            for (std::uint32_t small = 0; small < (1u << n); ++small)
                for (std::uint32_t big = small; big < (1u << n); big = (big + 1) | small) {
                    RuleSet lo = step_transition(subset(small, n), axis, t, g);
                    RuleSet hi = step_transition(subset(big, n), axis, t, g);
                    ASSERT_TRUE(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()))
                        << axis_name(axis) << " " << small << " " << big;
                }
}

TEST(InferTypes, Examples)
{
    Grammar g = g0();
    EXPECT_EQ(infer_types(approximate_to_ell("/doc/a/b"), g), RuleSet{r(3)});
    EXPECT_EQ(infer_types(approximate_to_ell("/doc/c"), g), RuleSet{});
    EXPECT_EQ(infer_types(approximate_to_ell("/doc/a[c]"), g), RuleSet{r(2)});
    EXPECT_EQ(infer_types(approximate_to_ell("//text()"), g), (RuleSet{r(4), r(6)}));
    EXPECT_EQ(infer_types(approximate_to_ell("/doc/a[d]"), g), RuleSet{});
    EXPECT_EQ(infer_types(approximate_to_ell("/doc/a[d or c]/b"), g), RuleSet{r(3)});

    Grammar any = any_grammar();
    EXPECT_EQ(infer_types(approximate_to_ell("//a/b"), any), RuleSet{RuleId{1}});
    EXPECT_EQ(any.rule(RuleId{1}).label, Label::wildcard());
}

TEST(InferProjector, Examples)
{
    Grammar g = g0();
    EXPECT_EQ(infer_projector(approximate_to_ell("/doc/a/b"), g).kept, (RuleSet{r(1), r(2), r(3), r(4)}));
    EXPECT_EQ(infer_projector(approximate_to_ell("/doc/a[c]/b"), g).kept, (RuleSet{r(1), r(2), r(3), r(4), r(5)}));
    EXPECT_EQ(infer_projector(approximate_to_ell("/doc/c"), g).kept, RuleSet{});
    EXPECT_EQ(infer_projector(approximate_to_ell("//c"), g).kept, (RuleSet{r(1), r(2), r(5), r(6)}));
    EXPECT_EQ(infer_projector(approximate_to_ell("//b/parent::a"), g).kept, g.all_rules());

    Grammar any = any_grammar();
    EXPECT_EQ(infer_projector(approximate_to_ell("//a/b"), any).kept, any.all_rules());
}

TEST(InferProjector, BatchIsUnionOfQueries)
{
    Grammar g = g0();
    std::vector<QueryEll> qs{approximate_to_ell("/doc/a/b"), approximate_to_ell("//c")};
    EXPECT_EQ(infer_projector(qs, g).kept, g.all_rules());
}

TEST(InferProjector, ContainsClosedResultTypes)
{
    for (const char* name : {"g0", "any", "xmark", "recursive", "mixed"}) {
        Grammar g = data_grammar(name);
        for (const auto& q : data_queries(name)) {
            QueryEll ell = approximate_to_ell(q);
            RuleSet kept = infer_projector(ell, g).kept;
            RuleSet closed = reachable_rules(g, infer_types(ell, g));
            EXPECT_TRUE(std::includes(kept.begin(), kept.end(), closed.begin(), closed.end()))
                << name << ": " << q.source;
        }
    }
}

TEST(InferProjector, UntypedDegeneracy)
{
    Grammar any = any_grammar();
    for (const auto& q : data_queries("any")) {
        QueryEll ell = approximate_to_ell(q);
        if (infer_types(ell, any).empty())
            continue;
        EXPECT_EQ(infer_projector(ell, any).kept, any.all_rules()) << q.source;
    }
}

TEST(ProjectorText, RoundTrip)
{
    for (const char* name : {"g0", "any", "xmark", "recursive", "mixed"}) {
        Grammar g = data_grammar(name);
        std::vector<QueryEll> qs;
        for (const auto& q : data_queries(name))
            qs.push_back(approximate_to_ell(q));
        Projector p = infer_projector(qs, g);
        std::string text = projector_to_text(p);
        Projector back = parse_projector(text);
        EXPECT_EQ(back.kept, p.kept) << name;
        EXPECT_EQ(projector_to_text(back), text);
    }
}

TEST(ProjectorText, Format)
{
    Projector p = infer_projector(approximate_to_ell("/doc/a/b"), g0());
    EXPECT_EQ(projector_to_text(p),
              "start: Doc\n"
              "+ Doc -> doc [ A* ]\n"
              "+ A -> a [ B, C? ]\n"
              "+ B -> b [ TB* ]\n"
              "+ TB -> String\n"
              "- C -> c [ TC* ]\n"
              "- TC -> String\n");
    EXPECT_THROW(parse_projector(grammar_to_text(g0())), SyntaxError);
}

TEST(Minimality, Examples)
{
    Grammar g = g0();
    std::vector<QueryEll> q1{approximate_to_ell("/doc/a/b")};
    Projector p1 = infer_projector(q1, g);
    auto m = minimality_check(p1, q1, 200);
    EXPECT_TRUE(m.minimal());
    EXPECT_EQ(m.documents, 200u);

    Projector extra = p1;
    extra.kept.insert(r(5));
    m = minimality_check(extra, q1, 200);
    EXPECT_EQ(m.outcome, MinimalityResult::Outcome::Witness);
    EXPECT_EQ(m.witness, r(5));

    EXPECT_TRUE(minimality_check(Projector{g, {}}, {}, 10).minimal());
}

TEST(Minimality, BudgetExhausted)
{
    std::vector<QueryEll> q1{approximate_to_ell("/doc/a/b")};
    Projector p1 = infer_projector(q1, g0());
    EXPECT_EQ(minimality_check(p1, q1, 0).outcome, MinimalityResult::Outcome::BudgetExhausted);
}
