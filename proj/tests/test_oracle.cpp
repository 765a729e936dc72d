#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "common.hpp"

using namespace xproj;
using namespace xproj::testing;

namespace {

NodeSet ell(std::string_view q, const Document& d) { return eval_ell(approximate_to_ell(q), d); }

RefSet full_nodes(std::string_view q, const Document& d)
{
    return std::get<RefSet>(eval_full(xpath::parse_query(q), d));
}

const char* const sample =
    "<doc><a><b>x</b><c>y</c></a><a><b>lorem ipsum</b></a><a id=\"k\"><b>42</b><c>x</c></a></doc>";

}  // namespace

TEST(EvalEll, RunningExample)
{
    Document d = parse_document(std::string_view(d0_xml));
    // Pre-order: 0 document, 1 doc, 2 a, 3 b, 4 "x", 5 c, 6 "y".
    EXPECT_EQ(ell("/doc/a/b", d), NodeSet{3});
    EXPECT_EQ(ell("self::node()", d), NodeSet{0});
    EXPECT_EQ(ell("/doc/a[c]/b", d), NodeSet{3});
    EXPECT_EQ(ell("/doc/a[c]/b", parse_document(std::string_view("<doc><a><b>x</b></a></doc>"))), NodeSet{});
}

TEST(EvalEll, Axes)
{
    Document d = parse_document(std::string_view(d0_xml));
    EXPECT_EQ(ell("//text()", d), (NodeSet{4, 6}));
    EXPECT_EQ(ell("/doc/descendant::*", d), (NodeSet{2, 3, 5}));
    EXPECT_EQ(ell("/doc/descendant-or-self::*", d), (NodeSet{1, 2, 3, 5}));
    EXPECT_EQ(ell("//b/parent::a", d), NodeSet{2});
    EXPECT_EQ(ell("//text()/ancestor::*", d), (NodeSet{1, 2, 3, 5}));
    EXPECT_EQ(ell("//c/ancestor-or-self::node()", d), (NodeSet{0, 1, 2, 5}));
    EXPECT_EQ(ell("/doc/a/self::b", d), NodeSet{});
    // Union: set semantics in document order.
    EXPECT_EQ(ell("//c | /doc/a/b | //b", d), (NodeSet{3, 5}));
}

TEST(EvalEll, Predicates)
{
    Document d = parse_document(std::string_view(sample));
    EXPECT_EQ(ell("/doc/a[c and b]", d).size(), 2u);
    EXPECT_EQ(ell("/doc/a[c or b]", d).size(), 3u);
    EXPECT_EQ(ell("/doc/a[b[text()] and not(c)]", d).size(), 3u);  // not() approximates to "always"
    EXPECT_EQ(ell("/doc/a[d]", d).size(), 0u);
}

TEST(EvalFull, PositionsAndFunctions)
{
    Document d = parse_document(std::string_view(sample));
    EXPECT_EQ(full_nodes("/doc/a[2]/b", d).size(), 1u);
    EXPECT_EQ(full_nodes("/doc/a[last()]/@id", d).size(), 1u);
    EXPECT_EQ(full_nodes("/doc/a[not(c)]", d).size(), 1u);
    EXPECT_EQ(full_nodes("//b[contains(., 'ips')]", d).size(), 1u);
    EXPECT_EQ(full_nodes("//b/following::c[1]", d).size(), 2u);
    EXPECT_EQ(full_nodes("(//b)[last()]", d).size(), 1u);
    EXPECT_EQ(full_nodes("//c/preceding-sibling::b", d).size(), 2u);
    EXPECT_EQ(full_nodes("//a[@id='k']/c", d).size(), 1u);
    EXPECT_EQ(std::get<double>(eval_full(xpath::parse_query("count(//a)"), d)), 3.0);
    EXPECT_EQ(std::get<double>(eval_full(xpath::parse_query("sum(//b[. = 42])"), d)), 42.0);
    EXPECT_EQ(std::get<std::string>(eval_full(xpath::parse_query("string(/doc/a[2])"), d)), "lorem ipsum");
    EXPECT_EQ(std::get<std::string>(eval_full(xpath::parse_query("substring('12345', 1.5, 2.6)"), d)), "234");
    EXPECT_EQ(std::get<std::string>(eval_full(xpath::parse_query("normalize-space('  a  b ')"), d)), "a b");
    EXPECT_EQ(std::get<std::string>(eval_full(xpath::parse_query("translate('bar','abc','ABC')"), d)), "BAr");
    EXPECT_EQ(std::get<std::string>(eval_full(xpath::parse_query("string(1 div 0)"), d)), "Infinity");
    EXPECT_EQ(std::get<std::string>(eval_full(xpath::parse_query("string(-0.5 * 3)"), d)), "-1.5");
    EXPECT_TRUE(std::get<bool>(eval_full(xpath::parse_query("//b = 'x' and not(//b = 'z')"), d)));
    EXPECT_TRUE(std::get<bool>(eval_full(xpath::parse_query("//b > 41"), d)));
    EXPECT_EQ(std::get<double>(eval_full(xpath::parse_query("round(-2.5)"), d)), -2.0);
}

TEST(EvalFull, FragmentAgreesWithEll)
{
    // On fragment queries without attributes the two evaluators coincide.
    Grammar g = g0();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        Document d = generate_document(g, cfg);
        for (const char* q : {"/doc/a/b", "//c/ancestor-or-self::node()", "/doc/a[b and (c or b/parent::a)]",
                              "//text()/ancestor::*", "/doc/descendant::b/self::b"}) {
            NodeSet viaEll = ell(q, d);
            RefSet viaFull = full_nodes(q, d);
            ASSERT_EQ(viaFull.size(), viaEll.size()) << q;
            for (std::size_t i = 0; i < viaEll.size(); ++i)
                EXPECT_EQ(viaFull[i].node, viaEll[i]);
        }
    }
}

TEST(Generate, ShortestDerivationAtDepthOne)
{
    GenConfig cfg;
    cfg.max_depth = 1;
    EXPECT_EQ(serialize(generate_document(g0(), cfg)), "<doc></doc>");
}

TEST(Generate, ValidAndCoveringOverThousandSeeds)
{
    Grammar g = g0();
    RuleSet used;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        Document d = generate_document(g, cfg);
        Validation v = validate_tree(d, g);
        ASSERT_TRUE(v) << seed << ": " << v.reason;
        for (NodeId id = 1; id < d.size(); ++id)
            if (auto rule = (*v.interpretation)[id])
                used.insert(*rule);
    }
    EXPECT_EQ(used, g.all_rules());
}

TEST(Generate, FixturesAndUntypedGrammar)
{
    for (const char* name : {"any", "xmark", "recursive", "mixed"}) {
        Grammar g = data_grammar(name);
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            GenConfig cfg;
            cfg.seed = seed;
            Document d = generate_document(g, cfg);
            Validation v = validate_tree(d, g);
            ASSERT_TRUE(v) << name << " " << seed << ": " << v.reason;
        }
    }
}

TEST(Generate, Deterministic)
{
    Grammar g = data_grammar("xmark");
    GenConfig cfg;
    cfg.seed = 11;
    cfg.max_nodes = 500;
    EXPECT_EQ(serialize(generate_document(g, cfg)), serialize(generate_document(g, cfg)));
    GenConfig other = cfg;
    other.seed = 12;
    EXPECT_NE(serialize(generate_document(g, cfg)), serialize(generate_document(g, other)));
}

TEST(Generate, NodeCapBoundsSize)
{
    Grammar g = data_grammar("xmark");
    GenConfig cfg;
    cfg.max_nodes = 100;
    for (cfg.seed = 0; cfg.seed < 20; ++cfg.seed)
        EXPECT_LT(generate_document(g, cfg).size(), 400u);
}

TEST(Generate, NoFiniteDerivation)
{
    Grammar g = parse_dtd("<!ELEMENT a (b)> <!ELEMENT b (a)>");
    try {
        generate_document(g, GenConfig{});
        FAIL();
    } catch (const GenerationError& e) {
        EXPECT_NE(std::string(e.what()).find("A"), std::string::npos) << e.what();
    }
}

TEST(Enumerate, DistinctValidInSizeOrder)
{
    Grammar g = g0();
    auto docs = enumerate_documents(g, 200, 64);
    ASSERT_EQ(docs.size(), 200u);
    std::set<std::string> seen;
    std::size_t last = 0;
    for (const auto& d : docs) {
        EXPECT_TRUE(validate_tree(d, g));
        EXPECT_TRUE(seen.insert(serialize(d)).second);
        EXPECT_GE(d.size(), last);
        last = d.size();
    }
    EXPECT_EQ(serialize(docs.front()), "<doc></doc>");
}

TEST(Soundness, RunningExample)
{
    Grammar g = g0();
    auto r = check_soundness(g, {xpath::parse_query("/doc/a/b")}, 100, GenConfig{});
    EXPECT_TRUE(r.pass) << r.reason;
    EXPECT_EQ(r.line(), "PASS n=100");
}

TEST(Soundness, FaultInjectionFindsCounterexample)
{
    Grammar g = g0();
    Projector broken = projector_of(g, {1, 3, 4});  // pi1 without r2
    auto r = check_projector(broken, {xpath::parse_query("/doc/a/b")}, 100, GenConfig{});
    ASSERT_FALSE(r.pass);
    EXPECT_EQ(r.query, "/doc/a/b");
    EXPECT_TRUE(std::filesystem::exists(r.document_path));
    EXPECT_EQ(r.line().rfind("FAIL seed=", 0), 0u);
    Document witness = parse_document(std::string_view(slurp(r.document_path)));
    EXPECT_FALSE(ell("/doc/a/b", witness).empty());
}

TEST(Soundness, UntypedPrunesNothing)
{
    auto r = check_soundness(any_grammar(), {xpath::parse_query("//a/b")}, 50, GenConfig{});
    EXPECT_TRUE(r.pass) << r.reason;
    EXPECT_EQ(r.bytes_in, r.bytes_out);
}

TEST(Soundness, IdentityPruningIsANoOp)
{
    for (const char* name : {"g0", "mixed"}) {
        Grammar g = data_grammar(name);
        Projector all{g, g.all_rules()};
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            GenConfig cfg;
            cfg.seed = seed;
            Document d = generate_document(g, cfg);
            PrunedDocument p = prune_document(d, all);
            EXPECT_EQ(serialize(p.doc), serialize(d));
            for (const auto& q : data_queries(name)) {
                QueryEll e = approximate_to_ell(q);
                NodeSet a = eval_ell(e, d), b = eval_ell(e, p.doc);
                for (auto& n : b)
                    n = p.origin[n];
                EXPECT_EQ(a, b) << q.source;
            }
        }
    }
}

TEST(Soundness, OriginMappingIsOrderPreserving)
{
    Grammar g = data_grammar("xmark");
    Projector p = infer_projector(approximate_to_ell("//item/name"), g);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_nodes = 400;
        Document d = generate_document(g, cfg);
        PrunedDocument pruned = prune_document(d, p);
        ASSERT_EQ(pruned.origin.size(), pruned.doc.size());
        for (std::size_t i = 1; i < pruned.origin.size(); ++i)
            EXPECT_LT(pruned.origin[i - 1], pruned.origin[i]);
    }
}

TEST(Soundness, FixtureBatches)
{
    for (const char* name : {"g0", "any", "recursive", "mixed"}) {
        GenConfig cfg;
        cfg.max_nodes = 300;
        auto r = check_soundness(data_grammar(name), data_queries(name), 50, cfg);
        EXPECT_TRUE(r.pass) << name << ": " << r.line() << " " << r.reason;
    }
}
