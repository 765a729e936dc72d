#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "common.hpp"

using namespace xproj;
using namespace xproj::testing;

namespace {

std::string stream_prune(const std::string& xml, const Projector& p, PruneStats* stats = nullptr,
                         InvalidPolicy policy = InvalidPolicy::Strict)
{
    std::istringstream in(xml);
    std::ostringstream out;
    PruneStats s = prune_stream(in, out, p, policy);
    if (stats)
        *stats = s;
    return out.str();
}

std::string tree_prune(const std::string& xml, const Projector& p)
{
    return serialize(prune_tree(parse_document(std::string_view(xml)), p).doc);
}

ContentRegex erase(const Grammar& g, const ContentRegex& re, const RuleSet& kept)
{
    using K = ContentRegex::Kind;
    auto items = [&] {
        std::vector<ContentRegex> out;
        for (const auto& i : re.items())
            out.push_back(erase(g, i, kept));
        return out;
    };
    switch (re.kind()) {
    case K::Atom: {
        auto rules = g.rules_of(re.name());
        auto n = std::count_if(rules.begin(), rules.end(), [&](RuleId r) { return kept.count(r) != 0; });
        if (n == 0)
            return ContentRegex::epsilon();
        if (static_cast<std::size_t>(n) < rules.size())
            return ContentRegex::opt(re);
        return re;
    }
    case K::Seq: return ContentRegex::seq(items());
    case K::Alt: return ContentRegex::alt(items());
    case K::Star: return ContentRegex::star(erase(g, re.body(), kept));
    case K::Plus: return ContentRegex::plus(erase(g, re.body(), kept));
    case K::Opt: return ContentRegex::opt(erase(g, re.body(), kept));
    default: return re;
    }
}

// The grammar restricted to kept rules; names without kept rules generate
// the empty forest.
Grammar erasure(const Projector& p)
{
    const Grammar& g = p.grammar;
    GrammarBuilder b;
    for (std::size_t i = 0; i < g.name_count(); ++i)
        b.name(g.name(NameId{static_cast<std::uint32_t>(i)}));
    for (NameId s : g.start())
        b.add_start(s);
    for (RuleId r : p.kept) {
        const Rule& rule = g.rule(r);
        if (rule.is_text())
            b.add_text(rule.name);
        else
            b.add_element(rule.name, rule.label, erase(g, rule.content, p.kept));
    }
    return std::move(b).build();
}

}  // namespace

TEST(PruneStream, RunningExample)
{
    Grammar g = g0();
    EXPECT_EQ(stream_prune(d0_xml, projector_of(g, {1, 2, 3, 4})), "<doc><a><b>x</b></a></doc>");
    EXPECT_EQ(stream_prune(d0_xml, projector_of(g, {1, 2, 3, 4, 5, 6})), d0_xml);
    EXPECT_EQ(stream_prune(d0_xml, projector_of(g, {1, 2, 3, 4, 5})), "<doc><a><b>x</b><c></c></a></doc>");
    EXPECT_EQ(stream_prune(d0_xml, projector_of(g, {})), "");
}

TEST(PruneTree, RunningExample)
{
    Grammar g = g0();
    EXPECT_EQ(tree_prune(d0_xml, projector_of(g, {1, 2, 3, 4})), "<doc><a><b>x</b></a></doc>");
    EXPECT_EQ(tree_prune(d0_xml, projector_of(g, {1, 2, 3, 4, 5})), "<doc><a><b>x</b><c></c></a></doc>");
    PrunedDocument empty = prune_tree(parse_document(std::string_view(d0_xml)), projector_of(g, {}));
    EXPECT_EQ(empty.doc.root_element(), no_node);
    EXPECT_EQ(serialize(empty.doc), "");
}

TEST(PruneTree, InvalidDocumentIsReported)
{
    try {
        tree_prune("<doc><a><c/></a></doc>", projector_of(g0(), {1, 2}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("/doc/a"), std::string::npos) << e.what();
    }
}

TEST(PruneTree, NonStreamableGrammar)
{
    // Tag a is generated by two names; only validation can tell them apart.
    GrammarBuilder b;
    NameId F = b.name("F"), A = b.name("A"), B = b.name("B"), T = b.name("T");
    b.add_start(F);
    b.add_element(F, Label::tag("f"), ContentRegex::seq({ContentRegex::atom(A), ContentRegex::atom(B)}));
    b.add_element(A, Label::tag("a"), ContentRegex::epsilon());
    b.add_element(B, Label::tag("a"), ContentRegex::star(ContentRegex::atom(T)));
    b.add_text(T);
    Grammar g = std::move(b).build();
    ASSERT_FALSE(is_streamable(g));
    EXPECT_THROW(PruneTable(Projector{g, RuleSet{}}), Error);

    Projector p{g, {RuleId{0}, RuleId{2}, RuleId{3}}};
    EXPECT_EQ(tree_prune("<f><a/><a>t</a></f>", p), "<f><a>t</a></f>");
    // prune_document falls back to the tree pruner.
    EXPECT_EQ(serialize(prune_document(parse_document(std::string_view("<f><a/><a>t</a></f>")), p).doc),
              "<f><a>t</a></f>");
}

TEST(PruneStream, StatsAndIdentity)
{
    Grammar g = g0();
    PruneStats s;
    stream_prune(d0_xml, projector_of(g, {1, 2, 3, 4}), &s);
    EXPECT_EQ(s.elements_in, 4u);
    EXPECT_EQ(s.elements_out, 3u);
    EXPECT_EQ(s.text_bytes_in, 2u);
    EXPECT_EQ(s.text_bytes_out, 1u);
    EXPECT_EQ(s.max_depth, 3u);
    EXPECT_EQ(s.to_line(),
              "elements_in=4 elements_out=3 text_bytes_in=2 text_bytes_out=1 max_depth=3 dropped=0");

    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        std::string xml = serialize(generate_document(g, cfg));
        EXPECT_EQ(stream_prune(xml, Projector{g, g.all_rules()}, &s), xml);
        EXPECT_EQ(s.elements_in, s.elements_out);
        EXPECT_EQ(s.text_bytes_in, s.text_bytes_out);
    }
}

TEST(PruneStream, InvalidPolicies)
{
    Grammar g = g0();
    Projector all{g, g.all_rules()};
    const std::string bad = "<doc><a><b>x</b><zz><b/></zz></a><a><b/></a></doc>";
    try {
        stream_prune(bad, all);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("/doc/a/zz"), std::string::npos) << e.what();
    }
    PruneStats s;
    EXPECT_EQ(stream_prune(bad, all, &s, InvalidPolicy::Drop), "<doc><a><b>x</b></a><a><b></b></a></doc>");
    EXPECT_EQ(s.dropped, 1u);

    EXPECT_THROW(stream_prune("<doc>text</doc>", all), Error);
    EXPECT_EQ(stream_prune("<doc>text</doc>", all, &s, InvalidPolicy::Drop), "<doc></doc>");
}

TEST(PruneStream, WhitespaceCommentsAndAttributes)
{
    Grammar g = parse_dtd("<!ELEMENT doc (a*)> <!ELEMENT a (#PCDATA)> <!ATTLIST a id CDATA #IMPLIED>");
    Projector all{g, g.all_rules()};
    EXPECT_EQ(stream_prune("<doc>\n  <a id=\"1\" x=\"&amp;\">t<!--c--><?pi d?></a>\n</doc>", all),
              "<doc><a id=\"1\" x=\"&amp;\">t<!--c--><?pi d?></a></doc>");
    // Comments under pruned elements disappear with them.
    Projector doc_only{g, {RuleId{0}}};
    EXPECT_EQ(stream_prune("<doc><!--k--><a><!--c--></a></doc>", doc_only), "<doc><!--k--></doc>");
}

TEST(PruneAgreement, GeneratedRunningExample)
{
    Grammar g = g0();
    Projector p1 = projector_of(g, {1, 2, 3, 4});
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        Document d = generate_document(g, cfg);
        std::string xml = serialize(d);
        EXPECT_EQ(stream_prune(xml, p1), serialize(prune_tree(d, p1).doc)) << seed;
    }
}

TEST(PruneAgreement, RandomProjectorsOnFixtures)
{
    std::mt19937_64 rng(7);
    for (const char* name : {"xmark", "recursive", "mixed", "any"}) {
        Grammar g = data_grammar(name);
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            Projector p{g, {}};
            for (std::uint32_t i = 0; i < g.rule_count(); ++i)
                if (rng() % 4 != 0)
                    p.kept.insert(RuleId{i});
            GenConfig cfg;
            cfg.seed = seed;
            cfg.max_nodes = 300;
            Document d = generate_document(g, cfg);
            ASSERT_EQ(stream_prune(serialize(d), p), serialize(prune_tree(d, p).doc)) << name << " " << seed;
        }
    }
}

TEST(PruneValidity, PrunedDocumentsMatchTheErasure)
{
    for (const char* name : {"g0", "xmark", "recursive", "mixed"}) {
        Grammar g = data_grammar(name);
        for (const auto& q : data_queries(name)) {
            Projector p = infer_projector(approximate_to_ell(q), g);
            bool root_kept = std::any_of(g.start_rules().begin(), g.start_rules().end(),
                                         [&](RuleId r) { return p.keeps(r); });
            if (!root_kept)
                continue;
            Grammar erased = erasure(p);
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                GenConfig cfg;
                cfg.seed = seed;
                cfg.max_nodes = 200;
                PrunedDocument pruned = prune_document(generate_document(g, cfg), p);
                Validation v = validate_tree(pruned.doc, erased);
                ASSERT_TRUE(v) << name << ": " << q.source << " seed " << seed << " at " << v.path << ": "
                               << v.reason;
            }
        }
    }
}

TEST(PruneStream, DepthIsTheOnlyState)
{
    Grammar g = parse_dtd(synthetic_dtd());
    Projector p = infer_projector(approximate_to_ell("//leaf"), g);
    for (std::uint64_t kb : {16, 256}) {
        std::stringstream doc;
        write_synthetic(doc, kb << 10);
        std::ostringstream out;
        PruneStats s = prune_stream(doc, out, p);
        EXPECT_EQ(s.max_depth, 8u);
        EXPECT_LT(s.elements_out, s.elements_in);
    }
}
