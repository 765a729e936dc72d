// xproj: infer type projectors from a DTD and XPath queries, and prune
// XML documents with them.
//
//   xproj infer    --dtd g.dtd --query Q [--query Q…] [--queries batch] [-o projector]
//   xproj prune    (--projector P | --dtd g.dtd --query Q…) [-i in.xml] [-o out.xml]
//   xproj validate --dtd g.dtd [-i in.xml]
//   xproj gen      --dtd g.dtd [--seed S] [--max-depth D] [--max-repeat R] [-o out.xml]
//   xproj check    --dtd g.dtd --queries batch [--n N] [--seed S]
//   xproj bench    (--projector P | --dtd g.dtd --query Q…) (-i in.xml | --synthetic MB)
//
// Exit status: 0 success, 1 invalid document or failed check, 2 usage or
// format error.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xproj/xproj.hpp"

namespace {

using namespace xproj;

struct Options {
    std::string dtd;
    std::string root;
    bool any = false;
    std::vector<std::string> queries;
    std::string batch;
    std::string projector;
    std::string input = "-";
    std::string output = "-";
    std::string policy = "strict";
    bool stats = false;
    bool emit_grammar = false;
    std::uint64_t seed = 0;
    std::size_t n = 100;
    std::size_t max_depth = 12;
    std::size_t max_repeat = 3;
    std::size_t max_nodes = 0;
    std::uint64_t synthetic_mb = 0;
    int repeat = 3;
};

// Thrown for anything the user got wrong; exit status 2.
struct UsageError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path)
{
    if (path == "-") {
        std::ostringstream s;
        s << std::cin.rdbuf();
        return s.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_)
                throw UsageError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

Grammar load_grammar(const Options& o)
{
    if (o.any)
        return any_grammar();
    if (o.dtd.empty())
        throw UsageError("--dtd (or --any) is required");
    DtdOptions opts;
    if (!o.root.empty())
        opts.root = o.root;
    return parse_dtd(read_file(o.dtd), opts);
}

std::vector<xpath::FullQuery> load_queries(const Options& o)
{
    std::vector<xpath::FullQuery> qs;
    for (const auto& q : o.queries)
        qs.push_back(xpath::parse_query(q));
    if (!o.batch.empty()) {
        auto more = xpath::parse_query_batch(read_file(o.batch));
        qs.insert(qs.end(), more.begin(), more.end());
    }
    if (qs.empty())
        throw UsageError("at least one --query or a --queries file is required");
    return qs;
}

Projector infer(const Grammar& g, const std::vector<xpath::FullQuery>& qs)
{
    std::vector<QueryEll> approx;
    for (const auto& q : qs)
        approx.push_back(approximate_to_ell(q));
    return infer_projector(approx, g);
}

Projector load_projector(const Options& o)
{
    if (!o.projector.empty())
        return parse_projector(read_file(o.projector));
    return infer(load_grammar(o), load_queries(o));
}

InvalidPolicy policy_of(const Options& o)
{
    if (o.policy == "strict")
        return InvalidPolicy::Strict;
    if (o.policy == "drop")
        return InvalidPolicy::Drop;
    throw UsageError("--policy must be strict or drop");
}

int cmd_infer(const Options& o)
{
    Grammar g = load_grammar(o);
    Output out(o.output);
    if (o.emit_grammar && o.queries.empty() && o.batch.empty()) {
        out.stream() << grammar_to_text(g);
        return 0;
    }
    Projector p = infer(g, load_queries(o));
    out.stream() << projector_to_text(p);
    std::cerr << "kept " << p.kept.size() << " of " << g.rule_count() << " rules, dropped "
              << g.rule_count() - p.kept.size() << '\n';
    if (o.emit_grammar)
        std::cerr << grammar_to_text(g);
    return 0;
}

int cmd_prune(const Options& o)
{
    Projector p = load_projector(o);
    InvalidPolicy policy = policy_of(o);
    Output out(o.output);
    PruneStats stats;
    if (is_streamable(p.grammar)) {
        std::unique_ptr<std::ifstream> file;
        if (o.input != "-") {
            file = std::make_unique<std::ifstream>(o.input, std::ios::binary);
            if (!*file)
                throw UsageError("cannot read " + o.input);
        }
        stats = prune_stream(file ? *file : std::cin, out.stream(), p, policy);
    } else {
        std::cerr << "warning: grammar is not streamable; pruning in memory\n";
        Document d = parse_document(read_file(o.input));
        PrunedDocument pruned = prune_tree(d, p);
        out.stream() << serialize(pruned.doc);
        stats.elements_in = d.element_count();
        stats.elements_out = pruned.doc.element_count();
    }
    out.stream().flush();
    if (o.stats)
        std::cerr << stats.to_line() << '\n';
    return 0;
}

int cmd_validate(const Options& o)
{
    Grammar g = load_grammar(o);
    Document d = parse_document(read_file(o.input));
    Validation v = validate_tree(d, g);
    if (v) {
        std::cout << "valid\n";
        return 0;
    }
    std::cout << "invalid at " << v.path << ": " << v.reason << '\n';
    return 1;
}

GenConfig gen_config(const Options& o)
{
    GenConfig cfg;
    cfg.seed = o.seed;
    cfg.max_depth = o.max_depth;
    cfg.max_star_repeat = o.max_repeat;
    cfg.max_nodes = o.max_nodes;
    return cfg;
}

int cmd_gen(const Options& o)
{
    Output out(o.output);
    if (o.synthetic_mb) {
        write_synthetic(out.stream(), o.synthetic_mb << 20);
        return 0;
    }
    Grammar g = load_grammar(o);
    xml::Writer w(out.stream());
    generate_events(g, gen_config(o), w);
    w.flush();
    return 0;
}

int cmd_check(const Options& o)
{
    auto qs = load_queries(o);
    SoundnessReport r;
    if (!o.projector.empty())
        r = check_projector(parse_projector(read_file(o.projector)), qs, o.n, gen_config(o));
    else
        r = check_soundness(load_grammar(o), qs, o.n, gen_config(o));
    std::cout << r.line() << '\n';
    if (!r.pass)
        std::cerr << r.reason << '\n';
    return r.pass ? 0 : 1;
}

int cmd_bench(const Options& o)
{
    std::string doc;
    Projector p;
    if (o.synthetic_mb) {
        std::ostringstream s;
        write_synthetic(s, o.synthetic_mb << 20);
        doc = s.str();
        if (o.projector.empty() && o.dtd.empty() && !o.any) {
            p = infer(parse_dtd(synthetic_dtd()), load_queries(o));
        } else {
            p = load_projector(o);
        }
    } else {
        doc = read_file(o.input);
        p = load_projector(o);
    }
    std::cout << bench_prune(doc, p, o.repeat, policy_of(o)).to_line() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Type projection for XML: infer projectors from a DTD and XPath queries, prune documents"};
    app.require_subcommand(1);
    Options o;

    auto grammar_flags = [&](CLI::App* c) {
        c->add_option("--dtd", o.dtd, "DTD file");
        c->add_option("--root", o.root, "root element (default: first declared)");
        c->add_flag("--any", o.any, "use the untyped grammar X -> String | _[X*]");
    };
    auto query_flags = [&](CLI::App* c) {
        c->add_option("--query", o.queries, "XPath query (repeatable)");
        c->add_option("--queries", o.batch, "query batch file, one per line, '#' comments");
    };
    auto gen_flags = [&](CLI::App* c) {
        c->add_option("--seed", o.seed, "generator seed");
        c->add_option("--max-depth", o.max_depth, "maximum element depth");
        c->add_option("--max-repeat", o.max_repeat, "maximum star repetitions");
        c->add_option("--max-nodes", o.max_nodes, "soft cap on generated nodes (0: none)");
    };

    auto* infer_cmd = app.add_subcommand("infer", "emit the projector of a query batch");
    grammar_flags(infer_cmd);
    query_flags(infer_cmd);
    infer_cmd->add_option("-o,--output", o.output, "projector file ('-' for stdout)");
    infer_cmd->add_flag("--emit-grammar", o.emit_grammar, "also print the imported grammar");

    auto* prune_cmd = app.add_subcommand("prune", "prune a document");
    grammar_flags(prune_cmd);
    query_flags(prune_cmd);
    prune_cmd->add_option("--projector", o.projector, "projector file from 'infer'");
    prune_cmd->add_option("-i,--input", o.input, "input document ('-' for stdin)");
    prune_cmd->add_option("-o,--output", o.output, "output document ('-' for stdout)");
    prune_cmd->add_option("--policy", o.policy, "invalid input: strict or drop");
    prune_cmd->add_flag("--stats", o.stats, "print statistics to stderr");

    auto* validate_cmd = app.add_subcommand("validate", "validate a document against the grammar");
    grammar_flags(validate_cmd);
    validate_cmd->add_option("-i,--input", o.input, "input document ('-' for stdin)");

    auto* gen_cmd = app.add_subcommand("gen", "generate a valid document");
    grammar_flags(gen_cmd);
    gen_flags(gen_cmd);
    gen_cmd->add_option("--synthetic", o.synthetic_mb, "write the depth-8 synthetic document of this many MB");
    gen_cmd->add_option("-o,--output", o.output, "output document ('-' for stdout)");

    auto* check_cmd = app.add_subcommand("check", "check soundness on generated documents");
    grammar_flags(check_cmd);
    query_flags(check_cmd);
    gen_flags(check_cmd);
    check_cmd->add_option("--projector", o.projector, "check this projector instead of the inferred one");
    check_cmd->add_option("--n", o.n, "number of documents");

    auto* bench_cmd = app.add_subcommand("bench", "time pruning against parsing");
    grammar_flags(bench_cmd);
    query_flags(bench_cmd);
    bench_cmd->add_option("--projector", o.projector, "projector file from 'infer'");
    bench_cmd->add_option("-i,--input", o.input, "input document ('-' for stdin)");
    bench_cmd->add_option("--synthetic", o.synthetic_mb, "benchmark the synthetic document of this many MB");
    bench_cmd->add_option("--repeat", o.repeat, "repetitions (fastest is reported)");
    bench_cmd->add_option("--policy", o.policy, "invalid input: strict or drop");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int status = app.exit(e);
        return status == 0 ? 0 : 2;
    }

    try {
        if (*infer_cmd)
            return cmd_infer(o);
        if (*prune_cmd)
            return cmd_prune(o);
        if (*validate_cmd)
            return cmd_validate(o);
        if (*gen_cmd)
            return cmd_gen(o);
        if (*check_cmd)
            return cmd_check(o);
        return cmd_bench(o);
    } catch (const UsageError& e) {
        std::cerr << "xproj: " << e.what() << '\n';
        return 2;
    } catch (const SyntaxError& e) {
        std::cerr << "xproj: " << e.what() << '\n';
        return 2;
    } catch (const GrammarError& e) {
        std::cerr << "xproj: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        // Documents that do not match the grammar, generation failures.
        std::cerr << "xproj: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "xproj: " << e.what() << '\n';
        return 2;
    }
}
