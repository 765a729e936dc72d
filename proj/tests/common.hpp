#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "xproj/xproj.hpp"

namespace xproj::testing {

inline constexpr const char* g0_dtd =
    "<!ELEMENT doc (a*)> <!ELEMENT a (b, c?)> <!ELEMENT b (#PCDATA)> <!ELEMENT c (#PCDATA)>";
inline constexpr const char* d0_xml = "<doc><a><b>x</b><c>y</c></a></doc>";

inline Grammar g0() { return parse_dtd(g0_dtd); }

// r1..r6 of the running example.
inline RuleId r(int i) { return RuleId{static_cast<std::uint32_t>(i - 1)}; }

inline std::string data_path(const std::string& name) { return std::string(XPROJ_DATA_DIR) + "/" + name; }

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Grammar data_grammar(const std::string& name)
{
    if (name == "any")
        return any_grammar();
    return parse_dtd(slurp(data_path(name + ".dtd")));
}

inline std::vector<xpath::FullQuery> data_queries(const std::string& name)
{
    return xpath::parse_query_batch(slurp(data_path(name + ".queries")));
}

inline Projector projector_of(const Grammar& g, std::initializer_list<int> rules)
{
    Projector p{g, {}};
    for (int i : rules)
        p.kept.insert(r(i));
    return p;
}

}  // namespace xproj::testing
