#include <doctest.h>

#include <cctype>
#include <sstream>
#include <vector>

#include "taml/csv.hpp"
#include "taml/svg.hpp"

using namespace taml;

namespace {

// Minimal XML well-formedness check: balanced non-self-closing tags.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        const std::size_t end = text.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;  // declaration or comment
        const bool closing = tag[0] == '/';
        const bool self_closing = tag.back() == '/';
        std::string name;
        for (std::size_t j = closing ? 1 : 0; j < tag.size() && (std::isalnum(static_cast<unsigned char>(tag[j])) || tag[j] == '-'); ++j)
            name += tag[j];
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
    }
    return stack.empty();
}

}  // namespace

TEST_CASE("double_to_string round-trips exactly") {
    for (double v : {0.0, 1.0, -3.25, 0.1, 93.7, 1e-12, 12345.6789}) {
        CHECK(std::stod(double_to_string(v)) == v);
    }
}

TEST_CASE("trace CSV uses the pinned schema and parses back") {
    OptimizationTrace t;
    t.algo = "random";
    t.seed = 42;
    t.mode = OptMode::maximize;
    t.entries = {{{0, 1}, 5.0, 1, false}, {{1, 1}, 2.5, 2, false}, {{1, 0}, 7.25, 3, false}};
    const std::string csv = traces_to_csv({t});
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "algo,seed,eval_ordinal,value,best_so_far");
    std::getline(in, line);
    CHECK(line == "random,42,1,5,5");
    std::getline(in, line);
    CHECK(line == "random,42,2,2.5,5");
    std::getline(in, line);
    CHECK(line == "random,42,3,7.25,7.25");

    const auto rows = parse_traces_csv(csv);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].algo == "random");
    CHECK(rows[1].seed == 42);
    CHECK(rows[1].ordinal == 2);
    CHECK(rows[1].value == 2.5);
    CHECK(rows[1].best == 5.0);
    CHECK_THROWS_AS((void)parse_traces_csv("algo,seed\nbroken"), std::invalid_argument);
}

TEST_CASE("history CSV lists epochs from 1") {
    const std::string csv = history_to_csv({{0.5, 0.75}, {0.25, 0.875}});
    CHECK(csv == "epoch,loss,accuracy\n1,0.5,0.75\n2,0.25,0.875\n");
}

TEST_CASE("the SVG plot is well-formed, self-contained, and labeled") {
    std::vector<PlotSeries> series{{"tetraopt seed 0", {1.0, 2.0, 2.0, 3.5}}, {"random seed 0", {0.5, 0.5, 2.2, 2.2}}};
    const std::string svg = plot_traces_svg(series);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
    CHECK(svg.find("model runs") != std::string::npos);
    CHECK(svg.find("best value") != std::string::npos);
    CHECK(svg.find("tetraopt seed 0") != std::string::npos);
    CHECK(xml_well_formed(svg));

    // the only URL is the SVG namespace; nothing external is referenced
    std::size_t http_count = 0, at = 0;
    while ((at = svg.find("http", at)) != std::string::npos) {
        ++http_count;
        at += 4;
    }
    CHECK(http_count == 1);

    // identical input produces identical bytes
    CHECK(plot_traces_svg(series) == svg);

    // labels get escaped
    const std::string escaped = plot_traces_svg({{"a<b&c", {1.0, 2.0}}});
    CHECK(escaped.find("a&lt;b&amp;c") != std::string::npos);
    CHECK(xml_well_formed(escaped));

    CHECK_THROWS_AS((void)plot_traces_svg({}), std::invalid_argument);
}
