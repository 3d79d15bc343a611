#include "taml/csv.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace taml {

std::string double_to_string(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("double_to_string failed");
    return std::string(buf, ptr);
}

std::string traces_to_csv(const std::vector<OptimizationTrace>& traces) {
    std::string out = "algo,seed,eval_ordinal,value,best_so_far\n";
    for (const auto& t : traces) {
        const std::vector<double> best = t.best_so_far();
        for (std::size_t i = 0; i < t.entries.size(); ++i) {
            const auto& e = t.entries[i];
            out += t.algo;
            out += ',';
            out += std::to_string(t.seed);
            out += ',';
            out += std::to_string(e.ordinal);
            out += ',';
            out += double_to_string(e.value);
            out += ',';
            out += double_to_string(best[i]);
            out += '\n';
        }
    }
    return out;
}

std::vector<TraceRow> parse_traces_csv(const std::string& text) {
    std::vector<TraceRow> rows;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("algo,", 0) == 0) continue;  // header
        }
        std::istringstream ls(line);
        std::string field;
        TraceRow row;
        if (!std::getline(ls, row.algo, ',')) throw std::invalid_argument("trace CSV: bad row '" + line + "'");
        const auto next_field = [&]() -> std::string {
            if (!std::getline(ls, field, ',')) throw std::invalid_argument("trace CSV: bad row '" + line + "'");
            return field;
        };
        row.seed = std::stoull(next_field());
        row.ordinal = std::stoll(next_field());
        row.value = std::stod(next_field());
        row.best = std::stod(next_field());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
    std::string out = "epoch,loss,accuracy\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += double_to_string(history[i].loss);
        out += ',';
        out += double_to_string(history[i].accuracy);
        out += '\n';
    }
    return out;
}

}  // namespace taml
