// taml — tensor-train optimization and model compression toolkit.
//
// Subcommands: optimize, train, eval, compress, plot, gen-data, gen-table.
// Exit codes: 0 success, 2 usage, 3 input/objective failure, 4 plan mismatch.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "taml/baselines.hpp"
#include "taml/compress.hpp"
#include "taml/container.hpp"
#include "taml/csv.hpp"
#include "taml/model_io.hpp"
#include "taml/nn.hpp"
#include "taml/svg.hpp"
#include "taml/synthetic.hpp"
#include "taml/tabular.hpp"
#include "taml/tetraopt.hpp"

using namespace taml;
using nlohmann::json;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t at = 0;
    while (at < text.size()) {
        std::size_t comma = text.find(',', at);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(at, comma - at);
        const std::size_t dash = tok.find('-');
        if (dash != std::string::npos && dash > 0) {
            const std::uint64_t lo = std::stoull(tok.substr(0, dash));
            const std::uint64_t hi = std::stoull(tok.substr(dash + 1));
            if (hi < lo) throw std::invalid_argument("--seeds: descending range");
            for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        } else if (!tok.empty()) {
            seeds.push_back(std::stoull(tok));
        }
        at = comma + 1;
    }
    if (seeds.empty()) throw std::invalid_argument("--seeds: no seeds given");
    return seeds;
}

struct ResolvedObjective {
    Objective fn;
    Shape dims;
    OptMode mode = OptMode::maximize;
    SearchSpace space;  // labeled decode for best_point when available
    bool has_space = false;
    double table_best = 0.0;
    bool has_table_best = false;
};

ResolvedObjective resolve_objective(const std::string& spec, Index dims, Index points, std::uint64_t obj_seed) {
    ResolvedObjective out;
    if (spec.rfind("synthetic:", 0) == 0) {
        const std::string name = spec.substr(10);
        SyntheticObjective s = [&] {
            try {
                return make_synthetic(name, dims, points, obj_seed);
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
        }();
        out.fn = std::move(s.fn);
        out.dims = std::move(s.dims);
        out.mode = s.mode;
        return out;
    }
    if (spec.rfind("tabular:", 0) == 0) {
        const std::string path = spec.substr(8);
        TabularBenchmark bench = tabular_from_container(container_read(read_file_bytes(path)));
        out.fn = bench.objective();
        out.dims = bench.space.grid_shape();
        out.mode = OptMode::maximize;
        out.space = bench.space;
        out.has_space = true;
        out.table_best = bench.max_value();
        out.has_table_best = true;
        return out;
    }
    throw InputError("objective must be synthetic:<name> or tabular:<file>, got '" + spec + "'");
}

json point_to_json(const ResolvedObjective& obj, const MultiIndex& idx) {
    json arr = json::array();
    if (obj.has_space) {
        for (const auto& v : obj.space.decode(idx))
            std::visit([&](const auto& x) { arr.push_back(x); }, v);
    } else {
        for (Index i : idx) arr.push_back(i);
    }
    return arr;
}

Dataset load_dataset(const std::string& path) {
    return dataset_from_container(container_read(read_file_bytes(path)));
}

ModelGraph load_model(const std::string& path) {
    try {
        return model_from_container(container_read(read_file_bytes(path)));
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
}

int run(int argc, char** argv) {
    CLI::App app{"tensor-train optimization and model compression toolkit"};
    app.require_subcommand(1);

    // ---- optimize ----
    auto* opt = app.add_subcommand("optimize", "run a black-box optimizer over a discrete space");
    std::string opt_space, opt_objective, opt_algo = "tetraopt", opt_seeds = "0", opt_out;
    Index opt_budget = 1000, opt_rank = 4, opt_dims = 3, opt_points = 11;
    int opt_sweeps = 4, opt_parallelism = 1, opt_candidates = 24;
    Index opt_startup = 20;
    double opt_delta = 0.01, opt_beta = 1.0, opt_gamma = 0.25;
    std::string opt_transform = "exp_shift";
    std::uint64_t opt_obj_seed = 0;
    opt->add_option("--space", opt_space, "search-space JSON file (validated against the objective)");
    opt->add_option("--objective", opt_objective, "synthetic:<name> or tabular:<file>")->required();
    opt->add_option("--algo", opt_algo, "tetraopt|random|tpe")->check(CLI::IsMember({"tetraopt", "random", "tpe"}));
    opt->add_option("--budget", opt_budget, "max unique objective evaluations");
    opt->add_option("--rank", opt_rank, "tetraopt cross rank");
    opt->add_option("--sweeps", opt_sweeps, "tetraopt sweep count");
    opt->add_option("--delta", opt_delta, "maxvol tolerance");
    opt->add_option("--transform", opt_transform, "tetraopt value transform")
        ->check(CLI::IsMember({"identity", "exp_shift"}));
    opt->add_option("--beta", opt_beta, "exp_shift sharpening");
    opt->add_option("--gamma", opt_gamma, "tpe good-quantile");
    opt->add_option("--candidates", opt_candidates, "tpe candidates per step");
    opt->add_option("--startup", opt_startup, "tpe random startup evaluations");
    opt->add_option("--seeds", opt_seeds, "comma list and/or lo-hi ranges");
    opt->add_option("--parallelism", opt_parallelism, "worker threads per query batch");
    opt->add_option("--dims", opt_dims, "synthetic objective dimensions");
    opt->add_option("--points", opt_points, "synthetic grid points per dimension");
    opt->add_option("--obj-seed", opt_obj_seed, "synthetic objective seed");
    opt->add_option("--out", opt_out, "trace CSV path");

    // ---- train ----
    auto* tr = app.add_subcommand("train", "train a model on a dataset container");
    std::string tr_data, tr_arch = "bars_cnn", tr_out, tr_history;
    int tr_epochs = 12;
    double tr_lr = 0.05, tr_momentum = 0.9;
    Index tr_batch = 32;
    std::uint64_t tr_seed = 0;
    tr->add_option("--data", tr_data, "dataset container")->required();
    tr->add_option("--arch", tr_arch, "'bars_cnn' or an architecture JSON file");
    tr->add_option("--epochs", tr_epochs);
    tr->add_option("--lr", tr_lr);
    tr->add_option("--momentum", tr_momentum);
    tr->add_option("--batch", tr_batch);
    tr->add_option("--seed", tr_seed);
    tr->add_option("--out", tr_out, "trained model container")->required();
    tr->add_option("--history", tr_history, "per-epoch loss/accuracy CSV");

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "measure model accuracy on a dataset");
    std::string ev_model, ev_data;
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--data", ev_data)->required();

    // ---- compress ----
    auto* cp = app.add_subcommand("compress", "apply a compression plan to a model");
    std::string cp_model, cp_plan, cp_out, cp_report;
    cp->add_option("--model", cp_model)->required();
    cp->add_option("--plan", cp_plan, "plan JSON file")->required();
    cp->add_option("--out", cp_out, "compressed model container")->required();
    cp->add_option("--report", cp_report, "compression report JSON");

    // ---- plot ----
    auto* pl = app.add_subcommand("plot", "render best-so-far traces as SVG");
    std::vector<std::string> pl_traces;
    std::string pl_out;
    pl->add_option("--traces", pl_traces, "trace CSV files")->required()->delimiter(',');
    pl->add_option("--out", pl_out, "output SVG")->required();

    // ---- gen-data ----
    auto* gd = app.add_subcommand("gen-data", "generate a synthetic image dataset container");
    std::string gd_kind = "bars", gd_out;
    Index gd_n = 512, gd_size = 8;
    double gd_noise = 0.1;
    std::uint64_t gd_seed = 0;
    gd->add_option("--kind", gd_kind)->check(CLI::IsMember({"bars"}));
    gd->add_option("--n", gd_n, "sample count (even)");
    gd->add_option("--size", gd_size, "image side length");
    gd->add_option("--noise", gd_noise);
    gd->add_option("--seed", gd_seed);
    gd->add_option("--out", gd_out)->required();

    // ---- gen-table ----
    auto* gt = app.add_subcommand("gen-table", "generate a planted-optimum tabular benchmark");
    std::string gt_out;
    Index gt_dims = 6, gt_choices = 5;
    double gt_noise = 0.3;
    std::uint64_t gt_seed = 0;
    gt->add_option("--dims", gt_dims);
    gt->add_option("--choices", gt_choices);
    gt->add_option("--noise", gt_noise);
    gt->add_option("--seed", gt_seed);
    gt->add_option("--out", gt_out)->required();

    app.parse(argc, argv);

    if (opt->parsed()) {
        ResolvedObjective obj = resolve_objective(opt_objective, opt_dims, opt_points, opt_obj_seed);
        if (!opt_space.empty()) {
            SearchSpace declared = SearchSpace::from_json(read_file_text(opt_space));
            if (declared.grid_shape() != obj.dims)
                throw InputError("--space grid " + shape_to_string(declared.grid_shape()) +
                                 " does not match the objective grid " + shape_to_string(obj.dims));
            if (!obj.has_space) {
                obj.space = std::move(declared);
                obj.has_space = true;
            }
        }
        const std::vector<std::uint64_t> seeds = parse_seeds(opt_seeds);

        std::vector<OptimizationTrace> traces;
        for (std::uint64_t seed : seeds) {
            if (opt_algo == "tetraopt") {
                OptConfig cfg;
                cfg.rank = opt_rank;
                cfg.sweeps = opt_sweeps;
                cfg.budget = opt_budget;
                cfg.seed = seed;
                cfg.mode = obj.mode;
                cfg.delta = opt_delta;
                cfg.transform =
                    opt_transform == "identity" ? OptConfig::Transform::identity : OptConfig::Transform::exp_shift;
                cfg.beta = opt_beta;
                cfg.parallelism = opt_parallelism;
                traces.push_back(tetraopt_optimize(obj.fn, obj.dims, cfg));
            } else if (opt_algo == "random") {
                traces.push_back(random_search(obj.fn, obj.dims, opt_budget, seed, obj.mode, opt_parallelism));
            } else {
                TpeConfig cfg;
                cfg.budget = opt_budget;
                cfg.seed = seed;
                cfg.mode = obj.mode;
                cfg.gamma = opt_gamma;
                cfg.candidates = opt_candidates;
                cfg.startup = opt_startup;
                cfg.parallelism = opt_parallelism;
                traces.push_back(tpe_optimize(obj.fn, obj.dims, cfg));
            }
        }

        if (!opt_out.empty()) write_file_text(opt_out, traces_to_csv(traces));

        const TraceEntry* best = nullptr;
        Index evals = 0;
        for (const auto& t : traces) {
            evals += static_cast<Index>(t.entries.size());
            const TraceEntry* b = t.best();
            if (b && (!best || improves(obj.mode, b->value, best->value))) best = b;
        }
        json summary{{"best_value", best ? best->value : 0.0},
                     {"best_point", best ? point_to_json(obj, best->index) : json::array()},
                     {"evals", evals}};
        if (obj.has_table_best) summary["table_best"] = obj.table_best;
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (tr->parsed()) {
        Dataset data = load_dataset(tr_data);
        ModelGraph model = tr_arch == "bars_cnn" ? make_bars_cnn(tr_seed, data.images.shape()[2])
                                                 : arch_from_json(read_file_text(tr_arch), tr_seed);
        TrainConfig cfg;
        cfg.epochs = tr_epochs;
        cfg.lr = tr_lr;
        cfg.momentum = tr_momentum;
        cfg.batch = tr_batch;
        cfg.seed = tr_seed;
        TrainResult result = train(model, data, cfg);
        write_file_bytes(tr_out, container_write(model_to_container(result.model)));
        if (!tr_history.empty()) write_file_text(tr_history, history_to_csv(result.history));
        json summary{{"epochs", tr_epochs},
                     {"final_loss", result.history.empty() ? 0.0 : result.history.back().loss},
                     {"final_accuracy", result.history.empty() ? 0.0 : result.history.back().accuracy}};
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (ev->parsed()) {
        ModelGraph model = load_model(ev_model);
        Dataset data = load_dataset(ev_data);
        json summary{{"accuracy", accuracy(model, data)}};
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (cp->parsed()) {
        ModelGraph model = load_model(cp_model);
        CompressionPlan plan = CompressionPlan::from_json(read_file_text(cp_plan));
        CompressResult result = compress_model(model, plan);
        write_file_bytes(cp_out, container_write(model_to_container(result.model)));
        if (!cp_report.empty()) write_file_text(cp_report, result.report.to_json());
        json summary{{"coefficient", result.report.coefficient},
                     {"params_before", result.report.params_before},
                     {"params_after", result.report.params_after}};
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (pl->parsed()) {
        std::vector<PlotSeries> series;
        for (const std::string& path : pl_traces) {
            const auto rows = [&] {
                try {
                    return parse_traces_csv(read_file_text(path));
                } catch (const std::invalid_argument& e) {
                    throw InputError(e.what());
                }
            }();
            // one polyline per (algo, seed) group, in file order
            std::vector<std::pair<std::string, std::uint64_t>> order;
            std::map<std::pair<std::string, std::uint64_t>, std::vector<double>> groups;
            for (const auto& row : rows) {
                const auto key = std::make_pair(row.algo, row.seed);
                if (!groups.contains(key)) order.push_back(key);
                groups[key].push_back(row.best);
            }
            for (const auto& key : order)
                series.push_back(PlotSeries{key.first + " seed " + std::to_string(key.second), groups[key]});
        }
        if (series.empty()) throw InputError("no trace rows found in the given files");
        write_file_text(pl_out, plot_traces_svg(series));
        json summary{{"series", series.size()}, {"out", pl_out}};
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (gd->parsed()) {
        Dataset data = [&] {
            try {
                return gen_bars(gd_n, gd_size, gd_noise, gd_seed);
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
        }();
        write_file_bytes(gd_out, container_write(dataset_to_container(data)));
        json summary{{"n", gd_n}, {"size", gd_size}, {"out", gd_out}};
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (gt->parsed()) {
        PlantedTable table = [&] {
            try {
                return make_planted_table(gt_dims, gt_choices, gt_seed, gt_noise);
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
        }();
        write_file_bytes(gt_out, container_write(tabular_to_container(table.bench)));
        json planted = json::array();
        for (Index i : table.planted) planted.push_back(i);
        json summary{{"grid_size", table.bench.space.grid_size()},
                     {"planted", planted},
                     {"best_value", table.bench.max_value()},
                     {"out", gt_out}};
        std::cout << summary.dump() << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << e.what() << "\n";
            return 0;  // --help
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const PlanError& e) {
        std::cerr << "plan error: " << e.what() << "\n";
        return 4;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
