// fairboost command line tool.
//
//   fairboost run       --config <file> --out <dir> [--seeds N] [--jobs N]
//                       [--master-seed S]
//   fairboost transform --config <file> --algo {rw|lfr|op} --in <csv>
//                       --out <csv|json> [--dataset <id>] [--seed S]
//   fairboost evaluate  --pred <csv> --truth <csv> --groups <csv>
//   fairboost report    --results <json> --format {json|csv|markdown}
//                       [--out <dir>]
//
// Exit code 0 on success.  On failure a single-object JSON error summary
// {"error": {"code", "message"}} is printed to stderr and the exit code is
// nonzero.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairboost/experiment.hpp"
#include "fairboost/presets.hpp"
#include "fairboost/rng.hpp"

namespace fb = fairboost;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string dir_of(const std::string& path) {
    auto parent = std::filesystem::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fb::DataError("io", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Load a dataset reference: bundled preset or custom spec, optionally with
/// the CSV path replaced ("" keeps the config's path).
fb::TabularDataset load_ref(const fb::DatasetRef& ref, const std::string& csv_override,
                            std::vector<std::string>* default_map_columns) {
    std::string path = csv_override.empty() ? ref.csv_path : csv_override;
    if (!ref.preset.empty()) {
        fb::TaskPreset preset = fb::load_preset(ref.preset, path);
        if (default_map_columns) *default_map_columns = preset.map_columns;
        return std::move(preset.data);
    }
    return fb::load_csv(path, *ref.custom, nullptr);
}

// --- run ---------------------------------------------------------------

struct RunArgs {
    std::string config, out;
    int seeds = 0;        // 0 = keep config value
    int jobs = 1;
    long long master_seed = -1;  // <0 = keep config value
};

int cmd_run(const RunArgs& args) {
    fb::Config cfg = fb::Config::parse_file(args.config);
    fb::ExperimentConfig ex = fb::experiment_from_config(cfg, dir_of(args.config));
    if (args.seeds > 0) ex.n_seeds = args.seeds;
    if (args.master_seed >= 0) ex.master_seed = static_cast<std::uint64_t>(args.master_seed);

    fb::GridResult grid = fb::run_grid(ex, args.jobs);

    std::string json_path = fb::emit_report(grid, fb::ReportFormat::Json, args.out);
    std::string csv_path = fb::emit_report(grid, fb::ReportFormat::Csv, args.out);
    std::string md_path = fb::emit_report(grid, fb::ReportFormat::Markdown, args.out);

    std::size_t failures = 0, replicates = 0;
    for (const auto& cell : grid.cells) {
        replicates += cell.seeds.size();
        failures += cell.seeds.size() - cell.n_ok;
    }
    std::cout << "grid: " << grid.cells.size() << " cells x " << grid.n_seeds << " seeds, "
              << failures << "/" << replicates << " replicates failed\n";
    for (const auto& ds : grid.datasets)
        std::cout << "dataset " << ds.id << ": " << ds.used_rows << " rows used ("
                  << ds.kept_rows << " kept of " << ds.total_rows << " loaded)\n";
    std::cout << "wrote " << json_path << "\n";
    std::cout << "wrote " << csv_path << "\n";
    std::cout << "wrote " << md_path << "\n";
    return 0;
}

// --- transform -----------------------------------------------------------

struct TransformArgs {
    std::string config, algo, in, out, dataset;
    long long seed = -1;  // <0 = config master_seed
};

ordered_json model_json_rw(const fb::ReweighingModel& model) {
    ordered_json j;
    j["algorithm"] = "rw";
    j["weight_table"] = ordered_json{{"unprivileged_unfavorable", model.weight[0][0]},
                                     {"unprivileged_favorable", model.weight[0][1]},
                                     {"privileged_unfavorable", model.weight[1][0]},
                                     {"privileged_favorable", model.weight[1][1]}};
    return j;
}

ordered_json model_json_lfr(const fb::FairRepModel& model) {
    ordered_json j;
    j["algorithm"] = "lfr";
    j["k"] = model.params.k;
    j["a_x"] = model.params.a_x;
    j["a_y"] = model.params.a_y;
    j["a_z"] = model.params.a_z;
    j["iterations"] = model.iterations;
    j["final_loss"] = model.loss_trace.empty() ? 0.0 : model.loss_trace.back();
    std::size_t d = model.center.size();
    j["feature_center"] = model.center;
    j["feature_scale"] = model.scale;
    j["prototypes"] = ordered_json::array();
    for (int p = 0; p < model.params.k; ++p) {
        ordered_json row = ordered_json::array();
        for (std::size_t c = 0; c < d; ++c)
            row.push_back(model.prototypes[static_cast<std::size_t>(p) * d + c]);
        j["prototypes"].push_back(std::move(row));
    }
    j["label_scores"] = model.label_score;
    return j;
}

ordered_json model_json_op(const fb::DistMapModel& model) {
    ordered_json j;
    j["algorithm"] = "op";
    j["epsilon"] = model.params.epsilon;
    j["distortion_cap"] = model.params.distortion_cap;
    j["iterations"] = model.iterations;
    j["objective"] = model.objective;
    j["columns"] = ordered_json::array();
    for (std::size_t c = 0; c < model.domain.size(); ++c)
        j["columns"].push_back(
            ordered_json{{"name", model.domain[c].name}, {"cells", model.cell_counts[c]}});
    j["feature_cells"] = model.n_cells;
    j["constraint_report"] =
        ordered_json{{"feasible", model.certificate.feasible},
                     {"max_row_error", model.certificate.max_row_error},
                     {"max_distortion_excess", model.certificate.max_distortion_excess},
                     {"max_rate_deviation", model.certificate.max_rate_deviation}};
    // Rows indexed by (group*2 + label)*cells + cell, columns by
    // label*cells + cell.
    std::size_t cols = 2 * model.n_cells;
    j["transformation"] = ordered_json::array();
    for (std::size_t r = 0; r < 4 * model.n_cells; ++r) {
        ordered_json row = ordered_json::array();
        for (std::size_t c = 0; c < cols; ++c) row.push_back(model.map[r * cols + c]);
        j["transformation"].push_back(std::move(row));
    }
    return j;
}

int cmd_transform(const TransformArgs& args) {
    fb::Config cfg = fb::Config::parse_file(args.config);
    fb::DatasetRef ref = fb::dataset_from_config(cfg, args.dataset, dir_of(args.config));
    fb::PreprocessParams pp = fb::preprocess_from_config(cfg, ref.id, args.algo == "lfr");

    std::vector<std::string> preset_map_columns;
    fb::TabularDataset data = load_ref(ref, args.in, &preset_map_columns);
    if (pp.map_columns.empty()) pp.map_columns = preset_map_columns;

    std::uint64_t base = args.seed >= 0
                             ? static_cast<std::uint64_t>(args.seed)
                             : static_cast<std::uint64_t>(cfg.integer_or("experiment",
                                                                         "master_seed", 42));
    bool as_json = args.out.size() >= 5 && args.out.substr(args.out.size() - 5) == ".json";
    ordered_json model_doc;
    fb::TabularDataset transformed;

    if (args.algo == "rw") {
        fb::ReweighingModel model = fb::reweigh_fit(data);
        transformed = fb::reweigh_apply(data, model);
        model_doc = model_json_rw(model);
    } else if (args.algo == "lfr") {
        std::uint64_t pre_seed =
            fb::derive_seed(base, fb::stage::kPreprocess,
                            static_cast<std::uint64_t>(fb::PreprocessKind::FairRep));
        fb::TabularDataset enc = fb::encode_onehot(data);
        fb::FairRepModel model = fb::fair_rep_fit(enc, pp.fair_rep, pre_seed);
        transformed = fb::fair_rep_transform(model, enc);
        model_doc = model_json_lfr(model);
    } else if (args.algo == "op") {
        if (pp.map_columns.empty())
            throw fb::ConfigError("map_columns",
                                  "the distribution optimizer needs a column subset: set "
                                  "features in [op." + ref.id + "]");
        std::uint64_t transform_seed =
            fb::derive_seed(base, fb::stage::kTransform,
                            static_cast<std::uint64_t>(fb::PreprocessKind::DistMap));
        fb::TabularDataset view = fb::discretize(data.take_columns(pp.map_columns), pp.map_bins);
        fb::DistMapModel model = fb::dist_map_fit(view, pp.dist_map);
        fb::TabularDataset mapped = fb::dist_map_transform(model, view, transform_seed);
        transformed = data;
        for (std::size_t k = 0; k < pp.map_columns.size(); ++k) {
            std::size_t j = transformed.column_index(pp.map_columns[k]);
            for (std::size_t i = 0; i < transformed.n_rows; ++i)
                transformed.x[i * transformed.n_cols + j] = mapped.at(i, k);
            transformed.schema[j] = mapped.schema[k];
        }
        transformed.y = mapped.y;
        model_doc = model_json_op(model);
    } else {
        throw fb::ConfigError("algo", "unknown algorithm '" + args.algo + "' (rw|lfr|op)");
    }

    if (as_json) {
        std::ofstream out(args.out);
        if (!out) throw fb::DataError("write_failed", "cannot write " + args.out);
        out << model_doc.dump(2) << "\n";
    } else {
        fb::write_csv(transformed, args.out, /*include_weights=*/args.algo == "rw");
    }
    std::cout << "wrote " << args.out << "\n";
    return 0;
}

// --- evaluate ------------------------------------------------------------

/// Read one column of 0/1 values from a CSV file (first field per line; a
/// non-numeric first line is treated as a header).
std::vector<int> read_binary_column(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw fb::DataError("io", "cannot open " + path);
    std::vector<int> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string field = line.substr(0, line.find(','));
        if (field.empty()) continue;
        if (field == "0" || field == "1") {
            values.push_back(field == "1" ? 1 : 0);
        } else if (line_no == 1) {
            continue;  // header
        } else {
            throw fb::DataError(what, path + ":" + std::to_string(line_no) +
                                          ": expected 0 or 1, got '" + field + "'");
        }
    }
    if (values.empty()) throw fb::DataError(what, path + ": no values");
    return values;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                 const std::string& groups_path) {
    std::vector<int> pred = read_binary_column(pred_path, "pred");
    std::vector<int> truth = read_binary_column(truth_path, "truth");
    std::vector<int> groups = read_binary_column(groups_path, "groups");
    if (pred.size() != truth.size() || pred.size() != groups.size())
        throw fb::DataError("shape", "pred/truth/groups lengths differ: " +
                                         std::to_string(pred.size()) + "/" +
                                         std::to_string(truth.size()) + "/" +
                                         std::to_string(groups.size()));

    fb::TabularDataset ds;
    ds.n_rows = pred.size();
    ds.n_cols = 0;
    ds.y = truth;
    ds.s = groups;
    ds.w.assign(ds.n_rows, 1.0);
    fb::MetricReport rep = fb::evaluate(pred, ds);

    ordered_json j;
    auto num = [](double v) -> ordered_json {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    j["disparate_impact"] = num(rep.disparate_impact);
    j["normalized_di"] = num(rep.normalized_di);
    j["f1"] = num(rep.f1);
    j["accuracy"] = num(rep.accuracy);
    j["counts"] = ordered_json{{"n_privileged", rep.counts.n_privileged},
                               {"n_unprivileged", rep.counts.n_unprivileged},
                               {"pos_privileged", rep.counts.pos_privileged},
                               {"pos_unprivileged", rep.counts.pos_unprivileged},
                               {"tp", rep.counts.tp},
                               {"fp", rep.counts.fp},
                               {"fn", rep.counts.fn},
                               {"tn", rep.counts.tn}};
    j["flags"] = rep.flags;
    std::cout << j.dump(2) << "\n";
    return 0;
}

// --- report --------------------------------------------------------------

int cmd_report(const std::string& results_path, const std::string& format,
               const std::string& out_dir) {
    fb::GridResult grid = fb::grid_from_json(read_file(results_path));
    fb::ReportFormat fmt;
    if (format == "json") fmt = fb::ReportFormat::Json;
    else if (format == "csv") fmt = fb::ReportFormat::Csv;
    else if (format == "markdown") fmt = fb::ReportFormat::Markdown;
    else throw fb::ConfigError("format", "unknown format '" + format + "' (json|csv|markdown)");
    std::cout << "wrote " << fb::emit_report(grid, fmt, out_dir) << "\n";
    return 0;
}

void print_error(const std::string& code, const std::string& message) {
    ordered_json j;
    j["error"] = ordered_json{{"code", code}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness pre-processing toolkit"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run an experiment grid from a config file");
    run->add_option("--config", run_args.config, "experiment config file")->required();
    run->add_option("--out", run_args.out, "output directory")->required();
    run->add_option("--seeds", run_args.seeds, "override the number of seed replicates");
    run->add_option("--jobs", run_args.jobs, "worker threads (default 1)");
    run->add_option("--master-seed", run_args.master_seed, "override the master seed");

    TransformArgs tr_args;
    CLI::App* tr = app.add_subcommand("transform", "fit one debiaser and transform a dataset");
    tr->add_option("--config", tr_args.config, "config file with dataset + parameters")->required();
    tr->add_option("--algo", tr_args.algo, "rw | lfr | op")->required();
    tr->add_option("--in", tr_args.in, "input CSV (overrides the config's csv path)");
    tr->add_option("--out", tr_args.out,
                   "output path; *.json writes the fitted model, anything else "
                   "writes the transformed dataset as CSV")
        ->required();
    tr->add_option("--dataset", tr_args.dataset, "dataset id when the config has several");
    tr->add_option("--seed", tr_args.seed, "seed (default: the config's master_seed)");

    std::string ev_pred, ev_truth, ev_groups;
    CLI::App* ev = app.add_subcommand("evaluate", "fairness + accuracy metrics for predictions");
    ev->add_option("--pred", ev_pred, "CSV with one 0/1 prediction per row")->required();
    ev->add_option("--truth", ev_truth, "CSV with one 0/1 true label per row")->required();
    ev->add_option("--groups", ev_groups, "CSV with one 0/1 group flag per row (1=privileged)")
        ->required();

    std::string rep_results, rep_format = "markdown", rep_out = ".";
    CLI::App* rep = app.add_subcommand("report", "re-emit a results.json in another format");
    rep->add_option("--results", rep_results, "results.json from a run")->required();
    rep->add_option("--format", rep_format, "json | csv | markdown");
    rep->add_option("--out", rep_out, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        if (code != 0) print_error("cli", e.what());
        return code;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (tr->parsed()) return cmd_transform(tr_args);
        if (ev->parsed()) return cmd_evaluate(ev_pred, ev_truth, ev_groups);
        if (rep->parsed()) return cmd_report(rep_results, rep_format, rep_out);
        print_error("cli", "no subcommand given");
        return 2;
    } catch (const fb::Error& e) {
        print_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 3;
    }
}
