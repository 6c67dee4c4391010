// Result serialization: a JSON document that round-trips the full grid, a
// flat CSV with one row per cell and seed, and a human-oriented markdown
// summary.  JSON cannot represent infinities, so non-finite numbers are
// encoded as the strings "inf", "-inf" and "nan" (disparate impact is +inf
// when only the privileged group's favorable rate is zero).
#include "fairboost/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fairboost/errors.hpp"

namespace fairboost {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json encode_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double decode_number(const nlohmann::json& j, const char* field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw DataError("results_json", std::string("field '") + field + "' is not a number");
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::Improved: return "improved";
        case Direction::Worsened: return "worsened";
        case Direction::None: return "none";
    }
    return "?";
}

Direction direction_from(const std::string& s) {
    if (s == "improved") return Direction::Improved;
    if (s == "worsened") return Direction::Worsened;
    if (s == "none") return Direction::None;
    throw DataError("results_json", "unknown direction '" + s + "'");
}

PreprocessKind preprocess_from(const std::string& s) {
    if (s == "none") return PreprocessKind::None;
    if (s == "rw") return PreprocessKind::Reweighing;
    if (s == "lfr") return PreprocessKind::FairRep;
    if (s == "op") return PreprocessKind::DistMap;
    throw DataError("results_json", "unknown preprocessor '" + s + "'");
}

ClassifierKind classifier_from(const std::string& s) {
    if (s == "logistic") return ClassifierKind::Logistic;
    if (s == "forest") return ClassifierKind::Forest;
    throw DataError("results_json", "unknown model '" + s + "'");
}

CombineRule rule_from(const std::string& s) {
    if (s == "majority") return CombineRule::Majority;
    if (s == "bagging") return CombineRule::Bagging;
    if (s == "stacking") return CombineRule::Stacking;
    throw DataError("results_json", "unknown combine rule '" + s + "'");
}

ordered_json seed_to_json(const SeedOutcome& seed) {
    ordered_json j;
    j["seed"] = seed.seed_index;
    j["ok"] = seed.ok;
    if (!seed.ok) {
        j["error_code"] = seed.error_code;
        j["error_message"] = seed.error_message;
        return j;
    }
    j["disparate_impact"] = encode_number(seed.report.disparate_impact);
    j["normalized_di"] = encode_number(seed.report.normalized_di);
    j["f1"] = encode_number(seed.report.f1);
    j["accuracy"] = encode_number(seed.report.accuracy);
    j["majority_ties"] = seed.majority_ties;
    const GroupOutcomeCounts& c = seed.report.counts;
    j["counts"] = ordered_json{{"n_privileged", c.n_privileged},
                               {"n_unprivileged", c.n_unprivileged},
                               {"pos_privileged", c.pos_privileged},
                               {"pos_unprivileged", c.pos_unprivileged},
                               {"tp", c.tp},
                               {"fp", c.fp},
                               {"fn", c.fn},
                               {"tn", c.tn}};
    j["flags"] = seed.report.flags;
    return j;
}

SeedOutcome seed_from_json(const nlohmann::json& j) {
    SeedOutcome seed;
    seed.seed_index = j.at("seed").get<int>();
    seed.ok = j.at("ok").get<bool>();
    if (!seed.ok) {
        seed.error_code = j.at("error_code").get<std::string>();
        seed.error_message = j.at("error_message").get<std::string>();
        return seed;
    }
    seed.report.disparate_impact = decode_number(j.at("disparate_impact"), "disparate_impact");
    seed.report.normalized_di = decode_number(j.at("normalized_di"), "normalized_di");
    seed.report.f1 = decode_number(j.at("f1"), "f1");
    seed.report.accuracy = decode_number(j.at("accuracy"), "accuracy");
    seed.majority_ties = j.at("majority_ties").get<long>();
    const auto& c = j.at("counts");
    seed.report.counts.n_privileged = c.at("n_privileged").get<double>();
    seed.report.counts.n_unprivileged = c.at("n_unprivileged").get<double>();
    seed.report.counts.pos_privileged = c.at("pos_privileged").get<double>();
    seed.report.counts.pos_unprivileged = c.at("pos_unprivileged").get<double>();
    seed.report.counts.tp = c.at("tp").get<double>();
    seed.report.counts.fp = c.at("fp").get<double>();
    seed.report.counts.fn = c.at("fn").get<double>();
    seed.report.counts.tn = c.at("tn").get<double>();
    seed.report.flags = j.at("flags").get<std::vector<std::string>>();
    return seed;
}

ordered_json comparison_to_json(const Comparison& cmp) {
    ordered_json j;
    j["reference"] = cmp.reference;
    j["metric"] = cmp.metric;
    j["u_statistic"] = encode_number(cmp.test.u_statistic);
    j["p_value"] = encode_number(cmp.test.p_value);
    j["significant"] = cmp.test.significant;
    j["direction"] = to_string(cmp.test.direction);
    j["method"] = cmp.test.method;
    j["flags"] = cmp.test.flags;
    return j;
}

Comparison comparison_from_json(const nlohmann::json& j) {
    Comparison cmp;
    cmp.reference = j.at("reference").get<std::string>();
    cmp.metric = j.at("metric").get<std::string>();
    cmp.test.u_statistic = decode_number(j.at("u_statistic"), "u_statistic");
    cmp.test.p_value = decode_number(j.at("p_value"), "p_value");
    cmp.test.significant = j.at("significant").get<bool>();
    cmp.test.direction = direction_from(j.at("direction").get<std::string>());
    cmp.test.method = j.at("method").get<std::string>();
    cmp.test.flags = j.at("flags").get<std::vector<std::string>>();
    return cmp;
}

/// Fixed-precision number for tables; non-finite values print as words.
std::string fmt(double v, int precision = 4) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string write_json(const GridResult& grid, const std::filesystem::path& dir) {
    auto path = dir / "results.json";
    std::ofstream out(path);
    if (!out) throw DataError("write_failed", "cannot write " + path.string());
    out << grid_to_json(grid) << "\n";
    return path.string();
}

std::string write_csv(const GridResult& grid, const std::filesystem::path& dir) {
    auto path = dir / "results.csv";
    std::ofstream out(path);
    if (!out) throw DataError("write_failed", "cannot write " + path.string());
    out << "dataset,model,pipeline,rule,seed,ok,disparate_impact,normalized_di,"
           "f1,accuracy,majority_ties,error_code\n";
    for (const auto& cell : grid.cells) {
        for (const auto& seed : cell.seeds) {
            out << cell.key.dataset << ',' << to_string(cell.key.model) << ','
                << cell.key.pipeline() << ',' << to_string(cell.key.rule) << ','
                << seed.seed_index << ',' << (seed.ok ? 1 : 0) << ',';
            if (seed.ok) {
                out << csv_number(seed.report.disparate_impact) << ','
                    << csv_number(seed.report.normalized_di) << ','
                    << csv_number(seed.report.f1) << ','
                    << csv_number(seed.report.accuracy) << ',' << seed.majority_ties << ',';
            } else {
                out << ",,,,," << seed.error_code;
            }
            out << '\n';
        }
    }
    return path.string();
}

/// " better (p=0.0312)" style verdict for a cell's comparison against one
/// reference on one metric; empty when no such comparison was run.
std::string verdict(const CellResult& cell, const std::string& reference,
                    const std::string& metric) {
    for (const auto& cmp : cell.comparisons) {
        if (cmp.reference != reference || cmp.metric != metric) continue;
        std::string word = "n.s.";
        if (cmp.test.significant)
            word = cmp.test.direction == Direction::Improved ? "better" : "worse";
        return word + " (p=" + fmt(cmp.test.p_value, 4) + ")";
    }
    return "";
}

std::string write_markdown(const GridResult& grid, const std::filesystem::path& dir) {
    auto path = dir / "report.md";
    std::ofstream out(path);
    if (!out) throw DataError("write_failed", "cannot write " + path.string());
    out << "# Fairness pre-processing results\n\n";
    out << "Protocol: " << grid.n_seeds << " seeded replicates per pipeline, "
        << fmt(grid.train_fraction * 100, 0) << "/" << fmt((1 - grid.train_fraction) * 100, 0)
        << " stratified train/test split, master seed " << grid.master_seed
        << ", two-sided rank-sum tests at alpha=" << fmt(grid.alpha, 2) << ".\n\n";

    out << "| dataset | rows loaded | rows kept | rows used |\n";
    out << "|---|---:|---:|---:|\n";
    for (const auto& ds : grid.datasets)
        out << "| " << ds.id << " | " << ds.total_rows << " | " << ds.kept_rows << " | "
            << ds.used_rows << " |\n";
    out << "\n";

    for (const auto& ds : grid.datasets) {
        out << "## " << ds.id << "\n";
        for (ClassifierKind model : {ClassifierKind::Logistic, ClassifierKind::Forest}) {
            bool any = false;
            for (const auto& cell : grid.cells)
                any |= cell.key.dataset == ds.id && cell.key.model == model;
            if (!any) continue;
            out << "\n### " << to_string(model) << "\n\n";
            out << "| pipeline | mean DI | mean NDI | mean F1 | mean acc | seeds ok "
                   "| NDI vs baseline | F1 vs baseline |\n";
            out << "|---|---:|---:|---:|---:|---:|---|---|\n";
            for (const auto& cell : grid.cells) {
                if (cell.key.dataset != ds.id || cell.key.model != model) continue;
                out << "| " << cell.key.pipeline() << " | ";
                if (cell.n_ok == 0) {
                    out << "- | - | - | - | 0/" << cell.seeds.size() << " | | |\n";
                    continue;
                }
                out << fmt(cell.mean_di) << " | " << fmt(cell.mean_ndi) << " | "
                    << fmt(cell.mean_f1) << " | " << fmt(cell.mean_accuracy) << " | "
                    << cell.n_ok << "/" << cell.seeds.size() << " | "
                    << verdict(cell, "baseline", "normalized_di") << " | "
                    << verdict(cell, "baseline", "f1") << " |\n";
            }

            // Ensemble-vs-constituent verdicts, one row per comparison.
            bool header = false;
            for (const auto& cell : grid.cells) {
                if (cell.key.dataset != ds.id || cell.key.model != model) continue;
                if (cell.key.is_single()) continue;
                for (const auto& cmp : cell.comparisons) {
                    if (cmp.reference == "baseline") continue;
                    if (!header) {
                        out << "\n| ensemble | vs | metric | p | verdict |\n";
                        out << "|---|---|---|---:|---|\n";
                        header = true;
                    }
                    std::string word = "n.s.";
                    if (cmp.test.significant)
                        word = cmp.test.direction == Direction::Improved ? "better" : "worse";
                    out << "| " << cell.key.pipeline() << " | " << cmp.reference << " | "
                        << cmp.metric << " | " << fmt(cmp.test.p_value, 4) << " | " << word
                        << " |\n";
                }
            }
        }
        out << "\n";
    }

    // Surface failures so a clean table can't hide a broken pipeline.
    bool any_failures = false;
    for (const auto& cell : grid.cells)
        for (const auto& seed : cell.seeds) any_failures |= !seed.ok;
    if (any_failures) {
        out << "## Failed replicates\n\n| cell | seed | error |\n|---|---:|---|\n";
        for (const auto& cell : grid.cells)
            for (const auto& seed : cell.seeds)
                if (!seed.ok)
                    out << "| " << cell.key.id() << " | " << seed.seed_index << " | "
                        << seed.error_code << ": " << seed.error_message << " |\n";
    }
    return path.string();
}

}  // namespace

std::string grid_to_json(const GridResult& grid) {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["protocol"] = ordered_json{{"master_seed", grid.master_seed},
                                   {"seeds", grid.n_seeds},
                                   {"train_fraction", grid.train_fraction},
                                   {"alpha", grid.alpha}};
    doc["datasets"] = ordered_json::array();
    for (const auto& ds : grid.datasets)
        doc["datasets"].push_back(ordered_json{{"id", ds.id},
                                               {"total_rows", ds.total_rows},
                                               {"kept_rows", ds.kept_rows},
                                               {"dropped_rows", ds.dropped_rows},
                                               {"used_rows", ds.used_rows}});
    doc["cells"] = ordered_json::array();
    for (const auto& cell : grid.cells) {
        ordered_json j;
        j["dataset"] = cell.key.dataset;
        j["model"] = to_string(cell.key.model);
        j["pipeline"] = cell.key.pipeline();
        j["members"] = ordered_json::array();
        for (PreprocessKind k : cell.key.members) j["members"].push_back(to_string(k));
        j["rule"] = to_string(cell.key.rule);
        j["aggregates"] = ordered_json{{"ok_seeds", cell.n_ok},
                                       {"mean_disparate_impact", encode_number(cell.mean_di)},
                                       {"mean_normalized_di", encode_number(cell.mean_ndi)},
                                       {"mean_f1", encode_number(cell.mean_f1)},
                                       {"mean_accuracy", encode_number(cell.mean_accuracy)}};
        j["seeds"] = ordered_json::array();
        for (const auto& seed : cell.seeds) j["seeds"].push_back(seed_to_json(seed));
        j["comparisons"] = ordered_json::array();
        for (const auto& cmp : cell.comparisons) j["comparisons"].push_back(comparison_to_json(cmp));
        doc["cells"].push_back(std::move(j));
    }
    return doc.dump(2);
}

GridResult grid_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("results_json", std::string("cannot parse results: ") + e.what());
    }
    try {
        GridResult grid;
        const auto& protocol = doc.at("protocol");
        grid.master_seed = protocol.at("master_seed").get<std::uint64_t>();
        grid.n_seeds = protocol.at("seeds").get<int>();
        grid.train_fraction = protocol.at("train_fraction").get<double>();
        grid.alpha = protocol.at("alpha").get<double>();
        for (const auto& j : doc.at("datasets")) {
            DatasetSummary ds;
            ds.id = j.at("id").get<std::string>();
            ds.total_rows = j.at("total_rows").get<std::size_t>();
            ds.kept_rows = j.at("kept_rows").get<std::size_t>();
            ds.dropped_rows = j.at("dropped_rows").get<std::size_t>();
            ds.used_rows = j.at("used_rows").get<std::size_t>();
            grid.datasets.push_back(std::move(ds));
        }
        for (const auto& j : doc.at("cells")) {
            CellResult cell;
            cell.key.dataset = j.at("dataset").get<std::string>();
            cell.key.model = classifier_from(j.at("model").get<std::string>());
            for (const auto& m : j.at("members"))
                cell.key.members.push_back(preprocess_from(m.get<std::string>()));
            cell.key.rule = rule_from(j.at("rule").get<std::string>());
            const auto& agg = j.at("aggregates");
            cell.n_ok = agg.at("ok_seeds").get<std::size_t>();
            cell.mean_di = decode_number(agg.at("mean_disparate_impact"), "mean_disparate_impact");
            cell.mean_ndi = decode_number(agg.at("mean_normalized_di"), "mean_normalized_di");
            cell.mean_f1 = decode_number(agg.at("mean_f1"), "mean_f1");
            cell.mean_accuracy = decode_number(agg.at("mean_accuracy"), "mean_accuracy");
            for (const auto& s : j.at("seeds")) cell.seeds.push_back(seed_from_json(s));
            for (const auto& c : j.at("comparisons"))
                cell.comparisons.push_back(comparison_from_json(c));
            grid.cells.push_back(std::move(cell));
        }
        return grid;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("results_json", std::string("malformed results document: ") + e.what());
    }
}

std::string emit_report(const GridResult& grid, ReportFormat format, const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    switch (format) {
        case ReportFormat::Json: return write_json(grid, dir);
        case ReportFormat::Csv: return write_csv(grid, dir);
        case ReportFormat::Markdown: return write_markdown(grid, dir);
    }
    throw ConfigError("format", "unknown report format");
}

}  // namespace fairboost
