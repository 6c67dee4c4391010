#include "fairboost/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "fairboost/presets.hpp"
#include "fairboost/rng.hpp"

namespace fairboost {

namespace {

/// Deterministic 64-bit string tag (FNV-1a); std::hash is implementation
/// defined and would break cross-platform reproducibility.
std::uint64_t tag_of(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

PreprocessKind parse_pre(const std::string& s) {
    if (s == "none" || s == "baseline") return PreprocessKind::None;
    if (s == "rw" || s == "reweighing") return PreprocessKind::Reweighing;
    if (s == "lfr") return PreprocessKind::FairRep;
    if (s == "op") return PreprocessKind::DistMap;
    throw ConfigError("preprocessor", "unknown preprocessor '" + s + "'");
}

ClassifierKind parse_model(const std::string& s) {
    if (s == "logistic" || s == "logreg") return ClassifierKind::Logistic;
    if (s == "forest" || s == "rf") return ClassifierKind::Forest;
    throw ConfigError("model", "unknown model '" + s + "'");
}

CombineRule parse_rule(const std::string& s) {
    if (s == "majority") return CombineRule::Majority;
    if (s == "bagging") return CombineRule::Bagging;
    if (s == "stacking") return CombineRule::Stacking;
    throw ConfigError("rule", "unknown combine rule '" + s + "'");
}

std::vector<PreprocessKind> parse_member_list(const std::string& s) {
    std::vector<PreprocessKind> out;
    std::string token;
    for (char c : s + "+") {
        if (c == '+') {
            if (!token.empty()) out.push_back(parse_pre(token));
            token.clear();
        } else {
            token += c;
        }
    }
    if (out.empty()) throw ConfigError("ensemble", "empty ensemble spec '" + s + "'");
    return out;
}

bool is_relative(const std::string& p) { return p.empty() || p.front() != '/'; }

DatasetSpec custom_spec_from(const Config& cfg, const std::string& section,
                             const std::string& id) {
    DatasetSpec spec;
    spec.name = id;
    spec.label_column = cfg.get(section, "label");
    spec.favorable_label = cfg.get_or(section, "favorable", "");
    for (const auto& pair : cfg.list(section, "label_map")) {
        std::size_t colon = pair.rfind(':');
        if (colon == std::string::npos)
            throw ConfigError("label_map", "expected 'raw:0' entries in label_map");
        spec.label_map[pair.substr(0, colon)] = std::stoi(pair.substr(colon + 1));
    }
    spec.protected_column = cfg.get(section, "protected");
    spec.privileged_value = cfg.get(section, "privileged");
    for (const auto& item : cfg.list(section, "features")) {
        std::size_t colon = item.rfind(':');
        std::string name = colon == std::string::npos ? item : item.substr(0, colon);
        std::string kind = colon == std::string::npos ? "num" : item.substr(colon + 1);
        ColumnSchema col;
        col.name = name;
        if (kind == "num") col.kind = ColumnKind::Continuous;
        else if (kind == "cat") col.kind = ColumnKind::Categorical;
        else if (kind == "bin") col.kind = ColumnKind::Binary;
        else throw ConfigError("features", "unknown column kind '" + kind + "'");
        spec.features.push_back(std::move(col));
    }
    if (spec.features.empty())
        throw ConfigError("features", "custom dataset '" + id + "' lists no feature columns");
    return spec;
}

}  // namespace

DatasetRef dataset_from_config(const Config& cfg, const std::string& id,
                               const std::string& base_dir) {
    std::string resolved = id;
    if (resolved.empty()) {
        for (const auto& section : cfg.sections()) {
            if (section.rfind("dataset.", 0) != 0) continue;
            if (!resolved.empty())
                throw ConfigError("dataset",
                                  "several [dataset.*] sections; pick one with --dataset");
            resolved = section.substr(8);
        }
        if (resolved.empty()) throw ConfigError("dataset", "no [dataset.*] section found");
    }
    std::string section = "dataset." + resolved;
    if (!cfg.has_section(section))
        throw ConfigError("dataset", "no [" + section + "] section found");
    DatasetRef ref;
    ref.id = resolved;
    ref.preset = cfg.get_or(section, "preset", "");
    ref.csv_path = cfg.get(section, "csv");
    if (is_relative(ref.csv_path) && !base_dir.empty())
        ref.csv_path = base_dir + "/" + ref.csv_path;
    ref.subsample = static_cast<std::size_t>(cfg.integer_or(section, "subsample", 0));
    if (ref.preset.empty()) ref.custom = custom_spec_from(cfg, section, ref.id);
    return ref;
}

PreprocessParams preprocess_from_config(const Config& cfg, const std::string& id,
                                        bool require_fair_rep_override) {
    PreprocessParams pp;
    pp.fair_rep.k = static_cast<int>(cfg.integer_or("lfr", "k", 5));
    pp.fair_rep.a_x = cfg.number_or("lfr", "a_x", 0.01);
    pp.fair_rep.a_y = cfg.number_or("lfr", "a_y", 1.0);
    pp.fair_rep.a_z = cfg.number_or("lfr", "a_z", 50.0);
    pp.fair_rep.max_iter = static_cast<int>(cfg.integer_or("lfr", "max_iter", 5000));
    std::string lfr_override = "lfr." + id;
    if (cfg.has_section(lfr_override)) {
        pp.fair_rep.k = static_cast<int>(cfg.integer_or(lfr_override, "k", pp.fair_rep.k));
        pp.fair_rep.a_x = cfg.number_or(lfr_override, "a_x", pp.fair_rep.a_x);
        pp.fair_rep.a_y = cfg.number_or(lfr_override, "a_y", pp.fair_rep.a_y);
        pp.fair_rep.a_z = cfg.number_or(lfr_override, "a_z", pp.fair_rep.a_z);
        pp.fair_rep.max_iter =
            static_cast<int>(cfg.integer_or(lfr_override, "max_iter", pp.fair_rep.max_iter));
    } else if (require_fair_rep_override) {
        throw ConfigError("lfr", "missing [" + lfr_override +
                                     "] section: per-dataset representation settings are required");
    }

    pp.dist_map.epsilon = cfg.number_or("op", "epsilon", 0.05);
    pp.dist_map.distortion_cap = cfg.number_or("op", "distortion_cap", 0.5);
    pp.dist_map.max_iter = static_cast<int>(cfg.integer_or("op", "max_iter", 600));
    pp.dist_map.domain_limit =
        static_cast<std::size_t>(cfg.integer_or("op", "domain_limit", 10000));
    pp.map_bins = static_cast<int>(cfg.integer_or("op", "bins", 4));
    std::string op_override = "op." + id;
    if (cfg.has_section(op_override)) {
        pp.dist_map.epsilon = cfg.number_or(op_override, "epsilon", pp.dist_map.epsilon);
        pp.dist_map.distortion_cap =
            cfg.number_or(op_override, "distortion_cap", pp.dist_map.distortion_cap);
        pp.dist_map.max_iter =
            static_cast<int>(cfg.integer_or(op_override, "max_iter", pp.dist_map.max_iter));
        pp.map_bins = static_cast<int>(cfg.integer_or(op_override, "bins", pp.map_bins));
        pp.map_columns = cfg.list(op_override, "features");
    }
    return pp;
}

ExperimentConfig experiment_from_config(const Config& cfg, const std::string& base_dir) {
    ExperimentConfig ex;
    ex.n_seeds = static_cast<int>(cfg.integer_or("experiment", "seeds", 10));
    if (ex.n_seeds < 1) throw ConfigError("seeds", "need at least one seed");
    ex.master_seed = static_cast<std::uint64_t>(cfg.integer_or("experiment", "master_seed", 42));
    ex.train_fraction = cfg.number_or("experiment", "train_fraction", 0.7);
    ex.alpha = cfg.number_or("experiment", "alpha", 0.05);

    if (cfg.has("experiment", "models")) {
        ex.models.clear();
        for (const auto& m : cfg.list("experiment", "models")) ex.models.push_back(parse_model(m));
    }
    if (cfg.has("experiment", "singles")) {
        ex.singles.clear();
        for (const auto& p : cfg.list("experiment", "singles")) {
            PreprocessKind k = parse_pre(p);
            if (k != PreprocessKind::None) ex.singles.push_back(k);
        }
    }
    if (cfg.has("experiment", "ensembles")) {
        for (const auto& e : cfg.list("experiment", "ensembles")) {
            auto members = parse_member_list(e);
            if (members.size() < 2)
                throw ConfigError("ensemble", "ensemble '" + e + "' needs at least two members");
            ex.ensembles.push_back(std::move(members));
        }
    }
    if (cfg.has("experiment", "ensemble_rules")) {
        ex.ensemble_rules.clear();
        for (const auto& r : cfg.list("experiment", "ensemble_rules"))
            ex.ensemble_rules.push_back(parse_rule(r));
    }
    for (const auto& m : cfg.list("experiment", "ensemble_models"))
        ex.ensemble_models.push_back(parse_model(m));

    ex.logistic.kind = ClassifierKind::Logistic;
    ex.logistic.logistic.l2_lambda = cfg.number_or("logistic", "l2_lambda", 1.0);
    ex.logistic.logistic.max_iter =
        static_cast<int>(cfg.integer_or("logistic", "max_iter", 200));
    ex.forest.kind = ClassifierKind::Forest;
    ex.forest.forest.n_trees = static_cast<int>(cfg.integer_or("forest", "n_trees", 100));
    ex.forest.forest.max_depth = static_cast<int>(cfg.integer_or("forest", "max_depth", 0));
    ex.forest.forest.min_leaf_weight = cfg.number_or("forest", "min_leaf_weight", 1.0);
    ex.forest.forest.features_per_split =
        static_cast<int>(cfg.integer_or("forest", "features_per_split", 0));

    for (const auto& section : cfg.sections()) {
        if (section.rfind("dataset.", 0) != 0) continue;
        ex.datasets.push_back(dataset_from_config(cfg, section.substr(8), base_dir));
    }
    if (ex.datasets.empty()) throw ConfigError("datasets", "no [dataset.*] sections found");

    bool uses_fair_rep =
        std::find(ex.singles.begin(), ex.singles.end(), PreprocessKind::FairRep) !=
        ex.singles.end();
    for (const auto& members : ex.ensembles)
        for (PreprocessKind k : members) uses_fair_rep |= k == PreprocessKind::FairRep;

    for (const auto& ref : ex.datasets)
        ex.preprocess[ref.id] = preprocess_from_config(cfg, ref.id, uses_fair_rep);
    return ex;
}

std::string CellKey::pipeline() const {
    if (members.size() == 1 && members[0] == PreprocessKind::None) return "baseline";
    std::string out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) out += "+";
        out += to_string(members[i]);
    }
    if (members.size() > 1 && rule != CombineRule::Majority) out += "@" + to_string(rule);
    return out;
}

std::string CellKey::id() const { return dataset + "/" + to_string(model) + "/" + pipeline(); }

SeedOutcome run_cell(const ExperimentConfig& cfg, const TabularDataset& data,
                     const std::string& dataset_id, const CellKey& key, int seed_index,
                     MemberCache* cache) {
    SeedOutcome out;
    out.seed_index = seed_index;
    auto it = cfg.preprocess.find(dataset_id);
    if (it == cfg.preprocess.end())
        throw ConfigError("dataset", "no preprocessing parameters for dataset '" + dataset_id + "'");

    std::uint64_t split_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(seed_index),
                                           stage::kSplit, tag_of(dataset_id));
    std::uint64_t cell_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(seed_index),
                                          tag_of(dataset_id));
    try {
        SplitPair pair = split(data, cfg.train_fraction, split_seed);
        EnsembleSpec spec{key.members, key.rule};
        EnsembleModel model =
            ensemble_fit(pair.train, spec, cfg.classifier(key.model), it->second, cell_seed, cache);
        Prediction pred = ensemble_predict(model, pair.test, &out.majority_ties);
        out.report = evaluate(pred.labels, pair.test);
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.error_code = e.code();
        out.error_message = e.what();
    }
    return out;
}

namespace {

struct LoadedDataset {
    DatasetRef ref;
    TabularDataset data;
    DatasetSummary summary;
    std::vector<std::string> default_map_columns;
};

LoadedDataset load_dataset(const DatasetRef& ref, const ExperimentConfig& cfg) {
    LoadedDataset out;
    out.ref = ref;
    LoadReport rep;
    if (!ref.preset.empty()) {
        TaskPreset preset = load_preset(ref.preset, ref.csv_path);
        out.data = std::move(preset.data);
        rep = preset.report;
        out.default_map_columns = preset.map_columns;
        out.summary.id = ref.id;
        out.summary.total_rows = rep.total_rows;
        out.summary.kept_rows = rep.kept_rows;
        out.summary.dropped_rows = rep.total_rows - rep.kept_rows;
    } else {
        out.data = load_csv(ref.csv_path, *ref.custom, &rep);
        out.summary.id = ref.id;
        out.summary.total_rows = rep.total_rows;
        out.summary.kept_rows = rep.kept_rows;
        out.summary.dropped_rows = rep.dropped_missing;
    }
    if (ref.subsample > 0)
        out.data = subsample_rows(out.data, ref.subsample,
                                  derive_seed(cfg.master_seed, tag_of(ref.id)));
    out.summary.used_rows = out.data.n_rows;
    return out;
}

SampleSet sample_of(const CellResult& cell, const std::string& metric) {
    SampleSet s;
    s.metric = metric;
    s.condition = cell.key.pipeline();
    for (const auto& seed : cell.seeds) {
        if (!seed.ok) continue;
        s.values.push_back(metric == "normalized_di" ? seed.report.normalized_di
                                                     : seed.report.f1);
    }
    return s;
}

}  // namespace

GridResult run_grid(const ExperimentConfig& cfg, int jobs) {
    GridResult grid;
    grid.master_seed = cfg.master_seed;
    grid.n_seeds = cfg.n_seeds;
    grid.train_fraction = cfg.train_fraction;
    grid.alpha = cfg.alpha;

    // Load all datasets and resolve default optimizer views from presets.
    ExperimentConfig resolved = cfg;
    std::vector<LoadedDataset> loaded;
    for (const auto& ref : cfg.datasets) {
        loaded.push_back(load_dataset(ref, cfg));
        // The preset's optimizer view is the default when the config gave
        // none; custom datasets without either fall back to every feature.
        auto& pp = resolved.preprocess[ref.id];
        if (pp.map_columns.empty()) pp.map_columns = loaded.back().default_map_columns;
        if (pp.map_columns.empty())
            for (const auto& col : loaded.back().data.schema) pp.map_columns.push_back(col.name);
        grid.datasets.push_back(loaded.back().summary);
    }

    // Enumerate cells in canonical order.
    std::vector<ClassifierKind> ens_models =
        cfg.ensemble_models.empty() ? cfg.models : cfg.ensemble_models;
    std::vector<CellKey> keys;
    for (const auto& ld : loaded) {
        for (ClassifierKind model : cfg.models) {
            keys.push_back({ld.ref.id, model, {PreprocessKind::None}, CombineRule::Majority});
            for (PreprocessKind pre : cfg.singles)
                keys.push_back({ld.ref.id, model, {pre}, CombineRule::Majority});
            bool with_ensembles =
                std::find(ens_models.begin(), ens_models.end(), model) != ens_models.end();
            if (!with_ensembles) continue;
            for (CombineRule rule : cfg.ensemble_rules)
                for (const auto& members : cfg.ensembles)
                    keys.push_back({ld.ref.id, model, members, rule});
        }
    }

    std::vector<CellResult> cells(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        cells[i].key = keys[i];
        cells[i].seeds.resize(static_cast<std::size_t>(cfg.n_seeds));
    }

    // Column tasks: one per (dataset, seed).  Each column shares one member
    // cache across its cells; caches never cross columns, so scheduling
    // order cannot change any number.
    struct Column {
        std::size_t dataset_index;
        int seed_index;
    };
    std::vector<Column> columns;
    for (std::size_t di = 0; di < loaded.size(); ++di)
        for (int s = 0; s < cfg.n_seeds; ++s) columns.push_back({di, s});

    std::vector<std::vector<std::size_t>> cells_of_dataset(loaded.size());
    for (std::size_t ci = 0; ci < keys.size(); ++ci)
        for (std::size_t di = 0; di < loaded.size(); ++di)
            if (keys[ci].dataset == loaded[di].ref.id) cells_of_dataset[di].push_back(ci);

    auto run_column = [&](const Column& col) {
        MemberCache cache;
        for (std::size_t ci : cells_of_dataset[col.dataset_index]) {
            cells[ci].seeds[static_cast<std::size_t>(col.seed_index)] =
                run_cell(resolved, loaded[col.dataset_index].data,
                         loaded[col.dataset_index].ref.id, keys[ci], col.seed_index, &cache);
        }
    };

    int workers = std::max(1, jobs);
    if (workers == 1 || columns.size() <= 1) {
        for (const auto& col : columns) run_column(col);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= columns.size()) break;
                run_column(columns[i]);
            }
        };
        std::vector<std::thread> pool;
        auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), columns.size());
        for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Aggregates.
    for (auto& cell : cells) {
        double di = 0, ndi = 0, f1 = 0, acc = 0;
        std::size_t ok = 0;
        for (const auto& seed : cell.seeds) {
            if (!seed.ok) continue;
            ++ok;
            di += seed.report.disparate_impact;
            ndi += seed.report.normalized_di;
            f1 += seed.report.f1;
            acc += seed.report.accuracy;
        }
        cell.n_ok = ok;
        if (ok > 0) {
            auto d = static_cast<double>(ok);
            cell.mean_di = di / d;
            cell.mean_ndi = ndi / d;
            cell.mean_f1 = f1 / d;
            cell.mean_accuracy = acc / d;
        }
    }

    // Significance comparisons within each (dataset, model) block.
    auto find_cell = [&](const std::string& dataset, ClassifierKind model,
                         const std::vector<PreprocessKind>& members,
                         CombineRule rule) -> CellResult* {
        for (auto& cell : cells)
            if (cell.key.dataset == dataset && cell.key.model == model &&
                cell.key.members == members && cell.key.rule == rule)
                return &cell;
        return nullptr;
    };

    for (auto& cell : cells) {
        const CellKey& key = cell.key;
        std::vector<const CellResult*> references;
        if (key.is_single()) {
            if (key.members[0] == PreprocessKind::None) continue;
            const CellResult* base = find_cell(key.dataset, key.model,
                                               {PreprocessKind::None}, CombineRule::Majority);
            if (base) references.push_back(base);
        } else {
            for (PreprocessKind pre : key.members) {
                const CellResult* single =
                    find_cell(key.dataset, key.model, {pre}, CombineRule::Majority);
                if (single) references.push_back(single);
            }
        }
        for (const CellResult* ref : references) {
            for (const char* metric : {"normalized_di", "f1"}) {
                SampleSet treatment = sample_of(cell, metric);
                SampleSet reference = sample_of(*ref, metric);
                if (treatment.values.empty() || reference.values.empty()) continue;
                Comparison cmp;
                cmp.reference = ref->key.pipeline();
                cmp.metric = metric;
                cmp.test = compare_conditions(treatment, reference, cfg.alpha);
                cell.comparisons.push_back(std::move(cmp));
            }
        }
    }

    grid.cells = std::move(cells);
    return grid;
}

}  // namespace fairboost
