// Experiment runner: train / eval / baseline / sweep over the learned-mask
// pipelines, with deterministic seeding and file outputs (metrics.csv,
// mask.gldm, checkpoint.gldm, manifest.txt, masks/*.pgm).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "glodismo/baselines.hpp"
#include "glodismo/config.hpp"
#include "glodismo/io.hpp"
#include "glodismo/training.hpp"

namespace fs = std::filesystem;
using namespace glodismo;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* app, CommonOpts& o) {
    app->add_option("--config", o.config_path, "flat key=value config file");
    app->add_option("--out", o.out, "output directory (overrides config)");
    app->add_option("--seed", o.seed, "rng seed (overrides config)")
        ->each([&o](const std::string&) { o.seed_set = true; });
    app->add_option("--override", o.overrides, "extra key=value settings")
        ->take_all();
}

ExperimentConfig load_config(const CommonOpts& o) {
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{}
                                                 : ExperimentConfig::from_file(o.config_path);
    for (const auto& kv : o.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--override expects key=value, got: " + kv);
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.out.empty()) cfg.out_dir = o.out;
    cfg.validate();
    return cfg;
}

void export_mask_images(const ExperimentConfig& cfg, const Tensor& mask,
                        const std::string& dir, std::vector<std::string>& files) {
    fs::create_directories(dir);
    char name[64];
    if (cfg.is_image_experiment() &&
        cfg.experiment != ExperimentKind::SinglePixelCirculant) {
        std::size_t count = std::min<std::size_t>(mask.rows(), 64);
        Tensor row({cfg.n});
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t j = 0; j < cfg.n; ++j) row[j] = mask.at(i, j);
            std::snprintf(name, sizeof name, "%s/row_%03zu.pgm", dir.c_str(), i);
            write_pgm(name, row, cfg.image_h, cfg.image_w);
            files.push_back(name);
        }
    } else {
        std::snprintf(name, sizeof name, "%s/mask.pgm", dir.c_str());
        write_pgm(name, mask, mask.rows(), mask.cols());
        files.push_back(name);
    }
}

void write_run_outputs(const ExperimentConfig& cfg, const TrainResult& r) {
    fs::create_directories(cfg.out_dir);
    std::vector<std::string> files;
    auto put = [&](const std::string& f) { files.push_back(f); };

    write_metrics_csv(cfg.out_dir + "/metrics.csv", r.history);
    put(cfg.out_dir + "/metrics.csv");

    write_gldm(cfg.out_dir + "/mask.gldm", r.frozen_mask, GldmDtype::U8Binary);
    put(cfg.out_dir + "/mask.gldm");
    if (r.frozen_row_mask.size() > 0) {
        write_gldm(cfg.out_dir + "/row_mask.gldm", r.frozen_row_mask, GldmDtype::U8Binary);
        put(cfg.out_dir + "/row_mask.gldm");
    }
    write_gldm(cfg.out_dir + "/checkpoint.gldm", r.params.phi, GldmDtype::F64);
    put(cfg.out_dir + "/checkpoint.gldm");
    if (r.params.phi_row.size() > 0) {
        write_gldm(cfg.out_dir + "/checkpoint_row.gldm", r.params.phi_row, GldmDtype::F64);
        put(cfg.out_dir + "/checkpoint_row.gldm");
    }
    if (r.params.gamma.size() > 0) {
        write_gldm(cfg.out_dir + "/checkpoint_gamma.gldm", r.params.gamma, GldmDtype::F64);
        write_gldm(cfg.out_dir + "/checkpoint_rho.gldm", r.params.rho, GldmDtype::F64);
        put(cfg.out_dir + "/checkpoint_gamma.gldm");
        put(cfg.out_dir + "/checkpoint_rho.gldm");
    }
    export_mask_images(cfg, r.frozen_mask, cfg.out_dir + "/masks", files);
    write_manifest(cfg.out_dir + "/manifest.txt", cfg.hash(), files);
}

int run_train(const CommonOpts& o) {
    ExperimentConfig cfg = load_config(o);
    TrainResult r = train(cfg);
    write_run_outputs(cfg, r);
    std::cout << "scale " << r.scale << "\n";
    for (const auto& row : r.history)
        if (row.epoch == cfg.epochs && row.split == "test")
            std::cout << row.metric << " " << row.value << "\n";
    return 0;
}

int run_eval(const CommonOpts& o, const std::string& mask_path,
             const std::string& row_mask_path, const std::string& gamma_path,
             const std::string& rho_path) {
    ExperimentConfig cfg = load_config(o);
    std::string mp = mask_path.empty() ? cfg.mask_path : mask_path;
    if (mp.empty())
        throw std::invalid_argument("eval: a mask is required (--mask or mask_path=)");

    Pipeline pipe(cfg);
    Rng init_rng(cfg.seed);
    Params p = init_params(pipe, init_rng);
    if (!gamma_path.empty()) p.gamma = read_gldm(gamma_path);
    if (!rho_path.empty()) p.rho = read_gldm(rho_path);

    Tensor mask = read_gldm(mp);
    Tensor row;
    const Tensor* rowp = nullptr;
    if (!row_mask_path.empty()) {
        row = read_gldm(row_mask_path);
        rowp = &row;
    }
    double scale = cfg.scale;
    if (scale <= 0.0) {
        Rng scale_rng(cfg.seed ^ 0x5CA1EULL);
        scale = pipe.find_scale(p, scale_rng);
    }
    Rng er(cfg.seed ^ 0xE7A1ULL);
    EvalMetrics m = pipe.evaluate(p, mask, rowp, pipe.test_set(), er, scale,
                                  cfg.eval_iterations);
    std::vector<MetricRow> rows{
        {0, "eval", "nmse_db", m.nmse, cfg.seed},
        {0, "eval", "nmae_db", m.nmae, cfg.seed},
    };
    if (cfg.experiment == ExperimentKind::GroupTesting) {
        rows.push_back({0, "eval", "false_pos", m.false_positives, cfg.seed});
        rows.push_back({0, "eval", "false_neg", m.false_negatives, cfg.seed});
    }
    fs::create_directories(cfg.out_dir);
    write_metrics_csv(cfg.out_dir + "/metrics.csv", rows);
    write_manifest(cfg.out_dir + "/manifest.txt", cfg.hash(),
                   {cfg.out_dir + "/metrics.csv"});
    for (const auto& r : rows) std::cout << r.metric << " " << r.value << "\n";
    return 0;
}

int run_baseline_cmd(const CommonOpts& o) {
    ExperimentConfig cfg = load_config(o);
    BaselineResult r = run_baseline(cfg);
    fs::create_directories(cfg.out_dir);
    std::vector<std::string> files;
    std::vector<MetricRow> rows = r.history;
    rows.push_back({1, "train", "acceptance_rate", r.first_epoch_acceptance, cfg.seed});
    write_metrics_csv(cfg.out_dir + "/metrics.csv", rows);
    files.push_back(cfg.out_dir + "/metrics.csv");
    write_gldm(cfg.out_dir + "/mask.gldm", r.mask, GldmDtype::U8Binary);
    files.push_back(cfg.out_dir + "/mask.gldm");
    if (r.row_mask.size() > 0) {
        write_gldm(cfg.out_dir + "/row_mask.gldm", r.row_mask, GldmDtype::U8Binary);
        files.push_back(cfg.out_dir + "/row_mask.gldm");
    }
    export_mask_images(cfg, r.mask, cfg.out_dir + "/masks", files);
    write_manifest(cfg.out_dir + "/manifest.txt", cfg.hash(), files);
    std::cout << "acceptance_rate " << r.first_epoch_acceptance << "\n"
              << "final_loss " << r.final_loss << "\n";
    return 0;
}

int run_sweep(const CommonOpts& o, const std::string& field,
              const std::string& values_csv, bool parallel) {
    if (field.empty() || values_csv.empty())
        throw std::invalid_argument("sweep: --field and --values are required");
    std::vector<std::string> values;
    std::stringstream ss(values_csv);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) values.push_back(tok);
    if (values.empty()) throw std::invalid_argument("sweep: empty value list");

    ExperimentConfig base = load_config(o);
    std::vector<ExperimentConfig> cfgs;
    for (const auto& v : values) {
        ExperimentConfig c = base;
        c.set(field, v);
        c.out_dir = base.out_dir + "/" + field + "=" + v;
        c.validate();
        cfgs.push_back(std::move(c));
    }

    std::vector<TrainResult> results(cfgs.size());
    auto run_point = [&](std::size_t i) { results[i] = train(cfgs[i]); };
    if (parallel) {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < cfgs.size(); ++i) pool.emplace_back(run_point, i);
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < cfgs.size(); ++i) run_point(i);
    }

    std::vector<MetricRow> combined;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        write_run_outputs(cfgs[i], results[i]);
        for (MetricRow row : results[i].history) {
            row.split += "[" + field + "=" + values[i] + "]";
            combined.push_back(std::move(row));
        }
    }
    fs::create_directories(base.out_dir);
    write_metrics_csv(base.out_dir + "/metrics.csv", combined);
    write_manifest(base.out_dir + "/manifest.txt", base.hash(),
                   {base.out_dir + "/metrics.csv"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary measurement-matrix learning via unrolled solvers"};
    app.require_subcommand(1);

    CommonOpts topts, eopts, bopts, sopts;
    auto* tcmd = app.add_subcommand("train", "learn mask logits end to end");
    add_common(tcmd, topts);

    auto* ecmd = app.add_subcommand("eval", "evaluate a saved mask on the test set");
    add_common(ecmd, eopts);
    std::string mask_path, row_mask_path, gamma_path, rho_path;
    ecmd->add_option("--mask", mask_path, "mask.gldm to evaluate");
    ecmd->add_option("--row-mask", row_mask_path, "row mask (circulant runs)");
    ecmd->add_option("--gamma", gamma_path, "saved per-iteration step sizes");
    ecmd->add_option("--rho", rho_path, "saved per-iteration log-thresholds");

    auto* bcmd = app.add_subcommand("baseline", "greedy / simulated annealing search");
    add_common(bcmd, bopts);

    auto* scmd = app.add_subcommand("sweep", "train over a list of values of one field");
    add_common(scmd, sopts);
    std::string field, values_csv;
    bool parallel = false;
    scmd->add_option("--field", field, "config key to vary");
    scmd->add_option("--values", values_csv, "comma-separated value list");
    scmd->add_flag("--parallel", parallel, "run sweep points concurrently");

    CLI11_PARSE(app, argc, argv);
    try {
        if (tcmd->parsed()) return run_train(topts);
        if (ecmd->parsed())
            return run_eval(eopts, mask_path, row_mask_path, gamma_path, rho_path);
        if (bcmd->parsed()) return run_baseline_cmd(bopts);
        if (scmd->parsed()) return run_sweep(sopts, field, values_csv, parallel);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
