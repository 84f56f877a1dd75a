#include "glodismo/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "glodismo/io.hpp"

namespace glodismo {

namespace {

ExperimentKind experiment_from_string(const std::string& s) {
    if (s == "single_pixel") return ExperimentKind::SinglePixel;
    if (s == "single_pixel_circulant") return ExperimentKind::SinglePixelCirculant;
    if (s == "single_pixel_superpixel") return ExperimentKind::SinglePixelSuperpixel;
    if (s == "expander") return ExperimentKind::Expander;
    if (s == "group_testing") return ExperimentKind::GroupTesting;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

const char* experiment_to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SinglePixel: return "single_pixel";
        case ExperimentKind::SinglePixelCirculant: return "single_pixel_circulant";
        case ExperimentKind::SinglePixelSuperpixel: return "single_pixel_superpixel";
        case ExperimentKind::Expander: return "expander";
        case ExperimentKind::GroupTesting: return "group_testing";
    }
    return "?";
}

const char* solver_to_string(SolverKind k) {
    switch (k) {
        case SolverKind::Iht: return "iht";
        case SolverKind::ListaScalar: return "lista_scalar";
        case SolverKind::EIht: return "e_iht";
        case SolverKind::EListaScalar: return "e_lista_scalar";
        case SolverKind::Nnlad: return "nnlad";
    }
    return "?";
}

const char* transform_to_string(TransformKind k) {
    switch (k) {
        case TransformKind::Identity: return "identity";
        case TransformKind::Haar1: return "haar1";
        case TransformKind::Bior22: return "bior2.2";
    }
    return "?";
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad integer '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config key '" + key + "': bad boolean '" + v + "'");
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& v) {
    if (key == "experiment") experiment = experiment_from_string(v);
    else if (key == "solver") solver = solver_kind_from_string(v);
    else if (key == "m") m = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "n") n = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "d") d = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "s") s = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "T" || key == "iterations") iterations = static_cast<int>(parse_int(key, v));
    else if (key == "eval_T" || key == "eval_iterations")
        eval_iterations = static_cast<int>(parse_int(key, v));
    else if (key == "image_h") image_h = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "image_w") image_w = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "delta") delta = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "transform") transform = transform_kind_from_string(v);
    else if (key == "epochs") epochs = static_cast<int>(parse_int(key, v));
    else if (key == "batch_size") batch_size = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "train_samples") train_samples = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "test_samples") test_samples = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "lr") lr = parse_double(key, v);
    else if (key == "beta1") beta1 = parse_double(key, v);
    else if (key == "beta2") beta2 = parse_double(key, v);
    else if (key == "adam_eps") adam_eps = parse_double(key, v);
    else if (key == "tau") tau = parse_double(key, v);
    else if (key == "noise_scale") noise_scale = parse_double(key, v);
    else if (key == "noise_family") {
        if (v == "none") noise_family = NoiseFamily::None;
        else if (v == "gaussian") noise_family = NoiseFamily::Gaussian;
        else if (v == "student_t_df1") noise_family = NoiseFamily::StudentT1;
        else throw std::invalid_argument("config key 'noise_family': unknown value '" + v + "'");
    }
    else if (key == "snr_db") snr_db = parse_double(key, v);
    else if (key == "gamma") gamma = parse_double(key, v);
    else if (key == "sigma") sigma = parse_double(key, v);
    else if (key == "tau_nnlad") tau_nnlad = parse_double(key, v);
    else if (key == "positive_threshold") positive_threshold = parse_double(key, v);
    else if (key == "average_loss") average_loss = parse_bool(key, v);
    else if (key == "baseline") {
        if (v == "greedy") baseline = BaselineKind::Greedy;
        else if (v == "siman") baseline = BaselineKind::SimAn;
        else throw std::invalid_argument("config key 'baseline': unknown value '" + v + "'");
    }
    else if (key == "siman_rule") {
        if (v == "metropolis") siman_rule = SimAnRule::Metropolis;
        else if (v == "paper") siman_rule = SimAnRule::Paper;
        else throw std::invalid_argument("config key 'siman_rule': unknown value '" + v + "'");
    }
    else if (key == "siman_t0") siman_t0 = parse_double(key, v);
    else if (key == "siman_decay") siman_decay = parse_double(key, v);
    else if (key == "baseline_steps") baseline_steps = static_cast<int>(parse_int(key, v));
    else if (key == "scale") scale = parse_double(key, v);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, v));
    else if (key == "out_dir") out_dir = v;
    else if (key == "data_path") data_path = v;
    else if (key == "mask_path") mask_path = v;
    else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    auto it = kv.find("experiment");
    if (it != kv.end() && it->second == "group_testing") cfg = group_testing_defaults();
    for (const auto& [k, v] : kv) cfg.set(k, v);
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = line.substr(start, eq - start);
        std::string val = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
        };
        strip(key);
        strip(val);
        if (kv.count(key))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": duplicate key " + key);
        kv[key] = val;
    }
    return from_map(kv);
}

void ExperimentConfig::validate() const {
    if (m < 1 || n < 1) throw std::invalid_argument("config: m, n >= 1 required");
    if (iterations < 1) throw std::invalid_argument("config: T >= 1 required");
    if (s < 1 || s > n) throw std::invalid_argument("config: 1 <= s <= n required");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size >= 1 required");
    if (epochs < 0) throw std::invalid_argument("config: epochs >= 0 required");
    if (tau <= 0.0) throw std::invalid_argument("config: tau > 0 required");
    if (noise_scale < 0.0) throw std::invalid_argument("config: noise_scale >= 0 required");
    if (solver == SolverKind::Nnlad && (sigma <= 0.0 || tau_nnlad <= 0.0))
        throw std::invalid_argument("config: sigma, tau_nnlad > 0 required for nnlad");
    if (experiment == ExperimentKind::SinglePixelSuperpixel &&
        (delta < 1 || delta % 2 == 0))
        throw std::invalid_argument("config: delta must be odd");
    if (is_image_experiment() && image_h * image_w != n)
        throw std::invalid_argument("config: image_h * image_w must equal n");
    std::size_t subset_size =
        experiment == ExperimentKind::Expander ? m : n;
    if (experiment == ExperimentKind::SinglePixelCirculant) subset_size = n;
    if (d < 1 || d > subset_size)
        throw std::invalid_argument("config: d out of range for the partition");
    if (experiment == ExperimentKind::SinglePixelCirculant && m > n)
        throw std::invalid_argument("config: circulant needs m <= n");
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "experiment=" << experiment_to_string(experiment) << '\n'
        << "solver=" << solver_to_string(solver) << '\n'
        << "m=" << m << "\nn=" << n << "\nd=" << d << "\ns=" << s << '\n'
        << "T=" << iterations << "\neval_T=" << eval_iterations << '\n'
        << "image_h=" << image_h << "\nimage_w=" << image_w << "\ndelta=" << delta << '\n'
        << "transform=" << transform_to_string(transform) << '\n'
        << "epochs=" << epochs << "\nbatch_size=" << batch_size << '\n'
        << "train_samples=" << train_samples << "\ntest_samples=" << test_samples << '\n'
        << "lr=" << lr << "\nbeta1=" << beta1 << "\nbeta2=" << beta2
        << "\nadam_eps=" << adam_eps << '\n'
        << "tau=" << tau << "\nnoise_scale=" << noise_scale << '\n'
        << "noise_family="
        << (noise_family == NoiseFamily::None
                ? "none"
                : noise_family == NoiseFamily::Gaussian ? "gaussian" : "student_t_df1")
        << "\nsnr_db=" << snr_db << '\n'
        << "gamma=" << gamma << "\nsigma=" << sigma << "\ntau_nnlad=" << tau_nnlad
        << "\npositive_threshold=" << positive_threshold << '\n'
        << "average_loss=" << (average_loss ? "true" : "false") << '\n'
        << "baseline=" << (baseline == BaselineKind::Greedy ? "greedy" : "siman") << '\n'
        << "siman_rule=" << (siman_rule == SimAnRule::Metropolis ? "metropolis" : "paper")
        << '\n'
        << "siman_t0=" << siman_t0 << "\nsiman_decay=" << siman_decay
        << "\nbaseline_steps=" << baseline_steps << '\n'
        << "scale=" << scale << "\nseed=" << seed << '\n'
        << "data_path=" << data_path << "\nmask_path=" << mask_path << '\n';
    return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
    std::string s = serialize();
    return fnv1a64(s.data(), s.size());
}

ExperimentConfig group_testing_defaults() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::GroupTesting;
    cfg.solver = SolverKind::Nnlad;
    cfg.m = 248;
    cfg.n = 961;
    cfg.d = 31;
    cfg.s = 80;
    cfg.iterations = 200;
    cfg.eval_iterations = 1000;
    cfg.sigma = 0.1;
    cfg.tau_nnlad = 0.6;
    cfg.positive_threshold = 0.01;
    cfg.average_loss = true;
    cfg.noise_family = NoiseFamily::StudentT1;
    cfg.snr_db = 40.0;
    return cfg;
}

}  // namespace glodismo
