#ifndef GLODISMO_CONFIG_HPP
#define GLODISMO_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>

#include "glodismo/solvers.hpp"
#include "glodismo/transforms.hpp"

namespace glodismo {

enum class ExperimentKind {
    SinglePixel, SinglePixelCirculant, SinglePixelSuperpixel, Expander, GroupTesting
};
enum class NoiseFamily { None, Gaussian, StudentT1 };
enum class BaselineKind { Greedy, SimAn };
enum class SimAnRule { Metropolis, Paper };

/// Flat, typed experiment configuration. Parsed from a one-key-per-line
/// text file; unknown keys are errors. Defaults depend on the experiment
/// kind and follow the reference setups.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Expander;
    SolverKind solver = SolverKind::EIht;

    std::size_t m = 250, n = 784, d = 7, s = 40;
    int iterations = 20;        // T (training)
    int eval_iterations = 0;    // 0: same as iterations
    std::size_t image_h = 28, image_w = 28, delta = 3;
    TransformKind transform = TransformKind::Identity;

    int epochs = 1;
    std::size_t batch_size = 512;
    std::size_t train_samples = 50000;  // per epoch (synthetic tasks)
    std::size_t test_samples = 10000;

    double lr = 0.0002, beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double tau = 1.0;
    double noise_scale = 1.0;   // gumbel rescale; 0.001 when co-training theta

    NoiseFamily noise_family = NoiseFamily::Gaussian;
    double snr_db = 40.0;

    double gamma = 1.0;
    double sigma = 0.1, tau_nnlad = 0.6, positive_threshold = 0.01;
    bool average_loss = false;

    BaselineKind baseline = BaselineKind::SimAn;
    SimAnRule siman_rule = SimAnRule::Metropolis;
    double siman_t0 = 0.0012, siman_decay = 0.9997;
    int baseline_steps = 0;     // 0: epochs * batches-per-epoch

    double scale = 0.0;         // 0: grid-searched
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string data_path;      // IDX images (image experiments)
    std::string mask_path;      // fixed mask for eval / transfer runs

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);
    void set(const std::string& key, const std::string& value);
    void validate() const;
    std::uint64_t hash() const;
    std::string serialize() const;

    bool is_image_experiment() const {
        return experiment == ExperimentKind::SinglePixel ||
               experiment == ExperimentKind::SinglePixelCirculant ||
               experiment == ExperimentKind::SinglePixelSuperpixel;
    }
    bool solver_has_params() const {
        return solver == SolverKind::ListaScalar || solver == SolverKind::EListaScalar;
    }
};

/// The reference group-testing setup (m=248, n=961, d=31, s=80,
/// sigma=0.1, tau=0.6, threshold 0.01, T=200 train / 1000 eval).
ExperimentConfig group_testing_defaults();

}  // namespace glodismo

#endif
