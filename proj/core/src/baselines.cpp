#include "glodismo/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace glodismo {

Tensor propose_neighbor(const Tensor& mask, const Partition& p, Rng& rng) {
    if (mask.size() != p.grid_size())
        throw std::invalid_argument("propose_neighbor: mask/partition size mismatch");
    std::vector<std::uint32_t> swappable;
    for (std::size_t i = 0; i < p.num_subsets(); ++i) {
        std::size_t ones = 0;
        for (auto idx : p.subset(i)) ones += mask[idx] > 0.5;
        if (ones > 0 && ones < p.subset(i).size())
            swappable.push_back(static_cast<std::uint32_t>(i));
    }
    if (swappable.empty())
        throw std::runtime_error("propose_neighbor: no subset admits a swap");
    const auto& sub = p.subset(swappable[rng.below(swappable.size())]);
    std::vector<std::uint32_t> ones, zeros;
    for (auto idx : sub) (mask[idx] > 0.5 ? ones : zeros).push_back(idx);
    Tensor next = mask;
    next[ones[rng.below(ones.size())]] = 0.0;
    next[zeros[rng.below(zeros.size())]] = 1.0;
    return next;
}

bool baseline_accept(BaselineKind kind, SimAnRule rule, double cur_loss,
                     double prop_loss, double temp, Rng& rng) {
    if (prop_loss < cur_loss) return true;
    if (kind == BaselineKind::Greedy) return false;
    double ratio = std::exp((cur_loss - prop_loss) / temp);  // in (0, 1]
    double u = rng.uniform();
    return rule == SimAnRule::Metropolis ? u < ratio : ratio < u;
}

BaselineResult run_baseline(const ExperimentConfig& cfg) {
    Pipeline pipe(cfg);
    Rng init_rng(cfg.seed);
    Params p = init_params(pipe, init_rng);
    const bool circulant = cfg.experiment == ExperimentKind::SinglePixelCirculant;

    BaselineResult res;
    {
        // same freeze stream as training, so all methods start from the
        // identical random-but-fixed mask
        Rng fr(cfg.seed ^ 0xF00DULL);
        res.mask = pipe.freeze_mask_main(p, fr);
        if (circulant) res.row_mask = pipe.freeze_mask_row(p, fr);
    }
    if (cfg.scale > 0.0) {
        res.scale = cfg.scale;
    } else {
        Rng scale_rng(cfg.seed ^ 0x5CA1EULL);
        res.scale = pipe.find_scale(p, scale_rng);
    }

    const Tensor* rowp = circulant ? &res.row_mask : nullptr;
    auto eval_to_history = [&](int epoch) {
        Rng er(cfg.seed ^ 0xE7A1ULL);
        EvalMetrics m = pipe.evaluate(p, res.mask, rowp, pipe.test_set(), er,
                                      res.scale, cfg.eval_iterations);
        res.history.push_back({epoch, "test", "nmse_db", m.nmse, cfg.seed});
        res.history.push_back({epoch, "test", "nmae_db", m.nmae, cfg.seed});
    };
    eval_to_history(0);

    std::size_t per_epoch = std::max<std::size_t>(1, cfg.train_samples / cfg.batch_size);
    long steps = cfg.baseline_steps > 0
                     ? cfg.baseline_steps
                     : static_cast<long>(per_epoch) * cfg.epochs;
    double temp = cfg.siman_t0;
    Rng data_rng = Rng(cfg.seed).split(2);
    long first_epoch_accepted = 0, first_epoch_proposed = 0;

    for (long step = 0; step < steps; ++step) {
        Tensor X = pipe.sample_signals(cfg.batch_size, data_rng);
        bool on_row = circulant && data_rng.below(2) == 1;
        Tensor prop_main = res.mask, prop_row = res.row_mask;
        if (on_row)
            prop_row = propose_neighbor(res.row_mask, *pipe.row_partition(), data_rng);
        else
            prop_main = propose_neighbor(res.mask, *pipe.phi_partition(), data_rng);

        // identical noise draws for both losses: only the mask differs
        Rng noise_base = data_rng.split(3);
        Rng n1 = noise_base, n2 = noise_base;
        double cur = pipe.batch_loss(p, res.mask, rowp, X, n1, res.scale);
        double prop = pipe.batch_loss(p, prop_main, circulant ? &prop_row : nullptr,
                                      X, n2, res.scale);
        ++res.proposed;
        bool take = baseline_accept(cfg.baseline, cfg.siman_rule, cur, prop, temp,
                                    data_rng);
        if (take) {
            ++res.accepted;
            res.mask = std::move(prop_main);
            if (circulant) res.row_mask = std::move(prop_row);
            res.final_loss = prop;
        } else {
            res.final_loss = cur;
        }
        if (step < static_cast<long>(per_epoch)) {
            ++first_epoch_proposed;
            if (take) ++first_epoch_accepted;
        }
        if (cfg.baseline == BaselineKind::SimAn) temp *= cfg.siman_decay;
        if ((step + 1) % per_epoch == 0)
            eval_to_history(static_cast<int>((step + 1) / per_epoch));
    }
    res.first_epoch_acceptance =
        first_epoch_proposed > 0
            ? static_cast<double>(first_epoch_accepted) / first_epoch_proposed
            : 0.0;
    return res;
}

}  // namespace glodismo
