#include "swarmtab/pso.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "swarmtab/errors.hpp"
#include "swarmtab/evaluation.hpp"

namespace swarmtab {

void PsoConfig::validate() const {
    if (swarm_size < 2) throw ConfigError("pso: swarm_size must be >= 2");
    if (max_iterations < 1) throw ConfigError("pso: max_iterations must be >= 1");
    if (inertia < 0.0 || cognitive < 0.0 || social < 0.0)
        throw ConfigError("pso: inertia, cognitive and social coefficients must be >= 0");
    if (penalty < 0.0) throw ConfigError("pso: penalty must be >= 0");
    if (!(velocity_clamp > 0.0)) throw ConfigError("pso: velocity_clamp must be > 0");
    if (!(fitness_split > 0.0) || !(fitness_split < 1.0))
        throw ConfigError("pso: fitness_split must be in (0, 1)");
}

std::size_t FeatureMask::n_selected() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

std::vector<std::size_t> FeatureMask::selected_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < bits.size(); ++j)
        if (bits[j]) idx.push_back(j);
    return idx;
}

std::string FeatureMask::key() const {
    std::string k(bits.size(), '0');
    for (std::size_t j = 0; j < bits.size(); ++j)
        if (bits[j]) k[j] = '1';
    return k;
}

double pso_cost(double f1, double penalty, std::size_t n_selected) {
    return -(f1 - penalty * static_cast<double>(n_selected));
}

// ---- fitness ---------------------------------------------------------------------

FitnessEvaluator::FitnessEvaluator(const Matrix& x, const std::vector<int>& y,
                                   const PsoConfig& config)
    : x_(x), y_(y), config_(config) {
    config_.validate();
    if (x_.rows != y_.size()) throw std::invalid_argument("fitness: row/target count mismatch");
    // The split is frozen once per run so fitness is a pure function of the mask.
    stratified_holdout(y_, config_.fitness_split, Rng::mix(config_.seed, /*tag=*/0x517),
                       train_rows_, val_rows_);
    x_train_ = x_.gather_rows(train_rows_);
    x_val_ = x_.gather_rows(val_rows_);
    y_train_.reserve(train_rows_.size());
    for (std::size_t i : train_rows_) y_train_.push_back(y_[i]);
    y_val_.reserve(val_rows_.size());
    for (std::size_t i : val_rows_) y_val_.push_back(y_[i]);
}

FitnessRecord FitnessEvaluator::evaluate(const FeatureMask& mask) {
    if (mask.bits.size() != x_.cols)
        throw std::invalid_argument("fitness: mask length does not match feature count");
    const std::string key = mask.key();
    if (auto it = cache_.find(key); it != cache_.end()) {
        ++cache_hits_;
        return it->second;
    }
    ++evaluations_;

    FitnessRecord rec;
    rec.n_selected = mask.n_selected();
    if (rec.n_selected == 0) {
        rec.f1 = 0.0; // degenerate rule: empty mask scores zero, no model trained
    } else {
        const std::vector<std::size_t> cols = mask.selected_indices();
        const Matrix xt = x_train_.gather_cols(cols);
        const Matrix xv = x_val_.gather_cols(cols);
        LogRegModel model = logreg_fit(xt, y_train_, config_.inner);
        rec.f1 = f1_score(y_val_, logreg_predict_proba(model, xv));
    }
    rec.cost = pso_cost(rec.f1, config_.penalty, rec.n_selected);
    cache_.emplace(key, rec);
    return rec;
}

// ---- swarm updates ------------------------------------------------------------------

void velocity_update(Particle& particle, const std::vector<std::uint8_t>& g_best,
                     const PsoConfig& config, Rng& rng) {
    for (std::size_t j = 0; j < particle.velocity.size(); ++j) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        const double x = static_cast<double>(particle.position[j]);
        double v = config.inertia * particle.velocity[j] +
                   config.cognitive * r1 * (static_cast<double>(particle.personal_best[j]) - x) +
                   config.social * r2 * (static_cast<double>(g_best[j]) - x);
        v = std::clamp(v, -config.velocity_clamp, config.velocity_clamp);
        particle.velocity[j] = v;
    }
}

void position_update(Particle& particle, Rng& rng) {
    for (std::size_t j = 0; j < particle.position.size(); ++j) {
        const double s = 1.0 / (1.0 + std::exp(-particle.velocity[j]));
        particle.position[j] = rng.uniform() < s ? 1 : 0;
    }
}

// ---- main loop ------------------------------------------------------------------------

PsoResult pso_run(const Matrix& x, const std::vector<int>& y, const PsoConfig& config) {
    config.validate();
    if (x.cols < 2) throw DataError("pso_run: need at least 2 features");
    {
        bool has0 = false, has1 = false;
        for (int v : y) (v ? has1 : has0) = true;
        if (!has0 || !has1) throw DataError("pso_run: both classes must be present");
    }

    const std::size_t n = x.cols;
    FitnessEvaluator fitness(x, y, config);
    Rng rng = Rng(config.seed).split(0xb0a);

    PsoResult result;
    result.swarm.resize(config.swarm_size);

    FitnessRecord best_record;
    std::vector<std::uint8_t> g_best;
    double g_best_cost = 0.0;
    bool have_best = false;

    auto consider_global = [&](const std::vector<std::uint8_t>& bits, const FitnessRecord& rec) {
        if (!have_best || rec.cost < g_best_cost) {
            have_best = true;
            g_best = bits;
            g_best_cost = rec.cost;
            best_record = rec;
        }
    };

    // Initialization: bits Bernoulli(0.5), velocities Uniform(-1, 1).
    for (auto& p : result.swarm) {
        p.position.resize(n);
        p.velocity.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            p.position[j] = rng.bernoulli(0.5) ? 1 : 0;
            p.velocity[j] = rng.uniform(-1.0, 1.0);
        }
        const FitnessRecord rec = fitness.evaluate(FeatureMask{p.position});
        p.personal_best = p.position;
        p.personal_best_cost = rec.cost;
        consider_global(p.position, rec);
    }
    result.history.push_back({0, g_best_cost, best_record.f1, best_record.n_selected});

    for (std::size_t t = 1; t <= config.max_iterations; ++t) {
        // Synchronous PSO: every particle sees the global best of the previous
        // iteration; the global best advances after the whole sweep.
        const std::vector<std::uint8_t> g_prev = g_best;
        for (auto& p : result.swarm) {
            velocity_update(p, g_prev, config, rng);
            position_update(p, rng);
            const FitnessRecord rec = fitness.evaluate(FeatureMask{p.position});
            if (rec.cost < p.personal_best_cost) {
                p.personal_best = p.position;
                p.personal_best_cost = rec.cost;
            }
            consider_global(p.position, rec);
        }
        result.history.push_back({t, g_best_cost, best_record.f1, best_record.n_selected});
    }

    result.best_mask = FeatureMask{g_best};
    result.best_cost = g_best_cost;
    result.best_record = best_record;
    result.distinct_masks_evaluated = fitness.evaluations();
    return result;
}

std::string pso_history_csv(const std::vector<IterationStat>& history) {
    std::ostringstream os;
    os << "iteration,c_best,f1_best,n_best\n";
    char buf[96];
    for (const auto& h : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%zu\n", h.iteration, h.best_cost, h.best_f1,
                      h.best_n);
        os << buf;
    }
    return os.str();
}

} // namespace swarmtab
