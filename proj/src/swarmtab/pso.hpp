#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "swarmtab/classic_models.hpp"
#include "swarmtab/matrix.hpp"
#include "swarmtab/rng.hpp"

namespace swarmtab {

struct PsoConfig {
    std::size_t swarm_size = 20;
    std::size_t max_iterations = 1000;
    double inertia = 0.7;
    double cognitive = 1.5;
    double social = 2.0;
    double penalty = 0.005;
    double velocity_clamp = 4.0;
    std::uint64_t seed = 0;
    double fitness_split = 0.8; // train fraction for the inner model
    LogRegConfig inner;         // the fitness model

    void validate() const; // throws ConfigError on invariant violations
};

// Binary inclusion vector over features.
struct FeatureMask {
    std::vector<std::uint8_t> bits;

    std::size_t n_selected() const;
    std::vector<std::size_t> selected_indices() const;
    std::string key() const; // '0'/'1' string, memoization key
};

// -(f1 - penalty * n_selected); lower is better.
double pso_cost(double f1, double penalty, std::size_t n_selected);

struct FitnessRecord {
    double f1 = 0.0;
    std::size_t n_selected = 0;
    double cost = 0.0;
};

// Deterministic wrapper fitness: trains the inner logistic regression on the
// mask-restricted training rows of a split frozen at construction, scores F1
// on the held-out rows. The empty mask is F1 = 0 with no model trained.
// Evaluations are memoized by mask.
class FitnessEvaluator {
public:
    FitnessEvaluator(const Matrix& x, const std::vector<int>& y, const PsoConfig& config);

    FitnessRecord evaluate(const FeatureMask& mask);

    std::size_t n_features() const { return x_.cols; }
    std::size_t evaluations() const { return evaluations_; }
    std::size_t cache_hits() const { return cache_hits_; }

private:
    Matrix x_;
    std::vector<int> y_;
    PsoConfig config_;
    std::vector<std::size_t> train_rows_;
    std::vector<std::size_t> val_rows_;
    Matrix x_train_;
    Matrix x_val_;
    std::vector<int> y_train_;
    std::vector<int> y_val_;
    std::unordered_map<std::string, FitnessRecord> cache_;
    std::size_t evaluations_ = 0;
    std::size_t cache_hits_ = 0;
};

struct Particle {
    std::vector<std::uint8_t> position;
    std::vector<double> velocity;
    std::vector<std::uint8_t> personal_best;
    double personal_best_cost = 0.0;
};

struct IterationStat {
    std::size_t iteration = 0; // 0 = after initialization
    double best_cost = 0.0;
    double best_f1 = 0.0;
    std::size_t best_n = 0;
};

struct PsoResult {
    FeatureMask best_mask;
    double best_cost = 0.0;
    FitnessRecord best_record;
    std::vector<IterationStat> history; // one entry per iteration, non-increasing cost
    std::vector<Particle> swarm;        // final state
    std::size_t distinct_masks_evaluated = 0;
};

// v <- w v + c1 r1 (p_best - x) + c2 r2 (g_best - x), per dimension with fresh
// r1, r2 ~ Uniform(0,1), then clamped to [-velocity_clamp, velocity_clamp].
void velocity_update(Particle& particle, const std::vector<std::uint8_t>& g_best,
                     const PsoConfig& config, Rng& rng);

// x_j <- 1 if u < sigmoid(v_j) else 0 with fresh u ~ Uniform(0,1) per
// dimension (standard binary-PSO transfer rule).
void position_update(Particle& particle, Rng& rng);

// Runs the full binary-PSO loop: random initialization (bits Bernoulli(0.5),
// velocities Uniform(-1,1)), then max_iterations rounds of velocity/position
// updates, fitness evaluation and personal/global best tracking. Deterministic
// for a fixed seed.
PsoResult pso_run(const Matrix& x, const std::vector<int>& y, const PsoConfig& config);

// Per-iteration history as CSV: iteration,c_best,f1_best,n_best.
std::string pso_history_csv(const std::vector<IterationStat>& history);

} // namespace swarmtab
