#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gpvec/benchmark.hpp"

namespace gpvec {

struct EvolutionConfig {
    std::size_t population_size = 500;
    std::size_t generations = 250;
    std::size_t survivors = 100;
    double p_crossover = 0.5;
    double p_mutation = 0.5;
    int depth_limit = 10;
    std::size_t restrict_l = 30000;   // 0 = whole vocabulary
    double subset_fraction = 0.2;     // in (0,1]; 1.0 = deterministic fitness
    std::size_t halt_min_questions = 10;
    double halt_threshold = 0.05;
    std::uint64_t seed = 0;
    bool exclude_inputs = true;
    bool reevaluate_unchanged = false;  // fresh subset for unchanged clones too
    int init_min_depth = 1;
    int init_max_depth = 4;
    std::size_t jobs = 1;  // concurrent fitness evaluations per generation
};

struct EvaluatedProgram {
    ProgramTree tree;
    double fitness = 0.0;
    std::size_t questions_seen = 0;
    bool halted_early = false;
    bool halted_nonfinite = false;
};

struct GenerationStat {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double median_fitness = 0.0;
    std::string best_program;
    std::size_t evaluations = 0;  // cumulative fitness calls so far
};

struct RunResult {
    std::uint64_t seed = 0;
    std::size_t generations_completed = 0;
    std::vector<EvaluatedProgram> final_survivors;
    ProgramTree best_program;
    double best_train_accuracy = 0.0;
    double best_test_accuracy = 0.0;
    double wall_time_seconds = 0.0;  // in-memory only, never persisted
    std::size_t evaluation_count = 0;
    std::vector<GenerationStat> trace;
};

// Subset fitness with the fitness accelerations: questions must already be the
// drawn subset, so this call is deterministic.  Any non-finite output halts
// with fitness exactly 0; running accuracy below halt_threshold after at least
// halt_min_questions halts keeping the partial accuracy.
EvaluatedProgram fitness(const ProgramTree& tree, std::span<const Question> questions,
                         const EmbeddingStore& store, const EvolutionConfig& cfg);

// ceil(subset_fraction * |train|) questions without replacement, in sampled
// order; callers draw freshly for every evaluation.
std::vector<Question> draw_fitness_subset(std::span<const Question> train,
                                          const EvolutionConfig& cfg, Rng& rng);

// Top k by (fitness desc, tree size asc, population index asc).
std::vector<EvaluatedProgram> select_truncation(const std::vector<EvaluatedProgram>& pop,
                                                std::size_t k);

// Deterministic cores of the variation operators: preorder point indices are
// explicit, the depth limit rejects an offspring back to its parent.
std::pair<ProgramTree, ProgramTree> crossover_at(const ProgramTree& p1, const ProgramTree& p2,
                                                 int i1, int i2, int depth_limit);
ProgramTree mutate_at(const ProgramTree& p, int index, const ProgramTree& replacement,
                      int depth_limit);

// Draw order: point in p1, then point in p2 (uniform over nodes each).
std::pair<ProgramTree, ProgramTree> one_point_crossover(const ProgramTree& p1,
                                                        const ProgramTree& p2, Rng& rng,
                                                        int depth_limit = kDepthLimit);

// Draw order: point (uniform over nodes), then random_tree(grow, depths 0-2).
ProgramTree uniform_mutation(const ProgramTree& p, Rng& rng,
                             int depth_limit = kDepthLimit);

// Algorithm-1 run.  Draw order from Rng(cfg.seed): ramped half-and-half init
// (individual i uses full for even i, grow for odd, target depth in
// [init_min_depth, init_max_depth]); then per generation clone choices, one
// p_crossover Bernoulli per adjacent clone pair (plus two point draws when it
// fires), one p_mutation Bernoulli per individual (plus mutation draws), and
// finally one subset draw per individual being (re-)evaluated, in population
// order.  Individuals structurally identical to their clone source keep the
// cached fitness unless cfg.reevaluate_unchanged.  test, when non-empty, is
// only used to fill best_test_accuracy.
RunResult evolve_run(std::span<const Question> train, const EmbeddingStore& store,
                     const EvolutionConfig& cfg, std::span<const Question> test = {},
                     const std::function<void(const GenerationStat&)>& on_generation = {});

struct BestSelection {
    ProgramTree tree;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::size_t survivor_index = 0;
};

// Re-scores every survivor on the full training set (deterministic pass) and
// picks the argmax with the truncation tie-break, then scores it on test.
BestSelection select_best_program(const std::vector<EvaluatedProgram>& final_survivors,
                                  std::span<const Question> full_train,
                                  std::span<const Question> test,
                                  const EmbeddingStore& store, const EvolutionConfig& cfg);

struct RunAggregate {
    double max_train = 0.0;
    double mean_train = 0.0;
    double max_test = 0.0;
    double mean_test = 0.0;
};

RunAggregate aggregate_runs(std::span<const RunResult> results);

}  // namespace gpvec
