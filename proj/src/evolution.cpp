#include "gpvec/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace gpvec {

namespace {

struct FitnessScore {
    double fitness = 0.0;
    std::size_t questions_seen = 0;
    bool halted_early = false;
    bool halted_nonfinite = false;
};

FitnessScore score_tree(const ProgramTree& tree, std::span<const Question> questions,
                        const EmbeddingStore& store, const EvolutionConfig& cfg) {
    if (questions.empty()) throw std::runtime_error("fitness on empty question list");
    FitnessScore s;
    std::size_t correct = 0;
    for (const auto& q : questions) {
        ++s.questions_seen;
        const auto outcome = answer_question(tree, q, store, cfg.restrict_l, cfg.exclude_inputs);
        if (outcome.nonfinite) {
            s.halted_nonfinite = true;
            s.fitness = 0.0;
            return s;
        }
        if (outcome.correct) ++correct;
        if (s.questions_seen >= cfg.halt_min_questions) {
            const double running =
                static_cast<double>(correct) / static_cast<double>(s.questions_seen);
            if (running < cfg.halt_threshold) {
                s.halted_early = true;
                s.fitness = running;
                return s;
            }
        }
    }
    s.fitness = static_cast<double>(correct) / static_cast<double>(questions.size());
    return s;
}

void validate(const EvolutionConfig& cfg) {
    if (cfg.population_size == 0) throw std::invalid_argument("population_size must be positive");
    if (cfg.survivors == 0 || cfg.survivors > cfg.population_size)
        throw std::invalid_argument("survivors must be in [1, population_size]");
    if (cfg.p_crossover < 0.0 || cfg.p_crossover > 1.0 || cfg.p_mutation < 0.0 ||
        cfg.p_mutation > 1.0)
        throw std::invalid_argument("probabilities must be in [0,1]");
    if (!(cfg.subset_fraction > 0.0) || cfg.subset_fraction > 1.0)
        throw std::invalid_argument("subset_fraction must be in (0,1]");
}

struct Slot {
    ProgramTree tree;
    FitnessScore score;
    bool needs_eval = true;
};

// Comparator shared by truncation selection and best-of-generation reporting:
// fitness desc, tree size asc, index asc.  Sizes are precomputed by callers.
bool better(double fi, int si, std::size_t i, double fj, int sj, std::size_t j) {
    if (fi != fj) return fi > fj;
    if (si != sj) return si < sj;
    return i < j;
}

}  // namespace

EvaluatedProgram fitness(const ProgramTree& tree, std::span<const Question> questions,
                         const EmbeddingStore& store, const EvolutionConfig& cfg) {
    const FitnessScore s = score_tree(tree, questions, store, cfg);
    return EvaluatedProgram{tree, s.fitness, s.questions_seen, s.halted_early,
                            s.halted_nonfinite};
}

std::vector<Question> draw_fitness_subset(std::span<const Question> train,
                                          const EvolutionConfig& cfg, Rng& rng) {
    const std::size_t n = train.size();
    if (n == 0) throw std::runtime_error("draw_fitness_subset on empty training set");
    std::size_t k = static_cast<std::size_t>(
        std::ceil(cfg.subset_fraction * static_cast<double>(n)));
    if (k == 0) k = 1;
    if (k > n) k = n;
    const auto idx = rng.sample_without_replacement(n, k);
    std::vector<Question> out;
    out.reserve(k);
    for (std::size_t i : idx) out.push_back(train[i]);
    return out;
}

std::vector<EvaluatedProgram> select_truncation(const std::vector<EvaluatedProgram>& pop,
                                                std::size_t k) {
    if (pop.size() < k) throw std::invalid_argument("select_truncation: k exceeds population");
    std::vector<int> sizes(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) sizes[i] = size(pop[i].tree);
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return better(pop[i].fitness, sizes[i], i, pop[j].fitness, sizes[j], j);
    });
    std::vector<EvaluatedProgram> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(pop[order[i]]);
    return out;
}

std::pair<ProgramTree, ProgramTree> crossover_at(const ProgramTree& p1, const ProgramTree& p2,
                                                 int i1, int i2, int depth_limit) {
    ProgramTree c1 = replace_subtree(p1, i1, subtree_at(p2, i2));
    ProgramTree c2 = replace_subtree(p2, i2, subtree_at(p1, i1));
    if (depth(c1) > depth_limit) c1 = p1;
    if (depth(c2) > depth_limit) c2 = p2;
    return {std::move(c1), std::move(c2)};
}

ProgramTree mutate_at(const ProgramTree& p, int index, const ProgramTree& replacement,
                      int depth_limit) {
    ProgramTree child = replace_subtree(p, index, replacement);
    if (depth(child) > depth_limit) return p;
    return child;
}

std::pair<ProgramTree, ProgramTree> one_point_crossover(const ProgramTree& p1,
                                                        const ProgramTree& p2, Rng& rng,
                                                        int depth_limit) {
    const int i1 = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(size(p1))));
    const int i2 = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(size(p2))));
    return crossover_at(p1, p2, i1, i2, depth_limit);
}

ProgramTree uniform_mutation(const ProgramTree& p, Rng& rng, int depth_limit) {
    const int index = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(size(p))));
    const ProgramTree replacement = random_tree(rng, 0, 2, GrowMethod::grow);
    return mutate_at(p, index, replacement, depth_limit);
}

RunResult evolve_run(std::span<const Question> train, const EmbeddingStore& store,
                     const EvolutionConfig& cfg, std::span<const Question> test,
                     const std::function<void(const GenerationStat&)>& on_generation) {
    if (train.empty()) throw std::runtime_error("evolve_run on empty training set");
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(cfg.seed);
    RunResult rr;
    rr.seed = cfg.seed;

    std::vector<Slot> pop(cfg.population_size);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const GrowMethod method = i % 2 == 0 ? GrowMethod::full : GrowMethod::grow;
        pop[i].tree = random_tree(rng, cfg.init_min_depth, cfg.init_max_depth, method);
    }

    // Subsets are pre-drawn sequentially so that parallel evaluation is
    // indistinguishable from sequential.
    auto evaluate_pending = [&](std::vector<Slot>& slots) {
        std::vector<std::size_t> pending;
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i].needs_eval || cfg.reevaluate_unchanged) pending.push_back(i);
        std::vector<std::vector<Question>> subsets;
        subsets.reserve(pending.size());
        for (std::size_t k = 0; k < pending.size(); ++k)
            subsets.push_back(draw_fitness_subset(train, cfg, rng));
        auto eval_one = [&](std::size_t k) {
            Slot& s = slots[pending[k]];
            s.score = score_tree(s.tree, subsets[k], store, cfg);
            s.needs_eval = false;
        };
        const std::size_t jobs = std::min(cfg.jobs == 0 ? std::size_t{1} : cfg.jobs,
                                          pending.size());
        if (jobs <= 1) {
            for (std::size_t k = 0; k < pending.size(); ++k) eval_one(k);
        } else {
            std::vector<std::thread> workers;
            workers.reserve(jobs);
            for (std::size_t t = 0; t < jobs; ++t)
                workers.emplace_back([&, t] {
                    for (std::size_t k = t; k < pending.size(); k += jobs) eval_one(k);
                });
            for (auto& w : workers) w.join();
        }
        rr.evaluation_count += pending.size();
    };

    auto record_stat = [&](std::size_t gen) {
        std::vector<double> fits(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) fits[i] = pop[i].score.fitness;
        std::size_t best = 0;
        int best_size = size(pop[0].tree);
        double sum = fits[0];
        for (std::size_t i = 1; i < pop.size(); ++i) {
            sum += fits[i];
            const int sz = size(pop[i].tree);
            if (better(fits[i], sz, i, fits[best], best_size, best)) {
                best = i;
                best_size = sz;
            }
        }
        std::vector<double> sorted = fits;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        const double median =
            n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
        GenerationStat stat{gen,
                            fits[best],
                            sum / static_cast<double>(n),
                            median,
                            format_program(pop[best].tree),
                            rr.evaluation_count};
        rr.trace.push_back(stat);
        if (on_generation) on_generation(stat);
    };

    evaluate_pending(pop);
    record_stat(0);

    std::vector<int> sizes(pop.size());
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        for (std::size_t i = 0; i < pop.size(); ++i) sizes[i] = size(pop[i].tree);
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return better(pop[i].score.fitness, sizes[i], i, pop[j].score.fitness, sizes[j], j);
        });
        std::vector<Slot> survivors;
        survivors.reserve(cfg.survivors);
        for (std::size_t i = 0; i < cfg.survivors; ++i) survivors.push_back(pop[order[i]]);

        std::vector<Slot> next(cfg.population_size);
        std::vector<std::size_t> source(cfg.population_size);
        for (std::size_t i = 0; i < next.size(); ++i) {
            source[i] = rng.uniform_index(survivors.size());
            next[i] = survivors[source[i]];
            next[i].needs_eval = false;
        }
        for (std::size_t p = 0; 2 * p + 1 < next.size(); ++p) {
            if (!rng.bernoulli(cfg.p_crossover)) continue;
            auto [c1, c2] = one_point_crossover(next[2 * p].tree, next[2 * p + 1].tree, rng,
                                                cfg.depth_limit);
            next[2 * p].tree = std::move(c1);
            next[2 * p + 1].tree = std::move(c2);
        }
        for (auto& slot : next)
            if (rng.bernoulli(cfg.p_mutation))
                slot.tree = uniform_mutation(slot.tree, rng, cfg.depth_limit);
        for (std::size_t i = 0; i < next.size(); ++i)
            if (!(next[i].tree == survivors[source[i]].tree)) next[i].needs_eval = true;

        pop = std::move(next);
        evaluate_pending(pop);
        record_stat(gen);
    }
    rr.generations_completed = cfg.generations;

    std::vector<EvaluatedProgram> last;
    last.reserve(pop.size());
    for (const auto& s : pop)
        last.push_back(EvaluatedProgram{s.tree, s.score.fitness, s.score.questions_seen,
                                        s.score.halted_early, s.score.halted_nonfinite});
    rr.final_survivors = select_truncation(last, cfg.survivors);

    const BestSelection best = select_best_program(rr.final_survivors, train, test, store, cfg);
    rr.best_program = best.tree;
    rr.best_train_accuracy = best.train_accuracy;
    rr.best_test_accuracy = best.test_accuracy;
    rr.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rr;
}

BestSelection select_best_program(const std::vector<EvaluatedProgram>& final_survivors,
                                  std::span<const Question> full_train,
                                  std::span<const Question> test,
                                  const EmbeddingStore& store, const EvolutionConfig& cfg) {
    if (final_survivors.empty())
        throw std::runtime_error("select_best_program with no survivors");
    std::size_t best = 0;
    double best_acc = -1.0;
    int best_size = 0;
    for (std::size_t i = 0; i < final_survivors.size(); ++i) {
        const double acc = evaluate_accuracy(final_survivors[i].tree, full_train, store,
                                             cfg.restrict_l, cfg.exclude_inputs);
        const int sz = size(final_survivors[i].tree);
        if (best_acc < 0.0 || better(acc, sz, i, best_acc, best_size, best)) {
            best = i;
            best_acc = acc;
            best_size = sz;
        }
    }
    BestSelection sel;
    sel.tree = final_survivors[best].tree;
    sel.train_accuracy = best_acc;
    sel.test_accuracy = test.empty() ? 0.0
                                     : evaluate_accuracy(sel.tree, test, store, cfg.restrict_l,
                                                         cfg.exclude_inputs);
    sel.survivor_index = best;
    return sel;
}

RunAggregate aggregate_runs(std::span<const RunResult> results) {
    if (results.empty()) throw std::runtime_error("aggregate_runs on empty result list");
    RunAggregate agg;
    double sum_train = 0.0, sum_test = 0.0;
    agg.max_train = results[0].best_train_accuracy;
    agg.max_test = results[0].best_test_accuracy;
    for (const auto& r : results) {
        agg.max_train = std::max(agg.max_train, r.best_train_accuracy);
        agg.max_test = std::max(agg.max_test, r.best_test_accuracy);
        sum_train += r.best_train_accuracy;
        sum_test += r.best_test_accuracy;
    }
    agg.mean_train = sum_train / static_cast<double>(results.size());
    agg.mean_test = sum_test / static_cast<double>(results.size());
    return agg;
}

}  // namespace gpvec
