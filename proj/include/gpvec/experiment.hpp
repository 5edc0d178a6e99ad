#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpvec/evolution.hpp"
#include "gpvec/synth.hpp"

namespace gpvec {

// Everything a batch of evolution runs needs; echoed verbatim into every
// artifact so any result is reproducible from its own header.
struct ExperimentManifest {
    std::string embeddings_path;
    EmbeddingFormat embeddings_format = EmbeddingFormat::automatic;
    std::string questions_path;
    std::vector<int> groups;  // 1-based group indices; empty = all groups
    EvolutionConfig cfg;
    std::size_t runs = 30;
    std::uint64_t base_seed = 1;
    std::string out_dir;
    bool lowercase = true;
};

// One-line JSON echo (sorted keys) used as the config header of artifacts.
std::string manifest_echo(const ExperimentManifest& m);

// Seed derivation: run_seed = base_seed + run_index; a generator seeded with
// run_seed then yields split_seed and evolve_seed, shared by every group of
// that run index.
struct RunSeeds {
    std::uint64_t run_seed = 0;
    std::uint64_t split_seed = 0;
    std::uint64_t evolve_seed = 0;
};
RunSeeds derive_run_seeds(std::uint64_t base_seed, std::size_t run_index);

// On-disk run artifact (group<G>_run<RRR>.json next to group<G>_run<RRR>_log.csv).
struct StoredRun {
    int group_index = 0;
    std::string group_name;
    std::size_t run_index = 0;
    RunSeeds seeds;
    std::string best_program;
    double best_train_accuracy = 0.0;
    double best_test_accuracy = 0.0;
    double rule_train_accuracy = 0.0;
    double rule_test_accuracy = 0.0;
    std::size_t generations_completed = 0;
    std::size_t evaluation_count = 0;
    std::vector<EvaluatedProgram> survivors;
};

void save_stored_run(const StoredRun& run, const std::string& manifest_json,
                     const std::string& path);
// Throws if the file's embedded manifest differs from expect_manifest_json
// (pass empty to skip the check).
StoredRun load_stored_run(const std::string& path, const std::string& expect_manifest_json);

// evolve: per group and run index split/evolve/select, writing run JSONs, per
// generation CSV logs and aggregate.csv.  Existing runs with a matching
// manifest are reused, so an aborted batch resumes.  Returns a process exit
// code; progress goes to err, nothing to out but the final aggregate path.
int cmd_evolve(const ExperimentManifest& m, std::ostream& out, std::ostream& err);

struct EvalOptions {
    std::string embeddings_path;
    EmbeddingFormat embeddings_format = EmbeddingFormat::automatic;
    std::string questions_path;
    std::vector<int> groups;
    std::string programs_path;  // one program per line; '#' comments
    bool use_rule = false;      // score the baseline rule (with or without file)
    std::size_t restrict_l = 30000;
    bool exclude_inputs = true;
    bool lowercase = true;
    std::uint64_t split_seed = 0;
    std::string part = "all";  // all | train | test (train/test need split_seed)
    std::string out_path;      // optional CSV copy of stdout
};
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);

struct TransferOptions {
    std::string runs_dir;  // directory of cmd_evolve run JSONs
    std::string embeddings_path;
    EmbeddingFormat embeddings_format = EmbeddingFormat::automatic;
    std::string questions_path;
    std::size_t restrict_l = 0;  // 0 = whole vocabulary (transfer default)
    bool exclude_inputs = true;
    bool lowercase = false;  // transfer corpora are cased by default
    std::string out_dir;
};
int cmd_transfer(const TransferOptions& o, std::ostream& out, std::ostream& err);

struct NearestOptions {
    std::string embeddings_path;
    EmbeddingFormat embeddings_format = EmbeddingFormat::automatic;
    std::string word;            // query word, or
    std::vector<double> vector;  // explicit query vector
    std::size_t k = 10;
    std::size_t restrict_l = 0;
    bool exclude_self = false;
    std::vector<std::string> exclude;
};
int cmd_nearest(const NearestOptions& o, std::ostream& out, std::ostream& err);

struct SynthOptions {
    std::string pairs_path;  // optional; otherwise pair_count generated names
    std::size_t pair_count = 20;
    std::size_t dim = 16;
    double noise = 0.0;
    std::size_t distractors = 100;
    std::size_t magnets = 0;
    std::size_t max_questions = 0;
    std::uint64_t seed = 0;
    std::string out_prefix;
};
int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err);

struct ReportOptions {
    std::string runs_dir;
    std::string out_path;  // optional CSV copy
};
int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err);

// $GPVEC_EMBEDDINGS names a default embeddings file or directory: an empty
// path resolves to the variable itself; a relative path that does not exist
// locally but does under the directory resolves there.
std::string resolve_embeddings_path(const std::string& path);

}  // namespace gpvec
