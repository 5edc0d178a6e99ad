#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gpvec/experiment.hpp"

namespace {

gpvec::EmbeddingFormat parse_format(const std::string& s) {
    if (s == "text") return gpvec::EmbeddingFormat::text;
    if (s == "binary") return gpvec::EmbeddingFormat::binary;
    return gpvec::EmbeddingFormat::automatic;
}

std::vector<double> parse_vector_arg(const std::string& s) {
    std::vector<double> out;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = s.find(',', i);
        if (j == std::string::npos) j = s.size();
        double v = 0;
        auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + j, v);
        if (ec != std::errc{} || ptr != s.data() + j)
            throw CLI::ValidationError("--vector", "bad component '" + s.substr(i, j - i) + "'");
        out.push_back(v);
        i = j + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"word-vector composition programs: evolve, evaluate and transfer them"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key=value config file");
    app.set_version_flag("--version", "gpvec 0.1.0");

    const std::string fmt_help = "embedding file format: auto, text or binary";
    const auto fmt_check = CLI::IsMember({"auto", "text", "binary"});

    // evolve
    gpvec::ExperimentManifest manifest;
    std::string ev_fmt = "auto";
    bool ev_include_inputs = false, ev_no_lowercase = false;
    std::size_t ev_jobs = 1;
    auto* evolve = app.add_subcommand("evolve", "run the evolutionary search per group");
    evolve->add_option("--embeddings", manifest.embeddings_path, "embedding file");
    evolve->add_option("--format", ev_fmt, fmt_help)->check(fmt_check);
    evolve->add_option("--questions", manifest.questions_path, "analogy question file")
        ->required();
    evolve->add_option("--group", manifest.groups, "1-based group indices (default: all)");
    evolve->add_option("--out", manifest.out_dir, "output directory for run artifacts")
        ->required();
    evolve->add_option("--runs", manifest.runs, "independent runs per group");
    evolve->add_option("--seed", manifest.base_seed, "base seed; run r uses base+r");
    evolve->add_option("--pop", manifest.cfg.population_size, "population size");
    evolve->add_option("--gens", manifest.cfg.generations, "number of generations");
    evolve->add_option("--survivors", manifest.cfg.survivors, "truncation selection size");
    evolve->add_option("--p-cx", manifest.cfg.p_crossover, "crossover probability");
    evolve->add_option("--p-mut", manifest.cfg.p_mutation, "mutation probability");
    evolve->add_option("--depth", manifest.cfg.depth_limit, "trees never exceed this depth");
    evolve->add_option("--restrict", manifest.cfg.restrict_l,
                       "search only the l most frequent words (0 = all)");
    evolve->add_option("--subset", manifest.cfg.subset_fraction,
                       "fraction of the training set per fitness evaluation");
    evolve->add_option("--halt-min", manifest.cfg.halt_min_questions,
                       "questions before the low-accuracy halt applies");
    evolve->add_option("--halt-threshold", manifest.cfg.halt_threshold,
                       "running accuracy below this halts the evaluation");
    evolve->add_flag("--include-inputs", ev_include_inputs,
                     "let the three question words be answer candidates");
    evolve->add_flag("--reevaluate-unchanged", manifest.cfg.reevaluate_unchanged,
                     "fresh fitness subset even for unchanged individuals");
    evolve->add_option("--init-min", manifest.cfg.init_min_depth, "initial tree depth ramp low");
    evolve->add_option("--init-max", manifest.cfg.init_max_depth, "initial tree depth ramp high");
    evolve->add_flag("--no-lowercase", ev_no_lowercase, "keep question case as-is");
    evolve->add_option("--jobs", ev_jobs, "concurrent fitness evaluations");

    // eval
    gpvec::EvalOptions eval_opts;
    std::string eval_fmt = "auto";
    bool eval_include_inputs = false, eval_no_lowercase = false;
    auto* eval = app.add_subcommand("eval", "score programs on question groups");
    eval->add_option("--embeddings", eval_opts.embeddings_path, "embedding file");
    eval->add_option("--format", eval_fmt, fmt_help)->check(fmt_check);
    eval->add_option("--questions", eval_opts.questions_path, "analogy question file")
        ->required();
    eval->add_option("--group", eval_opts.groups, "1-based group indices (default: all)");
    eval->add_option("--programs", eval_opts.programs_path,
                     "program file, one per line, '#' comments");
    eval->add_flag("--rule", eval_opts.use_rule, "score the baseline rule d = c - a + b");
    eval->add_option("--restrict", eval_opts.restrict_l,
                     "search only the l most frequent words (0 = all)");
    eval->add_flag("--include-inputs", eval_include_inputs,
                   "let the three question words be answer candidates");
    eval->add_flag("--no-lowercase", eval_no_lowercase, "keep question case as-is");
    eval->add_option("--split-seed", eval_opts.split_seed,
                     "seed for --part train/test splitting");
    eval->add_option("--part", eval_opts.part, "evaluate on: all, train or test")
        ->check(CLI::IsMember({"all", "train", "test"}));
    eval->add_option("--out", eval_opts.out_path, "also write the CSV here");

    // transfer
    gpvec::TransferOptions transfer_opts;
    std::string tr_fmt = "auto";
    bool tr_include_inputs = false, tr_lowercase = false;
    auto* transfer =
        app.add_subcommand("transfer", "execute stored best programs on a second space");
    transfer->add_option("--runs-dir", transfer_opts.runs_dir, "directory of evolve run files")
        ->required();
    transfer->add_option("--embeddings", transfer_opts.embeddings_path,
                         "embedding file of the transfer space");
    transfer->add_option("--format", tr_fmt, fmt_help)->check(fmt_check);
    transfer->add_option("--questions", transfer_opts.questions_path, "analogy question file")
        ->required();
    transfer->add_option("--restrict", transfer_opts.restrict_l,
                         "search only the l most frequent words (0 = all)");
    transfer->add_flag("--include-inputs", tr_include_inputs,
                       "let the three question words be answer candidates");
    transfer->add_flag("--lowercase", tr_lowercase, "lowercase question words");
    transfer->add_option("--out", transfer_opts.out_dir, "output directory")->required();

    // nearest
    gpvec::NearestOptions nearest_opts;
    std::string ne_fmt = "auto", ne_vector;
    auto* nearest = app.add_subcommand("nearest", "list nearest words by cosine similarity");
    nearest->add_option("--embeddings", nearest_opts.embeddings_path, "embedding file");
    nearest->add_option("--format", ne_fmt, fmt_help)->check(fmt_check);
    nearest->add_option("word", nearest_opts.word, "query word");
    nearest->add_option("--vector", ne_vector, "explicit query vector v1,v2,...");
    nearest->add_option("-k,--k", nearest_opts.k, "number of neighbors");
    nearest->add_option("--restrict", nearest_opts.restrict_l,
                        "search only the l most frequent words (0 = all)");
    nearest->add_flag("--exclude-self", nearest_opts.exclude_self,
                      "drop the query word from the listing");
    nearest->add_option("--exclude", nearest_opts.exclude, "words to drop from the listing");

    // synth
    gpvec::SynthOptions synth_opts;
    auto* synth = app.add_subcommand("synth", "generate a constant-offset fixture space");
    synth->add_option("--pairs", synth_opts.pairs_path, "word-pair file (two words per line)");
    synth->add_option("--pairs-count", synth_opts.pair_count,
                      "number of generated pairs when no --pairs file");
    synth->add_option("--dim", synth_opts.dim, "vector dimensionality");
    synth->add_option("--noise", synth_opts.noise, "per-component noise amplitude");
    synth->add_option("--distractors", synth_opts.distractors, "number of distractor words");
    synth->add_option("--magnets", synth_opts.magnets,
                      "distractors placed on the b+c landing points (counted in --distractors)");
    synth->add_option("--questions", synth_opts.max_questions,
                      "cap on generated questions (0 = all combinations)");
    synth->add_option("--seed", synth_opts.seed, "generator seed");
    synth->add_option("--out", synth_opts.out_prefix, "output path prefix")->required();

    // report
    gpvec::ReportOptions report_opts;
    auto* report = app.add_subcommand("report", "re-aggregate stored evolve runs");
    report->add_option("--runs-dir", report_opts.runs_dir, "directory of evolve run files")
        ->required();
    report->add_option("--out", report_opts.out_path, "also write the CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve->parsed()) {
            manifest.embeddings_path = gpvec::resolve_embeddings_path(manifest.embeddings_path);
            manifest.embeddings_format = parse_format(ev_fmt);
            manifest.cfg.exclude_inputs = !ev_include_inputs;
            manifest.cfg.jobs = ev_jobs;
            manifest.lowercase = !ev_no_lowercase;
            return gpvec::cmd_evolve(manifest, std::cout, std::cerr);
        }
        if (eval->parsed()) {
            eval_opts.embeddings_path = gpvec::resolve_embeddings_path(eval_opts.embeddings_path);
            eval_opts.embeddings_format = parse_format(eval_fmt);
            eval_opts.exclude_inputs = !eval_include_inputs;
            eval_opts.lowercase = !eval_no_lowercase;
            return gpvec::cmd_eval(eval_opts, std::cout, std::cerr);
        }
        if (transfer->parsed()) {
            transfer_opts.embeddings_path =
                gpvec::resolve_embeddings_path(transfer_opts.embeddings_path);
            transfer_opts.embeddings_format = parse_format(tr_fmt);
            transfer_opts.exclude_inputs = !tr_include_inputs;
            transfer_opts.lowercase = tr_lowercase;
            return gpvec::cmd_transfer(transfer_opts, std::cout, std::cerr);
        }
        if (nearest->parsed()) {
            nearest_opts.embeddings_path =
                gpvec::resolve_embeddings_path(nearest_opts.embeddings_path);
            nearest_opts.embeddings_format = parse_format(ne_fmt);
            if (!ne_vector.empty()) nearest_opts.vector = parse_vector_arg(ne_vector);
            if (nearest_opts.word.empty() && nearest_opts.vector.empty()) {
                std::cerr << "error: nearest needs a query word or --vector\n";
                return 1;
            }
            return gpvec::cmd_nearest(nearest_opts, std::cout, std::cerr);
        }
        if (synth->parsed()) return gpvec::cmd_synth(synth_opts, std::cout, std::cerr);
        if (report->parsed()) return gpvec::cmd_report(report_opts, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
