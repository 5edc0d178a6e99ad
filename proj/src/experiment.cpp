#include "gpvec/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "gpvec/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gpvec {

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

const char* format_name(EmbeddingFormat f) {
    switch (f) {
        case EmbeddingFormat::text: return "text";
        case EmbeddingFormat::binary: return "binary";
        default: return "auto";
    }
}

// seed and jobs are execution details, not part of the experiment identity,
// so they stay out of the echoed config.
json cfg_to_json(const EvolutionConfig& c) {
    return json{{"population_size", c.population_size},
                {"generations", c.generations},
                {"survivors", c.survivors},
                {"p_crossover", c.p_crossover},
                {"p_mutation", c.p_mutation},
                {"depth_limit", c.depth_limit},
                {"restrict_l", c.restrict_l},
                {"subset_fraction", c.subset_fraction},
                {"halt_min_questions", c.halt_min_questions},
                {"halt_threshold", c.halt_threshold},
                {"exclude_inputs", c.exclude_inputs},
                {"reevaluate_unchanged", c.reevaluate_unchanged},
                {"init_min_depth", c.init_min_depth},
                {"init_max_depth", c.init_max_depth}};
}

json manifest_to_json(const ExperimentManifest& m) {
    return json{{"embeddings_path", m.embeddings_path},
                {"embeddings_format", format_name(m.embeddings_format)},
                {"questions_path", m.questions_path},
                {"groups", m.groups},
                {"cfg", cfg_to_json(m.cfg)},
                {"runs", m.runs},
                {"base_seed", m.base_seed},
                {"out_dir", m.out_dir},
                {"lowercase", m.lowercase}};
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
        out << content;
        if (!out) throw std::runtime_error(tmp + ": write failure");
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string run_stem(int group_index, std::size_t run_index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "group%d_run%03zu", group_index, run_index);
    return buf;
}

std::vector<QuestionGroup> select_groups(const std::vector<QuestionGroup>& all,
                                         const std::vector<int>& wanted) {
    if (wanted.empty()) return all;
    std::vector<QuestionGroup> out;
    for (int idx : wanted) {
        if (idx < 1 || static_cast<std::size_t>(idx) > all.size())
            throw std::runtime_error("group index " + std::to_string(idx) +
                                     " out of range (file has " + std::to_string(all.size()) +
                                     " groups)");
        out.push_back(all[static_cast<std::size_t>(idx) - 1]);
    }
    return out;
}

struct GroupAggregate {
    int group_index = 0;
    std::string group_name;
    std::size_t runs = 0;
    double max_train = 0, mean_train = 0, max_test = 0, mean_test = 0;
    double rule_train = 0, rule_test = 0;
};

GroupAggregate aggregate_stored(const std::vector<const StoredRun*>& runs) {
    GroupAggregate a;
    a.group_index = runs.front()->group_index;
    a.group_name = runs.front()->group_name;
    a.runs = runs.size();
    double st = 0, ste = 0, srt = 0, srte = 0;
    a.max_train = runs.front()->best_train_accuracy;
    a.max_test = runs.front()->best_test_accuracy;
    for (const StoredRun* r : runs) {
        a.max_train = std::max(a.max_train, r->best_train_accuracy);
        a.max_test = std::max(a.max_test, r->best_test_accuracy);
        st += r->best_train_accuracy;
        ste += r->best_test_accuracy;
        srt += r->rule_train_accuracy;
        srte += r->rule_test_accuracy;
    }
    const double n = static_cast<double>(runs.size());
    a.mean_train = st / n;
    a.mean_test = ste / n;
    a.rule_train = srt / n;
    a.rule_test = srte / n;
    return a;
}

std::string aggregate_csv(const std::string& echo, const std::vector<StoredRun>& runs) {
    // group rows in order of first appearance in the run list
    std::vector<int> order;
    std::map<int, std::vector<const StoredRun*>> by_group;
    for (const auto& r : runs) {
        if (!by_group.count(r.group_index)) order.push_back(r.group_index);
        by_group[r.group_index].push_back(&r);
    }
    std::string out = "# manifest: " + echo + "\n";
    out += "group_index,group_name,runs,max_train,mean_train,max_test,mean_test,"
           "rule_train,rule_test\n";
    for (int gi : order) {
        const GroupAggregate a = aggregate_stored(by_group[gi]);
        out += std::to_string(a.group_index) + "," + csv_field(a.group_name) + "," +
               std::to_string(a.runs) + "," + format_double(a.max_train) + "," +
               format_double(a.mean_train) + "," + format_double(a.max_test) + "," +
               format_double(a.mean_test) + "," + format_double(a.rule_train) + "," +
               format_double(a.rule_test) + "\n";
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_pairs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks.size() != 2)
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": expected 2 words, got " + std::to_string(toks.size()));
        pairs.emplace_back(std::string(toks[0]), std::string(toks[1]));
    }
    return pairs;
}

std::vector<std::string> list_run_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("group") && name.ends_with(".json"))
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error(dir + ": no run files (group*.json) found");
    return files;
}

}  // namespace

std::string manifest_echo(const ExperimentManifest& m) { return manifest_to_json(m).dump(); }

RunSeeds derive_run_seeds(std::uint64_t base_seed, std::size_t run_index) {
    RunSeeds s;
    s.run_seed = base_seed + run_index;
    Rng master(s.run_seed);
    s.split_seed = master.next_u64();
    s.evolve_seed = master.next_u64();
    return s;
}

void save_stored_run(const StoredRun& run, const std::string& manifest_json,
                     const std::string& path) {
    json survivors = json::array();
    for (const auto& s : run.survivors)
        survivors.push_back(json{{"program", format_program(s.tree)},
                                 {"fitness", s.fitness},
                                 {"questions_seen", s.questions_seen},
                                 {"halted_early", s.halted_early},
                                 {"halted_nonfinite", s.halted_nonfinite}});
    const json j{{"group_index", run.group_index},
                 {"group_name", run.group_name},
                 {"run_index", run.run_index},
                 {"run_seed", run.seeds.run_seed},
                 {"split_seed", run.seeds.split_seed},
                 {"evolve_seed", run.seeds.evolve_seed},
                 {"best_program", run.best_program},
                 {"best_train_accuracy", run.best_train_accuracy},
                 {"best_test_accuracy", run.best_test_accuracy},
                 {"rule_train_accuracy", run.rule_train_accuracy},
                 {"rule_test_accuracy", run.rule_test_accuracy},
                 {"generations_completed", run.generations_completed},
                 {"evaluation_count", run.evaluation_count},
                 {"manifest", json::parse(manifest_json)},
                 {"survivors", survivors}};
    atomic_write(path, j.dump(2) + "\n");
}

StoredRun load_stored_run(const std::string& path, const std::string& expect_manifest_json) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": bad run file: " + e.what());
    }
    if (!expect_manifest_json.empty() && j.at("manifest") != json::parse(expect_manifest_json))
        throw std::runtime_error(path +
                                 ": existing run was produced by a different manifest; "
                                 "remove stale artifacts or use a fresh --out directory");
    StoredRun r;
    r.group_index = j.at("group_index").get<int>();
    r.group_name = j.at("group_name").get<std::string>();
    r.run_index = j.at("run_index").get<std::size_t>();
    r.seeds.run_seed = j.at("run_seed").get<std::uint64_t>();
    r.seeds.split_seed = j.at("split_seed").get<std::uint64_t>();
    r.seeds.evolve_seed = j.at("evolve_seed").get<std::uint64_t>();
    r.best_program = j.at("best_program").get<std::string>();
    r.best_train_accuracy = j.at("best_train_accuracy").get<double>();
    r.best_test_accuracy = j.at("best_test_accuracy").get<double>();
    r.rule_train_accuracy = j.at("rule_train_accuracy").get<double>();
    r.rule_test_accuracy = j.at("rule_test_accuracy").get<double>();
    r.generations_completed = j.at("generations_completed").get<std::size_t>();
    r.evaluation_count = j.at("evaluation_count").get<std::size_t>();
    for (const auto& s : j.at("survivors"))
        r.survivors.push_back(EvaluatedProgram{
            parse_program(s.at("program").get<std::string>()), s.at("fitness").get<double>(),
            s.at("questions_seen").get<std::size_t>(), s.at("halted_early").get<bool>(),
            s.at("halted_nonfinite").get<bool>()});
    return r;
}

int cmd_evolve(const ExperimentManifest& m, std::ostream& out, std::ostream& err) {
    try {
        if (m.out_dir.empty()) throw std::runtime_error("evolve needs an output directory");
        fs::create_directories(m.out_dir);
        const std::string echo = manifest_echo(m);
        const EmbeddingStore store = load_embeddings(m.embeddings_path, m.embeddings_format);
        const auto all_groups = parse_questions(m.questions_path, m.lowercase);
        const auto selected = select_groups(all_groups, m.groups);
        const ProgramTree rule = baseline_rule_program();

        std::vector<StoredRun> runs;
        for (const auto& raw_group : selected) {
            const QuestionGroup group = filter_oov(raw_group, store);
            for (std::size_t run_index = 0; run_index < m.runs; ++run_index) {
                const std::string stem = run_stem(group.index, run_index);
                const std::string path = (fs::path(m.out_dir) / (stem + ".json")).string();
                if (fs::exists(path)) {
                    runs.push_back(load_stored_run(path, echo));
                    err << "reusing " << path << "\n";
                    continue;
                }
                const RunSeeds seeds = derive_run_seeds(m.base_seed, run_index);
                const SplitGroup split = split_train_test(group, seeds.split_seed);
                EvolutionConfig cfg = m.cfg;
                cfg.seed = seeds.evolve_seed;

                std::string log = "# manifest: " + echo + "\n";
                log += "# group " + std::to_string(group.index) + " '" + group.name +
                       "' run " + std::to_string(run_index) +
                       " run_seed " + std::to_string(seeds.run_seed) +
                       " split_seed " + std::to_string(seeds.split_seed) +
                       " evolve_seed " + std::to_string(seeds.evolve_seed) + "\n";
                log += "generation,best_fitness,mean_fitness,median_fitness,evaluations,"
                       "best_program\n";
                const RunResult rr = evolve_run(
                    split.train, store, cfg, split.test, [&](const GenerationStat& st) {
                        log += std::to_string(st.generation) + "," +
                               format_double(st.best_fitness) + "," +
                               format_double(st.mean_fitness) + "," +
                               format_double(st.median_fitness) + "," +
                               std::to_string(st.evaluations) + "," +
                               csv_field(st.best_program) + "\n";
                        if (st.generation % 50 == 0 && st.generation > 0)
                            err << stem << ": gen " << st.generation << "/" << cfg.generations
                                << " best=" << format_double(st.best_fitness) << "\n";
                    });

                StoredRun sr;
                sr.group_index = group.index;
                sr.group_name = group.name;
                sr.run_index = run_index;
                sr.seeds = seeds;
                sr.best_program = format_program(rr.best_program);
                sr.best_train_accuracy = rr.best_train_accuracy;
                sr.best_test_accuracy = rr.best_test_accuracy;
                sr.rule_train_accuracy = evaluate_accuracy(rule, split.train, store,
                                                           cfg.restrict_l, cfg.exclude_inputs);
                sr.rule_test_accuracy = evaluate_accuracy(rule, split.test, store,
                                                          cfg.restrict_l, cfg.exclude_inputs);
                sr.generations_completed = rr.generations_completed;
                sr.evaluation_count = rr.evaluation_count;
                sr.survivors = rr.final_survivors;
                atomic_write((fs::path(m.out_dir) / (stem + "_log.csv")).string(), log);
                save_stored_run(sr, echo, path);
                err << stem << ": best_train=" << format_double(sr.best_train_accuracy)
                    << " best_test=" << format_double(sr.best_test_accuracy) << " ("
                    << format_double(rr.wall_time_seconds) << "s)\n";
                runs.push_back(std::move(sr));
            }
        }
        const std::string agg_path = (fs::path(m.out_dir) / "aggregate.csv").string();
        atomic_write(agg_path, aggregate_csv(echo, runs));
        out << agg_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    bool had_error = false;
    try {
        const EmbeddingStore store = load_embeddings(o.embeddings_path, o.embeddings_format);
        const auto all_groups = parse_questions(o.questions_path, o.lowercase);
        const auto selected = select_groups(all_groups, o.groups);
        if (o.part != "all" && o.part != "train" && o.part != "test")
            throw std::runtime_error("part must be all, train or test");

        std::vector<std::pair<std::string, ProgramTree>> programs;
        if (o.use_rule) programs.emplace_back("rule", baseline_rule_program());
        if (!o.programs_path.empty()) {
            std::ifstream in(o.programs_path);
            if (!in) throw std::runtime_error(o.programs_path + ": cannot open");
            std::string line;
            int line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (!line.empty() && line.back() == '\r') line.pop_back();
                const std::size_t i = line.find_first_not_of(" \t");
                if (i == std::string::npos || line[i] == '#') continue;
                try {
                    programs.emplace_back("line" + std::to_string(line_no),
                                          parse_program(line));
                } catch (const std::exception& e) {
                    err << "error: " << o.programs_path << ": line " << line_no << ": "
                        << e.what() << "\n";
                    had_error = true;
                }
            }
        }
        if (programs.empty()) throw std::runtime_error("no programs to evaluate");

        std::string csv = "group_index,group_name,program,part,accuracy\n";
        for (const auto& raw_group : selected) {
            const QuestionGroup group = filter_oov(raw_group, store);
            std::vector<Question> questions;
            if (o.part == "all") {
                questions = group.questions;
            } else {
                const SplitGroup split = split_train_test(group, o.split_seed);
                questions = o.part == "train" ? split.train : split.test;
            }
            if (questions.empty())
                throw std::runtime_error("group '" + group.name +
                                         "' has no in-vocabulary questions");
            for (const auto& [label, tree] : programs) {
                const double acc =
                    evaluate_accuracy(tree, questions, store, o.restrict_l, o.exclude_inputs);
                csv += std::to_string(group.index) + "," + csv_field(group.name) + "," +
                       csv_field(label) + "," + o.part + "," + format_double(acc) + "\n";
            }
        }
        out << csv;
        if (!o.out_path.empty()) {
            const json echo{{"embeddings_path", o.embeddings_path},
                            {"embeddings_format", format_name(o.embeddings_format)},
                            {"questions_path", o.questions_path},
                            {"groups", o.groups},
                            {"programs_path", o.programs_path},
                            {"use_rule", o.use_rule},
                            {"restrict_l", o.restrict_l},
                            {"exclude_inputs", o.exclude_inputs},
                            {"lowercase", o.lowercase},
                            {"split_seed", o.split_seed},
                            {"part", o.part}};
            atomic_write(o.out_path, "# manifest: " + echo.dump() + "\n" + csv);
        }
        return had_error ? 1 : 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_transfer(const TransferOptions& o, std::ostream& out, std::ostream& err) {
    try {
        if (o.out_dir.empty()) throw std::runtime_error("transfer needs an output directory");
        const auto files = list_run_files(o.runs_dir);
        std::vector<std::string> labels;
        std::vector<ProgramTree> programs;
        for (const auto& f : files) {
            const StoredRun r = load_stored_run(f, "");
            labels.push_back(run_stem(r.group_index, r.run_index));
            programs.push_back(parse_program(r.best_program));
        }
        const EmbeddingStore store2 = load_embeddings(o.embeddings_path, o.embeddings_format);
        const auto groups = parse_questions(o.questions_path, o.lowercase);
        if (groups.empty()) throw std::runtime_error(o.questions_path + ": no groups");
        const TransferResult tr =
            transfer_evaluate(programs, store2, groups, o.restrict_l, o.exclude_inputs);

        const json echo{{"runs_dir", o.runs_dir},
                        {"embeddings_path", o.embeddings_path},
                        {"embeddings_format", format_name(o.embeddings_format)},
                        {"questions_path", o.questions_path},
                        {"restrict_l", o.restrict_l},
                        {"exclude_inputs", o.exclude_inputs},
                        {"lowercase", o.lowercase}};
        fs::create_directories(o.out_dir);

        std::string matrix = "# manifest: " + echo.dump() + "\nprogram";
        for (const auto& name : tr.group_names) matrix += "," + csv_field(name);
        matrix += "\n";
        for (std::size_t pi = 0; pi < programs.size(); ++pi) {
            matrix += csv_field(labels[pi]);
            for (double acc : tr.matrix[pi]) matrix += "," + format_double(acc);
            matrix += "\n";
        }
        matrix += "rule";
        for (double acc : tr.rule_row) matrix += "," + format_double(acc);
        matrix += "\n";
        const std::string matrix_path = (fs::path(o.out_dir) / "transfer_matrix.csv").string();
        atomic_write(matrix_path, matrix);

        std::string best = "# manifest: " + echo.dump() +
                           "\ngroup_index,group_name,best_program,best_accuracy,"
                           "rule_accuracy,beats_rule\n";
        for (std::size_t gi = 0; gi < tr.group_names.size(); ++gi) {
            const std::size_t pi = tr.best_program_per_group[gi];
            const double best_acc = tr.matrix[pi][gi];
            best += std::to_string(gi + 1) + "," + csv_field(tr.group_names[gi]) + "," +
                    csv_field(labels[pi]) + "," + format_double(best_acc) + "," +
                    format_double(tr.rule_row[gi]) + "," +
                    (best_acc > tr.rule_row[gi] ? "1" : "0") + "\n";
        }
        const std::string best_path = (fs::path(o.out_dir) / "transfer_best.csv").string();
        atomic_write(best_path, best);
        out << matrix_path << "\n" << best_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_nearest(const NearestOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const EmbeddingStore store = load_embeddings(o.embeddings_path, o.embeddings_format);
        std::vector<double> query;
        std::vector<std::string> exclude = o.exclude;
        if (!o.vector.empty()) {
            if (o.vector.size() != store.dim())
                throw std::runtime_error("query vector has " + std::to_string(o.vector.size()) +
                                         " components, store dim is " +
                                         std::to_string(store.dim()));
            query = o.vector;
        } else {
            auto v = vector_of(store, o.word);
            if (!v) throw std::runtime_error("unknown word '" + o.word + "'");
            query = *v;
            if (o.exclude_self) exclude.push_back(o.word);
        }
        for (const auto& [word, score] : nearest_words(store, query, o.k, o.restrict_l, exclude))
            out << word << " " << format_double(score) << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
    try {
        if (o.out_prefix.empty()) throw std::runtime_error("synth needs an output prefix");
        SynthSpec spec;
        spec.pairs = o.pairs_path.empty() ? default_pair_names(o.pair_count)
                                          : parse_pairs_file(o.pairs_path);
        spec.dim = o.dim;
        spec.noise = o.noise;
        spec.distractors = o.distractors;
        spec.magnets = o.magnets;
        spec.max_questions = o.max_questions;
        spec.seed = o.seed;
        const SynthResult result = build_synthetic(spec);
        if (const fs::path parent = fs::path(o.out_prefix).parent_path(); !parent.empty())
            fs::create_directories(parent);
        write_synthetic(result, o.out_prefix);
        std::string pairs_txt;
        for (const auto& [a, b] : spec.pairs) pairs_txt += a + " " + b + "\n";
        atomic_write(o.out_prefix + "_pairs.txt", pairs_txt);
        out << o.out_prefix << ".txt\n"
            << o.out_prefix << ".bin\n"
            << o.out_prefix << "_questions.txt\n"
            << o.out_prefix << "_pairs.txt\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const auto files = list_run_files(o.runs_dir);
        std::vector<StoredRun> runs;
        std::string echo;
        for (const auto& f : files) {
            const json j = json::parse(read_file(f));
            const std::string this_echo = j.at("manifest").dump();
            if (echo.empty())
                echo = this_echo;
            else if (echo != this_echo)
                throw std::runtime_error(f + ": runs in " + o.runs_dir +
                                         " come from different manifests");
            runs.push_back(load_stored_run(f, ""));
        }
        const std::string csv = aggregate_csv(echo, runs);
        out << csv;
        if (!o.out_path.empty()) atomic_write(o.out_path, csv);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

std::string resolve_embeddings_path(const std::string& path) {
    const char* env = std::getenv("GPVEC_EMBEDDINGS");
    if (path.empty()) {
        if (env && *env) return env;
        throw std::runtime_error("no embeddings path given and GPVEC_EMBEDDINGS is unset");
    }
    if (!fs::exists(path) && env && *env) {
        const fs::path candidate = fs::path(env) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

}  // namespace gpvec
