#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gpvec/benchmark.hpp"
#include "gpvec/embedding_store.hpp"
#include "gpvec/evolution.hpp"
#include "gpvec/program.hpp"
#include "gpvec/synth.hpp"

namespace py = pybind11;
using namespace gpvec;

namespace {

std::vector<Question> to_questions(
    const std::vector<std::tuple<std::string, std::string, std::string, std::string>>& qs) {
    std::vector<Question> out;
    out.reserve(qs.size());
    for (const auto& [a, b, c, d] : qs) out.push_back(Question{a, b, c, d});
    return out;
}

RintMode to_rint_mode(const std::string& mode) {
    if (mode == "truncate") return RintMode::truncate;
    if (mode == "half_even") return RintMode::half_even;
    throw std::invalid_argument("rint_mode must be 'half_even' or 'truncate'");
}

}  // namespace

PYBIND11_MODULE(_gpvec, m) {
    m.doc() = "word-vector composition programs: embedding stores, program "
              "evaluation and the analogy benchmark";

    py::class_<EmbeddingStore>(m, "EmbeddingStore")
        .def_static("load_text", &load_text_embeddings, py::arg("path"))
        .def_static("load_binary", &load_binary_embeddings, py::arg("path"))
        .def_static(
            "load",
            [](const std::string& path) { return load_embeddings(path); },
            py::arg("path"))
        .def("__len__", &EmbeddingStore::size)
        .def_property_readonly("dim", &EmbeddingStore::dim)
        .def_property_readonly("vocab", &EmbeddingStore::vocab)
        .def("__contains__",
             [](const EmbeddingStore& s, const std::string& w) { return s.contains(w); })
        .def(
            "vector",
            [](const EmbeddingStore& s, const std::string& w) {
                auto v = vector_of(s, w);
                if (!v) throw py::key_error(w);
                return *v;
            },
            py::arg("word"))
        .def(
            "nearest",
            [](const EmbeddingStore& s, const std::vector<double>& query, std::size_t k,
               std::size_t restrict_l, const std::vector<std::string>& exclude) {
                return nearest_words(s, query, k, restrict_l, exclude);
            },
            py::arg("query"), py::arg("k") = 10, py::arg("restrict_l") = 0,
            py::arg("exclude") = std::vector<std::string>{});

    m.def(
        "canonical_program",
        [](const std::string& text) { return format_program(parse_program(text)); },
        py::arg("text"), "parse and re-emit a program in canonical form");
    m.def(
        "program_depth",
        [](const std::string& text) { return depth(parse_program(text)); }, py::arg("text"));
    m.def(
        "program_size",
        [](const std::string& text) { return size(parse_program(text)); }, py::arg("text"));
    m.def("baseline_rule", [] { return format_program(baseline_rule_program()); },
          "the 3-term algebraic rule add(ARG2,sub(ARG1,ARG0))");
    m.def(
        "evaluate_program",
        [](const std::string& text, const std::vector<double>& a, const std::vector<double>& b,
           const std::vector<double>& c, const std::string& rint_mode) {
            return evaluate(parse_program(text), a, b, c, to_rint_mode(rint_mode));
        },
        py::arg("text"), py::arg("a"), py::arg("b"), py::arg("c"),
        py::arg("rint_mode") = "half_even");
    m.def(
        "random_program",
        [](std::uint64_t seed, int min_depth, int max_depth, const std::string& method) {
            Rng rng(seed);
            const GrowMethod gm = method == "full" ? GrowMethod::full : GrowMethod::grow;
            return format_program(random_tree(rng, min_depth, max_depth, gm));
        },
        py::arg("seed"), py::arg("min_depth") = 1, py::arg("max_depth") = 4,
        py::arg("method") = "grow");
    m.def(
        "semantically_equivalent",
        [](const std::string& p1, const std::string& p2, int trials, double tol,
           std::uint64_t seed) {
            Rng rng(seed);
            return semantically_equivalent(parse_program(p1), parse_program(p2), trials, tol,
                                           rng);
        },
        py::arg("p1"), py::arg("p2"), py::arg("trials") = 200, py::arg("tol") = 1e-9,
        py::arg("seed") = 0);

    m.def(
        "parse_questions",
        [](const std::string& path, bool lowercase) {
            std::vector<std::tuple<int, std::string,
                                   std::vector<std::tuple<std::string, std::string,
                                                          std::string, std::string>>>>
                out;
            for (const auto& g : parse_questions(path, lowercase)) {
                std::vector<std::tuple<std::string, std::string, std::string, std::string>> qs;
                for (const auto& q : g.questions) qs.emplace_back(q.a, q.b, q.c, q.answer);
                out.emplace_back(g.index, g.name, std::move(qs));
            }
            return out;
        },
        py::arg("path"), py::arg("lowercase") = true);
    m.def(
        "evaluate_accuracy",
        [](const std::string& program, const EmbeddingStore& store,
           const std::vector<std::tuple<std::string, std::string, std::string, std::string>>&
               questions,
           std::size_t restrict_l, bool exclude_inputs) {
            const auto qs = to_questions(questions);
            return evaluate_accuracy(parse_program(program), qs, store, restrict_l,
                                     exclude_inputs);
        },
        py::arg("program"), py::arg("store"), py::arg("questions"), py::arg("restrict_l") = 0,
        py::arg("exclude_inputs") = true);

    m.def(
        "evolve",
        [](const EmbeddingStore& store,
           const std::vector<std::tuple<std::string, std::string, std::string, std::string>>&
               train,
           std::size_t population, std::size_t generations, std::size_t survivors,
           std::uint64_t seed, double subset_fraction, std::size_t restrict_l,
           bool exclude_inputs) {
            EvolutionConfig cfg;
            cfg.population_size = population;
            cfg.generations = generations;
            cfg.survivors = survivors;
            cfg.seed = seed;
            cfg.subset_fraction = subset_fraction;
            cfg.restrict_l = restrict_l;
            cfg.exclude_inputs = exclude_inputs;
            const auto qs = to_questions(train);
            const RunResult rr = evolve_run(qs, store, cfg);
            py::dict out;
            out["best_program"] = format_program(rr.best_program);
            out["best_train_accuracy"] = rr.best_train_accuracy;
            out["evaluation_count"] = rr.evaluation_count;
            out["generations_completed"] = rr.generations_completed;
            return out;
        },
        py::arg("store"), py::arg("train"), py::arg("population") = 100,
        py::arg("generations") = 20, py::arg("survivors") = 20, py::arg("seed") = 0,
        py::arg("subset_fraction") = 1.0, py::arg("restrict_l") = 0,
        py::arg("exclude_inputs") = true);
}
