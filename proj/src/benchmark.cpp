#include "gpvec/benchmark.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "gpvec/rng.hpp"
#include "gpvec/util.hpp"

namespace gpvec {

std::vector<QuestionGroup> parse_questions(const std::string& path, bool lowercase) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::vector<QuestionGroup> groups;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == ":") {
            QuestionGroup g;
            g.index = static_cast<int>(groups.size()) + 1;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                if (i > 1) g.name += ' ';
                g.name += std::string(toks[i]);
            }
            groups.push_back(std::move(g));
            continue;
        }
        if (groups.empty())
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": question before any ': <group>' header");
        if (toks.size() != 4)
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": expected 4 words, got " + std::to_string(toks.size()));
        Question q;
        q.a = lowercase ? lowercase_ascii(toks[0]) : std::string(toks[0]);
        q.b = lowercase ? lowercase_ascii(toks[1]) : std::string(toks[1]);
        q.c = lowercase ? lowercase_ascii(toks[2]) : std::string(toks[2]);
        q.answer = lowercase ? lowercase_ascii(toks[3]) : std::string(toks[3]);
        groups.back().questions.push_back(std::move(q));
    }
    return groups;
}

QuestionGroup filter_oov(const QuestionGroup& group, const EmbeddingStore& store) {
    QuestionGroup out;
    out.index = group.index;
    out.name = group.name;
    for (const auto& q : group.questions) {
        if (store.contains(q.a) && store.contains(q.b) && store.contains(q.c) &&
            store.contains(q.answer))
            out.questions.push_back(q);
    }
    return out;
}

SplitGroup split_train_test(const QuestionGroup& group, std::uint64_t seed) {
    const std::size_t n = group.questions.size();
    if (n < 2)
        throw std::runtime_error("group '" + group.name +
                                 "' has fewer than 2 questions, cannot split");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    const std::size_t train_n = (n + 1) / 2;  // ceil
    SplitGroup split;
    split.group = group;
    split.split_seed = seed;
    split.train.reserve(train_n);
    split.test.reserve(n - train_n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < train_n)
            split.train.push_back(group.questions[order[i]]);
        else
            split.test.push_back(group.questions[order[i]]);
    }
    return split;
}

AnswerOutcome answer_question(const ProgramTree& tree, const Question& q,
                              const EmbeddingStore& store, std::size_t restrict_l,
                              bool exclude_inputs) {
    const auto ra = store.row_of(q.a), rb = store.row_of(q.b), rc = store.row_of(q.c),
               rd = store.row_of(q.answer);
    if (!ra || !rb || !rc || !rd)
        throw std::runtime_error("question word missing from store (run filter_oov first)");
    const auto out = evaluate(tree, store.row(*ra), store.row(*rb), store.row(*rc));
    for (double v : out)
        if (!std::isfinite(v)) return {false, true, 0};
    std::size_t exclude[3];
    std::size_t n_exclude = 0;
    if (exclude_inputs) {
        exclude[n_exclude++] = *ra;
        if (*rb != *ra) exclude[n_exclude++] = *rb;
        if (*rc != *ra && *rc != *rb) exclude[n_exclude++] = *rc;
    }
    const auto best = store.nearest_rows(out, 1, restrict_l, {exclude, n_exclude});
    if (best.empty()) return {false, false, 0};
    return {best[0].row == *rd, false, best[0].row};
}

double evaluate_accuracy(const ProgramTree& tree, std::span<const Question> questions,
                         const EmbeddingStore& store, std::size_t restrict_l,
                         bool exclude_inputs) {
    if (questions.empty()) throw std::runtime_error("evaluate_accuracy on empty question list");
    std::size_t correct = 0;
    for (const auto& q : questions)
        if (answer_question(tree, q, store, restrict_l, exclude_inputs).correct) ++correct;
    return static_cast<double>(correct) / static_cast<double>(questions.size());
}

ProgramTree baseline_rule_program() {
    ProgramTree sub{Op::Sub, {ProgramTree{Op::Arg1, {}}, ProgramTree{Op::Arg0, {}}}};
    return ProgramTree{Op::Add, {ProgramTree{Op::Arg2, {}}, std::move(sub)}};
}

TransferResult transfer_evaluate(const std::vector<ProgramTree>& programs,
                                 const EmbeddingStore& store2,
                                 const std::vector<QuestionGroup>& groups,
                                 std::size_t restrict_l2, bool exclude_inputs) {
    TransferResult result;
    std::vector<QuestionGroup> filtered;
    filtered.reserve(groups.size());
    for (const auto& g : groups) {
        filtered.push_back(filter_oov(g, store2));
        result.group_names.push_back(g.name);
    }
    auto score = [&](const ProgramTree& p, const QuestionGroup& g) {
        if (g.questions.empty()) return 0.0;
        return evaluate_accuracy(p, g.questions, store2, restrict_l2, exclude_inputs);
    };
    result.matrix.resize(programs.size());
    for (std::size_t i = 0; i < programs.size(); ++i) {
        result.matrix[i].reserve(filtered.size());
        for (const auto& g : filtered) result.matrix[i].push_back(score(programs[i], g));
    }
    const ProgramTree rule = baseline_rule_program();
    for (const auto& g : filtered) result.rule_row.push_back(score(rule, g));
    result.best_program_per_group.resize(filtered.size(), 0);
    for (std::size_t gi = 0; gi < filtered.size(); ++gi) {
        std::size_t best = 0;
        for (std::size_t pi = 1; pi < programs.size(); ++pi)
            if (result.matrix[pi][gi] > result.matrix[best][gi]) best = pi;
        result.best_program_per_group[gi] = best;
    }
    return result;
}

}  // namespace gpvec
