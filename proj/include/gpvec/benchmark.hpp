#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpvec/embedding_store.hpp"
#include "gpvec/program.hpp"

namespace gpvec {

// "a is to b as c is to answer"
struct Question {
    std::string a, b, c, answer;

    bool operator==(const Question&) const = default;
};

struct QuestionGroup {
    int index = 0;  // 1-based order of appearance of the ": name" header
    std::string name;
    std::vector<Question> questions;
};

struct SplitGroup {
    QuestionGroup group;
    std::vector<Question> train;  // ceil(N/2) questions
    std::vector<Question> test;   // floor(N/2) questions
    std::uint64_t split_seed = 0;
};

// Benchmark file: lines ": <group-name>" start a group, other non-blank lines
// hold exactly four whitespace-separated words.  lowercase folds the question
// words (not the group names) to match lowercased corpora.
std::vector<QuestionGroup> parse_questions(const std::string& path, bool lowercase);

// Keeps the questions whose four words all resolve in the store, in order.
QuestionGroup filter_oov(const QuestionGroup& group, const EmbeddingStore& store);

// Uniform random partition: shuffle with Rng(seed), first ceil(N/2) questions
// become train.  Throws for groups of fewer than two questions.
SplitGroup split_train_test(const QuestionGroup& group, std::uint64_t seed);

struct AnswerOutcome {
    bool correct = false;
    bool nonfinite = false;          // program output had a NaN/inf component
    std::size_t predicted_row = 0;   // valid when !nonfinite
};

// Single-question path shared by fitness and evaluate_accuracy: evaluate the
// tree on the raw vectors of a,b,c, then take the nearest word among the
// restrict_l most frequent, excluding the three question words when
// exclude_inputs is set.  Throws if any of the four words is missing (callers
// pre-filter with filter_oov).
AnswerOutcome answer_question(const ProgramTree& tree, const Question& q,
                              const EmbeddingStore& store, std::size_t restrict_l,
                              bool exclude_inputs);

// Deterministic full pass: no subsetting, no early halt; a non-finite output
// counts that question as wrong and the pass continues.
double evaluate_accuracy(const ProgramTree& tree, std::span<const Question> questions,
                         const EmbeddingStore& store, std::size_t restrict_l,
                         bool exclude_inputs);

// add(ARG2,sub(ARG1,ARG0)), the 3-term algebraic rule d = c - a + b.
ProgramTree baseline_rule_program();

struct TransferResult {
    std::vector<std::string> group_names;
    std::vector<std::vector<double>> matrix;        // programs x groups
    std::vector<double> rule_row;                   // rule baseline per group
    std::vector<std::size_t> best_program_per_group;  // argmax over programs
};

// Every program (and the rule baseline) scored on every group against store2.
// restrict_l2 = 0 searches the whole vocabulary, the transfer default.
TransferResult transfer_evaluate(const std::vector<ProgramTree>& programs,
                                 const EmbeddingStore& store2,
                                 const std::vector<QuestionGroup>& groups,
                                 std::size_t restrict_l2, bool exclude_inputs);

}  // namespace gpvec
