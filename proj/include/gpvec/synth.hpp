#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gpvec/benchmark.hpp"
#include "gpvec/embedding_store.hpp"

namespace gpvec {

// Desk-scale fixture generator: a vocabulary where one relation holds as a
// constant vector offset across word pairs (plus optional noise), with random
// distractor words.  All components live on a 2^-10 grid inside [-1,1] so
// text and binary files carry them exactly and the rule's arithmetic is exact
// at noise 0.
struct SynthSpec {
    std::vector<std::pair<std::string, std::string>> pairs;  // (base, related)
    std::size_t dim = 16;
    double noise = 0.0;        // per-component noise amplitude on the related word
    std::size_t distractors = 100;
    // Part of the distractor budget spent on "magnet" words sitting exactly on
    // the b+c landing points (related_i + base_j, one per unordered pair
    // combination).  They punish additive shortcut programs that ignore the a
    // vector while leaving the exact rule's retrieval untouched.
    std::size_t magnets = 0;
    std::size_t max_questions = 0;  // 0 = all ordered pair combinations
    std::uint64_t seed = 0;
};

struct SynthResult {
    EmbeddingStore store;
    std::vector<QuestionGroup> groups;  // single group "synthetic-offset"
};

// Deterministic in spec.seed.  Questions enumerate ordered pair combinations
// (i, j), i != j: pairs[i] gives a/b, pairs[j] gives c/answer.
SynthResult build_synthetic(const SynthSpec& spec);

// Convenience for auto-generated vocabularies: pair words p000a/p000b, ...
std::vector<std::pair<std::string, std::string>> default_pair_names(std::size_t count);

// Writes <prefix>.txt, <prefix>.bin and <prefix>_questions.txt.
void write_synthetic(const SynthResult& result, const std::string& prefix);

}  // namespace gpvec
