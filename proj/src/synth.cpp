#include "gpvec/synth.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "gpvec/rng.hpp"

namespace gpvec {

namespace {

// Component on the 2^-10 grid in [-1,1]; exact in float32 and under the
// rule's +/- arithmetic in double.
double grid_value(Rng& rng) {
    return (static_cast<double>(rng.uniform_index(2049)) - 1024.0) / 1024.0;
}

std::string tag(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
    return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> default_pair_names(std::size_t count) {
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        pairs.emplace_back(tag("p", i) + "a", tag("p", i) + "b");
    return pairs;
}

SynthResult build_synthetic(const SynthSpec& spec) {
    if (spec.pairs.size() < 2)
        throw std::runtime_error("synthetic fixture needs at least 2 word pairs");
    if (spec.dim == 0) throw std::runtime_error("synthetic dim must be positive");
    Rng rng(spec.seed);

    std::vector<double> offset(spec.dim);
    for (double& v : offset) v = grid_value(rng);

    std::vector<std::string> words;
    std::vector<double> flat;
    words.reserve(spec.pairs.size() * 2 + spec.distractors);
    flat.reserve(words.capacity() * spec.dim);
    std::vector<std::vector<double>> base_vecs, related_vecs;
    for (const auto& [base_word, related_word] : spec.pairs) {
        std::vector<double> base(spec.dim);
        for (double& v : base) v = grid_value(rng);
        words.push_back(base_word);
        for (double& v : base) {
            v = static_cast<double>(static_cast<float>(v));
            flat.push_back(v);
        }
        words.push_back(related_word);
        std::vector<double> related(spec.dim);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            double v = base[j] + offset[j];
            if (spec.noise != 0.0) v += spec.noise * grid_value(rng);
            related[j] = static_cast<double>(static_cast<float>(v));
            flat.push_back(related[j]);
        }
        base_vecs.push_back(std::move(base));
        related_vecs.push_back(std::move(related));
    }

    // Magnets sit on related_i + base_j, where any b+c composition lands; the
    // sum is symmetric in (i,j), so one word covers both question orders.  A
    // budget beyond the pair combinations adds one scaled copy of each base
    // word, which out-scores the true answer for echo-like programs whose
    // output keeps c's direction.
    const std::size_t combos = spec.pairs.size() * (spec.pairs.size() - 1) / 2;
    const std::size_t magnet_count =
        std::min({spec.magnets, spec.distractors, combos + spec.pairs.size()});
    std::size_t placed = 0;
    for (std::size_t i = 0; i < spec.pairs.size() && placed < magnet_count; ++i) {
        for (std::size_t j = i + 1; j < spec.pairs.size() && placed < magnet_count; ++j) {
            words.push_back(tag("mag", placed));
            for (std::size_t comp = 0; comp < spec.dim; ++comp)
                flat.push_back(static_cast<double>(
                    static_cast<float>(related_vecs[i][comp] + base_vecs[j][comp])));
            ++placed;
        }
    }
    for (std::size_t j = 0; placed < magnet_count; ++j, ++placed) {
        words.push_back(tag("mag", placed));
        for (std::size_t comp = 0; comp < spec.dim; ++comp)
            flat.push_back(static_cast<double>(static_cast<float>(0.9375 * base_vecs[j][comp])));
    }
    for (std::size_t i = 0; i + magnet_count < spec.distractors; ++i) {
        words.push_back(tag("dist", i));
        for (std::size_t j = 0; j < spec.dim; ++j)
            flat.push_back(static_cast<double>(static_cast<float>(grid_value(rng))));
    }

    QuestionGroup group;
    group.index = 1;
    group.name = "synthetic-offset";
    for (std::size_t i = 0; i < spec.pairs.size(); ++i) {
        for (std::size_t j = 0; j < spec.pairs.size(); ++j) {
            if (i == j) continue;
            if (spec.max_questions != 0 && group.questions.size() >= spec.max_questions)
                break;
            group.questions.push_back(Question{spec.pairs[i].first, spec.pairs[i].second,
                                               spec.pairs[j].first, spec.pairs[j].second});
        }
        if (spec.max_questions != 0 && group.questions.size() >= spec.max_questions) break;
    }

    return SynthResult{EmbeddingStore(std::move(words), std::move(flat), spec.dim), {group}};
}

void write_synthetic(const SynthResult& result, const std::string& prefix) {
    save_text_embeddings(result.store, prefix + ".txt");
    save_binary_embeddings(result.store, prefix + ".bin");
    std::ofstream out(prefix + "_questions.txt", std::ios::trunc);
    if (!out) throw std::runtime_error(prefix + "_questions.txt: cannot open for writing");
    for (const auto& g : result.groups) {
        out << ": " << g.name << '\n';
        for (const auto& q : g.questions)
            out << q.a << ' ' << q.b << ' ' << q.c << ' ' << q.answer << '\n';
    }
    if (!out) throw std::runtime_error(prefix + "_questions.txt: write failure");
}

}  // namespace gpvec
