#pragma once

// Shared fixtures and independent oracles for the test suites.  Everything
// here deliberately avoids the library's own sampling and math paths: oracle
// randomness comes straight from std::mt19937_64, cosine scores are computed
// from raw vectors.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gpvec/benchmark.hpp"
#include "gpvec/embedding_store.hpp"

namespace testutil {

// Brute-force cosine argmax over raw vectors with its own normalization;
// ties -> lower row.  restrict_l = 0 means the whole vocabulary.
inline std::size_t brute_force_nearest(const gpvec::EmbeddingStore& store,
                                       std::span<const double> query, std::size_t restrict_l,
                                       const std::vector<std::size_t>& exclude) {
    const std::size_t limit =
        (restrict_l == 0 || restrict_l > store.size()) ? store.size() : restrict_l;
    double qn = 0.0;
    for (double v : query) qn += v * v;
    qn = std::sqrt(qn);
    double best_score = -2.0;
    std::size_t best_row = limit;  // sentinel
    for (std::size_t row = 0; row < limit; ++row) {
        bool skip = false;
        for (std::size_t e : exclude)
            if (e == row) skip = true;
        if (skip) continue;
        const auto v = store.row(row);
        double dot = 0.0, vn = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            dot += v[j] * query[j];
            vn += v[j] * v[j];
        }
        vn = std::sqrt(vn);
        const double score = (qn == 0.0 || vn == 0.0) ? 0.0 : dot / (vn * qn);
        if (score > best_score) {
            best_score = score;
            best_row = row;
        }
    }
    return best_row;
}

// Random store with float32-representable components (the binary format is
// 32-bit, so round-trips of these are bit-exact).
inline gpvec::EmbeddingStore random_store(std::mt19937_64& eng, std::size_t words,
                                          std::size_t dim, bool multibyte_words = false) {
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<std::string> vocab;
    std::vector<double> flat;
    vocab.reserve(words);
    flat.reserve(words * dim);
    for (std::size_t i = 0; i < words; ++i) {
        std::string w = "w" + std::to_string(i);
        if (multibyte_words && i % 3 == 0) w = "w\xc3\xb6rte\xe8\xaf\x8d" + std::to_string(i);
        vocab.push_back(std::move(w));
        for (std::size_t j = 0; j < dim; ++j)
            flat.push_back(static_cast<double>(static_cast<float>(dist(eng))));
    }
    return gpvec::EmbeddingStore(std::move(vocab), std::move(flat), dim);
}

// Store where an ARG0 echo program is right on exactly the first
// `correct_prefix` questions: every question word a<i> has an identical twin
// t<i>, and the twin is the stated answer only inside the prefix.
struct TwinFixture {
    std::vector<std::string> words;
    std::vector<double> flat;
    std::vector<gpvec::Question> questions;

    TwinFixture(std::size_t n_questions, std::size_t correct_prefix) {
        std::mt19937_64 eng(4242);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        const std::size_t dim = 6;
        auto push = [&](const std::string& w, const std::vector<double>& v) {
            words.push_back(w);
            flat.insert(flat.end(), v.begin(), v.end());
        };
        auto rand_vec = [&] {
            std::vector<double> v(dim);
            for (auto& x : v) x = dist(eng);
            return v;
        };
        for (std::size_t i = 0; i < n_questions; ++i) {
            const auto tag = std::to_string(i);
            const auto va = rand_vec();
            push("a" + tag, va);
            push("b" + tag, rand_vec());
            push("c" + tag, rand_vec());
            push("d" + tag, rand_vec());
            push("t" + tag, va);  // identical twin of a<i>
            questions.push_back({"a" + tag, "b" + tag, "c" + tag,
                                 (i < correct_prefix ? "t" : "d") + tag});
        }
    }

    gpvec::EmbeddingStore store() const { return gpvec::EmbeddingStore(words, flat, 6); }
};

// Four distinct spellings over {add, sub, neg} implementing d = c - a + b.
inline const std::vector<std::string>& rule_equivalent_programs() {
    static const std::vector<std::string> v = {
        "sub(add(ARG2,ARG1),ARG0)",
        "add(sub(ARG2,ARG0),ARG1)",
        "sub(ARG1,sub(ARG0,ARG2))",
        "add(neg(ARG0),add(ARG1,ARG2))",
    };
    return v;
}

inline double oracle_rint_half_even(double x) {
    if (!std::isfinite(x)) return x;
    return x - std::remainder(x, 1.0);
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static const unsigned session = std::random_device{}();
        path = std::filesystem::temp_directory_path() /
               ("gpvec_test_" + tag + "_" + std::to_string(session));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testutil
