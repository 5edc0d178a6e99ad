#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gpvec {

struct Neighbor {
    std::size_t row;
    double score;  // cosine similarity against the unit-normalized query
};

// Immutable word-embedding space: frequency-ordered vocabulary, raw vectors,
// and a unit-normalized copy used for cosine search.  Vectors are held in
// 64-bit precision regardless of the file format.
class EmbeddingStore {
public:
    // flat is row-major, words.size() * dim values.
    EmbeddingStore(std::vector<std::string> words, std::vector<double> flat, std::size_t dim);

    std::size_t size() const { return vocab_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& vocab() const { return vocab_; }
    const std::string& word(std::size_t row) const { return vocab_[row]; }

    std::span<const double> row(std::size_t i) const {
        return {vectors_.data() + i * dim_, dim_};
    }
    std::span<const double> unit_row(std::size_t i) const {
        return {unit_vectors_.data() + i * dim_, dim_};
    }

    std::optional<std::size_t> row_of(std::string_view word) const;
    bool contains(std::string_view word) const { return row_of(word).has_value(); }

    // k best rows by cosine similarity among the first restrict_l rows
    // (0 or anything >= size() means the whole vocabulary), skipping rows in
    // exclude.  Ties go to the lower row index.  The query is unit-normalized
    // once; an all-zero query scores 0 everywhere, so the result is the first
    // k eligible rows.  Throws on a non-finite query component.
    std::vector<Neighbor> nearest_rows(std::span<const double> query, std::size_t k,
                                       std::size_t restrict_l,
                                       std::span<const std::size_t> exclude) const;

private:
    std::size_t dim_;
    std::vector<std::string> vocab_;
    std::vector<double> vectors_;
    std::vector<double> unit_vectors_;
    std::unordered_map<std::string, std::size_t> word_index_;
};

// word2vec text format: header "<count> <dim>", then one "<word> <v1> ..." line
// per word.  Rejects malformed headers, wrong component counts, non-numeric
// components and duplicate words, naming the offending line.
EmbeddingStore load_text_embeddings(const std::string& path);
void save_text_embeddings(const EmbeddingStore& store, const std::string& path);

// word2vec binary format: ASCII header "<count> <dim>\n", then per word the
// word bytes, one space, dim little-endian IEEE-754 32-bit values, and an
// optional trailing newline.  Loading widens to double bit-preservingly.
EmbeddingStore load_binary_embeddings(const std::string& path);
void save_binary_embeddings(const EmbeddingStore& store, const std::string& path);

enum class EmbeddingFormat { automatic, text, binary };

// automatic picks binary for a .bin/.binary extension, text otherwise.
EmbeddingStore load_embeddings(const std::string& path,
                               EmbeddingFormat format = EmbeddingFormat::automatic);

// Raw (un-normalized) vector, or nullopt for an unknown word.  Case-sensitive.
std::optional<std::vector<double>> vector_of(const EmbeddingStore& store, std::string_view word);

// Word-level wrapper around nearest_rows; exclude entries that are not in the
// vocabulary are ignored.
std::vector<std::pair<std::string, double>> nearest_words(
    const EmbeddingStore& store, std::span<const double> query, std::size_t k,
    std::size_t restrict_l, const std::vector<std::string>& exclude);

}  // namespace gpvec
