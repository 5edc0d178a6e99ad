#include "gpvec/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "gpvec/util.hpp"

namespace gpvec {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

bool parse_size(std::string_view tok, std::size_t& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

bool parse_double(std::string_view tok, double& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

constexpr std::size_t kMaxWordBytes = 1000;

}  // namespace

EmbeddingStore::EmbeddingStore(std::vector<std::string> words, std::vector<double> flat,
                               std::size_t dim)
    : dim_(dim), vocab_(std::move(words)), vectors_(std::move(flat)) {
    if (dim_ == 0) throw std::invalid_argument("embedding dim must be positive");
    if (vectors_.size() != vocab_.size() * dim_)
        throw std::invalid_argument("embedding matrix size does not match vocab * dim");
    word_index_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        if (!word_index_.emplace(vocab_[i], i).second)
            throw std::invalid_argument("duplicate word in vocabulary: " + vocab_[i]);
    }
    unit_vectors_ = vectors_;
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        double* r = unit_vectors_.data() + i * dim_;
        double sq = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) sq += r[j] * r[j];
        if (sq > 0.0) {
            const double inv = 1.0 / std::sqrt(sq);
            for (std::size_t j = 0; j < dim_; ++j) r[j] *= inv;
        }
        // all-zero rows stay all-zero
    }
}

std::optional<std::size_t> EmbeddingStore::row_of(std::string_view word) const {
    auto it = word_index_.find(std::string(word));
    if (it == word_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<Neighbor> EmbeddingStore::nearest_rows(std::span<const double> query, std::size_t k,
                                                   std::size_t restrict_l,
                                                   std::span<const std::size_t> exclude) const {
    if (query.size() != dim_)
        throw std::invalid_argument("query dimension mismatch");
    for (double v : query)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite query component");
    std::vector<Neighbor> best;
    if (k == 0) return best;

    std::vector<double> qunit(query.begin(), query.end());
    double sq = 0.0;
    for (double v : qunit) sq += v * v;
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (double& v : qunit) v *= inv;
    }

    const std::size_t limit =
        (restrict_l == 0 || restrict_l > size()) ? size() : restrict_l;
    best.reserve(k + 1);
    for (std::size_t row = 0; row < limit; ++row) {
        if (std::find(exclude.begin(), exclude.end(), row) != exclude.end()) continue;
        const double* u = unit_vectors_.data() + row * dim_;
        double dot = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) dot += u[j] * qunit[j];
        if (best.size() == k && dot <= best.back().score) continue;
        // insert after any equal scores: rows scan in ascending order, so
        // equal-score incumbents keep the lower index
        auto pos = std::upper_bound(best.begin(), best.end(), dot,
                                    [](double s, const Neighbor& n) { return s > n.score; });
        best.insert(pos, Neighbor{row, dot});
        if (best.size() > k) best.pop_back();
    }
    return best;
}

EmbeddingStore load_text_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    std::string line;
    if (!std::getline(in, line)) fail(path, "malformed header: empty file");
    strip_cr(line);
    auto header = split_ws(line);
    std::size_t count = 0, dim = 0;
    if (header.size() != 2 || !parse_size(header[0], count) || !parse_size(header[1], dim) ||
        dim == 0)
        fail(path, "malformed header: expected '<vocab_count> <dim>'");

    std::vector<std::string> words;
    std::vector<double> flat;
    words.reserve(count);
    flat.reserve(count * dim);
    std::size_t line_no = 1;
    std::unordered_map<std::string, std::size_t> seen;
    seen.reserve(count);
    while (words.size() < count) {
        if (!std::getline(in, line))
            fail(path, "expected " + std::to_string(count) + " words, got " +
                           std::to_string(words.size()));
        ++line_no;
        strip_cr(line);
        auto toks = split_ws(line);
        if (toks.empty()) continue;  // blank line tolerated
        if (toks.size() != dim + 1)
            fail(path, "line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                           " components, got " + std::to_string(toks.size() - 1));
        std::string word(toks[0]);
        if (!seen.emplace(word, line_no).second)
            fail(path, "line " + std::to_string(line_no) + ": duplicate word '" + word + "'");
        for (std::size_t j = 1; j <= dim; ++j) {
            double v;
            if (!parse_double(toks[j], v))
                fail(path, "line " + std::to_string(line_no) + ": non-numeric component '" +
                               std::string(toks[j]) + "'");
            flat.push_back(v);
        }
        words.push_back(std::move(word));
    }
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (!split_ws(line).empty())
            fail(path, "line " + std::to_string(line_no) + ": trailing content after " +
                           std::to_string(count) + " words");
    }
    return EmbeddingStore(std::move(words), std::move(flat), dim);
}

void save_text_embeddings(const EmbeddingStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out << store.size() << ' ' << store.dim() << '\n';
    for (std::size_t i = 0; i < store.size(); ++i) {
        out << store.word(i);
        for (double v : store.row(i)) out << ' ' << format_double(v);
        out << '\n';
    }
    if (!out) fail(path, "write failure");
}

EmbeddingStore load_binary_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::string header;
    for (;;) {
        const int c = in.get();
        if (c == EOF) fail(path, "malformed header: no newline found");
        if (c == '\n') break;
        header.push_back(static_cast<char>(c));
        if (header.size() > 128) fail(path, "malformed header: too long");
    }
    auto toks = split_ws(header);
    std::size_t count = 0, dim = 0;
    if (toks.size() != 2 || !parse_size(toks[0], count) || !parse_size(toks[1], dim) || dim == 0)
        fail(path, "malformed header: expected '<vocab_count> <dim>'");

    std::vector<std::string> words;
    std::vector<double> flat;
    words.reserve(count);
    flat.reserve(count * dim);
    std::vector<unsigned char> buf(dim * 4);
    for (std::size_t i = 0; i < count; ++i) {
        std::string word;
        for (;;) {
            const int c = in.get();
            if (c == EOF)
                fail(path, "truncated file at word index " + std::to_string(i));
            if (c == ' ') break;
            word.push_back(static_cast<char>(c));
            if (word.size() > kMaxWordBytes)
                fail(path, "word longer than " + std::to_string(kMaxWordBytes) +
                               " bytes at word index " + std::to_string(i));
        }
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            fail(path, "truncated file at word index " + std::to_string(i));
        for (std::size_t j = 0; j < dim; ++j) {
            const std::uint32_t u = static_cast<std::uint32_t>(buf[4 * j]) |
                                    static_cast<std::uint32_t>(buf[4 * j + 1]) << 8 |
                                    static_cast<std::uint32_t>(buf[4 * j + 2]) << 16 |
                                    static_cast<std::uint32_t>(buf[4 * j + 3]) << 24;
            flat.push_back(static_cast<double>(std::bit_cast<float>(u)));
        }
        if (in.peek() == '\n') in.get();
        words.push_back(std::move(word));
    }
    return EmbeddingStore(std::move(words), std::move(flat), dim);
}

void save_binary_embeddings(const EmbeddingStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out << store.size() << ' ' << store.dim() << '\n';
    std::vector<unsigned char> buf(store.dim() * 4);
    for (std::size_t i = 0; i < store.size(); ++i) {
        out << store.word(i) << ' ';
        auto r = store.row(i);
        for (std::size_t j = 0; j < store.dim(); ++j) {
            const std::uint32_t u = std::bit_cast<std::uint32_t>(static_cast<float>(r[j]));
            buf[4 * j] = static_cast<unsigned char>(u & 0xff);
            buf[4 * j + 1] = static_cast<unsigned char>(u >> 8 & 0xff);
            buf[4 * j + 2] = static_cast<unsigned char>(u >> 16 & 0xff);
            buf[4 * j + 3] = static_cast<unsigned char>(u >> 24 & 0xff);
        }
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
        out << '\n';
    }
    if (!out) fail(path, "write failure");
}

EmbeddingStore load_embeddings(const std::string& path, EmbeddingFormat format) {
    if (format == EmbeddingFormat::automatic) {
        const bool bin = path.ends_with(".bin") || path.ends_with(".binary");
        format = bin ? EmbeddingFormat::binary : EmbeddingFormat::text;
    }
    return format == EmbeddingFormat::binary ? load_binary_embeddings(path)
                                             : load_text_embeddings(path);
}

std::optional<std::vector<double>> vector_of(const EmbeddingStore& store, std::string_view word) {
    auto row = store.row_of(word);
    if (!row) return std::nullopt;
    auto r = store.row(*row);
    return std::vector<double>(r.begin(), r.end());
}

std::vector<std::pair<std::string, double>> nearest_words(
    const EmbeddingStore& store, std::span<const double> query, std::size_t k,
    std::size_t restrict_l, const std::vector<std::string>& exclude) {
    std::vector<std::size_t> rows;
    rows.reserve(exclude.size());
    for (const auto& w : exclude)
        if (auto r = store.row_of(w)) rows.push_back(*r);
    auto neighbors = store.nearest_rows(query, k, restrict_l, rows);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(neighbors.size());
    for (const auto& n : neighbors) out.emplace_back(store.word(n.row), n.score);
    return out;
}

}  // namespace gpvec
