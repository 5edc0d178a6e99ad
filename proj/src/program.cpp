#include "gpvec/program.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "gpvec/util.hpp"

namespace gpvec {

namespace {

struct OpInfo {
    Op op;
    const char* name;
    int arity;
};

constexpr OpInfo kOps[kOpCount] = {
    {Op::Add, "add", 2},     {Op::Sub, "sub", 2},   {Op::Mul, "mul", 2},
    {Op::SafeDiv, "safeDiv", 2}, {Op::Neg, "neg", 1},   {Op::Diff, "diff", 1},
    {Op::Abs, "abs", 1},     {Op::Cos, "cos", 1},   {Op::Sin, "sin", 1},
    {Op::Roll, "roll", 1},   {Op::Rint, "rint", 1}, {Op::Half, "half", 1},
    {Op::Norm, "norm", 1},   {Op::Log1p, "log1p", 1},
    {Op::Arg0, "ARG0", 0},   {Op::Arg1, "ARG1", 0}, {Op::Arg2, "ARG2", 0},
};

double rint_half_even(double x) {
    if (!std::isfinite(x)) return x;
    double r = std::floor(x);
    const double f = x - r;
    if (f > 0.5)
        r += 1.0;
    else if (f == 0.5 && std::fmod(r, 2.0) != 0.0)
        r += 1.0;
    return r;
}

void normalize_by_max_abs(std::vector<double>& w) {
    double m = 0.0;
    for (double v : w) {
        const double a = std::abs(v);
        if (a > m) m = a;
    }
    if (m > 0.0)
        for (double& v : w) v /= m;
    // all-zero input stays all-zero
}

std::vector<double> eval_node(const ProgramTree& t, std::span<const double> a,
                              std::span<const double> b, std::span<const double> c,
                              RintMode rint_mode) {
    switch (t.op) {
        case Op::Arg0: return {a.begin(), a.end()};
        case Op::Arg1: return {b.begin(), b.end()};
        case Op::Arg2: return {c.begin(), c.end()};
        default: break;
    }
    std::vector<double> w = eval_node(t.children[0], a, b, c, rint_mode);
    switch (t.op) {
        case Op::Add: {
            auto v = eval_node(t.children[1], a, b, c, rint_mode);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += v[i];
            return w;
        }
        case Op::Sub: {
            auto v = eval_node(t.children[1], a, b, c, rint_mode);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= v[i];
            return w;
        }
        case Op::Mul: {
            auto v = eval_node(t.children[1], a, b, c, rint_mode);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] *= v[i];
            return w;
        }
        case Op::SafeDiv: {
            auto v = eval_node(t.children[1], a, b, c, rint_mode);
            for (std::size_t i = 0; i < w.size(); ++i)
                w[i] = v[i] == 0.0 ? 0.0 : w[i] / v[i];
            return w;
        }
        case Op::Neg:
            for (double& x : w) x = -x;
            return w;
        case Op::Diff:
            for (double& x : w) x = 1.0 + x;
            return w;
        case Op::Abs:
            for (double& x : w) x = std::abs(x);
            return w;
        case Op::Cos:
            for (double& x : w) x = std::cos(x);
            return w;
        case Op::Sin:
            for (double& x : w) x = std::sin(x);
            return w;
        case Op::Roll:
            if (w.size() > 1) std::rotate(w.begin(), w.begin() + 1, w.end());
            return w;
        case Op::Rint:
            for (double& x : w)
                x = rint_mode == RintMode::half_even ? rint_half_even(x) : std::trunc(x);
            return w;
        case Op::Half:
            for (double& x : w) x /= 2.0;
            return w;
        case Op::Norm:
            normalize_by_max_abs(w);
            return w;
        case Op::Log1p:
            normalize_by_max_abs(w);
            for (double& x : w) x = std::log1p(x);
            return w;
        default:
            throw std::logic_error("unreachable operator");
    }
}

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw std::runtime_error("parse error at byte " + std::to_string(at) + ": " + msg);
    }

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                                     text[pos] == '\n' || text[pos] == '\r'))
            ++pos;
    }

    static bool ident_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_';
    }

    ProgramTree parse_expr() {
        skip_ws();
        const std::size_t start = pos;
        while (pos < text.size() && ident_char(text[pos])) ++pos;
        if (pos == start) fail("expected identifier", start);
        const std::string ident = lowercase_ascii(text.substr(start, pos - start));
        const OpInfo* info = nullptr;
        for (const auto& o : kOps)
            if (lowercase_ascii(o.name) == ident) {
                info = &o;
                break;
            }
        if (!info) fail("unknown identifier '" + text.substr(start, pos - start) + "'", start);
        skip_ws();
        if (info->arity == 0) {
            if (pos < text.size() && text[pos] == '(')
                fail("terminal '" + std::string(info->name) + "' takes no arguments", pos);
            return ProgramTree{info->op, {}};
        }
        if (pos >= text.size() || text[pos] != '(')
            fail("expected '(' after '" + std::string(info->name) + "'", pos);
        ++pos;
        ProgramTree node{info->op, {}};
        for (;;) {
            node.children.push_back(parse_expr());
            skip_ws();
            if (pos >= text.size()) fail("unbalanced parentheses", pos);
            if (text[pos] == ',') {
                ++pos;
                continue;
            }
            if (text[pos] == ')') break;
            fail("expected ',' or ')'", pos);
        }
        if (static_cast<int>(node.children.size()) != info->arity)
            fail("arity mismatch for '" + std::string(info->name) + "': expected " +
                     std::to_string(info->arity) + ", got " +
                     std::to_string(node.children.size()),
                 pos);
        ++pos;  // consume ')'
        return node;
    }
};

ProgramTree gen_node(Rng& rng, int d, int target, GrowMethod method) {
    if (d < target && method == GrowMethod::grow) {
        const std::size_t pick = rng.uniform_index(kOpCount);
        ProgramTree t{static_cast<Op>(pick), {}};
        for (int i = 0; i < arity_of(t.op); ++i)
            t.children.push_back(gen_node(rng, d + 1, target, method));
        return t;
    }
    if (d >= target) {
        const std::size_t pick = rng.uniform_index(kTerminalCount);
        return ProgramTree{static_cast<Op>(kInternalOpCount + pick), {}};
    }
    const std::size_t pick = rng.uniform_index(kInternalOpCount);
    ProgramTree t{static_cast<Op>(pick), {}};
    for (int i = 0; i < arity_of(t.op); ++i)
        t.children.push_back(gen_node(rng, d + 1, target, method));
    return t;
}

const ProgramTree* find_at(const ProgramTree& t, int& idx) {
    if (idx == 0) return &t;
    --idx;
    for (const auto& ch : t.children)
        if (const ProgramTree* r = find_at(ch, idx)) return r;
    return nullptr;
}

bool replace_walk(ProgramTree& t, int& idx, const ProgramTree& repl) {
    if (idx == 0) {
        t = repl;
        return true;
    }
    --idx;
    for (auto& ch : t.children)
        if (replace_walk(ch, idx, repl)) return true;
    return false;
}

void graph_nodes(const ProgramTree& t, int& next, std::string& nodes, std::string& edges) {
    const int id = next++;
    nodes += "n" + std::to_string(id) + " " + name_of(t.op) + "\n";
    for (const auto& ch : t.children) {
        const int child_id = next;
        graph_nodes(ch, next, nodes, edges);
        edges += "n" + std::to_string(id) + " -> n" + std::to_string(child_id) + "\n";
    }
}

}  // namespace

int arity_of(Op op) { return kOps[static_cast<int>(op)].arity; }

const char* name_of(Op op) { return kOps[static_cast<int>(op)].name; }

int depth(const ProgramTree& tree) {
    int d = 0;
    for (const auto& ch : tree.children) d = std::max(d, 1 + depth(ch));
    return d;
}

int size(const ProgramTree& tree) {
    int n = 1;
    for (const auto& ch : tree.children) n += size(ch);
    return n;
}

std::vector<double> evaluate(const ProgramTree& tree, std::span<const double> a,
                             std::span<const double> b, std::span<const double> c,
                             RintMode rint_mode) {
    if (a.size() != b.size() || a.size() != c.size() || a.empty())
        throw std::invalid_argument("argument vectors must share one dimension >= 1");
    return eval_node(tree, a, b, c, rint_mode);
}

std::string format_program(const ProgramTree& tree) {
    std::string out = name_of(tree.op);
    if (!tree.children.empty()) {
        out += '(';
        for (std::size_t i = 0; i < tree.children.size(); ++i) {
            if (i) out += ',';
            out += format_program(tree.children[i]);
        }
        out += ')';
    }
    return out;
}

ProgramTree parse_program(const std::string& text) {
    Parser p{text};
    ProgramTree tree = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing garbage", p.pos);
    return tree;
}

ProgramTree random_tree(Rng& rng, int min_depth, int max_depth, GrowMethod method) {
    if (min_depth < 0 || min_depth > max_depth || max_depth > kDepthLimit)
        throw std::invalid_argument("bad depth range for random_tree");
    const int target =
        min_depth + static_cast<int>(rng.uniform_index(
                        static_cast<std::size_t>(max_depth - min_depth + 1)));
    return gen_node(rng, 0, target, method);
}

bool semantically_equivalent(const ProgramTree& p1, const ProgramTree& p2, int trials,
                             double tol, Rng& rng) {
    static constexpr int kDims[3] = {3, 8, 16};
    for (int t = 0; t < trials; ++t) {
        const int n = kDims[t % 3];
        std::vector<double> args[3];
        for (auto& v : args) {
            v.resize(static_cast<std::size_t>(n));
            for (double& x : v) x = rng.uniform_real() * 2.0 - 1.0;
        }
        const auto o1 = evaluate(p1, args[0], args[1], args[2]);
        const auto o2 = evaluate(p2, args[0], args[1], args[2]);
        for (int i = 0; i < n; ++i) {
            const double x = o1[static_cast<std::size_t>(i)];
            const double y = o2[static_cast<std::size_t>(i)];
            const bool fx = std::isfinite(x), fy = std::isfinite(y);
            if (fx != fy) return false;
            if (fx) {
                if (std::abs(x - y) > tol) return false;
            } else {
                if (std::isnan(x) != std::isnan(y)) return false;
                if (!std::isnan(x) && x != y) return false;  // +inf vs -inf
            }
        }
    }
    return true;
}

const ProgramTree& subtree_at(const ProgramTree& tree, int index) {
    int i = index;
    if (const ProgramTree* r = find_at(tree, i)) return *r;
    throw std::out_of_range("subtree index " + std::to_string(index) + " out of range");
}

ProgramTree replace_subtree(const ProgramTree& tree, int index,
                            const ProgramTree& replacement) {
    ProgramTree copy = tree;
    int i = index;
    if (!replace_walk(copy, i, replacement))
        throw std::out_of_range("subtree index " + std::to_string(index) + " out of range");
    return copy;
}

std::vector<std::pair<int, ProgramTree>> load_program_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::vector<std::pair<int, ProgramTree>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t i = line.find_first_not_of(" \t");
        if (i == std::string::npos || line[i] == '#') continue;
        try {
            out.emplace_back(line_no, parse_program(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return out;
}

std::string render_tree_graph(const ProgramTree& tree) {
    std::string nodes, edges;
    int next = 0;
    graph_nodes(tree, next, nodes, edges);
    return nodes + edges;
}

}  // namespace gpvec
