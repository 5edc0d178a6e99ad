#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpvec/rng.hpp"

namespace gpvec {

// Node kinds of the composition-program language.  Binary and unary operators
// act component-wise except ROLL/RINT/NORM/LOG1P, which are vector-level; the
// three terminals bind to the question-word vectors a, b, c.
enum class Op : std::uint8_t {
    Add, Sub, Mul, SafeDiv,                                      // binary
    Neg, Diff, Abs, Cos, Sin, Roll, Rint, Half, Norm, Log1p,     // unary
    Arg0, Arg1, Arg2,                                            // terminals
};

inline constexpr int kOpCount = 17;
inline constexpr int kInternalOpCount = 14;  // Add..Log1p
inline constexpr int kTerminalCount = 3;

int arity_of(Op op);
const char* name_of(Op op);  // canonical spelling, e.g. "safeDiv", "ARG0"

struct ProgramTree {
    Op op = Op::Arg0;
    std::vector<ProgramTree> children;

    bool operator==(const ProgramTree&) const = default;
};

// Root is depth 0; a lone terminal has depth 0.
int depth(const ProgramTree& tree);
// Node count, >= 1.
int size(const ProgramTree& tree);

inline constexpr int kDepthLimit = 10;

// int(w) interpretation: round-half-to-even by default, truncation toward
// zero behind the flag.
enum class RintMode { half_even, truncate };

// Bottom-up evaluation; may produce non-finite components (LOG1P of a -1
// component), which is the fitness layer's problem, never this function's.
// Throws on argument dimension mismatch.
std::vector<double> evaluate(const ProgramTree& tree,
                             std::span<const double> a,
                             std::span<const double> b,
                             std::span<const double> c,
                             RintMode rint_mode = RintMode::half_even);

// Canonical text form, e.g. "add(ARG2,sub(ARG1,ARG0))".
std::string format_program(const ProgramTree& tree);

// Grammar: expr := IDENT '(' expr (',' expr)* ')' | TERMINAL.  Identifiers are
// case-insensitive, whitespace is ignored; errors carry the byte offset.
ProgramTree parse_program(const std::string& text);

enum class GrowMethod { full, grow };

// Draws a target depth uniformly in [min_depth, max_depth], then generates in
// preorder.  full: operators (uniform over 14) until the target depth,
// terminals (uniform over 3) there.  grow: uniform over all 17 kinds before
// the target depth, terminals at it.
ProgramTree random_tree(Rng& rng, int min_depth, int max_depth, GrowMethod method);

// True iff outputs agree on `trials` random triples (components uniform on
// [-1,1], dims cycling 3/8/16): finite components within tol by max-abs
// difference, non-finite ones by class (NaN / +inf / -inf) per position.
bool semantically_equivalent(const ProgramTree& p1, const ProgramTree& p2,
                             int trials, double tol, Rng& rng);

// Preorder node indexing (root = 0) for the variation operators.
const ProgramTree& subtree_at(const ProgramTree& tree, int index);
ProgramTree replace_subtree(const ProgramTree& tree, int index,
                            const ProgramTree& replacement);

// Program text files: one canonical-form program per line, '#' comments and
// blank lines skipped.  Returns (line number, tree) pairs.
std::vector<std::pair<int, ProgramTree>> load_program_lines(const std::string& path);

// One node per line "n<i> <label>", then edges "n<i> -> n<j>"; trivial
// graph-description dump for documentation figures.
std::string render_tree_graph(const ProgramTree& tree);

}  // namespace gpvec
