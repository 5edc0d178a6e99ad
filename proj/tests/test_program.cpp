#include <cmath>
#include <random>
#include <set>

#include "doctest.h"

#include "gpvec/program.hpp"
#include "test_util.hpp"

using namespace gpvec;

namespace {

std::vector<double> random_vec(std::mt19937_64& eng, std::size_t n, double lo = -10.0,
                               double hi = 10.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(eng);
    return v;
}

ProgramTree unary(Op op, ProgramTree child) { return ProgramTree{op, {std::move(child)}}; }
ProgramTree binary(Op op, ProgramTree l, ProgramTree r) {
    return ProgramTree{op, {std::move(l), std::move(r)}};
}
ProgramTree term(Op op) { return ProgramTree{op, {}}; }

}  // namespace

TEST_CASE("rule tree evaluates c-a+b componentwise") {
    const auto tree = parse_program("add(ARG2,sub(ARG1,ARG0))");
    const std::vector<double> a{1, 0}, b{0, 1}, c{2, 2};
    CHECK(evaluate(tree, a, b, c) == std::vector<double>{1, 3});
}

TEST_CASE("safeDiv returns zero on zero divisor components") {
    const auto tree = parse_program("safeDiv(ARG0,ARG1)");
    const std::vector<double> a{4, 5, 6}, b{2, 0, 3}, c{0, 0, 0};
    CHECK(evaluate(tree, a, b, c) == std::vector<double>{2, 0, 2});
}

TEST_CASE("roll shifts left cyclically") {
    const auto tree = parse_program("roll(ARG0)");
    const std::vector<double> a{1, 2, 3}, b{0, 0, 0}, c{0, 0, 0};
    CHECK(evaluate(tree, a, b, c) == std::vector<double>{2, 3, 1});
}

TEST_CASE("log1p of the zero vector is zero via the NORM protection") {
    const auto tree = parse_program("log1p(ARG0)");
    const std::vector<double> z{0, 0};
    CHECK(evaluate(tree, z, z, z) == std::vector<double>{0, 0});
}

TEST_CASE("rint rounds half to even by default, truncates behind the flag") {
    const auto tree = parse_program("rint(ARG0)");
    const std::vector<double> a{1.5, -0.5, 2.3}, o{0, 0, 0};
    CHECK(evaluate(tree, a, o, o) == std::vector<double>{2, 0, 2});
    CHECK(evaluate(tree, a, o, o, RintMode::truncate) == std::vector<double>{1, 0, 2});
    const std::vector<double> ties{0.5, 2.5, 3.5, -1.5, -2.5};
    const std::vector<double> o5{0, 0, 0, 0, 0};
    CHECK(evaluate(tree, ties, o5, o5) == std::vector<double>{0, 2, 4, -2, -2});
}

TEST_CASE("every operator matches an independent scalar oracle") {
    std::mt19937_64 eng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + eng() % 12;
        // include zeros and large magnitudes
        auto a = random_vec(eng, n, -100.0, 100.0);
        auto b = random_vec(eng, n, -100.0, 100.0);
        if (trial % 4 == 0) a[eng() % n] = 0.0;
        if (trial % 5 == 0) b[eng() % n] = 0.0;
        const std::vector<double> c(n, 0.0);
        const auto A = term(Op::Arg0), B = term(Op::Arg1);

        auto check_binary = [&](Op op, auto oracle) {
            const auto got = evaluate(binary(op, A, B), a, b, c);
            for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == oracle(a[i], b[i]));
        };
        auto check_unary_exact = [&](Op op, auto oracle) {
            const auto got = evaluate(unary(op, A), a, b, c);
            for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == oracle(a[i]));
        };

        check_binary(Op::Add, [](double x, double y) { return x + y; });
        check_binary(Op::Sub, [](double x, double y) { return x - y; });
        check_binary(Op::Mul, [](double x, double y) { return x * y; });
        check_binary(Op::SafeDiv, [](double x, double y) { return y == 0.0 ? 0.0 : x / y; });
        check_unary_exact(Op::Neg, [](double x) { return -x; });
        check_unary_exact(Op::Diff, [](double x) { return 1.0 + x; });
        check_unary_exact(Op::Abs, [](double x) { return std::fabs(x); });
        check_unary_exact(Op::Cos, [](double x) { return std::cos(x); });
        check_unary_exact(Op::Sin, [](double x) { return std::sin(x); });
        check_unary_exact(Op::Half, [](double x) { return x / 2.0; });
        check_unary_exact(Op::Rint, testutil::oracle_rint_half_even);

        // vector-level operators against independent loops
        const auto rolled = evaluate(unary(Op::Roll, A), a, b, c);
        for (std::size_t i = 0; i < n; ++i) CHECK(rolled[i] == a[(i + 1) % n]);

        double m = 0.0;
        for (double v : a) m = std::max(m, std::fabs(v));
        const auto normed = evaluate(unary(Op::Norm, A), a, b, c);
        const auto logged = evaluate(unary(Op::Log1p, A), a, b, c);
        for (std::size_t i = 0; i < n; ++i) {
            const double expect = m == 0.0 ? a[i] : a[i] / m;
            CHECK(normed[i] == expect);
            CHECK(logged[i] == std::log1p(expect));
        }
    }
}

TEST_CASE("NORM maps the extreme component to +-1 and the rest into [-1,1]") {
    std::mt19937_64 eng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_vec(eng, 6);
        const std::vector<double> z(6, 0.0);
        const auto out = evaluate(unary(Op::Norm, term(Op::Arg0)), a, z, z);
        double extreme = 0.0;
        for (double v : out) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
            extreme = std::max(extreme, std::fabs(v));
        }
        CHECK(extreme == 1.0);
    }
}

TEST_CASE("ROLL applied dim times is the identity") {
    std::mt19937_64 eng(78);
    for (std::size_t n : {1, 3, 8}) {
        const auto a = random_vec(eng, n);
        const std::vector<double> z(n, 0.0);
        ProgramTree tree = term(Op::Arg0);
        for (std::size_t i = 0; i < n; ++i) tree = unary(Op::Roll, std::move(tree));
        CHECK(evaluate(tree, a, z, z) == a);
    }
}

TEST_CASE("safeDiv never emits inf or NaN from a zero divisor") {
    std::mt19937_64 eng(79);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_vec(eng, 5);
        std::vector<double> b(5, 0.0);
        b[trial % 5] = 1.0;
        const std::vector<double> z(5, 0.0);
        const auto out =
            evaluate(binary(Op::SafeDiv, term(Op::Arg0), term(Op::Arg1)), a, b, z);
        for (double v : out) CHECK(std::isfinite(v));
    }
}

TEST_CASE("log1p may emit -inf, which propagates") {
    // neg(abs(norm(w))) maps the extreme component to exactly -1
    const auto tree = parse_program("log1p(neg(abs(norm(ARG0))))");
    const std::vector<double> a{-1, 0.5, 0.25}, z{0, 0, 0};
    const auto out = evaluate(tree, a, z, z);
    CHECK(out[0] == -INFINITY);
    CHECK(std::isfinite(out[1]));
}

TEST_CASE("depth and size") {
    CHECK(depth(term(Op::Arg0)) == 0);
    CHECK(size(term(Op::Arg0)) == 1);
    const auto rule = parse_program("add(ARG2,sub(ARG1,ARG0))");
    CHECK(depth(rule) == 2);
    CHECK(size(rule) == 5);

    ProgramTree chain = term(Op::Arg1);
    for (int i = 0; i < 10; ++i) chain = unary(Op::Neg, std::move(chain));
    CHECK(depth(chain) == 10);
    chain = unary(Op::Neg, std::move(chain));
    CHECK(depth(chain) == 11);
}

TEST_CASE("parse/format: canonical forms and tolerance") {
    const std::string canon = "add(ARG2,sub(ARG1,ARG0))";
    CHECK(format_program(parse_program(canon)) == canon);
    CHECK(format_program(parse_program("ADD( arg2 , SUB(ARG1,ARG0) )")) == canon);
    CHECK(format_program(parse_program("safediv(ARG0,ARG1)")) == "safeDiv(ARG0,ARG1)");
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_WITH_AS(parse_program("add(ARG0)"),
                         doctest::Contains("arity mismatch for 'add'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("bogus(ARG0)"),
                         doctest::Contains("unknown identifier 'bogus'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("add(ARG0,ARG1"),
                         doctest::Contains("unbalanced parentheses"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("ARG0 extra"), doctest::Contains("trailing garbage"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("neg(ARG0))"), doctest::Contains("at byte 9"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("neg"), doctest::Contains("expected '('"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("ARG0(ARG1)"), doctest::Contains("takes no arguments"),
                         std::runtime_error);
}

TEST_CASE("parse then format is the identity on random trees") {
    Rng rng(501);
    for (int i = 0; i < 1000; ++i) {
        const auto tree =
            random_tree(rng, 0, 6, i % 2 ? GrowMethod::grow : GrowMethod::full);
        const auto text = format_program(tree);
        CHECK(parse_program(text) == tree);
    }
}

TEST_CASE("random_tree: full hits the exact target depth") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i)
        CHECK(depth(random_tree(rng, 1, 1, GrowMethod::full)) == 1);
    for (int i = 0; i < 200; ++i) {
        const auto d = depth(random_tree(rng, 3, 3, GrowMethod::full));
        CHECK(d == 3);
    }
}

TEST_CASE("random_tree: grow respects the bound; min=max=0 is a lone terminal") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto tree = random_tree(rng, 0, 0, GrowMethod::grow);
        CHECK(depth(tree) == 0);
        CHECK(size(tree) == 1);
    }
}

TEST_CASE("random_tree: 10000 samples at max depth 4 stay within it and use all 17 kinds") {
    Rng rng(13);
    std::set<int> kinds;
    auto collect = [&](const ProgramTree& t, auto&& self) -> void {
        kinds.insert(static_cast<int>(t.op));
        for (const auto& ch : t.children) self(ch, self);
    };
    for (int i = 0; i < 10000; ++i) {
        const auto tree =
            random_tree(rng, 1, 4, i % 2 ? GrowMethod::grow : GrowMethod::full);
        CHECK(depth(tree) <= 4);
        collect(tree, collect);
    }
    CHECK(kinds.size() == 17);
}

TEST_CASE("semantic equivalence: alternative rule spellings match") {
    const auto rule = parse_program("add(ARG2,sub(ARG1,ARG0))");
    for (const auto& text : testutil::rule_equivalent_programs()) {
        Rng rng(100);
        CHECK(semantically_equivalent(rule, parse_program(text), 200, 1e-9, rng));
    }
}

TEST_CASE("semantic equivalence: commutativity holds, argument swap does not") {
    Rng rng(101);
    CHECK(semantically_equivalent(parse_program("add(ARG0,ARG1)"),
                                  parse_program("add(ARG1,ARG0)"), 200, 1e-9, rng));
    Rng rng2(102);
    CHECK(!semantically_equivalent(parse_program("sub(ARG0,ARG1)"),
                                   parse_program("sub(ARG1,ARG0)"), 200, 1e-9, rng2));
}

TEST_CASE("semantic equivalence compares non-finite outputs by class") {
    // both sides -inf at the extreme component
    const auto p1 = parse_program("log1p(neg(abs(norm(ARG0))))");
    const auto p2 = parse_program("log1p(neg(abs(norm(add(ARG0,sub(ARG1,ARG1))))))");
    Rng rng(103);
    CHECK(semantically_equivalent(p1, p2, 100, 1e-9, rng));
    Rng rng2(104);
    CHECK(!semantically_equivalent(p1, parse_program("neg(ARG0)"), 100, 1e-9, rng2));
}

TEST_CASE("subtree indexing is preorder and replacement is functional") {
    const auto rule = parse_program("add(ARG2,sub(ARG1,ARG0))");
    CHECK(subtree_at(rule, 0) == rule);
    CHECK(format_program(subtree_at(rule, 1)) == "ARG2");
    CHECK(format_program(subtree_at(rule, 2)) == "sub(ARG1,ARG0)");
    CHECK(format_program(subtree_at(rule, 3)) == "ARG1");
    CHECK(format_program(subtree_at(rule, 4)) == "ARG0");
    CHECK_THROWS_AS(subtree_at(rule, 5), std::out_of_range);

    const auto replaced = replace_subtree(rule, 2, term(Op::Arg2));
    CHECK(format_program(replaced) == "add(ARG2,ARG2)");
    CHECK(format_program(rule) == "add(ARG2,sub(ARG1,ARG0))");  // original untouched
}

TEST_CASE("evaluate rejects dimension mismatches") {
    const std::vector<double> a{1, 2}, b{1, 2, 3}, c{1, 2};
    CHECK_THROWS_AS(evaluate(term(Op::Arg0), a, b, c), std::invalid_argument);
}

TEST_CASE("program files load with comments skipped and errors located") {
    testutil::TempDir tmp("progfile");
    const auto path = tmp.file("p.txt");
    testutil::write_file(path, "# comment\nadd(ARG0,ARG1)\n\nneg(ARG2)\n");
    const auto programs = load_program_lines(path);
    REQUIRE(programs.size() == 2);
    CHECK(programs[0].first == 2);
    CHECK(format_program(programs[0].second) == "add(ARG0,ARG1)");
    CHECK(programs[1].first == 4);

    testutil::write_file(path, "add(ARG0,ARG1)\nnope(ARG0)\n");
    CHECK_THROWS_WITH_AS(load_program_lines(path), doctest::Contains("line 2"),
                         std::runtime_error);
}

TEST_CASE("tree graph rendering lists nodes then edges") {
    const auto text = render_tree_graph(parse_program("add(ARG2,sub(ARG1,ARG0))"));
    CHECK(text.find("n0 add\n") != std::string::npos);
    CHECK(text.find("n2 sub\n") != std::string::npos);
    CHECK(text.find("n0 -> n1\n") != std::string::npos);
    CHECK(text.find("n2 -> n4\n") != std::string::npos);
}
