#include <doctest.h>

#include <random>
#include <sstream>

#include "precis/error.hpp"
#include "precis/selection.hpp"
#include "support.hpp"

using namespace precis;
using namespace precis::selection;

namespace {

SelectionProblem example_problem(int k) {
    const auto pw = example1_plant();
    SelectionProblem p;
    p.plant = pw.plant;
    p.catalog = pw.catalog;
    p.gamma = 0.5;
    p.k = k;
    p.jobs = 4;
    return p;
}

// Two-state plant with generic sensors; gamma below the open-loop gain so the
// sensors matter.
SelectionProblem easy_problem(std::uint64_t seed, Index ns, int k) {
    const auto pw = random_plant(seed, 2, 1, ns);
    SelectionProblem p;
    p.plant = pw.plant;
    p.catalog = pw.catalog;
    const double open_loop = estimator::hinf_norm({pw.plant.A, pw.plant.Bd, pw.plant.Cz});
    p.gamma = 0.3 * open_loop;
    p.k = k;
    p.jobs = 4;
    p.admm.eps_abs = 1e-5;
    p.admm.eps_rel = 1e-4;
    return p;
}

}  // namespace

TEST_CASE("cost ordering") {
    const Cost inf = Cost::infinite();
    const Cost one = Cost::finite(1.0);
    const Cost two = Cost::finite(2.0);
    CHECK(one < two);
    CHECK(two < inf);
    CHECK(inf == Cost::infinite());
    CHECK_FALSE(inf < inf);
    CHECK(inf.value() == std::numeric_limits<double>::infinity());
    CHECK(inf.to_string() == "inf");
    CHECK_FALSE(inf.is_finite());
    CHECK_THROWS_AS(Cost::finite(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("binomial") {
    CHECK(binomial(12, 4) == 495);
    CHECK(binomial(4, 4) == 1);
    CHECK(binomial(3, 5) == 0);
    CHECK(binomial(200, 100) == std::numeric_limits<std::size_t>::max());
}

TEST_CASE("algorithm names") {
    CHECK(parse_algorithm("gse") == Algorithm::Gse);
    CHECK(parse_algorithm("exhaustive") == Algorithm::Exhaustive);
    CHECK_THROWS_AS(parse_algorithm("greedy"), Error);
}

TEST_CASE("set functions on the example plant") {
    const auto p = example_problem(2);
    CHECK_FALSE(eval_f(p, SensorSubset{}).is_finite());
    const auto e = evaluate(p, SensorSubset{1, 2, 3});
    REQUIRE(e.cost.is_finite());
    CHECK(e.cost.value() == doctest::Approx(22.52).epsilon(0.03));
    double sum = 0.0;
    for (const auto& c : e.precisions) {
        REQUIRE(c.is_finite());
        CHECK(c.value() >= 1e-6);
        sum += c.value();
    }
    CHECK(sum == doctest::Approx(e.cost.value()).epsilon(1e-12));

    // one sensor cannot meet the bound
    const auto h = eval_h(p, SensorSubset{0});
    REQUIRE(h.size() == 1);
    CHECK_FALSE(h[0].is_finite());
}

TEST_CASE("problem validation") {
    auto p = example_problem(5);
    CHECK_THROWS_AS(p.validate(), Error);
    p.k = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p.k = 2;
    p.rho = Vector::Ones(3);
    CHECK_THROWS_AS(p.validate(), Error);
    p.rho = Vector();
    p.jobs = 0;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("gse on the example plant keeps the cheaper triple") {
    const auto r = gse(example_problem(3));
    REQUIRE(r.feasible);
    CHECK(r.subset == SensorSubset{0, 1, 2});
    CHECK(r.cost.value() == doctest::Approx(18.84).epsilon(0.03));
    CHECK(r.evaluations == 4);
    CHECK(r.rounds == 1);
    REQUIRE(r.design);
    CHECK(r.design->certified);

    const auto all = gse(example_problem(4));
    CHECK(all.subset == SensorSubset::all(4));
    CHECK(all.evaluations == 0);
    CHECK(all.rounds == 0);
    CHECK(all.cost.value() == doctest::Approx(14.0).epsilon(0.03));
}

TEST_CASE("evaluation counts follow the closed forms") {
    const auto p = easy_problem(3, 12, 4);
    const auto g = gse(p);
    REQUIRE(g.feasible);
    CHECK(g.evaluations == 68);
    CHECK(g.rounds == 8);
    CHECK(g.subset.size() == 4);

    const auto l = lpe(p);
    REQUIRE(l.feasible);
    CHECK(l.evaluations == 8);
    CHECK(l.solves == 9);
    CHECK(l.subset.size() == 4);

    auto full = p;
    full.k = 12;
    const auto lf = lpe(full);
    CHECK(lf.subset == SensorSubset::all(12));
    CHECK(lf.evaluations == 0);
}

TEST_CASE("rlm") {
    auto p = easy_problem(5, 6, 6);
    const auto once = rlm(p, {1, 0.0});
    REQUIRE(once.feasible);
    CHECK(once.rounds == 1);
    CHECK(once.evaluations == 1);

    // a tight cap with too many useful sensors fails at i_max
    const auto fail_case = rlm(example_problem(1), {1, 0.0});
    CHECK_FALSE(fail_case.feasible);
    CHECK(fail_case.subset.empty());
    CHECK_FALSE(fail_case.cost.is_finite());
    CHECK_THROWS_AS(rlm(p, {0, 0.0}), Error);

    p.k = 2;
    const auto r = rlm(p);
    if (r.feasible) {
        CHECK(r.subset.size() <= 2);
        // the final design uses the caller's weights
        CHECK(r.cost == eval_f(p, r.subset));
    }
    // every round records one keep/drop decision per sensor
    int decisions = 0;
    for (const auto& row : r.trace) {
        decisions += row.action == "keep" || row.action == "drop";
    }
    CHECK(decisions == 6 * r.rounds);
}

TEST_CASE("exhaustive search") {
    const auto r = exhaustive(example_problem(2));
    REQUIRE(r.feasible);
    CHECK(r.evaluations == 6);
    CHECK(r.cost.value() == doctest::Approx(22.52).epsilon(0.03));
    CHECK((r.subset == SensorSubset{0, 3} || r.subset == SensorSubset{1, 2}));

    const auto single = exhaustive(example_problem(4));
    CHECK(single.evaluations == 1);
    CHECK(single.subset == SensorSubset::all(4));

    auto big = easy_problem(1, 12, 4);
    try {
        exhaustive(big, 100);
        FAIL("expected a budget error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Budget);
    }
}

TEST_CASE("exhaustive is no worse than the heuristics") {
    for (std::uint64_t seed : {11u, 12u}) {
        const auto p = easy_problem(seed, 6, 3);
        const auto ex = exhaustive(p);
        REQUIRE(ex.feasible);
        for (auto* algo : {&gse, &lpe}) {
            const auto h = algo(p);
            if (h.feasible) {
                CHECK(h.subset.size() <= 3);
                CHECK(ex.cost.value() <= h.cost.value() * 1.05);
            }
        }
    }
}

TEST_CASE("monotone and subadditive within solver tolerance") {
    std::mt19937_64 rng(8);
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        const auto p = easy_problem(seed, 5, 1);
        std::vector<int> perm{0, 1, 2, 3, 4};
        std::shuffle(perm.begin(), perm.end(), rng);
        const SensorSubset small(std::vector<int>(perm.begin(), perm.begin() + 2));
        const SensorSubset large(std::vector<int>(perm.begin(), perm.begin() + 4));
        const Cost fs = eval_f(p, small);
        const Cost fl = eval_f(p, large);
        REQUIRE(fs.is_finite());
        REQUIRE(fl.is_finite());
        CHECK(fl.value() <= fs.value() * 1.05);

        const SensorSubset other(std::vector<int>(perm.begin() + 2, perm.begin() + 5));
        const Cost fo = eval_f(p, other);
        const Cost fu = eval_f(p, small.unite(other));
        REQUIRE(fo.is_finite());
        CHECK(fu.value() <= fs.value() + fo.value() + 0.05 * std::min(fs.value(), fo.value()));
    }
}

TEST_CASE("selection trace csv") {
    const auto r = gse(example_problem(3));
    std::ostringstream os;
    write_trace_csv(os, r.trace);
    const std::string s = os.str();
    CHECK(s.rfind("round,candidate_id,cost,action\n", 0) == 0);
    CHECK(s.find(",eliminate\n") != std::string::npos);
    CHECK(s.find("1,4,") != std::string::npos);  // s4 is the eliminated sensor
}
