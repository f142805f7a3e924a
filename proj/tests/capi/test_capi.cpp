#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "precis/precis.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("precis_capi_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Plant {
    precis_plant* h = nullptr;
    ~Plant() { precis_plant_free(h); }
};
struct Options {
    precis_options* h = nullptr;
    Options() { REQUIRE(precis_options_create(&h) == PRECIS_OK); }
    ~Options() { precis_options_free(h); }
};
struct Result {
    precis_result* h = nullptr;
    ~Result() { precis_result_free(h); }
};
struct Selection {
    precis_selection* h = nullptr;
    ~Selection() { precis_selection_free(h); }
};

}  // namespace

TEST_CASE("version and status strings") {
    CHECK(std::string(precis_version()).size() > 0);
    CHECK(std::string(precis_status_string(PRECIS_E_INFEASIBLE)).size() > 0);
    CHECK(std::string(precis_last_error()).empty());
}

TEST_CASE("plants") {
    Plant p;
    REQUIRE(precis_plant_example1(&p.h) == PRECIS_OK);
    int nx = 0, nd = 0, nz = 0, ns = 0;
    REQUIRE(precis_plant_dims(p.h, &nx, &nd, &nz, &ns) == PRECIS_OK);
    CHECK(nx == 4);
    CHECK(nd == 2);
    CHECK(nz == 4);
    CHECK(ns == 4);

    Plant sm;
    REQUIRE(precis_plant_spring_mass(3, &sm.h) == PRECIS_OK);
    REQUIRE(precis_plant_dims(sm.h, &nx, nullptr, nullptr, &ns) == PRECIS_OK);
    CHECK(nx == 6);
    CHECK(ns == 6);

    Plant bad;
    CHECK(precis_plant_spring_mass(0, &bad.h) != PRECIS_OK);
    CHECK(bad.h == nullptr);
    CHECK(std::string(precis_last_error()).size() > 0);
    CHECK(precis_plant_random(1, 0, 1, 1, &bad.h) != PRECIS_OK);
    CHECK(precis_plant_example1(nullptr) == PRECIS_E_INVALID_ARGUMENT);

    const double w[] = {1, 2, 3, 4};
    CHECK(precis_plant_set_weights(p.h, w, 4) == PRECIS_OK);
    CHECK(precis_plant_set_weights(p.h, w, 3) == PRECIS_E_DIMENSION);
}

TEST_CASE("plant text and files") {
    const auto dir = scratch_dir("plant");
    Plant p;
    REQUIRE(precis_plant_random(7, 3, 2, 5, &p.h) == PRECIS_OK);
    const std::string path = (dir / "plant.txt").string();
    REQUIRE(precis_plant_save(p.h, path.c_str()) == PRECIS_OK);
    Plant back;
    REQUIRE(precis_plant_load(path.c_str(), &back.h) == PRECIS_OK);
    const std::string again = (dir / "again.txt").string();
    REQUIRE(precis_plant_save(back.h, again.c_str()) == PRECIS_OK);
    CHECK(slurp(path) == slurp(again));

    Plant parsed;
    CHECK(precis_plant_parse("A\n1 1\n-1\nB_d\n1 1\n1\nC_z\n1 1\n1\nC_y\n1 1\n1\n", &parsed.h) == PRECIS_OK);
    Plant broken;
    CHECK(precis_plant_parse("A\n1 1\nx\n", &broken.h) == PRECIS_E_PARSE);
    CHECK(std::string(precis_last_error()).find(":3:") != std::string::npos);
    CHECK(precis_plant_load("/nonexistent/p.txt", &broken.h) == PRECIS_E_IO);
}

TEST_CASE("options validation") {
    Options o;
    CHECK(precis_options_set_framework(o.h, "h2") == PRECIS_OK);
    CHECK(precis_options_set_framework(o.h, "h3") == PRECIS_E_INVALID_ARGUMENT);
    CHECK(precis_options_set_estimator(o.h, "filter") == PRECIS_OK);
    CHECK(precis_options_set_gamma(o.h, -1.0) == PRECIS_E_INVALID_ARGUMENT);
    CHECK(precis_options_set_admm(o.h, "mu", 5.0) == PRECIS_OK);
    CHECK(precis_options_set_admm(o.h, "mu", -5.0) == PRECIS_E_INVALID_ARGUMENT);
    CHECK(precis_options_set_admm(o.h, "speed", 1.0) == PRECIS_E_INVALID_ARGUMENT);
    CHECK(precis_options_set_admm_mode(o.h, "projected-least-squares") == PRECIS_OK);
    CHECK(precis_options_set_admm_mode(o.h, "inner") == PRECIS_OK);
    CHECK(precis_options_set_admm_mode(o.h, "cone-slack") == PRECIS_OK);
    CHECK(precis_options_set_admm_mode(o.h, "newton") == PRECIS_E_INVALID_ARGUMENT);
    CHECK(precis_options_set_jobs(o.h, 0) == PRECIS_E_INVALID_ARGUMENT);
    CHECK(precis_options_set_rlm(o.h, 0, 0.0) == PRECIS_E_INVALID_ARGUMENT);
}

TEST_CASE("design, save, load and verify") {
    const auto dir = scratch_dir("design");
    Plant p;
    REQUIRE(precis_plant_example1(&p.h) == PRECIS_OK);
    Options o;
    REQUIRE(precis_options_set_gamma(o.h, 0.5) == PRECIS_OK);
    Result r;
    const std::string trace = (dir / "trace.csv").string();
    REQUIRE(precis_design(p.h, o.h, nullptr, 0, trace.c_str(), &r.h) == PRECIS_OK);
    CHECK(precis_result_objective(r.h) == doctest::Approx(14.0).epsilon(0.03));
    CHECK(precis_result_norm(r.h) <= 0.5);
    CHECK(precis_result_certified(r.h) == 1);
    CHECK(std::string(precis_result_status(r.h)) == "converged");
    CHECK(slurp(trace).rfind("iter,objective,primal_residual,dual_residual\n", 0) == 0);

    int n = 0;
    int ids[2];
    CHECK(precis_result_subset(r.h, ids, 2, &n) == PRECIS_E_BUFFER_TOO_SMALL);
    CHECK(n == 4);
    std::vector<int> all(4);
    REQUIRE(precis_result_subset(r.h, all.data(), 4, &n) == PRECIS_OK);
    CHECK(all == std::vector<int>{0, 1, 2, 3});
    std::vector<double> prec(4);
    REQUIRE(precis_result_precisions(r.h, prec.data(), 4, &n) == PRECIS_OK);
    double sum = 0.0;
    for (double v : prec) {
        sum += v;
    }
    CHECK(sum == doctest::Approx(precis_result_objective(r.h)));

    precis_verification v{};
    REQUIRE(precis_verify(r.h, 0.0, &v) == PRECIS_OK);
    CHECK(v.stable == 1);
    CHECK(v.within_bound == 1);
    CHECK(v.gamma == 0.5);
    CHECK(v.norm == doctest::Approx(precis_result_norm(r.h)).epsilon(1e-6));
    CHECK(v.spectrum_size == 4);
    std::vector<double> re(4), im(4);
    REQUIRE(precis_result_spectrum(r.h, re.data(), im.data(), 4, &n) == PRECIS_OK);
    for (double x : re) {
        CHECK(x < 0.0);
    }

    const std::string path = (dir / "result.txt").string();
    REQUIRE(precis_result_save(r.h, path.c_str()) == PRECIS_OK);
    Result back;
    REQUIRE(precis_result_load(path.c_str(), &back.h) == PRECIS_OK);
    CHECK(precis_result_objective(back.h) == precis_result_objective(r.h));

    // halving every precision can only raise the norm
    REQUIRE(precis_result_scale_precisions(back.h, 0.5) == PRECIS_OK);
    precis_verification half{};
    REQUIRE(precis_verify(back.h, 0.0, &half) == PRECIS_OK);
    CHECK(half.norm >= v.norm);
    CHECK(half.within_bound == 0);
    CHECK(precis_result_scale_precisions(back.h, 0.0) == PRECIS_E_INVALID_ARGUMENT);
}

TEST_CASE("design errors") {
    Plant p;
    REQUIRE(precis_plant_example1(&p.h) == PRECIS_OK);
    Options o;
    Result r;
    const int bad[] = {7};
    REQUIRE(precis_options_set_gamma(o.h, 0.5) == PRECIS_OK);
    CHECK(precis_design(p.h, o.h, bad, 1, nullptr, &r.h) == PRECIS_E_INVALID_SENSOR);
    CHECK(r.h == nullptr);
    const int dup[] = {1, 1};
    CHECK(precis_design(p.h, o.h, dup, 2, nullptr, &r.h) == PRECIS_E_INVALID_SENSOR);
    // one sensor cannot reach a tiny bound
    const int one[] = {0};
    REQUIRE(precis_options_set_gamma(o.h, 1e-3) == PRECIS_OK);
    REQUIRE(precis_options_set_admm(o.h, "max_iter", 300) == PRECIS_OK);
    const precis_status s = precis_design(p.h, o.h, one, 1, nullptr, &r.h);
    CHECK((s == PRECIS_E_INFEASIBLE || s == PRECIS_E_RECOVERY));
    CHECK(r.h == nullptr);
}

TEST_CASE("selection") {
    const auto dir = scratch_dir("select");
    Plant p;
    REQUIRE(precis_plant_example1(&p.h) == PRECIS_OK);
    Options o;
    REQUIRE(precis_options_set_gamma(o.h, 0.5) == PRECIS_OK);
    Selection s;
    REQUIRE(precis_select(p.h, o.h, "gse", 3, &s.h) == PRECIS_OK);
    CHECK(precis_selection_feasible(s.h) == 1);
    CHECK(precis_selection_cost(s.h) == doctest::Approx(18.84).epsilon(0.03));
    CHECK(precis_selection_evaluations(s.h) == 4);
    int ids[4];
    int n = 0;
    REQUIRE(precis_selection_subset(s.h, ids, 4, &n) == PRECIS_OK);
    REQUIRE(n == 3);
    CHECK(ids[0] == 0);
    CHECK(ids[2] == 2);
    const std::string trace = (dir / "trace.csv").string();
    REQUIRE(precis_selection_write_trace(s.h, trace.c_str()) == PRECIS_OK);
    CHECK(slurp(trace).rfind("round,candidate_id,cost,action\n", 0) == 0);
    Result r;
    REQUIRE(precis_selection_design(s.h, &r.h) == PRECIS_OK);
    CHECK(precis_result_objective(r.h) == precis_selection_cost(s.h));

    Selection bad;
    CHECK(precis_select(p.h, o.h, "gse", 5, &bad.h) == PRECIS_E_INVALID_ARGUMENT);
    CHECK(precis_select(p.h, o.h, "best", 2, &bad.h) == PRECIS_E_INVALID_ARGUMENT);

    Selection none;
    REQUIRE(precis_options_set_rlm(o.h, 1, 0.0) == PRECIS_OK);
    REQUIRE(precis_select(p.h, o.h, "rlm", 1, &none.h) == PRECIS_OK);
    CHECK(precis_selection_feasible(none.h) == 0);
    CHECK(std::isinf(precis_selection_cost(none.h)));
    Result nr;
    CHECK(precis_selection_design(none.h, &nr.h) == PRECIS_OK);
    CHECK(nr.h == nullptr);

    Plant big;
    REQUIRE(precis_plant_random(1, 2, 1, 12, &big.h) == PRECIS_OK);
    REQUIRE(precis_options_set_budget(o.h, 10) == PRECIS_OK);
    Selection over;
    CHECK(precis_select(big.h, o.h, "exhaustive", 4, &over.h) == PRECIS_E_BUDGET);
}

TEST_CASE("benchmarks") {
    const auto dir = scratch_dir("bench");
    const int masses[] = {1, 2};
    double slope = 0.0;
    const std::string csv = (dir / "scaling.csv").string();
    REQUIRE(precis_bench_scaling(masses, 2, 0.5, 1, csv.c_str(), &slope) == PRECIS_OK);
    CHECK(std::isfinite(slope));
    CHECK(slurp(csv).rfind("M,N_x,median_time,iterations,objective,status,slope\n", 0) == 0);

    Options o;
    REQUIRE(precis_options_set_gamma(o.h, 0.3) == PRECIS_OK);
    REQUIRE(precis_options_set_jobs(o.h, 2) == PRECIS_OK);
    precis_compare_summary a{}, b{};
    const std::string c1 = (dir / "c1.csv").string();
    const std::string c2 = (dir / "c2.csv").string();
    const std::string t1 = (dir / "t1.csv").string();
    REQUIRE(precis_bench_compare(o.h, 2, 40, 2, 1, 5, 2, c1.c_str(), t1.c_str(), &a) == PRECIS_OK);
    REQUIRE(precis_bench_compare(o.h, 2, 40, 2, 1, 5, 2, c2.c_str(), nullptr, &b) == PRECIS_OK);
    CHECK(a.systems == 2);
    CHECK(slurp(c1) == slurp(c2));
    CHECK(slurp(t1).find(",seconds\n") != std::string::npos);
    CHECK(a.gse.exact == b.gse.exact);
    CHECK(precis_bench_compare(o.h, 0, 40, 2, 1, 5, 2, nullptr, nullptr, &a) == PRECIS_E_INVALID_ARGUMENT);
}
