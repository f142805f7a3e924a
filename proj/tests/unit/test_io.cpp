#include <doctest.h>

#include <random>
#include <sstream>

#include "precis/error.hpp"
#include "precis/io.hpp"
#include "support.hpp"

using namespace precis;
using namespace precis::io;
using testing::max_abs;

namespace {

std::string parse_error(const std::string& text) {
    std::istringstream is(text);
    try {
        read_plant(is, "plant.txt");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        return e.what();
    }
    return "";
}

const char* kPlant = R"(# two states
A
2 2
-1 0
0 -2
B_d
2 1
1
1
C_z
1 2
1 0
C_y
2 2
1 0
0 1
)";

}  // namespace

TEST_CASE("matrix text round trip is exact") {
    std::mt19937_64 rng(2);
    const Matrix m = testing::random_matrix(rng, 3, 4) * 1e-7;
    std::ostringstream os;
    write_matrix(os, m);
    CHECK(parse_matrix(os.str()) == m);
    CHECK(parse_matrix("0 0\n").size() == 0);
    CHECK(parse_matrix("1 2 # comment\n\n 1.5 inf\n")(0, 1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("matrix parse errors carry the line") {
    auto message = [](const std::string& text) {
        try {
            parse_matrix(text, "m.txt");
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("2 2\n1 2\n3\n") == "m.txt:3: matrix row 2: expected 2 values, found 1");
    CHECK(message("2 x\n") == "m.txt:1: matrix cols: 'x' is not a non-negative integer");
    CHECK(message("1 1\nfoo\n") == "m.txt:2: matrix: 'foo' is not a number");
    CHECK(message("2 1\n1\n") == "m.txt:2: unexpected end of input, expected matrix row 2");
    CHECK(message("1 1\n1\n2\n") == "m.txt:3: unexpected content after the matrix");
}

TEST_CASE("plant round trip") {
    for (const auto& pw : {example1_plant(), random_plant(3, 4, 2, 6)}) {
        std::ostringstream os;
        write_plant(os, pw);
        std::istringstream is(os.str());
        const auto back = read_plant(is);
        CHECK(back.plant.A == pw.plant.A);
        CHECK(back.plant.Bd == pw.plant.Bd);
        CHECK(back.plant.Cz == pw.plant.Cz);
        REQUIRE(back.catalog.size() == pw.catalog.size());
        for (int i = 0; i < pw.catalog.size(); ++i) {
            CHECK(back.catalog.sensor(i).C == pw.catalog.sensor(i).C);
            CHECK(back.catalog.sensor(i).label == "s" + std::to_string(i + 1));
        }
        CHECK(back.catalog.weights() == pw.catalog.weights());
    }
}

TEST_CASE("plant defaults") {
    std::istringstream is(kPlant);
    const auto pw = read_plant(is);
    CHECK(pw.catalog.size() == 2);
    CHECK(pw.catalog.weights() == Vector::Ones(2));
    CHECK(pw.catalog.sensor(1).D.size() == 1);
    CHECK(pw.catalog.sensor(1).D(0) == 0.0);
}

TEST_CASE("plant parse errors") {
    std::string text = kPlant;
    CHECK(parse_error(text + "C_y\n1 2\n1 1\n") == "plant.txt:17: duplicate section C_y");
    CHECK(parse_error(text + "weights\n2 1\n1\n-1\n") == "plant.txt:17: weights: entries must be positive");
    CHECK(parse_error(text + "extra 3\n") == "plant.txt:17: unexpected key 'extra' in a plant file");
    CHECK(parse_error(text + "G\n1 1\n0\n") == "plant.txt:17: unknown section 'G'");
    CHECK(parse_error("A\n2 2\n-1 0\n0 -2\n") == "plant.txt:4: missing section B_d");
    CHECK(parse_error("A\n1 2\n-1 0\nB_d\n1 1\n1\nC_z\n1 2\n1 0\nC_y\n1 2\n1 0\n") == "plant.txt:1: A: must be square");
    CHECK(parse_error("A b c\n") == "plant.txt:1: expected a section name or 'key value', found 3 fields");
    CHECK_THROWS_AS(load_plant("/nonexistent/plant.txt"), Error);
}

TEST_CASE("result round trip") {
    const auto pw = example1_plant();
    estimator::DesignSpec spec;
    spec.gamma = 0.5;
    spec.subset = SensorSubset{0, 3};
    const auto r = estimator::design(pw.plant, pw.catalog, spec);
    std::ostringstream os;
    write_result(os, pw, r);
    CHECK(os.str().rfind("precis-result 1\nframework hinf\nestimator observer\n", 0) == 0);
    std::istringstream is(os.str());
    const auto back = read_result(is);
    CHECK(back.result.spec.subset == spec.subset);
    CHECK(back.result.spec.gamma == 0.5);
    CHECK(back.result.p == r.p);
    CHECK(back.result.matrices.L == r.matrices.L);
    CHECK(back.result.objective == r.objective);
    CHECK(back.result.norm == r.norm);
    CHECK(back.result.certified == r.certified);
    CHECK(back.result.diagnostics.iterations == r.diagnostics.iterations);
    CHECK(back.result.diagnostics.status == r.diagnostics.status);
    CHECK(back.result.weights == r.weights);
    CHECK(back.plant.plant.A == pw.plant.A);

    // corrupt the status line
    std::string text = os.str();
    const auto at = text.find("status converged");
    REQUIRE(at != std::string::npos);
    text.replace(at, 16, "status done");
    std::istringstream bad(text);
    CHECK_THROWS_WITH_AS(read_result(bad, "r.txt"), "r.txt:9: status: unknown value 'done'", Error);

    std::istringstream nohead("framework hinf\n");
    CHECK_THROWS_AS(read_result(nohead), Error);
}

TEST_CASE("filter result round trip") {
    const auto pw = example1_plant();
    estimator::DesignSpec spec;
    spec.kind = EstimatorKind::Filter;
    spec.gamma = 0.5;
    spec.subset = SensorSubset::all(4);
    const auto r = estimator::design(pw.plant, pw.catalog, spec);
    std::ostringstream os;
    write_result(os, pw, r);
    std::istringstream is(os.str());
    const auto back = read_result(is);
    CHECK(back.result.matrices.kind == EstimatorKind::Filter);
    CHECK(back.result.matrices.AF == r.matrices.AF);
    CHECK(back.result.matrices.BF == r.matrices.BF);
    CHECK(back.result.matrices.CF == r.matrices.CF);
}

TEST_CASE("subset and vector lists") {
    CHECK(parse_subset("1,4", 4) == SensorSubset{0, 3});
    CHECK(parse_subset(" 2 , 3 ", 4) == SensorSubset{1, 2});
    CHECK_THROWS_AS(parse_subset("0", 4), Error);
    CHECK_THROWS_AS(parse_subset("5", 4), Error);
    CHECK_THROWS_AS(parse_subset("1,,2", 4), Error);
    CHECK_THROWS_AS(parse_subset("1,1", 4), Error);
    CHECK_THROWS_AS(parse_subset("a", 4), Error);
    const Vector v = parse_vector("1,2.5", "rho");
    REQUIRE(v.size() == 2);
    CHECK(v[1] == 2.5);
    CHECK_THROWS_AS(parse_vector("1,x", "rho"), Error);
}
