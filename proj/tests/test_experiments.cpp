#include "cgnn/experiments.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cgnn;
using namespace cgnn::experiments;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("builtin names") {
    CHECK(all_builtins().size() == 5);
    for (auto n : all_builtins()) CHECK(parse_builtin(to_string(n)) == n);
    CHECK_FALSE(parse_builtin("nope").has_value());
}

TEST_CASE("example builtin and its partner") {
    const auto m = builtin(BuiltinName::example5);
    REQUIRE(m.partner.has_value());
    CHECK(m.base.n == 2);
    CHECK(m.base.P == 1);
    CHECK(m.base.input[0](0.0) == doctest::Approx(2.0));
    CHECK(m.base.input[1](0.0) == doctest::Approx(2.0));
    CHECK(m.partner->input[0](0.0) == doctest::Approx(1.0));
    CHECK(m.partner->input[1](0.0) == doctest::Approx(1.0));
    CHECK(m.period == doctest::Approx(2 * M_PI));
    const auto gap = criteria::asymptotic_gap(model::make_pair(m.base, *m.partner));
    CHECK(gap.pass());
    CHECK(criteria::h7_limsup(m.base, std::vector<double>{1.0, 1.0}, 200.0, 0.01).negative());
}

TEST_CASE("static kernel constructor") {
    const auto m = builtin(BuiltinName::static_kernel);
    CHECK(m.base.n == 2);
    CHECK(m.period == doctest::Approx(2 * M_PI));
    BuiltinParams boundary;
    boundary.values["coupling"] = 0.5;
    CHECK_THROWS_AS(builtin(BuiltinName::static_kernel, boundary), BuiltinRefused);
    BuiltinParams unknown;
    unknown.values["colour"] = 1.0;
    CHECK_THROWS_AS(builtin(BuiltinName::static_kernel, unknown), std::invalid_argument);
    BuiltinParams three;
    three.values["n"] = 3;
    CHECK(builtin(BuiltinName::static_kernel, three).base.n == 3);
}

TEST_CASE("other builtins refuse weak damping") {
    BuiltinParams weak;
    weak.values["beta"] = 0.5;
    CHECK_THROWS_AS(builtin(BuiltinName::highorder_periodic, weak), BuiltinRefused);
    CHECK_THROWS_AS(builtin(BuiltinName::loworder_almostperiodic, weak), BuiltinRefused);
    CHECK_NOTHROW(builtin(BuiltinName::highorder_periodic));
    CHECK_NOTHROW(builtin(BuiltinName::loworder_almostperiodic));
}

TEST_CASE("periodicity defect on synthetic signals") {
    const criteria::StateFn s = [](double t) { return std::vector<double>{std::sin(t)}; };
    CHECK(periodicity_defect(s, 2 * M_PI, 0.0, 10.0) <= 1e-9);
    CHECK(periodicity_defect(s, M_PI, 0.0, 10.0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::fabs(periodicity_defect(s, 2 * M_PI, 1.0, 5.0) - periodicity_defect(s, 2 * M_PI, 1.0 + 2 * M_PI, 5.0 + 2 * M_PI)) <= 1e-9);
}

TEST_CASE("thread cap") {
    CHECK(thread_cap() >= 1);
}

TEST_CASE("recipes") {
    CHECK_THROWS_AS(run_recipe("nope"), std::invalid_argument);
    CHECK(recipe_names().size() == 4);

    const auto dir = std::filesystem::temp_directory_path() / "cgnn_recipe_test";
    std::filesystem::remove_all(dir);
    RecipeOptions opts;
    opts.out_dir = dir / "a";
    const auto rep = run_recipe("figure12_reproduction", opts);
    CHECK(rep.pass());
    for (const char* f : {"trajectory_1.csv", "trajectory_2.csv", "trajectory_3.csv", "convergence.csv", "criterion.csv",
                          "report.txt"})
        CHECK(std::filesystem::exists(opts.out_dir / f));

    RecipeOptions again = opts;
    again.out_dir = dir / "b";
    again.threads = 1;
    run_recipe("figure12_reproduction", again);
    for (const char* f : {"trajectory_1.csv", "convergence.csv", "criterion.csv"})
        CHECK(slurp(opts.out_dir / f) == slurp(again.out_dir / f));

    const auto self = run_recipe("self_attractivity");
    CHECK(self.pass());
    std::filesystem::remove_all(dir);
}

}
