#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "strongsel/model.hpp"

using namespace strongsel;

TEST_CASE("irreducibility of the support digraph") {
    CHECK_FALSE(check_irreducible({{1.0, 0.0}, {0.0, 1.0}}));
    CHECK(check_irreducible({{0.5, 0.5}, {0.5, 0.5}}));
    // no path 1 -> 2
    CHECK_FALSE(check_irreducible({{1.0, 0.0}, {0.3, 0.7}}));
    CHECK(check_irreducible(
        {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}));  // 3-cycle
}

TEST_CASE("mutation model validation") {
    CHECK_THROWS(MutationModel(2, 1.0, {{0.5, 0.6}, {0.5, 0.5}}));  // row sum != 1
    CHECK_THROWS(MutationModel(2, -0.1, {{0.5, 0.5}, {0.5, 0.5}}));
    CHECK_THROWS(MutationModel(1, 1.0, {{1.0}}));
    MutationModel m(2, 1.0, {{1.0, 0.0}, {0.3, 0.7}});
    CHECK_FALSE(m.irreducible());
    CHECK_THROWS(m.require_irreducible("test"));
    MutationModel ok(2, 2.0, {{0.9, 0.1}, {0.2, 0.8}});
    CHECK(ok.irreducible());
    CHECK(ok.theta_p1(1) == Catch::Approx(0.2));
}

TEST_CASE("pim model validation") {
    CHECK_THROWS(PimModel(1.0, {0.5, 0.6}));
    PimModel degenerate(1.0, {1.0, 0.0});
    CHECK_FALSE(degenerate.irreducible());
    PimModel ok(1.0, {0.7, 0.3});
    CHECK(ok.irreducible());
    MutationModel general = ok.as_general();
    CHECK(general.P(0, 1) == general.P(1, 1));
}

TEST_CASE("selection regime") {
    SelectionRegime s{100.0, {0.5, 0.0}};
    CHECK(s.sigma_of(0, 3) == 100.0);
    CHECK(s.sigma_of(1, 3) == 0.5);
    CHECK_FALSE(s.rest_is_zero());
    CHECK_THROWS(s.require_rest_zero("op"));
    SelectionRegime zero{100.0, {}};
    CHECK(zero.sigma_of(2, 3) == 0.0);
    CHECK_NOTHROW(zero.require_rest_zero("op"));
}

TEST_CASE("sample config and simplex point") {
    SampleConfig n({2, 0, 1});
    CHECK(n.size() == 3);
    CHECK(n.unfit() == 1);
    CHECK_THROWS(SampleConfig({1, -1}));
    SampleConfig zero({0, 0});
    CHECK(zero.size() == 0);
    CHECK_THROWS(SimplexPoint({0.5, 0.6}));
    CHECK_THROWS(SimplexPoint({1.1, -0.1}));
    CHECK(SimplexPoint::vertex(3, 0).x[0] == 1.0);
}

TEST_CASE("model file parsing") {
    std::istringstream good(
        "# comment\n"
        "d = 2\n"
        "theta = 1.0\n"
        "P = 0.7 0.3  0.7 0.3\n"
        "sigma = 100\n"
        "Q = [0.7, 0.3]\n");
    ModelFile mf = parse_model(good);
    CHECK(mf.pim());
    CHECK(mf.sigma == 100.0);
    CHECK(mf.mutation_model().P(1, 0) == Catch::Approx(0.7));
    CHECK(mf.pim_model().Q(1) == Catch::Approx(0.3));

    std::istringstream bad_row(
        "d = 2\ntheta = 1\nP = 0.7 0.4 0.7 0.3\nsigma = 10\n");
    CHECK_THROWS(parse_model(bad_row));

    std::istringstream unknown("d = 2\ntheta = 1\nP = .5 .5 .5 .5\nfoo = 1\n");
    CHECK_THROWS(parse_model(unknown));

    std::istringstream no_matrix("d = 2\ntheta = 1\nsigma = 10\n");
    CHECK_THROWS(parse_model(no_matrix));

    // scalar sigma_rest broadcasts across the d-1 unfit alleles
    std::istringstream broadcast(
        "d = 3\ntheta = 1\nQ = 0.4 0.3 0.3\nsigma = 50\nsigma_rest = 0\n");
    ModelFile mf3 = parse_model(broadcast);
    CHECK(mf3.sigma_rest.size() == 2);
    CHECK(mf3.selection().rest_is_zero());
}
