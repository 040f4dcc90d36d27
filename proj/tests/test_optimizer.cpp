#include <doctest.h>

#include <cmath>

#include "markedtime/hybrid_model.hpp"
#include "markedtime/optimizer.hpp"

using namespace markedtime;

namespace {
ExperimentConfig small() {
    ExperimentConfig c;
    c.spec.T_prime = 1.5;
    c.n_paths = 400;
    c.n_steps = 600;
    c.master_seed = 3;
    return c;
}
}  // namespace

TEST_CASE("grid shape, cell width and determinism") {
    auto c = small();
    c.n_steps = 150;
    AllocationBox box{-1.0, 1.0, -1.0, 2.0};
    const auto g = grid_optimize_constant(c, box, 7);
    CHECK(g.cells.size() == 49);
    CHECK(g.cell_width[0] == doctest::Approx(2.0 / 6));
    CHECK(g.cell_width[1] == doctest::Approx(3.0 / 6));
    CHECK(g.cells.front().pi == Vec2{-1.0, -1.0});
    CHECK(g.cells.back().pi == Vec2{1.0, 2.0});
    CHECK(g.cells[1].pi[1] == doctest::Approx(-0.5));  // pi2 varies fastest
    // 1 + 2 j < 0, so pi2 = 2 loses its wealth on the first jump
    CHECK(!g.cells.back().admissible);
    CHECK(g.best().admissible);
    for (const auto& cell : g.cells)
        if (cell.admissible) CHECK(cell.utility.mean <= g.best().utility.mean);
    c.workers = 1;
    const auto h = grid_optimize_constant(c, box, 7);
    CHECK(h.argmax == g.argmax);
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        const double x = h.cells[i].utility.mean, y = g.cells[i].utility.mean;
        CHECK((x == y || (std::isnan(x) && std::isnan(y))));
    }
}

TEST_CASE("the box must contain alpha") {
    CHECK_THROWS(grid_optimize_constant(small(), AllocationBox{1.0, 2.0, 1.0, 2.0}, 3));
}

TEST_CASE("a zero perturbation gives exact zeros") {
    const auto r = stationarity_check(small(), 0.0);
    CHECK(r.perturbations.size() == 8);
    CHECK(r.curvatures.size() == 4);
    for (const auto& p : r.perturbations) {
        CHECK(p.difference.mean == 0.0);
        CHECK(p.difference.se == 0.0);
        CHECK(p.pass);
    }
}

TEST_CASE("perturbations report the paired difference") {
    const auto r = stationarity_check(small(), 0.05);
    CHECK(r.epsilon == 0.05);
    int pre = 0, post = 0;
    for (const auto& p : r.perturbations) {
        pre += p.regime == "pre";
        post += p.regime == "post";
        CHECK(p.pass == (p.difference.mean <= 3 * p.difference.se));
    }
    CHECK(pre == 4);
    CHECK(post == 4);
}
