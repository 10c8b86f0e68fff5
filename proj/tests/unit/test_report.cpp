#include "mems/report.hpp"

#include <doctest.h>

#include <sstream>

using namespace mems;

TEST_SUITE("report") {
  TEST_CASE("touchdown table round trip") {
    TouchdownRow a;
    a.eps = 0.02;
    a.N = 6240;
    a.t_touch = 0.3115;
    a.points = {{0.64, 0.44}, {-0.64, 0.44}};
    a.u_min = -0.9901;
    TouchdownRow b = a;
    b.eps = 0.1;
    b.points = {{0.0, 0.0}};
    std::stringstream io;
    write_touchdown_header(io);
    write_touchdown_row(io, a);
    write_touchdown_row(io, b);
    const auto rows = read_touchdown_csv(io);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].eps == a.eps);
    CHECK(rows[0].N == 6240);
    REQUIRE(rows[0].points.size() == 2);
    CHECK(rows[0].points[1] == Vec2(-0.64, 0.44));
    CHECK(rows[1].points.size() == 1);
    CHECK(rows[1].u_min == a.u_min);
  }

  TEST_CASE("malformed tables are rejected") {
    std::istringstream bad("eps,N\n0.1,2,3\n");
    CHECK_THROWS_AS(read_touchdown_csv(bad), DomainError);
  }

  TEST_CASE("eps lists") {
    CHECK(parse_eps_list("0.1") == std::vector<double>{0.1});
    CHECK(parse_eps_list("0.1,0.02") == std::vector<double>{0.1, 0.02});
    const auto g = parse_eps_list("1e-4:1e-2:3");
    REQUIRE(g.size() == 3);
    CHECK(g[1] == doctest::Approx(1e-3));
    CHECK_THROWS_AS(parse_eps_list("0.1,x"), DomainError);
  }
}
