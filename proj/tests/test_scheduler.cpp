#include <doctest.h>

#include <set>
#include <sstream>

#include "ptm/corpus.hpp"
#include "ptm/partitioner.hpp"
#include "ptm/scheduler.hpp"

using namespace ptm;

TEST_SUITE("scheduler") {
  TEST_CASE("three parts follow the diagonal lines") {
    const auto s = build_schedule(3);
    REQUIRE(s.epochs.size() == 3);
    CHECK(s.epochs[0] == std::vector<BlockIndex>{{0, 0}, {1, 1}, {2, 2}});
    CHECK(s.epochs[1] == std::vector<BlockIndex>{{0, 1}, {1, 2}, {2, 0}});
    CHECK(s.epochs[2] == std::vector<BlockIndex>{{0, 2}, {1, 0}, {2, 1}});
  }

  TEST_CASE("single part") {
    const auto s = build_schedule(1);
    CHECK(s.epochs == std::vector<std::vector<BlockIndex>>{{{0, 0}}});
  }

  TEST_CASE("every block appears exactly once and the grid is a Latin square") {
    for (std::uint32_t P : {2u, 4u, 7u, 16u}) {
      const auto s = build_schedule(P);
      std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
      for (const auto& e : s.epochs) {
        CHECK(e.size() == P);
        for (const auto& b : e) CHECK(seen.insert({b.row_group, b.col_group}).second);
      }
      CHECK(seen.size() == std::size_t{P} * P);
      // (epoch, m) -> n: every row and column of the grid holds each n once
      for (std::uint32_t m = 0; m < P; ++m) {
        std::set<std::uint32_t> column;
        for (std::uint32_t l = 0; l < P; ++l) column.insert(s.epochs[l][m].col_group);
        CHECK(column.size() == P);
      }
    }
  }

  TEST_CASE("nonconflict verification") {
    const auto r = build_workload(generate_synthetic(90, 150, 10, 1.1, 2));
    const auto p = partition(r, Algorithm::a1, {3, 1, 0}).partitioning;
    auto s = build_schedule(3);
    CHECK(verify_nonconflicting(s, p));

    auto dup = s;
    dup.epochs[1][2].col_group = dup.epochs[1][0].col_group;
    CHECK_FALSE(verify_nonconflicting(dup, p));

    auto broken = p;
    broken.row_perm[0] = broken.row_perm[1];
    CHECK_FALSE(verify_nonconflicting(s, broken));
    CHECK_FALSE(verify_nonconflicting(build_schedule(4), p));
  }

  TEST_CASE("sixty-part partitioning of a synthetic corpus") {
    const auto r = build_workload(generate_synthetic(2000, 5000, 100, 1.1, 1));
    const auto res = partition(r, Algorithm::a3, {60, 3, 1});
    const auto s = build_schedule(60);
    CHECK(verify_nonconflicting(s, res.partitioning));
    CHECK(schedule_cost(s, res.report) == res.report.total_cost);
  }

  TEST_CASE("printable") {
    std::ostringstream out;
    out << build_schedule(2);
    CHECK(out.str() == "epoch 0: (0,0) (1,1)\nepoch 1: (0,1) (1,0)\n");
  }
}
