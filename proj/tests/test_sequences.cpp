#include "doctest.h"

#include <numeric>
#include <sstream>

#include "qmclab/sequences.hpp"

using namespace qmclab;

namespace {

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("dyadic rationals compare by value across representations") {
  CHECK(DyadicRational(1, 1) == DyadicRational(2, 2));
  CHECK(DyadicRational(5, 3) < DyadicRational(3, 2));
  CHECK(DyadicRational(0, 4) == DyadicRational(0, 1));
  CHECK_FALSE(DyadicRational(3, 2) < DyadicRational(3, 2));
  CHECK(to_mpq(DyadicRational(5, 3)) == mpq_class(5, 8));
  CHECK_THROWS_AS(DyadicRational(4, 2), std::invalid_argument);
  CHECK(to_mpq(DyadicRational(u128{1} << 127, 128)) == mpq_class(1, 2));
}

TEST_CASE("radical inverse reverses digits exactly") {
  // First eight base-2 van der Corput points.
  const std::uint64_t nums[] = {0, 1, 1, 3, 1, 5, 3, 7};
  const std::uint64_t dens[] = {1, 2, 4, 4, 8, 8, 8, 8};
  for (int i = 0; i < 8; ++i) {
    auto x = radical_inverse(i, 2);
    CHECK(to_mpq(x) == mpq_class(static_cast<unsigned long>(nums[i]),
                                 static_cast<unsigned long>(dens[i])));
  }
  CHECK(to_mpq(radical_inverse(5, 3)) == mpq_class(7, 9));
  CHECK(to_mpq(radical_inverse(0, 7)) == 0);
  CHECK_THROWS_AS(radical_inverse(1, 1), std::invalid_argument);
}

TEST_CASE("halton points pair coprime bases") {
  auto x = halton_point(5, {2, 3});
  CHECK(to_mpq(x[0]) == mpq_class(5, 8));
  CHECK(to_mpq(x[1]) == mpq_class(7, 9));
  CHECK_THROWS_AS(halton_point(1, {2, 4}), std::invalid_argument);
  CHECK(first_primes(4) == std::vector<unsigned>{2, 3, 5, 7});
}

TEST_CASE("direction-number parsing reports the offending line") {
  auto parse = [](const std::string& body) {
    std::istringstream in("d s a m_i\n" + body);
    return load_direction_numbers(in);
  };
  auto recs = parse("2 1 0 1\n3 2 1 1 3\n");
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].dim == 3);
  CHECK(recs[1].a == 1);
  CHECK(recs[1].m == std::vector<std::uint64_t>{1, 3});

  auto msg = thrown_message([&] { parse("2 1 0 2\n"); });
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("odd") != std::string::npos);

  msg = thrown_message([&] { parse("2 1 0 1\n3 2 1 1 5\n"); });
  CHECK(msg.find("line 3") != std::string::npos);

  msg = thrown_message([&] { parse("2 3 1 1 3\n"); });
  CHECK(msg.find("line 2") != std::string::npos);

  msg = thrown_message([&] { parse("2 1 0 1 9\n"); });
  CHECK(msg.find("trailing") != std::string::npos);

  CHECK_THROWS_AS(parse(""), std::runtime_error);
}

TEST_CASE("sobol generating matrices match the classic construction") {
  auto table = load_direction_numbers_file(default_direction_file());
  SUBCASE("dimension 1 is the identity") {
    auto g = sobol_generator_set(table, 1, 4);
    CHECK(g.cols[0] == std::vector<u128>{8, 4, 2, 1});
  }
  SUBCASE("dimension 2 columns at m=4") {
    auto g = sobol_generator_set(table, 2, 4);
    CHECK(g.cols[1] == std::vector<u128>{8, 12, 10, 15});
  }
  SUBCASE("first eight points, d=2, m=3") {
    auto g = sobol_generator_set(table, 2, 3);
    const std::uint64_t want[] = {0, 4, 6, 2, 5, 1, 3, 7};
    for (std::uint64_t i = 0; i < 8; ++i) {
      auto x = sobol_point(i, g);
      CHECK(to_mpq(x[0]) == to_mpq(radical_inverse(i, 2)));  // dim 1 is van der Corput
      CHECK(x[1].num == want[i]);
      CHECK(x[1].e == 3);
    }
  }
  SUBCASE("each dimension's 2^m prefix is a permutation of k/2^m") {
    for (unsigned d = 1; d <= 3; ++d) {
      auto g = sobol_generator_set(table, d, 4);
      for (unsigned j = 0; j < d; ++j) {
        std::vector<std::uint64_t> nums;
        for (std::uint64_t i = 0; i < 16; ++i)
          nums.push_back(static_cast<std::uint64_t>(sobol_point(i, g)[j].num));
        std::sort(nums.begin(), nums.end());
        std::vector<std::uint64_t> want(16);
        std::iota(want.begin(), want.end(), 0);
        CHECK(nums == want);
      }
    }
  }
  SUBCASE("index must fit the precision") {
    auto g = sobol_generator_set(table, 1, 3);
    CHECK_THROWS_AS(sobol_point(8, g), std::invalid_argument);
  }
  SUBCASE("missing dimension is reported") {
    CHECK_THROWS_AS(sobol_generator_set(table, 200, 4), std::runtime_error);
  }
}

TEST_CASE("net certification over elementary intervals") {
  auto table = load_direction_numbers_file(default_direction_file());
  SUBCASE("sobol d=2 m=4 is a (0,4,2)-net") {
    auto g = sobol_generator_set(table, 2, 4);
    CHECK(is_tmd_net(sobol_points_mpq(16, g), 0, 4, 2, 2));
    CHECK(smallest_net_t(sobol_points_mpq(16, g), 4, 2, 2) == 0);
  }
  SUBCASE("van der Corput prefixes are (0,m,1)-nets in base 2") {
    for (unsigned m = 1; m <= 6; ++m) {
      std::vector<std::vector<mpq_class>> pts;
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << m); ++i)
        pts.push_back({to_mpq(radical_inverse(i, 2))});
      CHECK(is_tmd_net(pts, 0, m, 1, 2));
    }
  }
  SUBCASE("base-3 radical inverse gives a (0,2,1)-net in base 3") {
    std::vector<std::vector<mpq_class>> pts;
    for (std::uint64_t i = 0; i < 9; ++i) pts.push_back({to_mpq(radical_inverse(i, 3))});
    CHECK(is_tmd_net(pts, 0, 2, 1, 3));
  }
  SUBCASE("a clumped set is not a (0,m,1)-net") {
    std::vector<std::vector<mpq_class>> pts(4, {mpq_class(1, 8)});
    CHECK_FALSE(is_tmd_net(pts, 0, 2, 1, 2));
    CHECK(smallest_net_t(pts, 2, 1, 2) == 2);
  }
  SUBCASE("wrong point count is rejected") {
    std::vector<std::vector<mpq_class>> pts(3, {mpq_class(1, 8)});
    CHECK_THROWS_AS(is_tmd_net(pts, 0, 2, 1, 2), std::invalid_argument);
  }
  SUBCASE("sobol d=3 has smallest t = 1 at m=6") {
    auto g = sobol_generator_set(table, 3, 6);
    CHECK(smallest_net_t(sobol_points_mpq(64, g), 6, 3, 2) == 1);
  }
}

TEST_CASE("compositions enumerate shapes") {
  auto cs = compositions(4, 2);
  REQUIRE(cs.size() == 5);
  CHECK(cs.front() == std::vector<unsigned>{0, 4});
  CHECK(cs.back() == std::vector<unsigned>{4, 0});
  CHECK(compositions(0, 3).size() == 1);
  CHECK(compositions(6, 3).size() == 28);
}
