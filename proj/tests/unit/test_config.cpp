#include <doctest.h>

#include <fstream>

#include "fd3/config.hpp"
#include "fd3/error.hpp"
#include "helpers.hpp"

using namespace fd3;

TEST_SUITE("config") {
  TEST_CASE("parse, typed access and comments") {
    const Config c = Config::parse("# comment\nclahe.clip_limit = 2.5  # trailing\n\nflag=yes\nn = 12\nlist = [1, 2.5, 3]\n");
    CHECK(c.get_double("clahe.clip_limit", 0) == 2.5);
    CHECK(c.get_bool("flag", false));
    CHECK(c.get_int("n", 0) == 12);
    CHECK(c.get_list("list", {}) == std::vector<double>{1.0, 2.5, 3.0});
    CHECK(c.get_string("missing", "x") == "x");
    CHECK_FALSE(c.has("missing"));
  }

  TEST_CASE("malformed input") {
    CHECK_THROWS_AS(Config::parse("no equals sign"), ArgumentError);
    const Config c = Config::parse("a = abc\nb = 1.5");
    CHECK_THROWS_AS(c.get_double("a", 0), ArgumentError);
    CHECK_THROWS_AS(c.get_int("b", 0), ArgumentError);
    CHECK_THROWS_AS(c.get_bool("a", false), ArgumentError);
  }

  TEST_CASE("merge, subtree and text round trip") {
    Config a = Config::parse("x.a = 1\nx.b = 2\ny = 3");
    a.merge(Config::parse("x.b = 5"));
    CHECK(a.get_int("x.b", 0) == 5);
    const Config sub = a.subtree("x");
    CHECK(sub.entries().size() == 2);
    CHECK(sub.get_int("a", 0) == 1);
    CHECK(Config::parse(a.to_text()).entries() == a.entries());
  }

  TEST_CASE("loads run manifests") {
    const auto dir = test::temp_dir("config");
    std::ofstream(dir / "m.json") << R"({"command": "degrade", "config": {"seed": "7", "ranges.alpha": [0.5, 1.0]}})";
    const Config c = Config::load(dir / "m.json");
    CHECK(c.get_int("seed", 0) == 7);
    CHECK(c.get_list("ranges.alpha", {}) == std::vector<double>{0.5, 1.0});
    CHECK_THROWS_AS(Config::load(dir / "absent.cfg"), IoError);
  }

  TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1e-4, 2.0, -0.2, 1.0 / 3.0}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(2.0) == "2");
  }
}
