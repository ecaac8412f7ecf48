#include <doctest.h>

#include <cstdlib>

#include "moraldial/config.hpp"
#include "moraldial/error.hpp"
#include "test_support.hpp"

using namespace moraldial;
using moraldial::testing::TempDir;

namespace {

std::string config_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  auto c = load_config(std::nullopt, {}, {});
  CHECK(c.k == 5);
  CHECK(c.lambda == -0.35);
  CHECK(c.seed == 0);
  CHECK(c.embedder_url == "hashing:256");
  CHECK(c.ril_context == RilContext::model);
  CHECK(to_json_snapshot(c)["lambda"] == -0.35);
}

TEST_CASE("precedence: flags over environment over file") {
  TempDir tmp;
  testing::write_file(tmp / "eval.conf", "# evaluation\nk = 3\nlambda = -0.2  # stricter\nseed = 9\n");
  auto file_only = load_config(tmp / "eval.conf", {}, {});
  CHECK(file_only.k == 3);
  CHECK(file_only.lambda == -0.2);

  ::setenv("MORALDIAL_K", "4", 1);
  ::setenv("MORALDIAL_RIL_CONTEXT", "gold", 1);
  const auto env = environment_settings();
  ::unsetenv("MORALDIAL_K");
  ::unsetenv("MORALDIAL_RIL_CONTEXT");
  CHECK(env.at("k") == "4");

  auto with_env = load_config(tmp / "eval.conf", env, {});
  CHECK(with_env.k == 4);
  CHECK(with_env.seed == 9);
  CHECK(with_env.ril_context == RilContext::gold);

  auto with_flags = load_config(tmp / "eval.conf", env, {{"k", "7"}});
  CHECK(with_flags.k == 7);
  CHECK(with_flags.lambda == -0.2);
}

TEST_CASE("bad values name the key and where it came from") {
  const auto flag = config_error([] { load_config(std::nullopt, {}, {{"lambda", "2"}}); });
  CHECK(flag.find("'lambda'") != std::string::npos);
  CHECK(flag.find("flag --lambda") != std::string::npos);

  const auto env = config_error([] { load_config(std::nullopt, {{"k", "zero"}}, {}); });
  CHECK(env.find("MORALDIAL_K") != std::string::npos);

  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"lambda", "-1"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"k", "0"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"ril_context", "both"}}), ConfigError);
  CHECK_THROWS_AS(load_config(std::nullopt, {}, {{"colour", "red"}}), ConfigError);
  CHECK(load_config(std::nullopt, {}, {{"lambda", "0.99"}}).lambda == 0.99);
}

TEST_CASE("config file errors carry file and line") {
  TempDir tmp;
  testing::write_file(tmp / "a.conf", "k = 2\n\nbogus = 1\n");
  const auto unknown = config_error([&] { parse_config_file(tmp / "a.conf"); });
  CHECK(unknown.find("a.conf:3") != std::string::npos);
  CHECK(unknown.find("bogus") != std::string::npos);

  testing::write_file(tmp / "b.conf", "k 2\n");
  CHECK(config_error([&] { parse_config_file(tmp / "b.conf"); }).find("b.conf:1") != std::string::npos);
  CHECK_THROWS_AS(parse_config_file(tmp / "missing.conf"), ConfigError);
}
