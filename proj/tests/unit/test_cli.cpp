#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {
int run(const std::string& args) {
  const std::string cmd = std::string(QRING_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("listing succeeds") { CHECK(run("list-scenarios") == 0); }

  TEST_CASE("validation failures exit with 2") {
    const auto out = (fs::temp_directory_path() / "qring-cli-bad").string();
    CHECK(run("eigensolve -s no_such_scenario -o " + out) == 2);
    CHECK(run("eigensolve -s fig2a --override pulse.kind=bessel -o " + out) == 2);
    CHECK(run("eigensolve -s fig2a --override grid.spacing=3 -o " + out) == 2);
    CHECK(run("simulate -o " + out) != 0);
  }

  TEST_CASE("numerical failures exit with 3") {
    const auto out = (fs::temp_directory_path() / "qring-cli-num").string();
    CHECK(run("simulate -s fig2a --ci-scale --override pulse.coupling_scale=1 -o " + out) == 3);
  }

  TEST_CASE("output root from the environment") {
    const auto root = fs::temp_directory_path() / "qring-cli-root";
    fs::remove_all(root);
    const std::string cmd = "QRING_OUTPUT_ROOT=" + root.string() + " " + std::string(QRING_EXE) +
                            " eigensolve -q -s fig2a --ci-scale >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(root / "fig2a-ci" / "manifest.json"));
    CHECK(fs::exists(root / "fig2a-ci" / "eigen" / "orbitals.csv"));
  }
}
