#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "salab/errors.hpp"
#include "salab/experiment.hpp"

using namespace salab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("salab_cli_test_" + std::to_string(::getpid())) / name;
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run_cli(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(SALAB_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

SpecFile parse(const std::string& text) {
  std::istringstream is(text);
  return SpecFile::parse(is);
}

int spec_error_line(const std::string& text) {
  try {
    build_experiment(parse(text));
  } catch (const SpecError& e) {
    return e.line();
  }
  return -1;
}

const char* small_spec = R"(# small pair-Gaussian run
[operator]
kind = pair_gaussian
dim = 2
sigma_bar = 1

[schedule]
alpha = 1
h = 2
xi = 0

[run]
x0 = zeros
horizon = 30
checkpoints = 10 30
reps = 4000
seed = 3

[bound]
kind = exact_quantile
deltas = 0.1
slack = 1.5
)";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("spec parser basics") {
    const auto s = parse("# c\n[a]\nx = 1.5  # trailing\ny = 1 2 3\nm = 1 2; 3 4\n[b]\nflag = true\n");
    CHECK(s.number("a", "x") == 1.5);
    CHECK(s.numbers("a", "y").size() == 3);
    CHECK(s.matrix("a", "m")(1, 0) == 3);
    CHECK(s.flag("b", "flag", false));
    CHECK(s.line_of("a", "y") == 4);
    CHECK(s.text("b", "missing", "dflt") == "dflt");
  }

  TEST_CASE("spec parser errors carry line numbers") {
    auto line_of = [](const std::string& text) {
      try {
        parse(text);
      } catch (const SpecError& e) {
        return e.line();
      }
      return -1;
    };
    CHECK(line_of("[a]\nx = 1\nx = 2\n") == 3);
    CHECK(line_of("x = 1\n") == 1);
    CHECK(line_of("[a]\n\n[a\n") == 3);
    CHECK(line_of("[a]\n[a]\n") == 2);
    CHECK(line_of("[a]\njunk line\n") == 2);
    const auto s = parse("[a]\nx = abc\n");
    CHECK_THROWS_AS(s.number("a", "x"), SpecError);
  }

  TEST_CASE("experiment validation errors point at the offending line") {
    const std::string base = small_spec;
    CHECK(spec_error_line(base) == -1);
    // Unknown key.
    std::string bad = base;
    bad.replace(bad.find("seed = 3"), 8, "sead = 3");
    CHECK(spec_error_line(bad) == 17);
    // Invalid step law.
    bad = base;
    bad.replace(bad.find("h = 2"), 5, "h = 0.5");
    CHECK(spec_error_line(bad) == 9);
    // Odd dimension for the pair-Gaussian map.
    bad = base;
    bad.replace(bad.find("dim = 2"), 7, "dim = 3");
    CHECK(spec_error_line(bad) == 4);
    bad = base;
    bad.replace(bad.find("kind = pair_gaussian"), 20, "kind = nonsense");
    CHECK(spec_error_line(bad) == 3);
  }

  TEST_CASE("additive-envelope threshold on h needs acknowledgement") {
    const std::string spec = R"([operator]
kind = random_contractive
dim = 2
gamma_c = 0.5
noise_scale = 1
seed = 1
[schedule]
alpha = 0.5
h = 2
xi = 0.5
[run]
x0 = ones
horizon = 10
checkpoints = 10
reps = 10
[bound]
kind = combined
envelope = additive
)";
    CHECK(spec_error_line(spec) == 9);
    std::string ack = spec;
    ack.insert(ack.find("[bound]"), "acknowledge_warning = true\n");
    CHECK(spec_error_line(ack) == -1);
  }

  TEST_CASE("simulate is reproducible across thread counts") {
    const auto dir = scratch("simulate");
    write_file(dir / "small.spec", small_spec);
    const auto a = run_cli("simulate --spec " + (dir / "small.spec").string() + " --out " + (dir / "a").string() +
                               " --parallel 1",
                           dir);
    const auto b = run_cli("simulate --spec " + (dir / "small.spec").string() + " --out " + (dir / "b").string() +
                               " --parallel 3",
                           dir);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const auto ea = read_file(dir / "a" / "ensemble.csv");
    CHECK(!ea.empty());
    CHECK(ea == read_file(dir / "b" / "ensemble.csv"));
  }

  TEST_CASE("coverage exit codes") {
    const auto dir = scratch("coverage");
    write_file(dir / "ok.spec", small_spec);
    const auto ok = run_cli("coverage --spec " + (dir / "ok.spec").string() + " --out " + dir.string(), dir);
    CHECK(ok.code == 0);
    CHECK(read_file(dir / "summary.csv").rfind("checkpoint,delta,quantile,ci_lo,ci_hi,bound,exceed_count,verdict", 0) ==
          0);
    std::string zero = small_spec;
    zero.replace(zero.find("kind = exact_quantile"), 21, "kind = zero");
    write_file(dir / "zero.spec", zero);
    const auto bad = run_cli("coverage --spec " + (dir / "zero.spec").string() + " --out " + (dir / "zero").string(), dir);
    CHECK(bad.code == 1);
  }

  TEST_CASE("invalid specs exit with code 2 and name the line") {
    const auto dir = scratch("invalid");
    std::string bad = small_spec;
    bad.replace(bad.find("xi = 0"), 6, "xi = 1.5");
    write_file(dir / "bad.spec", bad);
    const auto r = run_cli("simulate --spec " + (dir / "bad.spec").string() + " --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("line 10") != std::string::npos);
    CHECK(run_cli("simulate --spec " + (dir / "missing.spec").string(), dir).code == 2);
    CHECK(run_cli("frobnicate", dir).code == 2);
  }

  TEST_CASE("verify manifest and corrupted MDP files") {
    const auto dir = scratch("verify");
    const auto ok = run_cli("verify", dir);
    CHECK(ok.code == 0);
    CHECK(ok.out.find("FAIL") == std::string::npos);
    CHECK(ok.out.find("PASS [td_fixed_point]") != std::string::npos);
    write_file(dir / "bad.mdp", "2 1 0.9 1\n0.5 0.5\n0.5 0.4\n0 0\n");
    const auto bad = run_cli("verify --mdp " + (dir / "bad.mdp").string(), dir);
    CHECK(bad.code == 1);
    CHECK(bad.out.find("FAIL [mdp_file]") != std::string::npos);
    CHECK(bad.out.find("line 3") != std::string::npos);
  }
}
