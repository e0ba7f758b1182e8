#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <string>

// Drives the bldgtool binary end to end.  BLDGTOOL_PATH is injected by the
// build; stderr (timing chatter) is dropped so the captured bytes are
// exactly the report document.

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_tool(const std::string& args) {
  std::string cmd = std::string(BLDGTOOL_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("counting commands report matching values and exit zero") {
  auto r = run_tool("count-chambers --family sp --n 2 --q 3");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"formula\": 160"));
  CHECK(contains(r.out, "\"enumerated\": 160"));
  CHECK(contains(r.out, "\"ok\": true"));
  CHECK(contains(r.out, "\"schema_version\": 1"));

  r = run_tool("count-close --family sl --n 3 --q 2");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"enumerated\": 42"));

  r = run_tool("count-close --family sp --n 2 --q 2");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"enumerated\": 30"));
  CHECK(contains(r.out, "\"ambient\": 210"));
  CHECK(contains(r.out, "\"rejected_type\": 0"));
}

TEST_CASE("verify-relation enumerates inside the envelope, formulas beyond") {
  auto r = run_tool("verify-relation --family sl --n 4 --q 2");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"formula\": 210"));
  CHECK(contains(r.out, "\"enumerated\": 210"));
  CHECK(contains(r.out, "\"relation_holds\": true"));
  CHECK(contains(r.out, "\"ok\": true"));

  // n = 8 is formula-only: no enumerated block, still exit 0
  r = run_tool("verify-relation --family sl --n 8 --q 3");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"relation_holds\": true"));
  CHECK_FALSE(contains(r.out, "enumerated"));

  r = run_tool("verify-relation --family sp --n 2 --q 3");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"enumerated\": 120"));
}

TEST_CASE("multiplicity sampling and the full sum") {
  auto r = run_tool("multiplicity --family sl --n 4 --q 2 --pairs 6 --seed 5");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"expected\": 3"));
  CHECK(contains(r.out, "\"ok\": true"));

  // identical seeds give identical samples
  auto r2 = run_tool("multiplicity --family sl --n 4 --q 2 --pairs 6 --seed 5");
  CHECK(r2.out == r.out);

  r = run_tool("multiplicity --family sp --n 2 --q 2 --all");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"sum\": 90"));
  CHECK(contains(r.out, "\"sum_expected\": 90"));
}

TEST_CASE("reports are byte-identical across parallelism degrees") {
  for (const std::string args :
       {"count-close --family sl --n 4 --q 2",
        "count-close --family sp --n 2 --q 3",
        "multiplicity --family sl --n 4 --q 2",
        "verify-relation --family sp --n 2 --q 2",
        "export-complex --family sl --n 4 --q 2 --format dot",
        "table --q 2 --format csv"}) {
    CAPTURE(args);
    auto one = run_tool(args + " --threads 1");
    auto eight = run_tool(args + " --threads 8");
    CHECK(one.exit_code == 0);
    CHECK(eight.exit_code == 0);
    CHECK(one.out == eight.out);
  }
}

TEST_CASE("table output") {
  auto r = run_tool("table --q 2 --format csv");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out,
                 "family,n,q,r,omega,m,q_times_r,r_prev_times_omega,"
                 "relation_ok\r\n"));
  CHECK(contains(r.out, "sl,4,2,315,210,3,630,630,true\r\n"));
  CHECK(contains(r.out, "sp,2,2,45,30,3,90,90,true\r\n"));
  CHECK(contains(r.out, "sp,3,2,2835,126,45,5670,5670,true\r\n"));

  // empty range: header only
  r = run_tool("table --q 2 --n-min 7 --n-max 6 --format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "family,n,q,r,omega,m,q_times_r,r_prev_times_omega,relation_ok\r\n");

  r = run_tool("table --q 3 --family sp --format json");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"omega\": 120"));
  CHECK(contains(r.out, "\"relation_ok\": true"));
}

TEST_CASE("export-complex emits a graph with facet annotations") {
  auto r = run_tool("export-complex --family sp --n 2 --q 2 --format dot");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "graph close_complex {"));
  CHECK(contains(r.out, "// facet 0:"));
  CHECK(contains(r.out, "iso true"));

  r = run_tool("export-complex --family sl --n 4 --q 2");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"vertices\""));
  CHECK(contains(r.out, "\"vertex_map\""));
  CHECK(contains(r.out, "\"iso\": true"));
}

TEST_CASE("infeasible jobs exit two") {
  // outside the enumeration envelope
  auto r = run_tool("count-close --family sl --n 6 --q 2");
  CHECK(r.exit_code == 2);
  CHECK(contains(r.out, "\"error\""));

  // slow tier without --slow
  r = run_tool("count-chambers --family sp --n 3 --q 2");
  CHECK(r.exit_code == 2);
  r = run_tool("count-chambers --family sp --n 3 --q 2 --slow");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "\"enumerated\": 2835"));

  // format not available for the command
  r = run_tool("count-chambers --family sl --n 3 --q 2 --format dot");
  CHECK(r.exit_code == 2);

  // precision beyond what the build certifies
  r = run_tool("count-close --family sl --n 3 --q 2 --precision 128");
  CHECK(r.exit_code == 2);

  // missing required flags
  r = run_tool("count-close --n 3 --q 2");
  CHECK(r.exit_code == 2);
}

TEST_CASE("a perturbed count exits one with a counterexample") {
  auto r = run_tool("verify-relation --family sl --n 3 --q 2 --inject-fault");
  CHECK(r.exit_code == 1);
  CHECK(contains(r.out, "\"ok\": false"));
  CHECK(contains(r.out, "\"counterexample\""));
  CHECK(contains(r.out, "\"enumerated\": 43"));

  r = run_tool("table --q 2 --format json --inject-fault");
  CHECK(r.exit_code == 1);
  CHECK(contains(r.out, "\"relation_ok\": false"));

  r = run_tool("count-close --family sp --n 2 --q 2 --inject-fault");
  CHECK(r.exit_code == 1);
  CHECK(contains(r.out, "\"enumerated\": 31"));
}
