#include <catch2/catch_amalgamated.hpp>

#include "mmlyap.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct Owned {
  char* p = nullptr;
  ~Owned() { mml_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Handle {
  mml_config* p = nullptr;
  ~Handle() { mml_config_free(p); }
};

struct Exec {
  std::string out;
  int code = -1;
};

// Runs the CLI with stderr discarded; returns stdout and the exit status.
Exec cli(const std::string& args) {
  const std::string cmd = std::string(MMLYAP_CLI_PATH) + " " + args + " 2>/dev/null";
  Exec r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string cfg(const char* name) { return std::string(MMLYAP_CONFIG_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/mmlyap_test_" + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("version and status strings", "[capi]") {
  CHECK(std::string(mml_version()) == "1.0.0");
  CHECK(std::string(mml_status_string(MML_OK)) == "ok");
  CHECK(std::string(mml_status_string(MML_ERR_PARSE)) == "parse error");
  CHECK(std::string(mml_status_string(99)) == "unknown status");
}

TEST_CASE("parse errors come back as status codes", "[capi]") {
  Handle h;
  Owned err;
  CHECK(mml_config_parse("[system]\ndim = x\n", &h.p, &err.p) == MML_ERR_PARSE);
  CHECK(h.p == nullptr);
  CHECK(err.str().rfind("2:", 0) == 0);
  CHECK(mml_config_parse(nullptr, &h.p, nullptr) == MML_ERR_INVALID);
}

TEST_CASE("bundled configurations run through the C API", "[capi]") {
  Handle h;
  Owned err;
  REQUIRE(mml_config_example("example1", 0.0, &h.p, &err.p) == MML_OK);
  CHECK(mml_config_dim(h.p) == 2);
  const mml_policy pol = mml_policy_default();

  Owned phi;
  CHECK(mml_run_phi(h.p, &phi.p) == MML_OK);
  CHECK(phi.str().find("(3,3,3,3,1,2)") != std::string::npos);

  Owned cert;
  CHECK(mml_run_certify(h.p, &pol, 0, 0.0, &cert.p) == MML_OK);
  CHECK(cert.str().find("verdict = GAS-certified") != std::string::npos);

  const double x[2] = {0.3826834323650898, -0.9238795325112866};
  Owned lie;
  CHECK(mml_run_lie(h.p, &pol, x, 2, &lie.p) == MML_OK);
  CHECK(lie.str().find("lie = empty") != std::string::npos);

  Owned bad;
  CHECK(mml_run_grad(h.p, &pol, x, 3, &bad.p) == MML_ERR_INVALID);

  Owned csv, summary;
  const double z0[2] = {-1, 1};
  CHECK(mml_run_simulate(h.p, &pol, z0, 2, 1.0, 0.0, &csv.p, &summary.p) == MML_OK);
  CHECK(csv.str().rfind("t,x1,x2,regime,lambda,V\n", 0) == 0);

  Owned text;
  CHECK(mml_config_text(h.p, &text.p) == MML_OK);
  Handle back;
  CHECK(mml_config_parse(text.p, &back.p, nullptr) == MML_OK);

  Handle none;
  CHECK(mml_config_example("nope", 0.0, &none.p, &err.p) == MML_ERR_INVALID);
  Owned nul;
  CHECK(mml_run_phi(nullptr, &nul.p) == MML_ERR_INVALID);
}

TEST_CASE("precondition and reproduction codes", "[capi]") {
  Handle h;
  REQUIRE(mml_config_example("example2", 10.0, &h.p, nullptr) == MML_OK);
  const mml_policy pol = mml_policy_default();
  Owned out;
  CHECK(mml_run_certify(h.p, &pol, 0, 0.0, &out.p) == MML_ERR_PRECONDITION);
  Owned rep;
  CHECK(mml_run_reproduce("example3", &pol, &rep.p) == MML_OK);
  CHECK(rep.str().find("verdict = GAS-certified") != std::string::npos);
}

TEST_CASE("command line exit codes", "[cli]") {
  const Exec r1 = cli("reproduce example1");
  CHECK(r1.code == 0);
  CHECK(r1.out.find("verdict = GAS-certified") != std::string::npos);
  CHECK(cli("certify " + cfg("example1.cfg")).code == 0);
  CHECK(cli("decrease " + cfg("example1.cfg") + " --samples 100 --clarke").code == 1);
  CHECK(cli("decrease " + cfg("example1.cfg") + " --samples 100").code == 0);

  const std::string unstable =
      write_temp("unstable.cfg", "[system]\ndim = 1\nmode 1 {\n  A = [[1]]\n}\n[basis]\nP1 = [[1]]\n[structure]\nK = 1\nS1 = {1}\n");
  CHECK(cli("certify " + unstable + " --search --budget 2").code == 1);

  const std::string broken = write_temp("broken.cfg", "[system]\ndim = 2\nmode 1 {\n  A = [[1, 0], [0 1]]\n}\n");
  CHECK(cli("validate " + broken).code == 2);
  CHECK(cli("validate /nonexistent.cfg").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("grad " + cfg("example1.cfg")).code == 2);
}

TEST_CASE("command line outputs are deterministic and carry a header", "[cli][property]") {
  const std::vector<std::string> runs = {
      "phi " + cfg("example1.cfg"),
      "grad " + cfg("example1.cfg") + " --at 0.3,-0.9",
      "lie " + cfg("example2.cfg") + " --at 1,1",
      "decrease " + cfg("example3.cfg") + " --samples 200 --seed 7",
      "simulate " + cfg("example1.cfg") + " --from -1,1 --horizon 3",
      "simulate " + cfg("example2.cfg") + " --from 1,1 --horizon 2",
      "certify " + cfg("example3.cfg"),
      "decompose " + cfg("example1.cfg"),
      "validate " + cfg("example2.cfg"),
      "reproduce example2",
  };
  for (const auto& args : runs) {
    const Exec a = cli(args);
    const Exec b = cli(args);
    INFO(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("# mmlyap 1.0.0 manifest=", 0) == 0);
  }
  // The seed is part of the header and the manifest covers the options.
  const Exec s1 = cli("decrease " + cfg("example3.cfg") + " --samples 50 --seed 1");
  const Exec s2 = cli("decrease " + cfg("example3.cfg") + " --samples 50 --seed 2");
  CHECK(s1.out.find("seed=1\n") != std::string::npos);
  CHECK(s2.out.find("seed=2\n") != std::string::npos);

  const std::string svg = "/tmp/mmlyap_test_portrait.svg";
  REQUIRE(cli("svg " + cfg("example1.cfg") + " --from -1,1 --horizon 4 -o " + svg).code == 0);
  std::ifstream in(svg);
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("<!-- mmlyap 1.0.0 manifest=", 0) == 0);
}
