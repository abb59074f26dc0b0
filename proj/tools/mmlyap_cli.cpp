// Command-line front end over the C API.

#include "mmlyap.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kInternal = 3 };

int exit_of(int status) {
  switch (status) {
    case MML_OK: return kOk;
    case MML_FAILED: return kFailed;
    case MML_ERR_INTERNAL: return kInternal;
    default: return kUsage;
  }
}

struct CStr {
  char* p = nullptr;
  ~CStr() { mml_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct ConfigHandle {
  mml_config* p = nullptr;
  ~ConfigHandle() { mml_config_free(p); }
};

struct Run {
  std::string subcommand;
  std::string input;
  std::string output;
  std::vector<double> at;
  int samples = 2000;
  bool clarke = false;
  double rate = 0.0;
  double horizon = 10.0;
  double max_step = 0.0;
  bool search = false;
  double budget = 60.0;
  std::string example;
  mml_policy policy = mml_policy_default();
};

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  text = os.str();
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", v[i]);
    s += buf;
  }
  return s;
}

// Canonical description of everything that determines the output.
std::string manifest(const Run& r, const std::string& config_text) {
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof buf, "abs=%.17g rel=%.17g margin=%.17g directions=%d", r.policy.abs, r.policy.rel,
                r.policy.margin, r.policy.directions);
  os << "subcommand=" << r.subcommand << "\npolicy " << buf << "\n";
  if (r.subcommand == "grad" || r.subcommand == "lie") os << "at=" << join(r.at) << "\n";
  if (r.subcommand == "decrease")
    os << "samples=" << r.samples << " clarke=" << r.clarke << " rate=" << join({r.rate}) << "\n";
  if (r.subcommand == "simulate" || r.subcommand == "svg")
    os << "from=" << join(r.at) << " horizon=" << join({r.horizon}) << " max_step=" << join({r.max_step}) << "\n";
  if (r.subcommand == "certify") os << "search=" << r.search << " budget=" << join({r.budget}) << "\n";
  if (r.subcommand == "reproduce") os << "example=" << r.example << "\n";
  os << config_text;
  return os.str();
}

int emit(const Run& r, const std::string& header, const std::string& body) {
  const std::string text = header.empty() ? body : header + "\n" + body;
  if (r.output.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return kOk;
  }
  std::ofstream out(r.output, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << r.output << "\n";
    return kUsage;
  }
  out << text;
  return kOk;
}

int execute(const Run& r) {
  std::string config_text;
  ConfigHandle cfg;
  if (r.subcommand != "reproduce") {
    if (!read_file(r.input, config_text)) {
      std::cerr << "error: cannot read " << r.input << "\n";
      return kUsage;
    }
    CStr err;
    const int st = mml_config_parse(config_text.c_str(), &cfg.p, &err.p);
    if (st != MML_OK) {
      std::cerr << r.input << ":" << err.str() << "\n";
      return exit_of(st);
    }
  }

  const std::string m = manifest(r, config_text);
  const bool csv_like = r.subcommand == "simulate";
  const bool svg = r.subcommand == "svg";
  CStr header;
  header.p = mml_output_header(m.c_str(), r.policy.seed, svg ? "" : "# ");
  const mml_policy* pol = &r.policy;

  CStr out;
  int st = MML_OK;
  if (r.subcommand == "validate") st = mml_run_validate(cfg.p, pol, &out.p);
  else if (r.subcommand == "phi") st = mml_run_phi(cfg.p, &out.p);
  else if (r.subcommand == "grad") st = mml_run_grad(cfg.p, pol, r.at.data(), r.at.size(), &out.p);
  else if (r.subcommand == "lie") st = mml_run_lie(cfg.p, pol, r.at.data(), r.at.size(), &out.p);
  else if (r.subcommand == "decrease") st = mml_run_decrease(cfg.p, pol, r.samples, r.clarke, r.rate, &out.p);
  else if (r.subcommand == "certify") st = mml_run_certify(cfg.p, pol, r.search, r.budget, &out.p);
  else if (r.subcommand == "decompose") st = mml_run_decompose(cfg.p, pol, &out.p);
  else if (r.subcommand == "reproduce") st = mml_run_reproduce(r.example.c_str(), pol, &out.p);
  else if (svg) {
    if (r.at.size() % 2 != 0) {
      std::cerr << "error: --from needs pairs of coordinates\n";
      return kUsage;
    }
    st = mml_run_svg(cfg.p, pol, r.at.data(), r.at.size() / 2, r.horizon, header.str().c_str(), &out.p);
    // The SVG carries the header as its leading comment.
    if (st == MML_OK) return emit(r, "", out.str());
  } else if (csv_like) {
    CStr summary;
    st = mml_run_simulate(cfg.p, pol, r.at.data(), r.at.size(), r.horizon, r.max_step, &out.p, &summary.p);
    if (st != MML_OK && st != MML_FAILED) {
      std::cerr << "error: " << summary.str() << "\n";
      return exit_of(st);
    }
    std::cerr << summary.str();
    const int e = emit(r, header.str(), out.str());
    return e != kOk ? e : exit_of(st);
  }

  if (st != MML_OK && st != MML_FAILED) {
    std::cerr << "error: " << mml_status_string(st) << ": " << out.str() << "\n";
    return exit_of(st);
  }
  const int e = emit(r, header.str(), out.str());
  return e != kOk ? e : exit_of(st);
}

}  // namespace

int main(int argc, char** argv) {
  Run r;
  CLI::App app{"Verify Lyapunov certificates for state-dependent switched systems."};
  app.set_version_flag("--version", std::string(mml_version()));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", r.policy.seed, "seed for sampled checks")->capture_default_str();
  app.add_option("--abs", r.policy.abs, "absolute tolerance")->capture_default_str();
  app.add_option("--rel", r.policy.rel, "relative tolerance")->capture_default_str();
  app.add_option("--margin", r.policy.margin, "strict margin for sign verdicts")->capture_default_str();
  app.add_option("--directions", r.policy.directions, "perturbation directions per radius")->capture_default_str();
  app.add_option("-o,--output", r.output, "write output to a file instead of stdout");

  auto with_config = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("config", r.input, "configuration file")->required();
    s->callback([&r, name] { r.subcommand = name; });
    return s;
  };
  auto point = [&](CLI::App* s, const char* flag, const char* help) {
    s->add_option(flag, r.at, help)->required()->delimiter(',');
  };

  with_config("validate", "check the configuration and region coverage");
  with_config("phi", "print the permutation-to-family table");
  point(with_config("grad", "Clarke gradient of V at a point"), "--at", "point, comma separated");
  point(with_config("lie", "Lie set and Clarke derivative at a point"), "--at", "point, comma separated");

  CLI::App* dec = with_config("decrease", "sampled decrease check of V");
  dec->add_option("--samples", r.samples, "sample count")->capture_default_str();
  dec->add_flag("--clarke", r.clarke, "use the Clarke derivative instead of the Lie set");
  dec->add_option("--rate", r.rate, "require decrease below -rate |x|^2")->capture_default_str();

  CLI::App* sim = with_config("simulate", "Filippov simulation; CSV on stdout, summary on stderr");
  point(sim, "--from", "initial point, comma separated");
  sim->add_option("--horizon", r.horizon, "final time")->capture_default_str();
  sim->add_option("--max-step", r.max_step, "integrator step cap");

  CLI::App* cert = with_config("certify", "check or search for a max-min Lyapunov certificate");
  cert->add_flag("--search", r.search, "search for P and multipliers");
  cert->add_option("--budget", r.budget, "search time budget in seconds")->capture_default_str();

  with_config("decompose", "split each region matrix into two conic generators");

  CLI::App* svg = with_config("svg", "planar phase portrait with level sets of V");
  point(svg, "--from", "initial points x1,y1,x2,y2,...");
  svg->add_option("--horizon", r.horizon, "final time")->capture_default_str();

  CLI::App* rep = app.add_subcommand("reproduce", "run a bundled example");
  rep->add_option("example", r.example, "example1, example2 or example3")
      ->required()
      ->check(CLI::IsMember({"example1", "example2", "example3"}));
  rep->callback([&r] { r.subcommand = "reproduce"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  try {
    return execute(r);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
