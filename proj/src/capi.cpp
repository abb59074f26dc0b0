#include "mmlyap.h"

#include "mmlyap/errors.hpp"
#include "mmlyap/fixtures.hpp"
#include "mmlyap/report.hpp"
#include "mmlyap/svg.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

struct mml_config {
  mmlyap::Config cfg;
};

namespace {

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void set(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

mmlyap::NumericPolicy policy_of(const mml_policy* p) {
  mmlyap::NumericPolicy np;
  if (p) {
    np.abs = p->abs;
    np.rel = p->rel;
    np.margin = p->margin;
    np.directions = p->directions;
    np.seed = p->seed;
  }
  return np;
}

mmlyap::Vec vec_of(const double* x, size_t n) {
  if (!x && n > 0) throw mmlyap::InvalidInput("null point");
  mmlyap::Vec v(static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = x[i];
  return v;
}

// Runs f, mapping exceptions to status codes with the message in *out.
template <class F>
int guard(char** out, F&& f) {
  try {
    return f();
  } catch (const mmlyap::ParseError& e) {
    set(out, e.what());
    return MML_ERR_PARSE;
  } catch (const mmlyap::DomainError& e) {
    set(out, e.what());
    return MML_ERR_DOMAIN;
  } catch (const mmlyap::PreconditionError& e) {
    set(out, e.what());
    return MML_ERR_PRECONDITION;
  } catch (const mmlyap::CoverageError& e) {
    set(out, e.what());
    return MML_ERR_COVERAGE;
  } catch (const mmlyap::InvalidInput& e) {
    set(out, e.what());
    return MML_ERR_INVALID;
  } catch (const mmlyap::InternalError& e) {
    set(out, e.what());
    return MML_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set(out, std::string("internal: ") + e.what());
    return MML_ERR_INTERNAL;
  }
}

int finish(char** out, const mmlyap::Report& r) {
  set(out, r.text);
  return r.ok ? MML_OK : MML_FAILED;
}

int null_config(char** out) {
  set(out, "null configuration handle");
  return MML_ERR_INVALID;
}

}  // namespace

extern "C" {

const char* mml_version(void) { return MMLYAP_VERSION; }

const char* mml_status_string(int status) {
  switch (status) {
    case MML_OK: return "ok";
    case MML_FAILED: return "check failed";
    case MML_ERR_PARSE: return "parse error";
    case MML_ERR_INVALID: return "invalid input";
    case MML_ERR_DOMAIN: return "domain error";
    case MML_ERR_PRECONDITION: return "precondition violated";
    case MML_ERR_COVERAGE: return "point not covered by any region";
    case MML_ERR_INTERNAL: return "internal error";
    default: return "unknown status";
  }
}

mml_policy mml_policy_default(void) {
  const mmlyap::NumericPolicy np;
  return {np.abs, np.rel, np.margin, np.directions, np.seed};
}

void mml_string_free(char* s) { std::free(s); }

char* mml_output_header(const char* manifest, uint64_t seed, const char* prefix) {
  return dup(mmlyap::output_header(manifest ? manifest : "", seed, prefix ? prefix : "# "));
}

int mml_config_parse(const char* text, mml_config** out, char** error) {
  if (out) *out = nullptr;
  if (!text || !out) {
    set(error, "null argument");
    return MML_ERR_INVALID;
  }
  return guard(error, [&] {
    *out = new mml_config{mmlyap::parse_config(text)};
    return MML_OK;
  });
}

int mml_config_example(const char* name, double param, mml_config** out, char** error) {
  if (out) *out = nullptr;
  if (!name || !out) {
    set(error, "null argument");
    return MML_ERR_INVALID;
  }
  return guard(error, [&] {
    const std::string n = name;
    mmlyap::Config c;
    if (n == "example1") c = mmlyap::fixtures::example1();
    else if (n == "example2") c = mmlyap::fixtures::example2(param);
    else if (n == "example3") c = mmlyap::fixtures::example3();
    else throw mmlyap::InvalidInput("unknown example '" + n + "'");
    *out = new mml_config{std::move(c)};
    return MML_OK;
  });
}

void mml_config_free(mml_config* cfg) { delete cfg; }

int mml_config_dim(const mml_config* cfg) { return cfg ? cfg->cfg.system.dim() : 0; }

int mml_config_text(const mml_config* cfg, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] {
    set(out, mmlyap::to_text(cfg->cfg));
    return MML_OK;
  });
}

int mml_run_validate(const mml_config* cfg, const mml_policy* policy, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] { return finish(out, mmlyap::report_validate(cfg->cfg, policy_of(policy))); });
}

int mml_run_phi(const mml_config* cfg, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] { return finish(out, mmlyap::report_phi(cfg->cfg)); });
}

int mml_run_grad(const mml_config* cfg, const mml_policy* policy, const double* x, size_t n, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] { return finish(out, mmlyap::report_grad(cfg->cfg, vec_of(x, n), policy_of(policy))); });
}

int mml_run_lie(const mml_config* cfg, const mml_policy* policy, const double* x, size_t n, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] { return finish(out, mmlyap::report_lie(cfg->cfg, vec_of(x, n), policy_of(policy))); });
}

int mml_run_decrease(const mml_config* cfg, const mml_policy* policy, int samples, int clarke, double rate,
                     char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] {
    return finish(out, mmlyap::report_decrease(cfg->cfg, samples, clarke != 0, rate, policy_of(policy)));
  });
}

int mml_run_simulate(const mml_config* cfg, const mml_policy* policy, const double* x0, size_t n, double horizon,
                     double max_step, char** csv, char** summary) {
  if (csv) *csv = nullptr;
  if (!cfg) return null_config(summary);
  return guard(summary, [&] {
    mmlyap::SimOptions o;
    o.policy = policy_of(policy);
    o.horizon = horizon;
    if (max_step > 0) o.max_step = max_step;
    const mmlyap::Vec x = vec_of(x0, n);
    if (x.size() != cfg->cfg.system.dim()) throw mmlyap::InvalidInput("initial point has the wrong dimension");
    const mmlyap::Trajectory t = mmlyap::simulate(cfg->cfg.system, x, o);
    const mmlyap::Config& c = cfg->cfg;
    const bool with_v = c.spec && c.basis && c.basis->dim() == c.system.dim();
    set(csv, mmlyap::export_csv(t, with_v ? &*c.spec : nullptr, with_v ? &*c.basis : nullptr));
    return finish(summary, mmlyap::report_simulate(c, t));
  });
}

int mml_run_certify(const mml_config* cfg, const mml_policy* policy, int search, double budget_seconds, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] {
    mmlyap::CertifyOptions o;
    o.search = search != 0;
    if (budget_seconds > 0) o.search_options.time_budget = budget_seconds;
    return finish(out, mmlyap::report_certify(cfg->cfg, o, policy_of(policy)));
  });
}

int mml_run_decompose(const mml_config* cfg, const mml_policy* policy, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] { return finish(out, mmlyap::report_decompose(cfg->cfg, policy_of(policy))); });
}

int mml_run_reproduce(const char* name, const mml_policy* policy, char** out) {
  if (!name) {
    set(out, "null example name");
    return MML_ERR_INVALID;
  }
  return guard(out, [&] { return finish(out, mmlyap::reproduce(name, policy_of(policy))); });
}

int mml_run_svg(const mml_config* cfg, const mml_policy* policy, const double* x0s, size_t count, double horizon,
                const char* header, char** out) {
  if (!cfg) return null_config(out);
  return guard(out, [&] {
    const mmlyap::Config& c = cfg->cfg;
    std::vector<mmlyap::Trajectory> ts;
    mmlyap::SimOptions o;
    o.policy = policy_of(policy);
    o.horizon = horizon;
    for (size_t k = 0; k < count; ++k) ts.push_back(mmlyap::simulate(c.system, vec_of(x0s + 2 * k, 2), o));
    set(out, mmlyap::phase_portrait_svg(c, ts, mmlyap::SvgOptions{}, header ? header : ""));
    return MML_OK;
  });
}

}  // extern "C"
