#include "mmlyap/config.hpp"

#include "lexer.hpp"
#include "mmlyap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mmlyap {

using detail::Token;
using detail::TokenStream;

Vec Multipliers::tau_of(int mode, const Permutation& rho) const {
  auto it = tau.find({mode, rho});
  if (it != tau.end()) return it->second;
  return Vec::Zero(std::max<int>(0, static_cast<int>(rho.size()) - 1));
}

double Multipliers::beta_of(int mode, const Permutation& rho) const {
  auto it = beta.find({mode, rho});
  return it == beta.end() ? 0.0 : it->second;
}

namespace {

struct PendingMode {
  Token at;
  std::optional<Mat> A;
  std::optional<std::vector<Expr>> f;
  std::optional<SymMatrix> Q;
  Token q_at;
  std::optional<Expr> H;
  bool all = false;
};

// Splits "name123" into ("name", 123); returns false when there is no numeric suffix.
bool split_indexed(const std::string& id, const std::string& prefix, int& index) {
  if (id.size() <= prefix.size() || id.compare(0, prefix.size(), prefix) != 0) return false;
  const std::string rest = id.substr(prefix.size());
  if (rest.find_first_not_of("0123456789") != std::string::npos) return false;
  index = std::stoi(rest);
  return index >= 1;
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : ts_(detail::tokenize(text)) {}

  Config read() {
    std::string section;
    for (;;) {
      ts_.skip_newlines();
      if (ts_.at_end()) break;
      if (ts_.peek().kind == Token::Kind::Punct && ts_.peek().text == "[") {
        ts_.next();
        const Token name = ts_.expect_ident();
        ts_.expect("]");
        static const std::set<std::string> known = {"system", "signal", "basis", "structure", "multipliers"};
        if (!known.count(name.text)) ts_.fail_at(name, "unknown section '" + name.text + "'");
        section = name.text;
        end_statement();
        continue;
      }
      if (ts_.peek().kind == Token::Kind::Ident && ts_.peek().text == "let") {
        ts_.next();
        const Token name = ts_.expect_ident();
        ts_.expect("=");
        const double v = detail::parse_constant(ts_, lookup());
        if (constant(name.text)) ts_.fail_at(name, "constant '" + name.text + "' already defined");
        cfg_.constants.emplace_back(name.text, v);
        end_statement();
        continue;
      }
      if (section.empty()) ts_.fail("expected a section header such as [system]");
      if (section == "system")
        system_stmt();
      else if (section == "signal")
        signal_stmt();
      else if (section == "basis")
        basis_stmt();
      else if (section == "structure")
        structure_stmt();
      else
        multiplier_stmt();
      end_statement();
    }
    return finish();
  }

 private:
  detail::ConstantLookup lookup() {
    return [this](const std::string& id) { return constant(id); };
  }

  std::optional<double> constant(const std::string& id) const {
    for (const auto& [k, v] : cfg_.constants)
      if (k == id) return v;
    return std::nullopt;
  }

  void end_statement() {
    const Token& t = ts_.peek();
    if (t.kind == Token::Kind::Newline || t.kind == Token::Kind::End || (t.kind == Token::Kind::Punct && t.text == ";"))
      return;
    ts_.fail("expected end of statement");
  }

  int require_dim(const Token& at) {
    if (dim_ < 1) ts_.fail_at(at, "'dim' must be set before this statement");
    return dim_;
  }

  Mat square_matrix(const Token& at) {
    const int n = require_dim(at);
    Mat m = detail::parse_matrix(ts_, lookup());
    if (m.rows() != n || m.cols() != n)
      ts_.fail_at(at, "dimension mismatch: expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    return m;
  }

  SymMatrix sym_matrix(const Token& at) {
    Mat m = square_matrix(at);
    try {
      return SymMatrix(m);
    } catch (const InvalidInput& e) {
      ts_.fail_at(at, e.what());
    }
  }

  Expr expression(const Token& at) {
    const int n = require_dim(at);
    return detail::parse_expression(ts_, n, lookup());
  }

  PendingMode& mode_slot(int i, const Token& at) {
    if (i < 1 || i > 64) ts_.fail_at(at, "mode index out of range");
    if (static_cast<int>(modes_.size()) < i) modes_.resize(i);
    if (!modes_[i - 1]) {
      modes_[i - 1] = PendingMode{};
      modes_[i - 1]->at = at;
    }
    return *modes_[i - 1];
  }

  void system_stmt() {
    const Token key = ts_.expect_ident();
    if (key.text == "dim") {
      ts_.expect("=");
      const Token v = ts_.peek();
      const double d = detail::parse_constant(ts_, lookup());
      if (d != std::floor(d) || d < 1 || d > 64) ts_.fail_at(v, "dim must be a positive integer");
      if (dim_ > 0) ts_.fail_at(key, "dim already set");
      dim_ = static_cast<int>(d);
      return;
    }
    if (key.text != "mode") ts_.fail_at(key, "expected 'dim' or 'mode'");
    const Token idx = ts_.peek();
    const double d = detail::parse_constant(ts_, lookup());
    if (d != std::floor(d)) ts_.fail_at(idx, "mode index must be an integer");
    PendingMode& pm = mode_slot(static_cast<int>(d), idx);
    if (pm.A || pm.f) ts_.fail_at(idx, "mode defined twice");
    ts_.skip_newlines();
    ts_.expect("{");
    for (;;) {
      ts_.skip_newlines();
      if (ts_.accept("}")) break;
      const Token k = ts_.expect_ident();
      ts_.expect("=");
      if (k.text == "A") {
        pm.A = square_matrix(k);
      } else if (k.text == "f") {
        const int n = require_dim(k);
        ts_.expect("(");
        std::vector<Expr> f;
        do {
          while (ts_.peek().kind == Token::Kind::Newline) ts_.next();
          f.push_back(expression(k));
          while (ts_.peek().kind == Token::Kind::Newline) ts_.next();
        } while (ts_.accept(","));
        ts_.expect(")");
        if (static_cast<int>(f.size()) != n)
          ts_.fail_at(k, "dimension mismatch: vector field needs " + std::to_string(n) + " components");
        pm.f = std::move(f);
      } else if (k.text == "Q") {
        region_matrix(pm, k);
      } else if (k.text == "H") {
        region_function(pm, k);
      } else if (k.text == "region") {
        const Token v = ts_.expect_ident();
        if (v.text != "all") ts_.fail_at(v, "expected 'all'");
        pm.all = true;
      } else {
        ts_.fail_at(k, "unknown mode key '" + k.text + "' (expected A, f, Q, H or region)");
      }
      if (ts_.accept("}")) break;
      end_statement();
    }
    if (!pm.A && !pm.f) ts_.fail_at(idx, "mode needs a vector field (A or f)");
    if (pm.A && pm.f) ts_.fail_at(idx, "mode gives both A and f");
  }

  void region_matrix(PendingMode& pm, const Token& k) {
    if (pm.Q || pm.H || pm.all) ts_.fail_at(k, "region defined twice");
    pm.q_at = k;
    pm.Q = sym_matrix(k);
  }

  void region_function(PendingMode& pm, const Token& k) {
    if (pm.Q || pm.H || pm.all) ts_.fail_at(k, "region defined twice");
    pm.H = expression(k);
  }

  void signal_stmt() {
    const Token key = ts_.expect_ident();
    ts_.expect("=");
    int i = 0;
    if (split_indexed(key.text, "Q", i)) {
      region_matrix(mode_slot(i, key), key);
    } else if (split_indexed(key.text, "H", i)) {
      region_function(mode_slot(i, key), key);
    } else {
      ts_.fail_at(key, "expected Q<i> or H<i>");
    }
  }

  void basis_stmt() {
    const Token key = ts_.expect_ident();
    ts_.expect("=");
    int k = 0;
    if (split_indexed(key.text, "P", k)) {
      if (!basis_exprs_.empty()) ts_.fail_at(key, "cannot mix matrix and expression base functions");
      SymMatrix p = sym_matrix(key);
      if (negdef_margin(-p) >= 0.0) ts_.fail_at(key, key.text + " is not positive definite");
      if (static_cast<int>(basis_mats_.size()) < k) basis_mats_.resize(k);
      if (basis_mats_[k - 1]) ts_.fail_at(key, key.text + " defined twice");
      basis_mats_[k - 1] = std::move(p);
      basis_at_.push_back(key);
    } else if (split_indexed(key.text, "V", k)) {
      if (!basis_mats_.empty()) ts_.fail_at(key, "cannot mix matrix and expression base functions");
      Expr e = expression(key);
      if (static_cast<int>(basis_exprs_.size()) < k) basis_exprs_.resize(k);
      if (basis_exprs_[k - 1]) ts_.fail_at(key, key.text + " defined twice");
      basis_exprs_[k - 1] = std::move(e);
      basis_at_.push_back(key);
    } else {
      ts_.fail_at(key, "expected P<k> or V<k>");
    }
  }

  void structure_stmt() {
    const Token key = ts_.expect_ident();
    ts_.expect("=");
    int j = 0;
    if (key.text == "polarity") {
      const Token v = ts_.expect_ident();
      if (v.text == "maxmin")
        polarity_ = Polarity::MaxMin;
      else if (v.text == "minmax")
        polarity_ = Polarity::MinMax;
      else
        ts_.fail_at(v, "expected 'maxmin' or 'minmax'");
    } else if (key.text == "K") {
      const Token v = ts_.peek();
      const double d = detail::parse_constant(ts_, lookup());
      if (d != std::floor(d) || d < 1 || d > 64) ts_.fail_at(v, "K must be a positive integer");
      K_ = static_cast<int>(d);
    } else if (split_indexed(key.text, "S", j)) {
      ts_.expect("{");
      std::vector<int> fam;
      if (ts_.peek().kind == Token::Kind::Punct && ts_.peek().text == "}")
        ts_.fail_at(key, "empty set: family " + key.text + " must be nonempty");
      do {
        const Token v = ts_.peek();
        const double d = detail::parse_constant(ts_, lookup());
        if (d != std::floor(d) || d < 1) ts_.fail_at(v, "set members must be positive integers");
        fam.push_back(static_cast<int>(d));
      } while (ts_.accept(","));
      ts_.expect("}");
      std::sort(fam.begin(), fam.end());
      fam.erase(std::unique(fam.begin(), fam.end()), fam.end());
      if (static_cast<int>(families_.size()) < j) families_.resize(j);
      if (!families_[j - 1].empty()) ts_.fail_at(key, key.text + " defined twice");
      families_[j - 1] = std::move(fam);
      family_at_.push_back(key);
    } else {
      ts_.fail_at(key, "expected polarity, K or S<j>");
    }
  }

  Permutation permutation() {
    ts_.expect("(");
    Permutation p;
    do {
      const Token v = ts_.peek();
      const double d = detail::parse_constant(ts_, lookup());
      if (d != std::floor(d) || d < 1) ts_.fail_at(v, "permutation entries must be positive integers");
      p.push_back(static_cast<int>(d));
    } while (ts_.accept(","));
    ts_.expect(")");
    return p;
  }

  void multiplier_stmt() {
    const Token key = ts_.expect_ident();
    if (key.text != "tau" && key.text != "beta") ts_.fail_at(key, "expected 'tau' or 'beta'");
    const Token idx = ts_.peek();
    const double d = detail::parse_constant(ts_, lookup());
    if (d != std::floor(d) || d < 1) ts_.fail_at(idx, "mode index must be a positive integer");
    const int mode = static_cast<int>(d);
    const Token pat = ts_.peek();
    const Permutation rho = permutation();
    ts_.expect("=");
    const Token vat = ts_.peek();
    std::vector<double> vals;
    if (ts_.accept("(")) {
      do vals.push_back(detail::parse_constant(ts_, lookup()));
      while (ts_.accept(","));
      ts_.expect(")");
    } else {
      vals.push_back(detail::parse_constant(ts_, lookup()));
    }
    for (double v : vals)
      if (v < 0) ts_.fail_at(vat, "multipliers must be nonnegative");
    const auto k = std::make_pair(mode, rho);
    if (key.text == "beta") {
      if (vals.size() != 1) ts_.fail_at(vat, "beta takes a single value");
      if (cfg_.multipliers.beta.count(k)) ts_.fail_at(key, "beta given twice for this mode and ordering");
      cfg_.multipliers.beta[k] = vals[0];
    } else {
      if (cfg_.multipliers.tau.count(k)) ts_.fail_at(key, "tau given twice for this mode and ordering");
      cfg_.multipliers.tau[k] = Eigen::Map<const Vec>(vals.data(), static_cast<int>(vals.size()));
    }
    mult_at_.push_back({key, pat, vat, mode, rho, key.text == "tau"});
  }

  Config finish() {
    const Token eof = ts_.peek();
    if (dim_ < 1) ts_.fail_at(eof, "missing 'dim' in [system]");
    if (modes_.empty()) ts_.fail_at(eof, "system needs at least one mode");
    std::vector<Mode> modes;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (!modes_[i] || (!modes_[i]->A && !modes_[i]->f))
        ts_.fail_at(modes_[i] ? modes_[i]->at : eof, "mode " + std::to_string(i + 1) + " has no vector field");
      PendingMode& pm = *modes_[i];
      Mode m = pm.A ? SwitchedSystem::linear_mode(*pm.A, std::nullopt) : SwitchedSystem::expr_mode(*pm.f, dim_);
      if (pm.Q) {
        const SymMatrix& q = *pm.Q;
        if (negdef_margin(q) <= 0.0)
          ts_.fail_at(pm.q_at, "Q of mode " + std::to_string(i + 1) + " is negative semidefinite");
        m.region = Mode::Region::Cone;
        m.Q = q;
      } else if (pm.H) {
        m.region = Mode::Region::Function;
        m.H = *pm.H;
        m.grad_H = gradient(*pm.H, dim_);
      } else if (!pm.all && modes_.size() > 1) {
        ts_.fail_at(pm.at, "mode " + std::to_string(i + 1) + " needs a region (Q, H or region = all)");
      }
      modes.push_back(std::move(m));
    }
    cfg_.system = SwitchedSystem(dim_, std::move(modes));

    int K = K_;
    if (!basis_mats_.empty() || !basis_exprs_.empty()) {
      const std::size_t cnt = std::max(basis_mats_.size(), basis_exprs_.size());
      for (std::size_t k = 0; k < cnt; ++k) {
        const bool missing = basis_mats_.empty() ? !basis_exprs_[k] : !basis_mats_[k];
        if (missing) ts_.fail_at(basis_at_.front(), "base function " + std::to_string(k + 1) + " is missing");
      }
      if (!basis_mats_.empty()) {
        std::vector<SymMatrix> ps;
        for (auto& p : basis_mats_) ps.push_back(*p);
        cfg_.basis = Basis::quadratic(std::move(ps));
      } else {
        std::vector<Expr> es;
        for (auto& e : basis_exprs_) es.push_back(*e);
        cfg_.basis = Basis::expressions(std::move(es), dim_);
      }
      if (K > 0 && K != cfg_.basis->size()) ts_.fail_at(basis_at_.front(), "K differs from the number of base functions");
      K = cfg_.basis->size();
    }

    if (!families_.empty()) {
      MaxMinSpec spec;
      spec.polarity = polarity_;
      int maxidx = 0;
      for (std::size_t j = 0; j < families_.size(); ++j) {
        if (families_[j].empty())
          ts_.fail_at(family_at_.front(), "family S" + std::to_string(j + 1) + " is missing or empty");
        maxidx = std::max(maxidx, families_[j].back());
      }
      spec.K = K > 0 ? K : maxidx;
      spec.families = families_;
      if (maxidx > spec.K) ts_.fail_at(family_at_.front(), "a family references an index beyond K");
      cfg_.spec = spec;
    } else if (cfg_.basis) {
      ts_.fail_at(basis_at_.front(), "a basis needs a [structure] section");
    }

    const int M = cfg_.system.size();
    for (const MultAt& m : mult_at_) {
      if (m.mode > M) ts_.fail_at(m.key, "multiplier refers to mode " + std::to_string(m.mode) + ", which does not exist");
      if (!cfg_.spec) ts_.fail_at(m.key, "multipliers need a [structure] section");
      const int K = cfg_.spec->K;
      Permutation s = m.rho;
      std::sort(s.begin(), s.end());
      bool perm = static_cast<int>(s.size()) == K;
      for (int r = 0; perm && r < K; ++r) perm = s[r] == r + 1;
      if (!perm) ts_.fail_at(m.pat, "not a permutation of 1.." + std::to_string(K));
      if (m.is_tau && cfg_.multipliers.tau.at({m.mode, m.rho}).size() != K - 1)
        ts_.fail_at(m.vat, "tau needs K-1 = " + std::to_string(K - 1) + " values");
    }
    return std::move(cfg_);
  }

  TokenStream ts_;
  Config cfg_;
  int dim_ = 0;
  int K_ = 0;
  Polarity polarity_ = Polarity::MaxMin;
  std::vector<std::optional<PendingMode>> modes_;
  std::vector<std::optional<SymMatrix>> basis_mats_;
  std::vector<std::optional<Expr>> basis_exprs_;
  std::vector<Token> basis_at_;
  std::vector<std::vector<int>> families_;
  std::vector<Token> family_at_;
  struct MultAt {
    Token key, pat, vat;
    int mode;
    Permutation rho;
    bool is_tau;
  };
  std::vector<MultAt> mult_at_;
};

}  // namespace

Config parse_config(const std::string& text) {
  // A trailing [report] section holds free-form "key = value" lines.
  std::string body = text;
  std::vector<std::pair<std::string, std::string>> report;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  int lineno = 0;
  bool in_report = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
    if (!in_report && trimmed == "[report]") {
      body = text.substr(0, offset);
      in_report = true;
    } else if (in_report) {
      if (trimmed.empty() || trimmed[0] == '#') {
        // skip
      } else if (trimmed[0] == '[') {
        throw ParseError("[report] must be the last section", lineno, 1);
      } else {
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value' in [report]", lineno, 1);
        std::string k = trimmed.substr(0, eq), v = trimmed.substr(eq + 1);
        k.erase(k.find_last_not_of(" \t") + 1);
        v.erase(0, v.find_first_not_of(" \t"));
        report.emplace_back(k, v);
      }
    }
    offset += line.size() + 1;
  }
  ConfigReader r(body);
  Config cfg = r.read();
  cfg.report = std::move(report);
  return cfg;
}

}  // namespace mmlyap

namespace mmlyap {

std::string matrix_text(const Mat& m) {
  std::string s = "[";
  for (int i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (int j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + format_double(m(i, j));
    s += "]";
  }
  return s + "]";
}

std::string vector_text(const Vec& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + ")";
}

std::string permutation_text(const Permutation& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s + ")";
}

std::string to_text(const Config& cfg) {
  std::ostringstream os;
  const SwitchedSystem& sys = cfg.system;
  // Named constants are already folded into the numbers below.
  os << "[system]\n";
  os << "dim = " << sys.dim() << "\n";
  for (int i = 1; i <= sys.size(); ++i) {
    const Mode& m = sys.mode(i);
    os << "mode " << i << " {\n";
    if (m.A) {
      os << "  A = " << matrix_text(*m.A) << "\n";
    } else {
      os << "  f = (";
      for (std::size_t k = 0; k < m.field.size(); ++k) os << (k ? ", " : "") << m.field[k].str();
      os << ")\n";
    }
    switch (m.region) {
      case Mode::Region::Cone:
        os << "  Q = " << matrix_text(m.Q->mat()) << "\n";
        break;
      case Mode::Region::Function:
        os << "  H = " << m.H.str() << "\n";
        break;
      case Mode::Region::All:
        os << "  region = all\n";
        break;
    }
    os << "}\n";
  }
  if (cfg.basis) {
    os << "\n[basis]\n";
    for (int k = 1; k <= cfg.basis->size(); ++k) {
      if (cfg.basis->is_quadratic())
        os << "P" << k << " = " << matrix_text(cfg.basis->P(k).mat()) << "\n";
      else
        os << "V" << k << " = " << cfg.basis->expressions()[k - 1].str() << "\n";
    }
  }
  if (cfg.spec) {
    os << "\n[structure]\n";
    os << "polarity = " << (cfg.spec->polarity == Polarity::MaxMin ? "maxmin" : "minmax") << "\n";
    os << "K = " << cfg.spec->K << "\n";
    for (std::size_t j = 0; j < cfg.spec->families.size(); ++j) {
      os << "S" << j + 1 << " = {";
      for (std::size_t i = 0; i < cfg.spec->families[j].size(); ++i) os << (i ? "," : "") << cfg.spec->families[j][i];
      os << "}\n";
    }
  }
  if (!cfg.multipliers.empty()) {
    os << "\n[multipliers]\n";
    for (const auto& [k, v] : cfg.multipliers.tau)
      os << "tau " << k.first << " " << permutation_text(k.second) << " = " << vector_text(v) << "\n";
    for (const auto& [k, v] : cfg.multipliers.beta)
      os << "beta " << k.first << " " << permutation_text(k.second) << " = " << format_double(v) << "\n";
  }
  if (!cfg.report.empty()) {
    os << "\n[report]\n";
    for (const auto& [k, v] : cfg.report) os << k << " = " << v << "\n";
  }
  return os.str();
}

}  // namespace mmlyap
