#include "mahlerlab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>

#include <fmt/core.h>

#include "mahlerlab/elliptic.hpp"
#include "mahlerlab/errors.hpp"
#include "mahlerlab/quadrature.hpp"

namespace mahlerlab::identities {
namespace {

constexpr double kPi = std::numbers::pi;

struct PointJets {
  Jet2 p;
  Jet2 q;
};

PointJets jets_at(const IdentityCandidate& cand, double x) {
  const Jet2 t = Jet2::variable(x);
  return {cand.p(t), cand.q(t)};
}

template <class T>
T r_formula(const T& p, const T& dp, const T& q, const T& dq) {
  const T num = dp * q * (1.0 - q * q) + 2.0 * dq * q * q * (p - 1.0);
  const T den = 2.0 * dq * (1.0 - p) * (q * q - p);
  return num / den;
}

double checked(double v, const char* what, double x) {
  if (!std::isfinite(v)) throw SingularPointError(fmt::format("{} is singular at x = {}", what, x));
  return v;
}

double r_value(const PointJets& j, double x) {
  return checked(r_formula(j.p.value, j.p.d1, j.q.value, j.q.d1), "r", x);
}

// r and r' by lifting p, p', q, q' to first-order jets.
Jet2 r_jet(const PointJets& j, double x) {
  const Jet2 p{j.p.value, j.p.d1};
  const Jet2 dp{j.p.d1, j.p.d2};
  const Jet2 q{j.q.value, j.q.d1};
  const Jet2 dq{j.q.d1, j.q.d2};
  Jet2 r = r_formula(p, dp, q, dq);
  checked(r.value, "r", x);
  checked(r.d1, "r'", x);
  return {r.value, r.d1};
}

double f_value(const PointJets& j, double x) {
  const double p = j.p.value, dp = j.p.d1, q = j.q.value, dq = j.q.d1;
  const double num = dp * (p * p - q * q) - 2.0 * dq * q * p * (p - 1.0);
  const double den = 2.0 * p * (p - 1.0) * (q * q - p);
  return checked(num / den, "f", x);
}

Jet2 r_used(const IdentityCandidate& cand, const PointJets& j, double x) {
  if (cand.r_override) {
    const Jet2 r = (*cand.r_override)(Jet2::variable(x));
    checked(r.value, "r", x);
    return r;
  }
  return r_jet(j, x);
}

void check_regime(const PointJets& j, double x) {
  if (!(j.p.value < 1.0)) {
    throw DomainError(fmt::format("characteristic p({}) = {} is not below 1", x, j.p.value));
  }
  if (!(j.q.value >= 0.0 && j.q.value < 1.0)) {
    throw DomainError(fmt::format("modulus q({}) = {} is outside [0, 1)", x, j.q.value));
  }
}

double lhs_value(const PointJets& j, double r) {
  return elliptic::ell_pi(j.p.value, j.q.value) + r * elliptic::ell_k(j.q.value);
}

}  // namespace

double eval_r(const IdentityCandidate& cand, double x) { return r_value(jets_at(cand, x), x); }

double eval_f(const IdentityCandidate& cand, double x) { return f_value(jets_at(cand, x), x); }

double ode_residual(const IdentityCandidate& cand, double x) {
  const PointJets j = jets_at(cand, x);
  const Jet2 r = r_used(cand, j, x);
  const double f = f_value(j, x);
  const double p = j.p.value, q = j.q.value;
  return checked(r.d1 - (f + j.q.d1 / q) * r.value + j.p.d1 / (2.0 * p * (p - 1.0)),
                 "ode residual", x);
}

double e_coefficient_residual(const IdentityCandidate& cand, double x) {
  const PointJets j = jets_at(cand, x);
  const double r = r_used(cand, j, x).value;
  const double p = j.p.value, dp = j.p.d1, q = j.q.value, dq = j.q.d1;
  const double q2 = q * q;
  if (q == 0.0 || q2 == 1.0) throw SingularPointError(fmt::format("q({}) = {}", x, q));
  return checked(dp / (2.0 * (p - 1.0) * (q2 - p)) + dq * q / ((1.0 - q2) * (q2 - p)) +
                     r * dq / (q * (1.0 - q2)),
                 "E coefficient", x);
}

double integrating_factor_residual(const IdentityCandidate& cand, double x) {
  const PointJets j = jets_at(cand, x);
  const Jet2 p{j.p.value, j.p.d1};
  const Jet2 q{j.q.value, j.q.d1};
  const Jet2 radicand = (p - 1.0) * (q * q - p) / (p * q * q);
  checked(radicand.value, "integrating factor", x);
  if (!(radicand.value > 0.0)) {
    throw DomainError(fmt::format("integrating factor radicand {} at x = {}", radicand.value, x));
  }
  const Jet2 u = sqrt(radicand);
  const double f = f_value(j, x);
  return checked(u.d1 / u.value + f + j.q.d1 / j.q.value, "integrating factor residual", x);
}

double anchor_r(const IdentityCandidate& cand, double x0) {
  if (cand.r_override) return (*cand.r_override)(Jet2::constant(x0)).value;
  try {
    return eval_r(cand, x0);
  } catch (const SingularPointError&) {
  }
  const Interval& iv = cand.grid_interval;
  const double dir = x0 >= iv.hi ? -1.0 : 1.0;
  const double room = dir > 0 ? iv.hi - x0 : x0 - iv.lo;
  double h = std::min(0.05, 0.25 * room);
  if (!(h > 0)) throw SingularPointError(fmt::format("r is singular at the anchor x = {}", x0));

  constexpr int kLevels = 9;
  std::vector<double> prev, row;
  double estimate = 0.0, change = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kLevels; ++i, h *= 0.5) {
    row.assign(1, eval_r(cand, x0 + dir * h));
    double factor = 2.0;
    for (int m = 1; m <= i; ++m, factor *= 2.0) {
      row.push_back(row[m - 1] + (row[m - 1] - prev[m - 1]) / (factor - 1.0));
    }
    if (i > 0) change = std::abs(row.back() - estimate);
    estimate = row.back();
    prev = row;
  }
  if (!(change <= 1e-9 * std::max(1.0, std::abs(estimate)))) {
    throw AccuracyError(fmt::format("limit of r at x = {} did not settle", x0), estimate, change);
  }
  return estimate;
}

std::vector<double> default_grid(const IdentityCandidate& cand, int n) {
  if (n < 2) throw DomainError(fmt::format("grid needs at least 2 points, got {}", n));
  const Interval& iv = cand.grid_interval;
  const bool anchor_low = std::abs(cand.anchor - iv.lo) <= std::abs(cand.anchor - iv.hi);
  const double near = anchor_low ? iv.lo : iv.hi;
  const double far = anchor_low ? iv.hi : iv.lo;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double w = (std::pow(10.0, -2.0 * t) - 0.01) / 0.99;
    grid[static_cast<std::size_t>(i)] = far - (far - near) * w;
  }
  grid.front() = near;
  grid.back() = far;
  std::sort(grid.begin(), grid.end());
  return grid;
}

IdentityReport verify_identity(const IdentityCandidate& cand, double x0,
                               const std::vector<double>& grid, const IdentityTolerances& tol) {
  IdentityReport rep;
  rep.name = cand.name;
  rep.anchor_x0 = x0;
  rep.grid = grid;
  std::sort(rep.grid.begin(), rep.grid.end());

  std::vector<PointJets> jets;
  jets.reserve(rep.grid.size());
  for (double x : rep.grid) {
    jets.push_back(jets_at(cand, x));
    check_regime(jets.back(), x);
  }
  const PointJets j0 = jets_at(cand, x0);
  check_regime(j0, x0);
  rep.anchor_r = anchor_r(cand, x0);
  rep.constant_C = lhs_value(j0, rep.anchor_r);

  // int_{x0}^{x} f, accumulated outward from the anchor.
  const quad::Integrand f = [&cand](double x) { return eval_f(cand, x); };
  const auto segment = [&f](double a, double b) {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    return sign * quad::gauss_kronrod(f, std::min(a, b), std::max(a, b), 1e-14).value;
  };
  std::vector<double> F(rep.grid.size());
  const auto split = std::lower_bound(rep.grid.begin(), rep.grid.end(), x0) - rep.grid.begin();
  double acc = 0.0, from = x0;
  for (auto i = split; i < static_cast<std::ptrdiff_t>(rep.grid.size()); ++i) {
    acc += segment(from, rep.grid[i]);
    from = rep.grid[i];
    F[i] = acc;
  }
  acc = 0.0;
  from = x0;
  for (auto i = split - 1; i >= 0; --i) {
    acc += segment(from, rep.grid[i]);
    from = rep.grid[i];
    F[i] = acc;
  }

  rep.coefficient_verdicts.resize(cand.printed_r.size());
  for (std::size_t c = 0; c < cand.printed_r.size(); ++c) {
    rep.coefficient_verdicts[c].label = cand.printed_r[c].label;
  }
  if (cand.printed_rhs) rep.rhs_residual_max = 0.0;

  const auto track = [](double& max, double v) { max = std::max(max, std::abs(v)); };
  for (std::size_t i = 0; i < rep.grid.size(); ++i) {
    const double x = rep.grid[i];
    const PointJets& j = jets[i];
    bool singular = false;
    double r = rep.anchor_r;
    if (x != x0) {
      r = cand.r_override ? (*cand.r_override)(Jet2::variable(x)).value : r_value(j, x);
    }
    const double lhs = lhs_value(j, r);
    const double s = rep.constant_C * std::exp(F[i]);
    track(rep.identity_residual_max, lhs - s);

    try {
      track(rep.ode_residual_max, ode_residual(cand, x));
      track(rep.e_coeff_residual_max, e_coefficient_residual(cand, x));
    } catch (const SingularPointError&) {
      singular = true;
    }
    try {
      track(rep.integrating_factor_residual_max, integrating_factor_residual(cand, x));
    } catch (const SingularPointError&) {
      singular = true;
    } catch (const DomainError&) {
      ++rep.integrating_factor_domain_errors;
    }
    if (singular) rep.singular_points.push_back(x);

    double rhs = s;
    if (cand.printed_rhs) {
      rhs = cand.printed_rhs->fn(Jet2::constant(x)).value;
      track(*rep.rhs_residual_max, s - rhs);
    }
    for (std::size_t c = 0; c < cand.printed_r.size(); ++c) {
      CoefficientVerdict& v = rep.coefficient_verdicts[c];
      const double rp = cand.printed_r[c].fn(Jet2::constant(x)).value;
      if (!std::isfinite(rp)) {
        ++v.nonfinite_points;
        continue;
      }
      track(v.r_deviation_max, rp - r);
      track(v.identity_residual_max, lhs_value(j, rp) - rhs);
    }
  }

  for (CoefficientVerdict& v : rep.coefficient_verdicts) {
    v.satisfies = v.nonfinite_points == 0 && v.identity_residual_max <= tol.identity;
  }
  rep.pass = rep.ode_residual_max <= tol.ode && rep.e_coeff_residual_max <= tol.e_coeff &&
             rep.identity_residual_max <= tol.identity &&
             rep.integrating_factor_residual_max <= tol.integrating_factor &&
             (!rep.rhs_residual_max || *rep.rhs_residual_max <= tol.identity);
  return rep;
}

IdentityReport verify_identity(const IdentityCandidate& cand, const IdentityTolerances& tol) {
  return verify_identity(cand, cand.anchor, default_grid(cand), tol);
}

std::vector<IdentityCandidate> builtin_candidates() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<IdentityCandidate> out;

  IdentityCandidate a3;
  a3.name = "A.3";
  a3.p = [](const Jet2& x) { return -x; };
  a3.q = [](const Jet2& x) { return x; };
  a3.domain = {0.0, 1.0};
  a3.grid_interval = {0.0, 0.99};
  a3.anchor = 0.0;
  a3.printed_r = {{"r = -1/2", [](const Jet2&) { return Jet2::constant(-0.5); }}};
  a3.printed_rhs = NamedFunction{"pi/(4(x+1))", [](const Jet2& x) { return kPi / (4.0 * (x + 1.0)); }};
  out.push_back(std::move(a3));

  const auto a4_r = [](const Jet2& x) { return -(1.0 + 3.0 * x) / (6.0 * x); };

  IdentityCandidate a4;
  a4.name = "A.4";
  a4.p = [](const Jet2& x) { return (1.0 + x) * (1.0 - 3.0 * x) / ((1.0 - x) * (1.0 + 3.0 * x)); };
  a4.q = [](const Jet2& x) {
    return sqrt(pow(1.0 + x, 3) * (1.0 - 3.0 * x) / (pow(1.0 - x, 3) * (1.0 + 3.0 * x)));
  };
  a4.domain = {-inf, -1.0};
  a4.grid_interval = {-10.0, -1.0};
  a4.anchor = -1.0;
  a4.printed_r = {{"r = -(1+3x)/(6x)", a4_r}};
  a4.printed_rhs = NamedFunction{"-(pi/12) sqrt((1+3x)(x-1)^3)/x", [](const Jet2& x) {
                                   return -kPi / 12.0 * sqrt((1.0 + 3.0 * x) * pow(x - 1.0, 3)) / x;
                                 }};
  out.push_back(std::move(a4));

  IdentityCandidate a5;
  a5.name = "A.5";
  a5.p = [](const Jet2& x) { return -x * x / (1.0 + 2.0 * x); };
  a5.q = [](const Jet2& x) { return sqrt(pow(x, 3) * (2.0 + x) / (1.0 + 2.0 * x)); };
  a5.domain = {0.0, 1.0};
  a5.grid_interval = {0.0, 0.99};
  a5.anchor = 0.0;
  a5.printed_r = {
      {"defined r = -(2+x)(1+2x)/(3(1+x)^2)",
       [](const Jet2& x) { return -(2.0 + x) * (1.0 + 2.0 * x) / (3.0 * pow(1.0 + x, 2)); }},
      {"displayed coefficient -(1+3x)/(6x)", a4_r},
  };
  a5.printed_rhs = NamedFunction{"(pi/6) sqrt(1+2x)/(1+x)^2", [](const Jet2& x) {
                                   return kPi / 6.0 * sqrt(1.0 + 2.0 * x) / pow(1.0 + x, 2);
                                 }};
  out.push_back(std::move(a5));

  IdentityCandidate a6;
  a6.name = "A.6";
  a6.p = [](const Jet2& x) {
    const Jet2 w = sqrt(x * x + 1.0);
    return x * (w + 1.0) * (w - x);
  };
  a6.q = [](const Jet2& x) { return x * x; };
  a6.domain = {0.0, 1.0};
  a6.grid_interval = {0.0, 0.95};
  a6.anchor = 0.0;
  a6.printed_r = {{"r = (1-x-2sqrt(1+x^2))/(4sqrt(1+x^2))", [](const Jet2& x) {
                     const Jet2 w = sqrt(1.0 + x * x);
                     return (1.0 - x - 2.0 * w) / (4.0 * w);
                   }}};
  a6.printed_rhs = NamedFunction{"3pi/(8(1-x)sqrt(1+x^2))", [](const Jet2& x) {
                                   return 3.0 * kPi / (8.0 * (1.0 - x) * sqrt(1.0 + x * x));
                                 }};
  out.push_back(std::move(a6));
  return out;
}

IdentityCandidate builtin_candidate(std::string_view name) {
  for (IdentityCandidate& c : builtin_candidates()) {
    if (c.name == name) return std::move(c);
  }
  throw DomainError(fmt::format("unknown built-in candidate '{}'", name));
}

double ei_residual(double k) {
  if (!(k > 4.0)) throw DomainError(fmt::format("ei identity needs k > 4, got {}", k));
  const IdentityCandidate a3 = builtin_candidate("A.3");
  const double x = 4.0 / k;
  const PointJets j = jets_at(a3, x);
  return std::abs(lhs_value(j, eval_r(a3, x)) - k * kPi / (4.0 * (k + 4.0)));
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_bound(const std::string& tok, int line) {
  if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(fmt::format("line {}: bad number '{}'", line, tok));
}

Interval parse_interval(const std::string& value, int line) {
  std::istringstream in(value);
  std::string lo, hi, extra;
  if (!(in >> lo >> hi) || (in >> extra)) {
    throw ParseError(fmt::format("line {}: expected two endpoints, got '{}'", line, value));
  }
  Interval iv{parse_bound(lo, line), parse_bound(hi, line)};
  if (!(iv.lo < iv.hi)) throw ParseError(fmt::format("line {}: empty interval '{}'", line, value));
  return iv;
}

struct Block {
  int first_line = 0;
  std::optional<std::string> name, p, q;
  std::optional<Interval> domain, interval;
  std::optional<double> anchor;
  std::vector<std::string> r;
  std::optional<std::string> rhs;

  bool empty() const { return !name && !p && !q && !domain && !interval && !anchor && r.empty() && !rhs; }

  JetFunction compile(const std::string& src, const char* key) const {
    try {
      return compile_expression(src);
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("candidate at line {}: {}: {}", first_line, key, e.what()));
    }
  }

  IdentityCandidate finish() const {
    const auto need = [this](bool ok, const char* key) {
      if (!ok) throw ParseError(fmt::format("candidate at line {}: missing '{}'", first_line, key));
    };
    need(name.has_value(), "name");
    need(p.has_value(), "p");
    need(q.has_value(), "q");
    need(domain.has_value(), "domain");
    IdentityCandidate c;
    c.name = *name;
    c.p = compile(*p, "p");
    c.q = compile(*q, "q");
    c.domain = *domain;
    if (interval) {
      c.grid_interval = *interval;
    } else if (std::isfinite(domain->lo) && std::isfinite(domain->hi)) {
      c.grid_interval = *domain;
    } else {
      throw ParseError(fmt::format("candidate at line {}: unbounded domain needs 'interval'", first_line));
    }
    if (c.grid_interval.lo < c.domain.lo || c.grid_interval.hi > c.domain.hi) {
      throw ParseError(fmt::format("candidate at line {}: interval outside domain", first_line));
    }
    c.anchor = anchor.value_or(c.grid_interval.lo);
    for (const std::string& src : r) c.printed_r.push_back({src, compile(src, "r")});
    if (rhs) c.printed_rhs = NamedFunction{*rhs, compile(*rhs, "rhs")};
    return c;
  }
};

}  // namespace

std::vector<IdentityCandidate> parse_candidates(std::istream& in) {
  std::vector<IdentityCandidate> out;
  Block block;
  std::string raw;
  int line = 0;
  const auto flush = [&] {
    if (!block.empty()) out.push_back(block.finish());
    block = Block{};
  };
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (text.empty() || text == "---") {
      flush();
      continue;
    }
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ParseError(fmt::format("line {}: expected 'key: value'", line));
    const std::string key = trim(std::string_view(text).substr(0, colon));
    const std::string value = trim(std::string_view(text).substr(colon + 1));
    if (value.empty()) throw ParseError(fmt::format("line {}: empty value for '{}'", line, key));
    if (block.empty()) block.first_line = line;
    const auto once = [&](auto& slot, auto v) {
      if (slot) throw ParseError(fmt::format("line {}: duplicate '{}'", line, key));
      slot = std::move(v);
    };
    if (key == "name") {
      once(block.name, value);
    } else if (key == "p") {
      once(block.p, value);
    } else if (key == "q") {
      once(block.q, value);
    } else if (key == "domain") {
      once(block.domain, parse_interval(value, line));
    } else if (key == "interval") {
      once(block.interval, parse_interval(value, line));
    } else if (key == "anchor") {
      once(block.anchor, parse_bound(value, line));
    } else if (key == "r") {
      block.r.push_back(value);
    } else if (key == "rhs") {
      once(block.rhs, value);
    } else {
      throw ParseError(fmt::format("line {}: unknown key '{}'", line, key));
    }
  }
  flush();
  if (out.empty()) throw ParseError("no candidates found");
  return out;
}

std::vector<IdentityCandidate> load_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open candidate file '{}'", path));
  return parse_candidates(in);
}

}  // namespace mahlerlab::identities
