#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/core.h>

#include "mahlerlab/cli.hpp"
#include "mahlerlab/elliptic.hpp"
#include "mahlerlab/lfunctions.hpp"
#include "mahlerlab/mahler.hpp"

namespace mahlerlab::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Row check_row(std::string suite, std::string check, std::string input, double expected,
              double computed, double tol) {
  Row r;
  r.suite = std::move(suite);
  r.check = std::move(check);
  r.input = std::move(input);
  r.expected = expected;
  r.computed = computed;
  r.residual = std::abs(computed - expected);
  r.tol = tol;
  r.status = r.residual <= tol ? Status::Pass : Status::Fail;
  return r;
}

Row error_row(std::string suite, std::string check, std::string input, double tol, const Error& e) {
  Row r = check_row(std::move(suite), std::move(check), std::move(input), NAN, NAN, tol);
  r.status = Status::Fail;
  r.note = e.what();
  return r;
}

std::string k_input(double k) { return fmt::format("k={:.12g}", k); }

// Quadrature tolerance for a pass threshold.
double quad_tol(double threshold) {
  return std::max(mahler::kMinTol, std::min(1e-11, threshold * 1e-2));
}

struct PointResult {
  std::vector<Row> rows;
  std::vector<std::string> notes;
};

// Runs point(x) over the grid on the pool, timing each point, and appends the
// rows in grid order. A library error at a point becomes a FAIL row.
template <class F>
void run_points(Report& report, const std::string& suite, const std::string& check,
                const std::vector<double>& grid, int jobs, double tol, F point,
                std::string (*label)(double) = k_input) {
  auto results = parallel_map<PointResult>(grid.size(), jobs, [&](std::size_t i) {
    const auto start = Clock::now();
    PointResult res;
    try {
      res = point(grid[i]);
    } catch (const Error& e) {
      res.rows = {error_row(suite, check, label(grid[i]), tol, e)};
    }
    const double s = seconds_since(start);
    for (Row& r : res.rows) r.seconds = s;
    return res;
  });
  for (auto& res : results) {
    for (auto& r : res.rows) report.rows.push_back(std::move(r));
    for (auto& n : res.notes) report.notes.push_back(std::move(n));
  }
}

void require_grid(const std::vector<double>& grid, const std::string& suite, const char* domain,
                  bool (*ok)(double)) {
  for (double v : grid) {
    if (!ok(v)) throw UsageError(fmt::format("{}: {} is outside {}", suite, v, domain));
  }
}

std::vector<double> log_grid(double lo, double hi, int n) {
  return parse_grid(fmt::format("{:.17g}:{:.17g}:{}:log", lo, hi, n));
}

// Every suite takes the options and appends to the report.

constexpr double kThmFloor = 4.2;

void suite_thm_main(Report& rep, const SuiteOptions& opt) {
  const auto grid = opt.grid.value_or(std::vector<double>{4.5, 5, 6, 8, 12, 20});
  require_grid(grid, "thm-main", "[4.2, inf)", [](double k) { return k >= kThmFloor; });
  const double tol = opt.tol.value_or(1e-8);
  const double qt = quad_tol(tol);
  rep.meta["tolerances"]["thm-main"] = {{"identity", tol}, {"quadrature", qt}};
  const std::string check = "m(P_1k) = 2(m+ - m-) + log((k-4)/(k+4))/2";
  run_points(rep, "thm-main", check, grid, opt.jobs, tol, [&](double k) {
    const double f = mahler::m_p1k(k, qt);
    const auto h = mahler::half_measures_ptilde(k, qt);
    const double rhs = 2 * (h.m_plus - h.m_minus) + 0.5 * std::log((k - 4) / (k + 4));
    return PointResult{{check_row("thm-main", check, k_input(k), f, rhs, tol)}, {}};
  });
}

void suite_corollary(Report& rep, const SuiteOptions& opt) {
  const auto grid = opt.grid.value_or(std::vector<double>{7, 8, 16, 50});
  require_grid(grid, "corollary", "(2(1+sqrt(5)), inf)",
               [](double k) { return k > mahler::kRegimeBoundary; });
  const double tol = opt.tol.value_or(1e-8);
  const double tol_minus = opt.tol.value_or(1e-12);
  const double qt = quad_tol(std::min(tol, tol_minus));
  rep.meta["tolerances"]["corollary"] = {{"identity", tol}, {"m_minus", tol_minus}, {"quadrature", qt}};
  const std::string check = "m(P_1k) = 2 m(P_ac) + log((k-4)/(k+4))/2";
  run_points(rep, "corollary", check, grid, opt.jobs, tol, [&](double k) {
    const double f = mahler::m_p1k(k, qt);
    const auto h = mahler::half_measures_ptilde(k, qt);
    const double rhs = 2 * h.m_total + 0.5 * std::log((k - 4) / (k + 4));
    return PointResult{{check_row("corollary", check, k_input(k), f, rhs, tol),
                        check_row("corollary", "m-(P_ac) = 0", k_input(k), 0.0, h.m_minus, tol_minus)},
                       {}};
  });
}

void suite_ei(Report& rep, const SuiteOptions& opt) {
  const auto grid = opt.grid.value_or(log_grid(4.5, 100, 20));
  require_grid(grid, "ei", "(4, inf)", [](double k) { return k > 4; });
  const double tol = opt.tol.value_or(1e-11);
  rep.meta["tolerances"]["ei"] = {{"identity", tol}};
  const std::string check = "Pi(-4/k, 4/k) = K(4/k)/2 + k pi/(4(k+4))";
  run_points(rep, "ei", check, grid, opt.jobs, tol, [&](double k) {
    const double z = 4 / k;
    const double lhs = elliptic::ell_pi(-z, z);
    const double rhs = elliptic::ell_k(z) / 2 + k * std::numbers::pi / (4 * (k + 4));
    return PointResult{{check_row("ei", check, k_input(k), rhs, lhs, tol)}, {}};
  });
}

void suite_lsz(Report& rep, const SuiteOptions& opt) {
  const auto grid = opt.grid.value_or(std::vector<double>{1, 2, 3});
  require_grid(grid, "lsz", "(0, 4)", [](double k) { return k > 0 && k < 4; });
  const double tol_log = opt.tol.value_or(1e-8);
  const double tol_lsz = opt.tol.value_or(1e-6);
  rep.meta["tolerances"]["lsz"] = {{"log_a", tol_log}, {"lsz", tol_lsz},
                                   {"quadrature", quad_tol(std::min(tol_log, tol_lsz))}};
  run_points(rep, "lsz", "m(P_ac) = log a", grid, opt.jobs, tol_log, [&](double k) {
    const auto c = mahler::verify_lsz(k, std::min(tol_log, tol_lsz));
    const bool principal = c.matched == mahler::Labeling::Principal;
    const double combo = principal ? c.half.m_minus - 3 * c.half.m_plus
                                   : c.half.m_plus - 3 * c.half.m_minus;
    Row lsz = check_row("lsz", "m- - 3 m+ = m(P_1k)", k_input(k), c.m_p1k, combo, tol_lsz);
    lsz.note = fmt::format("{} labeling; other labeling misses by {:.3g}",
                           mahler::to_string(c.matched),
                           principal ? c.swapped_residual : c.principal_residual);
    return PointResult{{check_row("lsz", "m(P_ac) = log a", k_input(k), c.log_a, c.half.m_total, tol_log),
                        std::move(lsz)},
                       {}};
  });
  rep.notes.push_back("lsz: y+ takes the + branch of the principal square root of the discriminant");
}

std::string t_input(double t) { return fmt::format("t={:.12g}", t); }

void suite_eta(Report& rep, const SuiteOptions& opt) {
  const auto grid = opt.grid.value_or(std::vector<double>{0.5, 1, 1.5});
  require_grid(grid, "eta", "(0, inf)", [](double t) { return t > 0; });
  const double tol = opt.tol.value_or(1e-10);
  rep.meta["tolerances"]["eta"] = {{"identity", tol}};
  const std::string check = "3(x + 1/x) + y - 1/y = 5 at tau = i t";
  run_points(
      rep, "eta", check, grid, opt.jobs, tol,
      [&](double t) {
        const auto p = lfunctions::eta_param(t);
        // The residual comes from the long double evaluation.
        Row r = check_row("eta", check, t_input(t), 5.0, 3 * (p.x + 1 / p.x) + p.y - 1 / p.y, tol);
        r.residual = p.residual;
        r.status = r.residual <= tol ? Status::Pass : Status::Fail;
        r.note = fmt::format("x={:.12g} y={:.12g}", p.x, p.y);
        return PointResult{{std::move(r)}, {}};
      },
      t_input);
}

PointResult candidate_rows(const identities::IdentityCandidate& cand, const identities::IdentityTolerances& tol) {
  const std::string input = fmt::format("{} on [{:g}, {:g}]", cand.name, cand.grid_interval.lo, cand.grid_interval.hi);
  PointResult res;
  identities::IdentityReport rep;
  try {
    rep = identities::verify_identity(cand, tol);
  } catch (const Error& e) {
    res.rows.push_back(error_row("appendix", "identity", input, tol.identity, e));
    return res;
  }
  const std::string pts = fmt::format("{} points", rep.grid.size());
  auto add = [&](const char* check, double value, double t) {
    Row r = check_row("appendix", check, input, 0.0, value, t);
    r.note = pts;
    res.rows.push_back(std::move(r));
  };
  add("ode residual", rep.ode_residual_max, tol.ode);
  add("E coefficient", rep.e_coeff_residual_max, tol.e_coeff);
  add("Pi + r K = s", rep.identity_residual_max, tol.identity);
  add("integrating factor", rep.integrating_factor_residual_max, tol.integrating_factor);
  if (rep.integrating_factor_domain_errors > 0) {
    res.rows.back().status = Status::Fail;
    res.rows.back().note = fmt::format("radicand not positive at {} points", rep.integrating_factor_domain_errors);
  }
  if (rep.rhs_residual_max) add("s = printed right side", *rep.rhs_residual_max, tol.identity);

  res.notes.push_back(fmt::format("{}: anchor x0 = {:g}, r(x0) = {:.15g}, C = {:.15g}", cand.name,
                                  rep.anchor_x0, rep.anchor_r, rep.constant_C));
  for (double x : rep.singular_points) {
    res.notes.push_back(fmt::format("{}: formulas are 0/0 at x = {:g}", cand.name, x));
  }
  for (const auto& v : rep.coefficient_verdicts) {
    if (v.satisfies) {
      res.notes.push_back(fmt::format("{}: {} satisfies the identity (max |r - derived r| = {:.3g})",
                                      cand.name, v.label, v.r_deviation_max));
    } else {
      res.notes.push_back(fmt::format(
          "{}: {} does not satisfy the identity (max |r - derived r| = {:.6g}, identity residual {:.6g}, "
          "undefined at {} of the grid points)",
          cand.name, v.label, v.r_deviation_max, v.identity_residual_max, v.nonfinite_points));
    }
  }
  return res;
}

identities::IdentityTolerances identity_tolerances(const SuiteOptions& opt) {
  identities::IdentityTolerances tol;
  if (opt.tol) tol = {*opt.tol, *opt.tol, *opt.tol, *opt.tol};
  return tol;
}

void suite_appendix(Report& rep, const SuiteOptions& opt) {
  if (opt.grid) throw UsageError("appendix: candidates carry their own grids; drop --k/--k-grid");
  const auto cands = opt.candidates.value_or(identities::builtin_candidates());
  const auto tol = identity_tolerances(opt);
  rep.meta["tolerances"]["appendix"] = {{"ode", tol.ode},
                                        {"e_coefficient", tol.e_coeff},
                                        {"identity", tol.identity},
                                        {"integrating_factor", tol.integrating_factor}};
  auto results = parallel_map<PointResult>(cands.size(), opt.jobs, [&](std::size_t i) {
    const auto start = Clock::now();
    PointResult res = candidate_rows(cands[i], tol);
    const double s = seconds_since(start);
    for (Row& r : res.rows) r.seconds = s;
    return res;
  });
  for (auto& res : results) {
    for (auto& r : res.rows) rep.rows.push_back(std::move(r));
    for (auto& n : res.notes) rep.notes.push_back(std::move(n));
  }
}

void suite_jia(Report& rep, const SuiteOptions& opt) {
  if (opt.grid) throw UsageError("jia: fixed interval [-10, -1]; drop --k/--k-grid");
  const double tol = opt.tol.value_or(1e-10);
  const double tol_point = opt.tol.value_or(1e-12);
  rep.meta["tolerances"]["jia"] = {{"identity", tol}, {"endpoint", tol_point}};
  const auto start = Clock::now();
  const auto cand = identities::builtin_candidate("A.4");
  const std::string input = "x in [-10, -1]";
  std::vector<Row> rows;
  try {
    identities::IdentityTolerances it;
    if (opt.tol) it = {tol, tol, tol, tol};
    const auto r = identities::verify_identity(cand, it);
    rows.push_back(check_row("jia", "Pi + r K = s", input, 0.0, r.identity_residual_max, tol));
    rows.push_back(check_row("jia", "s = printed right side", input, 0.0, r.rhs_residual_max.value_or(NAN), tol));
    rows.push_back(check_row("jia", "left side at x = -1 is pi/3", "x=-1", std::numbers::pi / 3, r.constant_C, tol_point));
    const double rhs = cand.printed_rhs->fn(Jet2::constant(-1.0)).value;
    rows.push_back(check_row("jia", "right side at x = -1 is pi/3", "x=-1", std::numbers::pi / 3, rhs, tol_point));
  } catch (const Error& e) {
    rows.push_back(error_row("jia", "Pi + r K = s", input, tol, e));
  }
  const double s = seconds_since(start);
  for (Row& r : rows) {
    r.seconds = s;
    rep.rows.push_back(std::move(r));
  }
}

using SuiteFn = void (*)(Report&, const SuiteOptions&);

struct SuiteEntry {
  const char* name;
  SuiteFn fn;
};

constexpr SuiteEntry kSuites[] = {
    {"thm-main", suite_thm_main}, {"corollary", suite_corollary}, {"ei", suite_ei},
    {"appendix", suite_appendix}, {"jia", suite_jia},             {"lsz", suite_lsz},
    {"eta", suite_eta},
};

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : kSuites) n.emplace_back(s.name);
    n.emplace_back("all");
    return n;
  }();
  return names;
}

Report run_suite(std::string_view suite, const SuiteOptions& options) {
  Report rep;
  rep.command = "verify";
  rep.name = std::string(suite);
  rep.meta["tolerances"] = nlohmann::json::object();
  const auto start = Clock::now();
  if (suite == "all") {
    if (options.grid) throw UsageError("all: suites use their default grids; drop --k/--k-grid");
    if (options.candidates) throw UsageError("all: --candidate-file applies to the appendix suite only");
    for (const auto& s : kSuites) s.fn(rep, options);
  } else {
    const auto it = std::find_if(std::begin(kSuites), std::end(kSuites),
                                 [&](const SuiteEntry& s) { return suite == s.name; });
    if (it == std::end(kSuites)) {
      throw UsageError(fmt::format("unknown suite '{}'; expected one of thm-main, corollary, ei, "
                                   "appendix, jia, lsz, eta, all",
                                   suite));
    }
    if (options.candidates && suite != "appendix") {
      throw UsageError("--candidate-file applies to the appendix suite only");
    }
    it->fn(rep, options);
  }
  rep.seconds = seconds_since(start);
  return rep;
}

namespace {

struct TableEntry {
  const char* label;  // supported_curves() label for real k
  bool real;
  int conductor;      // imaginary rows only
  const char* r;      // imaginary rows only
};

constexpr TableEntry kTableOrder[] = {
    {"1", true, 0, ""},       {"3i", false, 15, "5"},   {"5", true, 0, ""},
    {"16", true, 0, ""},      {"i", false, 17, "2"},    {"3", true, 0, ""},
    {"2", true, 0, ""},       {"3sqrt2", true, 0, ""},  {"8", true, 0, ""},
    {"sqrt2 i", false, 24, "3/2"}, {"4i", false, 32, "2"}, {"2sqrt2", true, 0, ""},
    {"2i", false, 40, "1"},   {"12", true, 0, ""},      {"sqrt2", true, 0, ""},
    {"4sqrt2", true, 0, ""},
};

bool has_half_measure_row(const std::string& label) {
  return label == "4sqrt2" || label == "8" || label == "12" || label == "16";
}

PointResult table_rows(const TableEntry& e, const TableOptions& opt) {
  PointResult res;
  if (!e.real) {
    Row r = check_row("table", "m(P_1k) = r_k L'(E_k, 0)",
                      fmt::format("k={} N={} r={}", e.label, e.conductor, e.r), NAN, NAN, opt.tol);
    r.status = Status::Skipped;
    r.note = "imaginary k";
    res.rows.push_back(std::move(r));
    return res;
  }
  const auto& curves = lfunctions::supported_curves();
  const auto& c = *std::find_if(curves.begin(), curves.end(),
                                [&](const auto& s) { return s.label == e.label; });
  const std::string input = fmt::format("k={} N={} r={}", c.label, c.conductor, lfunctions::to_string(c.r_k));
  const std::string check = "m(P_1k) = r_k L'(E_k, 0)";
  try {
    const double m = mahler::m_p1k(c.k, 1e-12);
    const auto lv = lfunctions::lvalue_for_k(c.k, 1e-12, opt.n_max);
    const double rL = c.r_k.value() * lv.value.Lprime0;
    Row r = check_row("table", check, input, rL, m, opt.tol);
    r.residual = std::abs(m - rL) / std::abs(rL);
    r.status = r.residual <= opt.tol ? Status::Pass : Status::Fail;
    r.note = r.residual > 0 ? fmt::format("{:.1f} digits, eps={:+d}, n={}", -std::log10(r.residual),
                                          lv.value.eps, lv.value.n_used)
                            : fmt::format("exact in double, eps={:+d}, n={}", lv.value.eps, lv.value.n_used);
    res.rows.push_back(std::move(r));

    if (has_half_measure_row(c.label)) {
      const auto h = mahler::half_measures_ptilde(c.k, 1e-12);
      const double rhs = c.r_k.value() / 2 * lv.value.Lprime0 - 0.25 * std::log((c.k - 4) / (c.k + 4));
      Row total = check_row("table", "m(P_ac) = (r_k/2) L'(E_k, 0) - log((k-4)/(k+4))/4", input, rhs,
                            h.m_total, 1e-6);
      if (h.m_minus > 0) total.note = fmt::format("m- = {:.6g}; gap is 2 m-", h.m_minus);
      res.rows.push_back(std::move(total));
      res.rows.push_back(check_row("table", "m+ - m- = (r_k/2) L'(E_k, 0) - log((k-4)/(k+4))/4", input, rhs,
                                   h.m_plus - h.m_minus, 1e-6));
    }
  } catch (const Error& err) {
    res.rows.push_back(error_row("table", check, input, opt.tol, err));
  }
  return res;
}

}  // namespace

Report run_table(const TableOptions& options) {
  Report rep;
  rep.command = "table";
  rep.meta["tolerances"] = {{"relative_agreement", options.tol}, {"half_measure", 1e-6}, {"quadrature", 1e-12}};
  const auto start = Clock::now();
  const std::size_t n = std::size(kTableOrder);
  auto results = parallel_map<PointResult>(n, options.jobs, [&](std::size_t i) {
    const auto t0 = Clock::now();
    auto res = table_rows(kTableOrder[i], options);
    const double s = seconds_since(t0);
    for (Row& r : res.rows) r.seconds = s;
    return res;
  });
  for (auto& res : results) {
    for (auto& r : res.rows) rep.rows.push_back(std::move(r));
  }
  rep.notes.push_back(
      "m(P_ac) = m+ + m- equals (r_k/2) L'(E_k, 0) - log((k-4)/(k+4))/4 only where m- = 0, i.e. k > 2(1 + sqrt(5)) "
      "= 6.4721; below that (k = 4sqrt2) the difference m+ - m- is what matches");
  rep.seconds = seconds_since(start);
  return rep;
}

}  // namespace mahlerlab::cli
