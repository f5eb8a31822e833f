#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "mahlerlab/cli.hpp"
#include "mahlerlab/elliptic.hpp"
#include "mahlerlab/lfunctions.hpp"
#include "mahlerlab/mahler.hpp"

#ifndef MAHLERLAB_VERSION
#define MAHLERLAB_VERSION "unknown"
#endif

namespace mahlerlab::cli {
namespace {

struct Args {
  std::string format = "text";
  int jobs = 1;
  bool timings = false;

  std::vector<std::string> k;
  std::string k_grid;
  std::optional<double> tol;
  int n_max = 0;
  std::string candidate_file;
  std::string an_csv;
  bool oracle = false;

  std::vector<std::string> z;
  std::string n;

  std::string suite;
  std::string quantity;
};

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  return Format::Text;
}

std::optional<std::vector<double>> grid_from(const Args& a) {
  if (!a.k_grid.empty()) return parse_grid(a.k_grid);
  if (a.k.empty()) return std::nullopt;
  std::vector<double> v;
  for (const auto& s : a.k) v.push_back(parse_scalar(s));
  return v;
}

std::vector<double> require_points(const Args& a, const char* cmd) {
  auto g = grid_from(a);
  if (!g) throw UsageError(fmt::format("{}: give --k or --k-grid", cmd));
  return *g;
}

nlohmann::json base_meta() { return {{"version", MAHLERLAB_VERSION}}; }

using Clock = std::chrono::steady_clock;

// Grid rows for mahler and sweep; a failing point yields NaN cells, a note
// and exit code 1.
struct GridRun {
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
  std::vector<double> seconds;
  bool failed = false;
};

template <class F>
GridRun run_grid(const std::vector<double>& ks, int jobs, std::size_t width, F point) {
  struct Out {
    std::vector<Cell> cells;
    std::string error;
    double seconds = 0.0;
  };
  auto outs = parallel_map<Out>(ks.size(), jobs, [&](std::size_t i) {
    const auto start = Clock::now();
    Out o;
    try {
      o.cells = point(ks[i]);
    } catch (const Error& e) {
      o.cells.assign(width, Cell{NAN});
      o.cells[0] = ks[i];
      o.error = fmt::format("k={:.12g}: {}", ks[i], e.what());
    }
    o.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return o;
  });
  GridRun run;
  for (auto& o : outs) {
    run.rows.push_back(std::move(o.cells));
    run.seconds.push_back(o.seconds);
    if (!o.error.empty()) {
      run.notes.push_back(std::move(o.error));
      run.failed = true;
    }
  }
  return run;
}

void attach_timings(DataTable& t, const GridRun& run, bool timings) {
  if (!timings) return;
  t.columns.push_back("seconds");
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].emplace_back(run.seconds[i]);
}

int cmd_ell(const Args& a, const OutputOptions& out_opt, std::ostream& out) {
  if (a.z.empty()) throw UsageError("ell: give --z");
  std::vector<double> zs;
  for (const auto& s : a.z) {
    const double z = parse_scalar(s);
    if (!(z >= 0 && z < 1)) throw UsageError(fmt::format("ell: modulus {} outside [0, 1)", z));
    zs.push_back(z);
  }
  std::optional<double> n;
  if (!a.n.empty()) {
    n = parse_scalar(a.n);
    if (!(*n < 1)) throw UsageError(fmt::format("ell: characteristic {} must be below 1", *n));
  }
  DataTable t;
  t.command = "ell";
  t.meta = base_meta();
  t.columns = {"z", "K", "E"};
  if (n) t.columns.insert(t.columns.end(), {"n", "Pi"});
  for (double z : zs) {
    std::vector<Cell> row{z, elliptic::ell_k(z), elliptic::ell_e(z)};
    if (n) {
      row.emplace_back(*n);
      row.emplace_back(elliptic::ell_pi(*n, z));
    }
    t.rows.push_back(std::move(row));
  }
  write_table(out, t, out_opt.format);
  return kExitPass;
}

int cmd_mahler(const Args& a, const OutputOptions& out_opt, std::ostream& out) {
  const auto ks = require_points(a, "mahler");
  for (double k : ks) {
    if (!(k > 0) || k == 4) throw UsageError(fmt::format("mahler: k = {} must be positive and not 4", k));
  }
  const double tol = a.tol.value_or(mahler::kDefaultMeasureTol);
  DataTable t;
  t.command = "mahler";
  t.meta = base_meta();
  t.meta["tolerances"] = {{"quadrature", tol}};
  t.columns = {"k", "regime", "m_p1k", "m_plus", "m_minus", "m_total"};
  if (a.oracle) {
    t.columns.push_back("m_2d");
    t.meta["tolerances"]["oracle"] = mahler::kDefaultOracleTol;
  }
  auto run = run_grid(ks, a.jobs, t.columns.size(), [&](double k) {
    const auto fp = mahler::params_from_k(k);
    const auto h = k > 4 ? mahler::half_measures_ptilde(k, tol) : mahler::half_measures_pac_small_k(k, tol);
    std::vector<Cell> row{k, std::string(mahler::to_string(fp.regime)), mahler::m_p1k(k, tol),
                          h.m_plus, h.m_minus, h.m_total};
    if (a.oracle) {
      const auto poly = k > 4 ? mahler::LaurentPoly2::ptilde(k) : mahler::LaurentPoly2::pac(fp.a, fp.c);
      row.emplace_back(mahler::m_generic_2d(poly));
    }
    return row;
  });
  t.rows = std::move(run.rows);
  t.notes = run.notes;
  attach_timings(t, run, out_opt.timings);
  write_table(out, t, out_opt.format);
  return run.failed ? kExitFail : kExitPass;
}

int cmd_verify(const Args& a, const OutputOptions& out_opt, std::ostream& out) {
  SuiteOptions opt;
  opt.grid = grid_from(a);
  opt.tol = a.tol;
  opt.jobs = a.jobs;
  if (!a.candidate_file.empty()) {
    try {
      opt.candidates = identities::load_candidates(a.candidate_file);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
  }
  Report rep = run_suite(a.suite, opt);
  rep.meta["version"] = MAHLERLAB_VERSION;
  write_report(out, rep, out_opt);
  return rep.pass() ? kExitPass : kExitFail;
}

int cmd_table(const Args& a, const OutputOptions& out_opt, std::ostream& out) {
  TableOptions opt;
  opt.tol = a.tol.value_or(1e-6);
  opt.n_max = a.n_max;
  opt.jobs = a.jobs;
  Report rep = run_table(opt);
  rep.meta["version"] = MAHLERLAB_VERSION;
  write_report(out, rep, out_opt);
  return rep.pass() ? kExitPass : kExitFail;
}

int cmd_lvalue(const Args& a, const OutputOptions& out_opt, std::ostream& out) {
  const auto ks = require_points(a, "lvalue");
  if (!a.an_csv.empty() && ks.size() != 1) throw UsageError("lvalue: --an-csv needs a single --k");
  const double tol = a.tol.value_or(1e-12);
  std::vector<lfunctions::LValueReport> reports;
  for (double k : ks) {
    try {
      reports.push_back(lfunctions::lvalue_for_k(k, tol, a.n_max));
    } catch (const UnsupportedCurveError& e) {
      throw UsageError(e.what());
    }
  }
  if (!a.an_csv.empty()) {
    std::ofstream f(a.an_csv);
    if (!f) throw UsageError(fmt::format("cannot write '{}'", a.an_csv));
    lfunctions::write_an_csv(f, reports.front().data);
  }
  switch (out_opt.format) {
    case Format::Json: {
      nlohmann::json j = {{"schema", 1}, {"command", "lvalue"}, {"version", MAHLERLAB_VERSION}};
      j["tolerances"] = {{"tail", tol}};
      j["results"] = nlohmann::json::array();
      for (const auto& r : reports) j["results"].push_back(lfunctions::summary_json(r));
      out << j.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      out << lfunctions::summary_csv_header() << '\n';
      for (const auto& r : reports) out << lfunctions::summary_csv_row(r) << '\n';
      break;
    case Format::Text:
      for (const auto& r : reports) {
        const auto& c = r.curve;
        out << fmt::format("k = {} (N = {}, r_k = {})\n", c.label, c.conductor_N, lfunctions::to_string(c.r_k));
        out << fmt::format("  model      y^2 = x^3 + {} x^2 + {} x, d = {}\n", c.a2, c.a4, c.scaling_exponent);
        out << fmt::format("  sign       {:+d} (split discrepancy {:.3g} vs {:.3g})\n", r.sign.eps,
                           r.sign.eps > 0 ? r.sign.discrepancy_plus : r.sign.discrepancy_minus,
                           r.sign.eps > 0 ? r.sign.discrepancy_minus : r.sign.discrepancy_plus);
        out << fmt::format("  L(E, 2)    {:.15g}\n", r.value.L2);
        out << fmt::format("  L'(E, 0)   {:.15g}\n", r.value.Lprime0);
        out << fmt::format("  r_k L'     {:.15g}\n", c.r_k.value() * r.value.Lprime0);
        out << fmt::format("  terms      {} (tail bound {:.3g})\n", r.value.n_used, r.value.tail_bound);
        for (const auto& lf : r.data.special) {
          out << fmt::format("  a_{:<8} {:+d} ({})\n", lf.p, lf.ap, lfunctions::to_string(lf.route));
        }
      }
      break;
  }
  return kExitPass;
}

using Quantity = double (*)(double k, double tol);

struct QuantitySpec {
  const char* name;
  bool closed_form;
  bool small_k;  // defined for 0 < k < 4 as well
  Quantity fn;
};

mahler::HalfMeasures halves(double k, double tol) {
  return k > 4 ? mahler::half_measures_ptilde(k, tol) : mahler::half_measures_pac_small_k(k, tol);
}

const std::map<std::string, QuantitySpec>& quantities() {
  static const std::map<std::string, QuantitySpec> q = {
      {"f", {"f", false, true, [](double k, double tol) { return mahler::m_p1k(k, tol); }}},
      {"h", {"h", false, false, [](double k, double tol) {
               const auto h = mahler::half_measures_ptilde(k, tol);
               return h.m_plus - h.m_minus;
             }}},
      {"m_plus", {"m_plus", false, true, [](double k, double tol) { return halves(k, tol).m_plus; }}},
      {"m_minus", {"m_minus", false, true, [](double k, double tol) { return halves(k, tol).m_minus; }}},
      {"dfdk", {"dfdk", true, false, [](double k, double) { return mahler::dfdk(k); }}},
      {"dhdk", {"dhdk", true, false, [](double k, double) { return mahler::dhdk(k); }}},
  };
  return q;
}

int cmd_sweep(const Args& a, const OutputOptions& out_opt, std::ostream& out) {
  const auto it = quantities().find(a.quantity);
  if (it == quantities().end()) {
    throw UsageError(fmt::format("unknown quantity '{}'; expected one of f, h, m_plus, m_minus, dfdk, dhdk", a.quantity));
  }
  const QuantitySpec& q = it->second;
  const auto ks = require_points(a, "sweep");
  for (double k : ks) {
    const bool ok = q.small_k ? (k > 0 && k != 4) : k > 4;
    if (!ok) {
      throw UsageError(fmt::format("sweep {}: k = {} outside {}", q.name, k, q.small_k ? "(0, 4) u (4, inf)" : "(4, inf)"));
    }
  }
  const double tol = a.tol.value_or(mahler::kDefaultMeasureTol);
  DataTable t;
  t.command = "sweep";
  t.meta = base_meta();
  t.meta["quantity"] = q.name;
  t.meta["tolerances"] = {{"quadrature", tol}};
  t.columns = {"k", "value", "est_error"};
  auto run = run_grid(ks, a.jobs, t.columns.size(), [&](double k) {
    const double v = q.fn(k, tol);
    // Closed forms are good to the Carlson-level relative error.
    const double err = q.closed_form ? 1e-15 * std::abs(v) : tol;
    return std::vector<Cell>{k, v, err};
  });
  t.rows = std::move(run.rows);
  t.notes = run.notes;
  attach_timings(t, run, out_opt.timings);
  write_table(out, t, out_opt.format);
  return run.failed ? kExitFail : kExitPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mahler measures, half-Mahler measures, elliptic integral identities and L-values"};
  app.name(args.empty() ? "mahlerlab" : args.front());
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", MAHLERLAB_VERSION);

  Args a;
  app.add_option("--format", a.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  app.add_option("--jobs", a.jobs, "Worker threads; output order does not depend on it")
      ->check(CLI::Range(1, 256));
  app.add_flag("--timings", a.timings, "Add wall-clock seconds to the output");

  auto add_k = [&](CLI::App* sub) {
    auto* k = sub->add_option("--k", a.k, "Value(s) of k; constant expressions like 4*sqrt(2)")
                  ->delimiter(',');
    auto* g = sub->add_option("--k-grid", a.k_grid, "Grid lo:hi:n or lo:hi:n:log");
    k->excludes(g);
  };
  auto add_tol = [&](CLI::App* sub, const char* what) {
    sub->add_option("--tol", a.tol, what)->check(CLI::Range(kMinCliTol, 1.0));
  };

  auto* ell = app.add_subcommand("ell", "Complete elliptic integrals K, E and Pi");
  ell->add_option("--z", a.z, "Modulus (or moduli) in [0, 1)")->delimiter(',');
  ell->add_option("--n", a.n, "Characteristic for Pi, below 1");

  auto* mah = app.add_subcommand("mahler", "m(P_1k) and the half measures of P_ac");
  add_k(mah);
  add_tol(mah, "Quadrature tolerance");
  mah->add_flag("--oracle", a.oracle, "Add the brute-force torus integral (slow)");

  auto* ver = app.add_subcommand("verify", "Run a residual suite");
  ver->add_option("suite", a.suite, "thm-main, corollary, ei, appendix, jia, lsz, eta or all")->required();
  add_k(ver);
  add_tol(ver, "Replace every pass threshold of the suite");
  ver->add_option("--candidate-file", a.candidate_file, "Identity candidates for the appendix suite");

  auto* lv = app.add_subcommand("lvalue", "L(E_k, 2) and L'(E_k, 0) for a supported k");
  add_k(lv);
  add_tol(lv, "Truncation tolerance");
  lv->add_option("--nmax", a.n_max, "Number of Dirichlet coefficients (default from the conductor)")
      ->check(CLI::Range(1, 100000));
  lv->add_option("--an-csv", a.an_csv, "Write the coefficients a_n to this CSV file");

  auto* tab = app.add_subcommand("table", "Reproduce the table of proven Mahler measure formulas");
  add_tol(tab, "Relative agreement required between m(P_1k) and r_k L'(E_k, 0)");
  tab->add_option("--nmax", a.n_max, "Number of Dirichlet coefficients")->check(CLI::Range(1, 100000));

  auto* sw = app.add_subcommand("sweep", "One quantity over a k grid");
  sw->add_option("quantity", a.quantity, "f, h, m_plus, m_minus, dfdk or dhdk")->required();
  add_k(sw);
  add_tol(sw, "Quadrature tolerance");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  OutputOptions out_opt{parse_format(a.format), a.timings};
  try {
    if (*ell) return cmd_ell(a, out_opt, out);
    if (*mah) return cmd_mahler(a, out_opt, out);
    if (*ver) return cmd_verify(a, out_opt, out);
    if (*lv) return cmd_lvalue(a, out_opt, out);
    if (*tab) return cmd_table(a, out_opt, out);
    if (*sw) {
      if (app.get_option("--format")->count() == 0) out_opt.format = Format::Csv;
      return cmd_sweep(a, out_opt, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace mahlerlab::cli
