#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/core.h>

#include "mahlerlab/cli.hpp"
#include "mahlerlab/expression.hpp"
#include "mahlerlab/jet.hpp"

namespace mahlerlab::cli {

const char* to_string(Status status) {
  switch (status) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Skipped: return "SKIPPED";
  }
  return "?";
}

bool Report::pass() const {
  return std::none_of(rows.begin(), rows.end(), [](const Row& r) { return r.status == Status::Fail; });
}

double parse_scalar(std::string_view text) {
  Jet2 v;
  try {
    v = compile_expression(text)(Jet2::variable(0.0));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (v.d1 != 0.0 || v.d2 != 0.0) {
    throw UsageError(fmt::format("'{}' is not a constant", text));
  }
  if (!std::isfinite(v.value)) throw UsageError(fmt::format("'{}' is not finite", text));
  return v.value;
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<std::string_view> parts;
  for (std::size_t start = 0;;) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3 && parts.size() != 4) {
    throw UsageError(fmt::format("grid '{}' must be lo:hi:n or lo:hi:n:log", text));
  }
  bool log_spaced = false;
  if (parts.size() == 4) {
    if (parts[3] != "log") throw UsageError(fmt::format("unknown grid spacing '{}'", parts[3]));
    log_spaced = true;
  }
  const double lo = parse_scalar(parts[0]);
  const double hi = parse_scalar(parts[1]);
  const std::string count(parts[2]);
  std::size_t used = 0;
  long n = 0;
  try {
    n = std::stol(count, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != count.size() || n < 1 || n > 1'000'000) {
    throw UsageError(fmt::format("grid size '{}' must be a positive integer", count));
  }
  if (n > 1 && !(lo < hi)) throw UsageError(fmt::format("grid '{}' needs lo < hi", text));
  if (log_spaced && !(lo > 0)) throw UsageError(fmt::format("log grid '{}' needs lo > 0", text));

  std::vector<double> grid(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    grid[i] = log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                         : lo + t * (hi - lo);
  }
  grid.front() = lo;
  if (n > 1) grid.back() = hi;
  return grid;
}

DataTable to_table(const Report& report, bool timings) {
  DataTable t;
  t.command = report.command;
  t.columns = {"suite", "check", "input", "expected", "computed", "residual", "tol", "status", "note"};
  if (timings) t.columns.push_back("seconds");
  for (const Row& r : report.rows) {
    std::vector<Cell> cells{r.suite,    r.check, r.input, r.expected,           r.computed,
                            r.residual, r.tol,   std::string(to_string(r.status)), r.note};
    if (timings) cells.emplace_back(r.seconds);
    t.rows.push_back(std::move(cells));
  }
  t.notes = report.notes;
  t.meta = report.meta;
  if (!report.name.empty()) t.meta["suite"] = report.name;
  t.meta["pass"] = report.pass();
  if (timings) t.meta["seconds"] = report.seconds;
  return t;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string format_cell(const Cell& c, bool precise) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const double d = std::get<double>(c);
  if (std::isnan(d)) return "nan";
  return precise ? fmt::format("{:.17g}", d) : fmt::format("{:.12g}", d);
}

nlohmann::json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  const double d = std::get<double>(c);
  if (!std::isfinite(d)) return nullptr;
  return d;
}

void write_text(std::ostream& out, const DataTable& t) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t j = 0; j < t.columns.size(); ++j) width[j] = t.columns[j].size();
  for (const auto& row : t.rows) {
    auto& line = cells.emplace_back();
    for (std::size_t j = 0; j < row.size(); ++j) {
      line.push_back(format_cell(row[j], false));
      width[j] = std::max(width[j], line.back().size());
    }
  }
  auto emit = [&](const std::vector<std::string>& line) {
    std::string s;
    for (std::size_t j = 0; j < line.size(); ++j) {
      if (j + 1 == line.size()) {
        s += line[j];
      } else {
        s += fmt::format("{:<{}}  ", line[j], width[j]);
      }
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out << s << '\n';
  };
  emit(t.columns);
  for (const auto& line : cells) emit(line);
  for (const auto& n : t.notes) out << "note: " << n << '\n';
  if (t.meta.contains("pass")) {
    std::size_t failed = 0;
    std::size_t skipped = 0;
    const auto status = std::find(t.columns.begin(), t.columns.end(), "status") - t.columns.begin();
    for (const auto& row : t.rows) {
      const auto& s = std::get<std::string>(row[status]);
      failed += s == "FAIL";
      skipped += s == "SKIPPED";
    }
    out << fmt::format("{} rows, {} failed, {} skipped\n", t.rows.size(), failed, skipped);
  }
  if (t.meta.contains("seconds")) out << fmt::format("{:.3f} s\n", t.meta["seconds"].get<double>());
}

}  // namespace

void write_table(std::ostream& out, const DataTable& t, Format format) {
  switch (format) {
    case Format::Text:
      write_text(out, t);
      return;
    case Format::Csv: {
      std::string header;
      for (std::size_t j = 0; j < t.columns.size(); ++j) {
        header += (j ? "," : "") + csv_field(t.columns[j]);
      }
      out << header << '\n';
      for (const auto& row : t.rows) {
        std::string line;
        for (std::size_t j = 0; j < row.size(); ++j) {
          line += (j ? "," : "") + csv_field(format_cell(row[j], true));
        }
        out << line << '\n';
      }
      return;
    }
    case Format::Json: {
      nlohmann::json j = nlohmann::json::object();
      j["schema"] = 1;
      j["command"] = t.command;
      for (const auto& [key, value] : t.meta.items()) j[key] = value;
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : t.rows) {
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t c = 0; c < row.size(); ++c) o[t.columns[c]] = cell_json(row[c]);
        rows.push_back(std::move(o));
      }
      j["rows"] = std::move(rows);
      j["notes"] = t.notes;
      out << j.dump(2) << '\n';
      return;
    }
  }
}

void write_report(std::ostream& out, const Report& report, const OutputOptions& options) {
  write_table(out, to_table(report, options.timings), options.format);
}

}  // namespace mahlerlab::cli
