#pragma once

// Command-line front end: reports, grids, the worker pool and the
// subcommands ell, mahler, verify, lvalue, table and sweep.
//
// Exit codes: 0 every row passed, 1 a numerical check failed or a
// computation gave up, 2 usage error.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mahlerlab/errors.hpp"
#include "mahlerlab/identities.hpp"

namespace mahlerlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

inline constexpr double kMinCliTol = 1e-13;

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Format { Text, Csv, Json };

enum class Status { Pass, Fail, Skipped };

const char* to_string(Status status);

// A constant expression such as "4*sqrt(2)". UsageError if it does not
// parse, depends on x or is not finite.
double parse_scalar(std::string_view text);

// "lo:hi:n" or "lo:hi:n:log"; lo and hi are constant expressions.
std::vector<double> parse_grid(std::string_view text);

// Runs fn(i) for i < n on `jobs` threads. Results come back in index order;
// the exception of the lowest failing index is rethrown after all workers
// have joined.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct Row {
  std::string suite;
  std::string check;
  std::string input;
  double expected = 0.0;
  double computed = 0.0;
  double residual = 0.0;
  double tol = 0.0;
  Status status = Status::Pass;
  std::string note;
  double seconds = 0.0;
};

struct Report {
  std::string command;
  std::string name;  // suite, or empty
  std::vector<Row> rows;
  std::vector<std::string> notes;
  nlohmann::json meta = nlohmann::json::object();
  double seconds = 0.0;

  bool pass() const;
};

// Plain column data for the non-report commands.
using Cell = std::variant<std::string, double, long long>;

struct DataTable {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
  nlohmann::json meta = nlohmann::json::object();
};

struct OutputOptions {
  Format format = Format::Text;
  bool timings = false;
};

DataTable to_table(const Report& report, bool timings);
void write_table(std::ostream& out, const DataTable& table, Format format);
void write_report(std::ostream& out, const Report& report, const OutputOptions& options);

// verify

const std::vector<std::string>& suite_names();

struct SuiteOptions {
  std::optional<std::vector<double>> grid;  // k values (t values for eta)
  std::optional<double> tol;                // replaces every pass threshold
  std::optional<std::vector<identities::IdentityCandidate>> candidates;
  int jobs = 1;
};

// UsageError for an unknown suite or a grid outside the suite's domain.
Report run_suite(std::string_view suite, const SuiteOptions& options);

// table

struct TableOptions {
  double tol = 1e-6;  // relative agreement for the L-value rows
  int n_max = 0;      // 0: default per conductor
  int jobs = 1;
};

Report run_table(const TableOptions& options);

// Whole command line; argv[0] is ignored.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mahlerlab::cli
