#include "mahlerlab/lfunctions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>

#include <fmt/core.h>

#include "mahlerlab/errors.hpp"

namespace mahlerlab::lfunctions {
namespace {

using i128 = __int128;

constexpr double kPi = std::numbers::pi;

std::int64_t mod(i128 a, std::int64_t p) {
  const i128 r = a % p;
  return static_cast<std::int64_t>(r < 0 ? r + p : r);
}

std::int64_t powmod(std::int64_t b, std::int64_t e, std::int64_t p) {
  i128 result = 1, base = mod(b, p);
  while (e > 0) {
    if (e & 1) result = result * base % p;
    base = base * base % p;
    e >>= 1;
  }
  return static_cast<std::int64_t>(result);
}

int legendre(i128 a, std::int64_t p) {
  const std::int64_t r = mod(a, p);
  if (r == 0) return 0;
  return powmod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

int valuation(i128 n, std::int64_t p) {
  if (n == 0) return 1000;
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

struct Weierstrass {
  i128 a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;

  i128 discriminant() const {
    const i128 b2 = a1 * a1 + 4 * a2;
    const i128 b4 = 2 * a4 + a1 * a3;
    const i128 b6 = a3 * a3 + 4 * a6;
    const i128 b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
  }
};

// (x, y) = (u^2 x' + r, u^3 y' + s u^2 x' + t); empty if the result is not integral.
std::optional<Weierstrass> transform(const Weierstrass& w, i128 u, i128 r, i128 s, i128 t) {
  const i128 u2 = u * u, u3 = u2 * u, u4 = u2 * u2, u6 = u3 * u3;
  const i128 n1 = w.a1 + 2 * s;
  const i128 n2 = w.a2 - s * w.a1 + 3 * r - s * s;
  const i128 n3 = w.a3 + r * w.a1 + 2 * t;
  const i128 n4 = w.a4 - s * w.a3 + 2 * r * w.a2 - (t + r * s) * w.a1 + 3 * r * r - 2 * s * t;
  const i128 n6 = w.a6 + r * w.a4 + r * r * w.a2 + r * r * r - t * w.a3 - t * t - r * t * w.a1;
  if (n1 % u || n2 % u2 || n3 % u3 || n4 % u4 || n6 % u6) return std::nullopt;
  return Weierstrass{n1 / u, n2 / u2, n3 / u3, n4 / u4, n6 / u6};
}

// Odd p: translations r mod p^2 with u = p until no step applies.
Weierstrass minimize_odd(Weierstrass w, std::int64_t p) {
  for (bool progress = true; progress;) {
    progress = false;
    for (std::int64_t r = 0; r < p * p && !progress; ++r) {
      if (auto next = transform(w, p, r, 0, 0)) {
        w = *next;
        progress = true;
      }
    }
  }
  return w;
}

// p = 2: brute force over the u = 2 transforms with small (r, s, t).
Weierstrass minimize_two(Weierstrass w) {
  for (bool progress = true; progress && w.discriminant() % 2 == 0;) {
    progress = false;
    for (int r = -8; r <= 8 && !progress; ++r) {
      for (int s = -2; s <= 2 && !progress; ++s) {
        for (int t = -32; t <= 32 && !progress; ++t) {
          if (auto next = transform(w, 2, r, s, t)) {
            w = *next;
            progress = true;
          }
        }
      }
    }
  }
  return w;
}

// a_p = p + 1 - #E(F_p) on a model with a1 = a3 = 0, p odd.
int character_sum(const Weierstrass& w, std::int64_t p) {
  int sum = 0;
  for (std::int64_t x = 0; x < p; ++x) {
    sum += legendre(((x + w.a2) * x + w.a4) * x + w.a6, p);
  }
  return -sum;
}

int count_mod_two(const Weierstrass& w) {
  int points = 1;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const i128 lhs = y * y + w.a1 * x * y + w.a3 * y;
      const i128 rhs = x * x * x + w.a2 * x * x + w.a4 * x + w.a6;
      if (mod(lhs - rhs, 2) == 0) ++points;
    }
  }
  return 3 - points;
}

Weierstrass model_of(const CurveModel& c) { return Weierstrass{0, c.a2, 0, c.a4, 0}; }

std::vector<std::int64_t> smallest_prime_factors(int n) {
  std::vector<std::int64_t> spf(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 2; i <= n; ++i) {
    if (spf[i]) continue;
    for (std::int64_t j = i; j <= n; j += i) {
      if (!spf[j]) spf[j] = i;
    }
  }
  return spf;
}

std::vector<std::int64_t> build_an(int n_max, int N, const std::map<std::int64_t, int>& ap) {
  const auto spf = smallest_prime_factors(n_max);
  std::vector<std::int64_t> an(static_cast<std::size_t>(n_max) + 1, 0);
  if (n_max >= 1) an[1] = 1;
  for (int n = 2; n <= n_max; ++n) {
    const std::int64_t p = spf[n];
    std::int64_t pk = 1, m = n;
    while (m % p == 0) {
      m /= p;
      pk *= p;
    }
    if (m > 1) {
      an[n] = an[pk] * an[m];
      continue;
    }
    // n = p^e
    const std::int64_t a = ap.at(p);
    if (pk == p) {
      an[n] = a;
    } else if (N % p == 0) {
      an[n] = an[pk / p] * a;
    } else {
      an[n] = a * an[pk / p] - p * an[pk / (p * p)];
    }
  }
  return an;
}

double split_discrepancy(const LFunctionData& data, int eps) {
  const double root = std::sqrt(static_cast<double>(data.N));
  return std::abs(l2_at_split(data, 0.8 / root, eps) - l2_at_split(data, 1.3 / root, eps));
}

std::vector<int> candidate_values(std::int64_t p, int N) {
  const int v = valuation(N, p);
  if (v >= 2) return {0};
  if (v == 1) return {-1, 1};
  const int bound = static_cast<int>(std::floor(2.0 * std::sqrt(static_cast<double>(p))));
  std::vector<int> out;
  for (int a = -bound; a <= bound; ++a) out.push_back(a);
  return out;
}

constexpr double kSplitTolerance = 1e-10;

}  // namespace

std::string to_string(const Rational& r) {
  return r.den == 1 ? fmt::format("{}", r.num) : fmt::format("{}/{}", r.num, r.den);
}

const std::vector<SupportedCurve>& supported_curves() {
  static const std::vector<SupportedCurve> rows = {
      {"1", 1.0, 1, 15, {1, 1}},
      {"5", 5.0, 25, 15, {6, 1}},
      {"16", 16.0, 256, 15, {11, 1}},
      {"3", 3.0, 9, 21, {2, 1}},
      {"2", 2.0, 4, 24, {1, 1}},
      {"3sqrt2", 3.0 * std::numbers::sqrt2, 18, 24, {5, 2}},
      {"8", 8.0, 64, 24, {4, 1}},
      {"2sqrt2", 2.0 * std::numbers::sqrt2, 8, 32, {1, 1}},
      {"12", 12.0, 144, 48, {2, 1}},
      {"sqrt2", std::numbers::sqrt2, 2, 56, {1, 4}},
      {"4sqrt2", 4.0 * std::numbers::sqrt2, 32, 64, {1, 1}},
  };
  return rows;
}

CurveModel curve_from_k(double k) {
  const auto& rows = supported_curves();
  const auto it = std::find_if(rows.begin(), rows.end(),
                               [k](const SupportedCurve& r) { return std::abs(k - r.k) <= 1e-9 * r.k; });
  if (it == rows.end()) {
    throw UnsupportedCurveError(fmt::format("k = {} is not a supported real k", k));
  }
  const std::int64_t s = it->k_squared;
  // A2 = s (s - 8) / 64, A4 = s^2 / 256.
  for (std::int64_t d = 1; d <= 64; ++d) {
    const i128 d2 = d * d;
    const i128 n2 = static_cast<i128>(s) * (s - 8) * d2;
    const i128 n4 = static_cast<i128>(s) * s * d2 * d2;
    if (n2 % 64 || n4 % 256) continue;
    CurveModel c;
    c.label = it->label;
    c.k_label = it->k;
    c.k_squared = s;
    c.a2 = static_cast<std::int64_t>(n2 / 64);
    c.a4 = static_cast<std::int64_t>(n4 / 256);
    c.discriminant = static_cast<std::int64_t>(model_of(c).discriminant());
    c.conductor_N = it->conductor;
    c.scaling_exponent = d;
    c.r_k = it->r_k;
    if (c.discriminant == 0) throw DataError(fmt::format("singular model for k = {}", it->label));
    for (std::int64_t p = 2; p <= c.conductor_N; ++p) {
      if (is_prime(p) && c.conductor_N % p == 0 && c.discriminant % p != 0) {
        throw DataError(fmt::format("conductor {} has prime {} not dividing the discriminant",
                                    c.conductor_N, p));
      }
    }
    return c;
  }
  throw DataError(fmt::format("no scaling clears denominators for k^2 = {}", s));
}

int ap_good(const CurveModel& curve, std::int64_t p) {
  if (p == 2 || !is_prime(p)) throw DomainError(fmt::format("ap_good needs an odd prime, got {}", p));
  if (curve.discriminant % p == 0) {
    throw DomainError(fmt::format("p = {} divides the discriminant; use ap_bad", p));
  }
  return character_sum(model_of(curve), p);
}

const char* to_string(ApRoute route) {
  switch (route) {
    case ApRoute::CharacterSum: return "character-sum";
    case ApRoute::MinimalModelCount: return "minimal-model-count";
    case ApRoute::NodeSlopes: return "node-slopes";
    case ApRoute::Additive: return "additive";
    case ApRoute::Consistency: return "consistency";
  }
  return "?";
}

LocalFactor ap_bad(const CurveModel& curve, std::int64_t p) {
  if (!is_prime(p)) throw DomainError(fmt::format("{} is not prime", p));
  const int N = curve.conductor_N;
  if (N % p != 0 && curve.discriminant % p != 0) {
    throw DomainError(fmt::format("p = {} is good on the model; use ap_good", p));
  }
  const LocalFactor unresolved{p, 0, ApRoute::Consistency};
  const int vN = valuation(N, p);
  if (vN >= 2) return {p, 0, ApRoute::Additive};

  if (p == 2) {
    if (vN == 1) return unresolved;
    const Weierstrass w = minimize_two(model_of(curve));
    if (w.discriminant() % 2 == 0) return unresolved;
    return {p, count_mod_two(w), ApRoute::MinimalModelCount};
  }

  const Weierstrass w = minimize_odd(model_of(curve), p);
  const int counted = character_sum(w, p);
  if (w.discriminant() % p != 0) {
    if (vN != 0) return unresolved;
    return {p, counted, ApRoute::MinimalModelCount};
  }
  // Singular reduction: locate the double root of the cubic mod p.
  for (std::int64_t x0 = 0; x0 < p; ++x0) {
    const i128 f = ((x0 + w.a2) * x0 + w.a4) * x0 + w.a6;
    const i128 df = (3 * x0 + 2 * w.a2) * x0 + w.a4;
    if (mod(f, p) != 0 || mod(df, p) != 0) continue;
    const i128 slope2 = 3 * x0 + w.a2;  // half the second derivative
    if (mod(slope2, p) == 0) return unresolved;  // cusp while v_p(N) = 1
    const int ap = legendre(slope2, p);
    if (vN != 1 || ap != counted) return unresolved;
    return {p, ap, ApRoute::NodeSlopes};
  }
  return unresolved;
}

int default_nmax(int N) {
  return static_cast<int>(std::ceil(18.0 * std::sqrt(static_cast<double>(N)) / (2.0 * kPi))) + 50;
}

LFunctionData an_table(const CurveModel& curve, int n_max, const ApOptions& options) {
  if (n_max < 1) throw DomainError(fmt::format("n_max must be at least 1, got {}", n_max));
  LFunctionData data;
  data.N = curve.conductor_N;

  std::map<std::int64_t, int> ap;
  std::vector<std::int64_t> unknown;
  for (std::int64_t p = 2; p <= n_max; ++p) {
    if (!is_prime(p)) continue;
    const bool forced = options.consistency_at_small_primes && p <= 3;
    if (!forced && p != 2 && curve.discriminant % p != 0) {
      ap[p] = ap_good(curve, p);
      continue;
    }
    LocalFactor lf = forced ? LocalFactor{p, 0, ApRoute::Consistency} : ap_bad(curve, p);
    if (forced && valuation(data.N, p) >= 2) lf.route = ApRoute::Additive;
    if (lf.route == ApRoute::Consistency) unknown.push_back(p);
    ap[p] = lf.ap;
    data.special.push_back(lf);
  }
  data.an = build_an(n_max, data.N, ap);
  if (unknown.empty()) return data;

  // Every assignment of the unresolved a_p, both signs; exactly one must
  // make L(E, 2) independent of the split point.
  std::vector<std::vector<int>> choices;
  for (std::int64_t p : unknown) choices.push_back(candidate_values(p, data.N));
  std::vector<std::size_t> idx(unknown.size(), 0);
  struct Best {
    double discrepancy;
    std::map<std::int64_t, int> ap;
    int eps;
  };
  std::vector<Best> passing;
  double best_seen = std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t i = 0; i < unknown.size(); ++i) ap[unknown[i]] = choices[i][idx[i]];
    data.an = build_an(n_max, data.N, ap);
    for (int eps : {1, -1}) {
      const double d = split_discrepancy(data, eps);
      best_seen = std::min(best_seen, d);
      if (d <= kSplitTolerance) passing.push_back({d, ap, eps});
    }
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
    if (i == idx.size()) break;
  }
  if (passing.size() != 1) {
    throw DataError(fmt::format("consistency search for N = {} found {} solutions (best discrepancy {:.3g})",
                                data.N, passing.size(), best_seen));
  }
  data.an = build_an(n_max, data.N, passing.front().ap);
  data.eps = passing.front().eps;
  for (LocalFactor& lf : data.special) {
    if (lf.route == ApRoute::Consistency) lf.ap = passing.front().ap.at(lf.p);
  }
  return data;
}

double expint_e1(double x) {
  if (!(x > 0)) throw DomainError(fmt::format("E1 needs x > 0, got {}", x));
  if (x < 1.0) {
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 100; ++k) {
      term *= -x / k;
      sum += term / k;
      if (std::abs(term / k) < 1e-18) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
  }
  // Modified Lentz evaluation of the continued fraction.
  constexpr double tiny = 1e-300;
  double b = x + 1.0, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

double l2_at_split(const LFunctionData& data, double A, int eps) {
  if (!(A > 0)) throw DomainError(fmt::format("split point must be positive, got {}", A));
  const double N = data.N;
  double head = 0.0, tail = 0.0;
  for (int n = 1; n <= data.n_max(); ++n) {
    const double a = static_cast<double>(data.an[n]);
    if (a == 0.0) continue;
    const double x = 2.0 * kPi * n * A;
    head += a * std::exp(-x) * (2.0 * kPi * A / n + 1.0 / (static_cast<double>(n) * n));
    const double y = 2.0 * kPi * n / (N * A);
    if (y < 700.0) tail += a * expint_e1(y);
  }
  return head + eps * (4.0 * kPi * kPi / N) * tail;
}

double tail_bound(int N, int n_max, double A) {
  const double c1 = 2.0 * kPi * A;
  const double c2 = 2.0 * kPi / (N * A);
  const double m = n_max + 1.0;
  // |a_n| <= 2n, and E1(x) <= e^{-x} / x.
  const double head = 2.0 * (c1 + 1.0) * std::exp(-c1 * m) / (1.0 - std::exp(-c1));
  const double tail = (4.0 * kPi * kPi / N) * 2.0 * std::exp(-c2 * m) / (c2 * (1.0 - std::exp(-c2)));
  return head + tail;
}

LValueResult l2(const LFunctionData& data, double tol) {
  if (data.eps != 1 && data.eps != -1) throw DomainError("functional-equation sign not set");
  LValueResult res;
  res.split = 1.0 / std::sqrt(static_cast<double>(data.N));
  res.eps = data.eps;
  res.n_used = data.n_max();
  res.L2 = l2_at_split(data, res.split, data.eps);
  res.Lprime0 = data.eps * data.N / (4.0 * kPi * kPi) * res.L2;
  res.tail_bound = tail_bound(data.N, data.n_max(), res.split);
  if (!(res.tail_bound < tol)) {
    throw AccuracyError(fmt::format("n_max = {} leaves a tail bound {:.3g} >= {:.3g}; use a larger n_max",
                                    res.n_used, res.tail_bound, tol),
                        res.L2, res.tail_bound);
  }
  return res;
}

SignDetection sign_detect(const LFunctionData& data) {
  SignDetection s;
  s.discrepancy_plus = split_discrepancy(data, 1);
  s.discrepancy_minus = split_discrepancy(data, -1);
  const bool plus = s.discrepancy_plus <= kSplitTolerance;
  const bool minus = s.discrepancy_minus <= kSplitTolerance;
  if (plus == minus) {
    throw DataError(fmt::format("sign detection for N = {} failed: discrepancies {:.3g} (+1), {:.3g} (-1)",
                                data.N, s.discrepancy_plus, s.discrepancy_minus));
  }
  s.eps = plus ? 1 : -1;
  return s;
}

LValueReport lvalue_for_k(double k, double tol, int n_max, const ApOptions& options) {
  LValueReport rep;
  rep.curve = curve_from_k(k);
  rep.data = an_table(rep.curve, n_max > 0 ? n_max : default_nmax(rep.curve.conductor_N), options);
  rep.sign = sign_detect(rep.data);
  if (rep.data.eps != 0 && rep.data.eps != rep.sign.eps) {
    throw DataError("consistency search and sign detection disagree");
  }
  rep.data.eps = rep.sign.eps;
  rep.value = l2(rep.data, tol);
  return rep;
}

namespace {

long double eta_product(double t, int terms) {
  if (!(t > 0)) throw DomainError(fmt::format("eta needs t > 0, got {}", t));
  if (terms < 1) throw DomainError(fmt::format("eta needs at least one term, got {}", terms));
  const long double tau = t;
  const long double q = std::exp(-2.0L * std::numbers::pi_v<long double> * tau);
  long double prod = 1.0L, qn = 1.0L;
  for (int n = 1; n <= terms; ++n) {
    qn *= q;
    prod *= 1.0L - qn;
  }
  const long double eta = std::exp(-2.0L * std::numbers::pi_v<long double> * tau / 24.0L) * prod;
  if (!std::isnormal(static_cast<double>(eta))) throw DomainError(fmt::format("eta(i {}) underflows", t));
  return eta;
}

}  // namespace

double dedekind_eta(double t, int terms) { return static_cast<double>(eta_product(t, terms)); }

// Extended precision: near t = 2 the terms 3/x and 1/y are ~3e5 and cancel.
EtaParam eta_param(double t) {
  const auto eta = [](double s) {
    // Enough factors for q^terms < 1e-20.
    const int terms = std::max(40, static_cast<int>(std::ceil(20.0 * std::log(10.0) / (2.0 * kPi * s))));
    return eta_product(s, terms);
  };
  const long double e1 = eta(t), e3 = eta(3 * t), e5 = eta(5 * t), e15 = eta(15 * t);
  const long double x = -3.0L * std::pow(e3 * e15 / (e1 * e5), 2);
  const long double y = -std::pow(e1 * e15 / (e3 * e5), 3);
  EtaParam r;
  r.t = t;
  r.x = static_cast<double>(x);
  r.y = static_cast<double>(y);
  r.residual = static_cast<double>(std::abs(3.0L * (x + 1.0L / x) + y - 1.0L / y - 5.0L));
  return r;
}

double verify_eta_param(double t) { return eta_param(t).residual; }

void write_an_csv(std::ostream& out, const LFunctionData& data) {
  out << "n,a_n\n";
  for (int n = 1; n <= data.n_max(); ++n) out << n << ',' << data.an[n] << '\n';
}

namespace {

nlohmann::json local_json(const LFunctionData& data) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LocalFactor& lf : data.special) {
    arr.push_back({{"p", lf.p}, {"a_p", lf.ap}, {"route", to_string(lf.route)}});
  }
  return arr;
}

}  // namespace

nlohmann::json an_json(const LFunctionData& data) {
  std::vector<std::int64_t> an(data.an.begin() + 1, data.an.end());
  return {{"N", data.N}, {"eps", data.eps}, {"an", an}, {"local_factors", local_json(data)}};
}

nlohmann::json summary_json(const LValueReport& r) {
  return {{"k_label", r.curve.label},
          {"k", r.curve.k_label},
          {"N", r.curve.conductor_N},
          {"eps", r.value.eps},
          {"L2", r.value.L2},
          {"Lprime0", r.value.Lprime0},
          {"r_k", to_string(r.curve.r_k)},
          {"n_used", r.value.n_used},
          {"tail_bound", r.value.tail_bound},
          {"model",
           {{"a2", r.curve.a2}, {"a4", r.curve.a4}, {"d", r.curve.scaling_exponent},
            {"discriminant", r.curve.discriminant}}},
          {"local_factors", local_json(r.data)}};
}

std::string summary_csv_header() { return "k_label,k,N,eps,L2,Lprime0,r_k,n_used,tail_bound"; }

std::string summary_csv_row(const LValueReport& r) {
  return fmt::format("{},{:.17g},{},{},{:.17g},{:.17g},{},{},{:.3e}", r.curve.label, r.curve.k_label,
                     r.curve.conductor_N, r.value.eps, r.value.L2, r.value.Lprime0, to_string(r.curve.r_k),
                     r.value.n_used, r.value.tail_bound);
}

}  // namespace mahlerlab::lfunctions
