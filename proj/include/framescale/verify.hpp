#pragma once

// Independent re-checks of result documents. Certificates on small instances
// are confirmed in exact rational arithmetic from the decimal input text.

#include <algorithm>
#include <set>
#include <string>

#include "framescale/frame_scaler.hpp"
#include "framescale/io.hpp"
#include "framescale/matrix_scaler.hpp"
#include "framescale/rational.hpp"

namespace framescale {

inline constexpr Index kExactMaxRows = 6;
inline constexpr Index kExactMaxCols = 12;

struct VerifyOutcome {
  bool ok = true;
  std::string failed_check;  // first failing check
  std::vector<std::string> notes;

  void fail(const std::string& check) {
    if (ok) failed_check = check;
    ok = false;
  }
};

/// c(T) > rk(U_T), both sides exact.
inline bool exact_frame_certificate(const TextMatrix& u, const TextVector& c, const IndexSet& t) {
  RationalMatrix sub(u.tokens.size(), std::vector<Rational>(t.size()));
  for (std::size_t i = 0; i < u.tokens.size(); ++i)
    for (std::size_t k = 0; k < t.size(); ++k) sub[i][k] = parse_decimal_rational(u.tokens[i][static_cast<std::size_t>(t[k])]);
  Rational mass = 0;
  for (Index j : t) mass += parse_decimal_rational(c.tokens[static_cast<std::size_t>(j)]);
  return mass > Rational(static_cast<long long>(exact_rank(sub)));
}

/// c(T) > r(N(T)), both sides exact; the support is read from the parsed entries.
inline bool exact_hall_violation(const TextMatrix& a, const TextVector& r, const TextVector& c, const IndexSet& t) {
  Rational ct = 0;
  for (Index j : t) ct += parse_decimal_rational(c.tokens[static_cast<std::size_t>(j)]);
  Rational rn = 0;
  for (Index i = 0; i < a.values.rows(); ++i) {
    bool touched = false;
    for (Index j : t) touched = touched || parse_decimal_rational(a.tokens[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) != 0;
    if (touched) rn += parse_decimal_rational(r.tokens[static_cast<std::size_t>(i)]);
  }
  return ct > rn;
}

namespace detail {

inline double config_eps(const ResultDocument& doc, VerifyOutcome& out) {
  if (!doc.config.contains("eps") || !doc.config.at("eps").is_number()) {
    out.fail("config.eps present");
    return 0.0;
  }
  return doc.config.at("eps").get<double>();
}

inline std::optional<IndexSet> certificate_set(const ResultDocument& doc, Index n, VerifyOutcome& out) {
  std::set<long long> seen;
  IndexSet t;
  for (long long j : doc.certificate) {
    if (j < 0 || j >= n || !seen.insert(j).second) {
      out.fail("certificate indices valid");
      return std::nullopt;
    }
    t.push_back(static_cast<Index>(j));
  }
  if (t.empty()) {
    out.fail("certificate nonempty");
    return std::nullopt;
  }
  std::sort(t.begin(), t.end());
  return t;
}

inline std::optional<Vector> scaling_vector(const ResultDocument& doc, Index n, VerifyOutcome& out) {
  if (!doc.scaling || static_cast<Index>(doc.scaling->size()) != n) {
    out.fail("scaling length");
    return std::nullopt;
  }
  Vector z(n);
  for (Index j = 0; j < n; ++j) {
    z(j) = (*doc.scaling)[static_cast<std::size_t>(j)];
    if (!(z(j) > 0.0) || !std::isfinite(z(j))) {
      out.fail("scaling positive");
      return std::nullopt;
    }
  }
  return z;
}

}  // namespace detail

inline VerifyOutcome verify_frame_result(const ResultDocument& doc, const TextMatrix& u, const TextVector& c) {
  VerifyOutcome out;
  const Frame frame(u.values);
  if (c.values.size() != frame.n()) {
    out.fail("marginals length");
    return out;
  }
  if (doc.scaling_key != "z") out.fail("result kind is frame");
  const double eps = detail::config_eps(doc, out);
  if (!out.ok) return out;

  if (doc.status == "scaled") {
    const auto z = detail::scaling_vector(doc, frame.n(), out);
    if (!z) return out;
    const double err_sq = (leverage_scores(frame, *z) - c.values).squaredNorm();
    out.notes.push_back("recomputed error_sq " + format_double(err_sq));
    if (!(err_sq <= eps * eps)) out.fail("error_sq <= eps^2");
    return out;
  }

  const auto t = detail::certificate_set(doc, frame.n(), out);
  if (!t) return out;
  double mass = 0.0;
  for (Index j : *t) mass += c.values(j);
  const auto rank = static_cast<double>(numerical_rank(frame.columns(*t)));
  if (!(rank < mass - kCertificateSlack)) {
    out.fail("certificate c(T) > rk(U_T) (float)");
    return out;
  }
  if (frame.d() <= kExactMaxRows && frame.n() <= kExactMaxCols) {
    if (!exact_frame_certificate(u, c, *t)) out.fail("certificate c(T) > rk(U_T) (exact)");
    else out.notes.push_back("certificate confirmed in exact arithmetic");
  } else {
    out.notes.push_back("instance too large for the exact check; float check only");
  }
  return out;
}

inline VerifyOutcome verify_matrix_result(const ResultDocument& doc, const TextMatrix& a, const TextVector& r,
                                          const TextVector& c) {
  VerifyOutcome out;
  const NonnegMatrix mat(a.values);
  const MatrixMarginals mm(r.values, c.values);
  if (mm.r.size() != mat.m() || mm.c.size() != mat.n()) {
    out.fail("marginals length");
    return out;
  }
  if (doc.scaling_key != "y") out.fail("result kind is matrix");
  const double eps = detail::config_eps(doc, out);
  if (!out.ok) return out;

  if (doc.status == "scaled") {
    const auto y = detail::scaling_vector(doc, mat.n(), out);
    if (!y) return out;
    const double err_sq = matrix_error_sq(mat, mm, *y);
    out.notes.push_back("recomputed error_sq " + format_double(err_sq));
    if (!(err_sq <= eps * eps)) out.fail("error_sq <= eps^2");
    return out;
  }

  const auto t = detail::certificate_set(doc, mat.n(), out);
  if (!t) return out;
  if (!exact_hall_violation(a, r, c, *t)) out.fail("certificate c(T) > r(N(T)) (exact)");
  return out;
}

}  // namespace framescale
