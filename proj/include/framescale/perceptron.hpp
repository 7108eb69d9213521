#pragma once

// Perceptron in the Q inner product <x, y>_Q = x^T (UZU^T)^{-1} y of a scaled frame.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "framescale/linalg.hpp"

namespace framescale {

/// Inner product given by a factorized UZU^T. Only solves, never a matrix square root.
class QMetric {
 public:
  explicit QMetric(GramContext ctx) : ctx_(std::move(ctx)) {}
  QMetric(const Frame& frame, const Vector& z) : ctx_(frame, z) {}

  double inner(const Vector& x, const Vector& y) const { return ctx_.inner(x, y); }
  double norm2(const Vector& x) const { return ctx_.inner(x, x); }
  Index dim() const noexcept { return ctx_.d(); }

 private:
  GramContext ctx_;
};

struct LabeledSample {
  Vector point;
  int label = 1;  // -1 or +1
};

struct PerceptronConfig {
  std::int64_t max_updates_per_instance = 10000;
};

struct PerceptronStep {
  std::size_t sample = 0;
  double norm2_before = 0.0;
  double norm2_after = 0.0;
  double inner_sq_over_norm2 = 0.0;  // <v,u>_Q^2 / ||u||_Q^2 at the update
};

struct PerceptronResult {
  Vector v;
  std::int64_t updates = 0;
  std::size_t seed = 0;  // instance index: 2j for +u_j, 2j+1 for -u_j
  std::vector<PerceptronStep> steps;
};

/// Lowest-index sample with <v,u>^2 >= gamma^2 ||v||^2 ||u||^2 whose sign disagrees with its label.
inline std::optional<std::size_t> find_violation(const std::vector<LabeledSample>& samples, const QMetric& q,
                                                 double gamma, const Vector& v) {
  const double vv = q.norm2(v);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const Vector& u = samples[j].point;
    const double vu = q.inner(v, u);
    if (vu * vu < gamma * gamma * vv * q.norm2(u)) continue;
    const int sign = vu > 0.0 ? 1 : (vu < 0.0 ? -1 : 0);
    if (sign != samples[j].label) return j;
  }
  return std::nullopt;
}

/// One step v <- v - (<v,u>_Q / ||u||_Q^2) u.
inline Vector perceptron_update(const QMetric& q, const Vector& v, const Vector& u) {
  return v - (q.inner(v, u) / q.norm2(u)) * u;
}

namespace detail {

struct PerceptronInstance {
  Vector v;
  std::int64_t updates = 0;
  bool alive = true;
  std::vector<PerceptronStep> steps;
};

inline void validate_samples(const std::vector<LabeledSample>& samples, const QMetric& q, double gamma) {
  if (samples.empty()) throw InvalidInput("perceptron: no samples");
  if (!(gamma > 0.0) || !(gamma < 1.0)) throw InvalidInput("perceptron: gamma must lie in (0, 1)");
  for (const auto& s : samples) {
    if (s.point.size() != q.dim()) throw InvalidInput("perceptron: sample dimension mismatch");
    if (s.label != 1 && s.label != -1) throw InvalidInput("perceptron: labels must be -1 or +1");
    if (!(q.norm2(s.point) > 0.0)) throw InvalidInput("perceptron: zero sample");
  }
}

// true when finished (all high-margin samples correct); otherwise performs one update
inline bool advance(PerceptronInstance& inst, const std::vector<LabeledSample>& samples, const QMetric& q, double gamma,
                    std::int64_t cap) {
  const auto bad = find_violation(samples, q, gamma, inst.v);
  if (!bad) return true;
  if (inst.updates >= cap || !(q.norm2(inst.v) > 0.0)) {
    inst.alive = false;
    return false;
  }
  const Vector& u = samples[*bad].point;
  PerceptronStep step;
  step.sample = *bad;
  step.norm2_before = q.norm2(inst.v);
  const double vu = q.inner(inst.v, u);
  step.inner_sq_over_norm2 = vu * vu / q.norm2(u);
  inst.v = perceptron_update(q, inst.v, u);
  step.norm2_after = q.norm2(inst.v);
  inst.steps.push_back(step);
  ++inst.updates;
  return false;
}

}  // namespace detail

/// Single instance started at v0.
inline PerceptronResult improved_perceptron(const std::vector<LabeledSample>& samples, const QMetric& q, double gamma,
                                            const Vector& v0, const PerceptronConfig& config = {}) {
  detail::validate_samples(samples, q, gamma);
  detail::PerceptronInstance inst;
  inst.v = v0;
  for (;;) {
    if (detail::advance(inst, samples, q, gamma, config.max_updates_per_instance))
      return {inst.v, inst.updates, 0, std::move(inst.steps)};
    if (!inst.alive) throw NotSeparable("improved_perceptron: update cap reached");
  }
}

/// 2n instances seeded +u_1, -u_1, +u_2, ..., advanced round-robin one update at a time.
inline PerceptronResult improved_perceptron(const std::vector<LabeledSample>& samples, const QMetric& q, double gamma,
                                            const PerceptronConfig& config = {}) {
  detail::validate_samples(samples, q, gamma);
  std::vector<detail::PerceptronInstance> pool;
  pool.reserve(2 * samples.size());
  for (const auto& s : samples) {
    for (double sign : {1.0, -1.0}) {
      detail::PerceptronInstance inst;
      inst.v = sign * s.point;
      pool.push_back(std::move(inst));
    }
  }
  for (;;) {
    bool any_alive = false;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      auto& inst = pool[k];
      if (!inst.alive) continue;
      if (detail::advance(inst, samples, q, gamma, config.max_updates_per_instance))
        return {inst.v, inst.updates, k, std::move(inst.steps)};
      any_alive = any_alive || inst.alive;
    }
    if (!any_alive) throw NotSeparable("improved_perceptron: every seeded instance reached its update cap");
  }
}

/// Fraction of columns with <w,u_j>_Q^2 >= ||w||_Q^2 ||u_j||_Q^2 / (4d).
/// Requires ||lev(z) - (d/n) 1||^2 <= (d/(2n))^2.
inline double margin_fraction(const Frame& frame, const Vector& z, const Vector& w) {
  if (w.size() != frame.d()) throw InvalidInput("margin_fraction: w has the wrong dimension");
  const GramContext ctx(frame, z);
  const double d = static_cast<double>(frame.d());
  const double n = static_cast<double>(frame.n());
  const Vector lev = leverage_scores(frame, z, ctx);
  const double err_sq = (lev.array() - d / n).matrix().squaredNorm();
  if (err_sq > (d / (2.0 * n)) * (d / (2.0 * n)))
    throw PreconditionViolated("margin_fraction: scaling is not close enough to uniform marginals");
  const QMetric q(ctx);
  const double ww = q.norm2(w);
  if (!(ww > 0.0)) throw InvalidInput("margin_fraction: w is zero");
  Index count = 0;
  for (Index j = 0; j < frame.n(); ++j) {
    const Vector u = frame.column(j);
    const double wu = q.inner(w, u);
    if (wu * wu >= ww * q.norm2(u) / (4.0 * d)) ++count;
  }
  return static_cast<double>(count) / n;
}

}  // namespace framescale
