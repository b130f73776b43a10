#include "idmauc/hazards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace idmauc {

namespace {

void check_weibull(const WeibullHazard& w) {
  if (!(w.alpha > 0.0) || !std::isfinite(w.alpha) || !(w.shape > 0.0) || !std::isfinite(w.shape))
    throw std::invalid_argument("Weibull hazard needs alpha > 0 and shape > 0");
}

void check_pwc(const PiecewiseConstantHazard& p) {
  if (p.rates.size() != p.cutpoints.size() + 1)
    throw std::invalid_argument("piecewise hazard needs one more rate than cutpoints");
  for (std::size_t i = 0; i < p.cutpoints.size(); ++i) {
    if (!(p.cutpoints[i] > 0.0) || !std::isfinite(p.cutpoints[i]))
      throw std::invalid_argument("piecewise cutpoints must be positive and finite");
    if (i > 0 && !(p.cutpoints[i - 1] < p.cutpoints[i]))
      throw std::invalid_argument("piecewise cutpoints must be strictly increasing");
  }
  for (double r : p.rates)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("piecewise rates must be non-negative and finite");
}

void check_step(const StepCumulativeHazard& s) {
  if (s.jump_times.size() != s.increments.size())
    throw std::invalid_argument("step hazard needs one increment per jump time");
  for (std::size_t i = 0; i < s.jump_times.size(); ++i) {
    if (!std::isfinite(s.jump_times[i]) || s.jump_times[i] < 0.0)
      throw std::invalid_argument("step jump times must be finite and non-negative");
    if (i > 0 && !(s.jump_times[i - 1] < s.jump_times[i]))
      throw std::invalid_argument("step jump times must be strictly increasing");
    if (!(s.increments[i] >= 0.0) || !std::isfinite(s.increments[i]))
      throw std::invalid_argument("step increments must be non-negative and finite");
  }
}

// Index of the segment containing t under the left-closed convention.
std::size_t pwc_segment(const PiecewiseConstantHazard& p, double t) {
  return static_cast<std::size_t>(
      std::upper_bound(p.cutpoints.begin(), p.cutpoints.end(), t) - p.cutpoints.begin());
}

}  // namespace

double StepCumulativeHazard::value_at(double t) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < jump_times.size() && jump_times[i] <= t; ++i) sum += increments[i];
  return sum;
}

double StepCumulativeHazard::value_before(double t) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < jump_times.size() && jump_times[i] < t; ++i) sum += increments[i];
  return sum;
}

bool is_step(const Hazard& h) { return std::holds_alternative<StepCumulativeHazard>(h); }
bool is_piecewise(const Hazard& h) { return std::holds_alternative<PiecewiseConstantHazard>(h); }

void check_hazard(const Hazard& h) {
  std::visit([](const auto& v) {
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, WeibullHazard>) check_weibull(v);
    else if constexpr (std::is_same_v<T, PiecewiseConstantHazard>) check_pwc(v);
    else check_step(v);
  }, h);
}

double hazard_at(const Hazard& h, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("hazard_at needs finite t >= 0");
  if (const auto* w = std::get_if<WeibullHazard>(&h)) {
    check_weibull(*w);
    if (t == 0.0) {
      if (w->shape < 1.0) throw std::domain_error("Weibull hazard diverges at t = 0 for shape < 1");
      return w->shape == 1.0 ? w->alpha : 0.0;
    }
    return w->alpha * w->shape * std::pow(t, w->shape - 1.0);
  }
  if (const auto* p = std::get_if<PiecewiseConstantHazard>(&h)) {
    check_pwc(*p);
    return p->rates[pwc_segment(*p, t)];
  }
  throw std::domain_error("step cumulative hazards have no pointwise hazard");
}

double cumulative_hazard(const Hazard& h, double s, double t) {
  if (!(0.0 <= s) || !(s <= t) || !std::isfinite(t))
    throw std::domain_error("cumulative_hazard needs 0 <= s <= t, finite");
  if (const auto* w = std::get_if<WeibullHazard>(&h)) {
    check_weibull(*w);
    return w->alpha * (std::pow(t, w->shape) - std::pow(s, w->shape));
  }
  if (const auto* p = std::get_if<PiecewiseConstantHazard>(&h)) {
    check_pwc(*p);
    double total = 0.0;
    double lo = s;
    std::size_t seg = pwc_segment(*p, s);
    while (lo < t) {
      double hi = seg < p->cutpoints.size() ? std::min(p->cutpoints[seg], t) : t;
      total += p->rates[seg] * (hi - lo);
      lo = hi;
      ++seg;
    }
    return total;
  }
  const auto& st = std::get<StepCumulativeHazard>(h);
  check_step(st);
  return st.value_at(t) - st.value_at(s);
}

}  // namespace idmauc
