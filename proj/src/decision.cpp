#include "tribrid/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tribrid {

std::string stance_code(Stance s) {
  switch (s) {
    case Stance::Support: return "S";
    case Stance::Oppose: return "O";
    case Stance::Abstain: return "A";
  }
  return "?";
}

StanceDecision class_log(const Signals& s, double tau) {
  double gap = std::fabs(s.lpos - s.lneg);
  StanceDecision d;
  d.confidence = gap;
  if (gap >= tau)
    d.value = s.lpos >= s.lneg ? Stance::Support : Stance::Oppose;
  return d;
}

StanceDecision class_dist(const Signals& s, double tau) {
  StanceDecision d;
  if (!s.has_negation) {
    d.no_negation = true;
    return d;
  }
  double gap = std::fabs(s.dist_p - s.dist_np);
  d.confidence = gap;
  if (gap >= tau)
    d.value = s.dist_p < s.dist_np ? Stance::Support : Stance::Oppose;
  return d;
}

std::optional<Stance> signals_agree(const Signals& s) {
  if (!s.has_negation) return std::nullopt;
  if (s.lpos > s.lneg && s.dist_p < s.dist_np) return Stance::Support;
  if (s.lpos < s.lneg && s.dist_p > s.dist_np) return Stance::Oppose;
  return std::nullopt;
}

double calibrate_tau(std::vector<double> gaps, double x) {
  if (gaps.empty()) throw std::invalid_argument("calibrate_tau: no gaps");
  if (x < 0 || x > 1) throw std::invalid_argument("calibrate_tau: discard fraction outside [0,1]");
  if (x == 0) return 0.0;
  std::sort(gaps.begin(), gaps.end());
  const double m = static_cast<double>(gaps.size());
  // Smallest gap g with fraction{gap < g} >= x; ties retained (gap >= tau kept).
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    if (k == 0 || gaps[k] != gaps[k - 1]) {
      if (static_cast<double>(k) / m >= x) return gaps[k];
    }
  }
  return std::nextafter(gaps.back(), std::numeric_limits<double>::infinity());
}

}  // namespace tribrid
