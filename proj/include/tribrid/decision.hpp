#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tribrid/encoder.hpp"

namespace tribrid {

enum class Stance { Support, Oppose, Abstain };

std::string stance_code(Stance s);  // "S" / "O" / "A"

enum class ThresholdFamily { Logit, Distance };

struct StanceDecision {
  Stance value = Stance::Abstain;
  double confidence = 0;   // the signal gap used
  bool no_negation = false;  // distance procedure fallback marker
};

// Support if the logit gap clears tau and the support logit wins (ties go to
// support); abstain below tau.
StanceDecision class_log(const Signals& s, double tau);

// Support if the perspective is closer than its negation by at least tau;
// ties go to oppose. Without a negation the procedure abstains and marks it.
StanceDecision class_dist(const Signals& s, double tau);

// Both signal families point the same way (strict inequalities).
std::optional<Stance> signals_agree(const Signals& s);

// Smallest observed gap discarding at least fraction X of `gaps`; X=0 -> 0,
// X beyond the largest achievable fraction -> above the max gap.
double calibrate_tau(std::vector<double> gaps, double discard_fraction);

}  // namespace tribrid
