#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abm/dataset.hpp"

namespace abm {

// Piecewise-constant logit contribution of one informative variable:
// logits[k] applies on the k-th interval of the cut sequence.
struct SegmentSpec {
  std::size_t variable = 0;
  std::vector<double> cuts;    // strictly increasing, inside (0, 1)
  std::vector<double> logits;  // cuts.size() + 1 entries
};

struct SynthSpec {
  std::size_t rows = 5000;
  std::size_t vars = 5;
  double intercept = 0.0;
  std::uint64_t seed = 1;
  std::vector<SegmentSpec> informative;  // variables not listed are pure noise

  void validate() const;
};

struct SynthData {
  Dataset data;
  SynthSpec truth;
};

// Features are iid uniform on (0, 1); the target is Bernoulli with logit
// intercept + sum of segment contributions. Column draws happen variable by
// variable, then one uniform per row decides the label, all from a single
// mt19937_64 stream, so a (spec, seed) pair pins every byte of the output.
SynthData generate(const SynthSpec& spec);

// Two informative variables with two well-separated cuts each (segment logits
// within [-1, 1], jumps of at least 0.9) plus noise variables. Cut positions
// are drawn from the seed, away from the edges of (0, 1).
SynthSpec default_spec(std::size_t rows, std::size_t vars, std::uint64_t seed);

std::string spec_to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const std::string& text);

// Dataset as CSV: feature columns x1..xp, then the target column y.
std::string synth_to_csv(const Dataset& data);

}  // namespace abm
