// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlsdecay/decay.hpp"
#include "nlsdecay/nls.hpp"
#include "nlsdecay/operator.hpp"
#include "nlsdecay/spectral.hpp"

namespace nlsdecay {

struct RunConfig {
  int dimension = 1;
  double half_length = 20.0;
  int points = 1024;
  int order = 2;
  double mu = 1.0;
  double sigma = 1.0;
  std::string potentials_file;  // overrides the soliton when set
  bool potentials_off = false;
  double strip_margin = 0.05;
  double imag_cap = 4.0;
  double eigen_tolerance = 1e-8;
  double newton_tolerance = 1e-10;
  double rate_tolerance = 0.02;
  // Multiples of mu_E; each must lie in (0, 1/2).
  std::vector<double> delta_fractions{0.05, 0.1, 0.2};
  std::vector<double> epsilons{1.0, 0.3, 0.1, 0.03, 0.0};
  // Absolute radii; unset means 0.4 L and 0.85 L.
  std::optional<double> fit_lo;
  std::optional<double> fit_hi;
  std::string out_dir = "nlsdecay-out";
  std::uint64_t seed = 12345;
  bool canonical = false;
  bool eigenvectors = false;

  double window_lo() const { return fit_lo.value_or(0.4 * half_length); }
  double window_hi() const { return fit_hi.value_or(0.85 * half_length); }
  GapOptions gap_options() const;
  Grid grid() const;
  // Throws ValidationError on the first inconsistent field.
  void validate() const;
};

struct ProfileStage {
  std::string source;  // "soliton", "file" or "off"
  std::optional<StationaryProfile> profile;
  double seed_residual = 0.0;  // closed-form starting guess
  PotentialPair potentials;
};

struct EigenEntry {
  SpectralPoint point;
  std::optional<JordanStructure> jordan;  // absent when the Riesz step failed
  double riesz_radius = 0.0;
  std::string note;
};

struct SpectrumStage {
  SpectralSet set;
  std::vector<EigenEntry> entries;
  SymmetryReport symmetry;
  double lminus_smallest = 0.0;
  bool lminus_positive = false;
  bool axis_confined = false;
};

struct ModeDecay {
  int point = 0;
  int chain = 0;
  int position = 0;  // 0 = top of the chain
  DecayReport report;
};

struct LemmaEntry {
  int point = 0;
  int chain = 0;
  int length = 1;  // 1: eigenvector alone, otherwise the whole chain
  double delta = 0.0;
  LemmaReport report;
};

struct PointDecay {
  int point = 0;
  Complex energy;
  double mu_e = 0.0;
  std::vector<double> deltas;
  double identity_residual = 0.0;
  std::string skipped;  // reason, empty when the point was analysed
};

struct DecayStage {
  std::vector<PointDecay> points;
  std::vector<ModeDecay> modes;
  std::vector<LemmaEntry> lemmas;
};

ProfileStage run_profile(const RunConfig& cfg);
BlockOperator build_operator(const RunConfig& cfg, const ProfileStage& profile);
SpectrumStage run_spectrum(const RunConfig& cfg, const ProfileStage& profile,
                           const BlockOperator& op);
DecayStage run_decay(const RunConfig& cfg, const ProfileStage& profile,
                     const SpectrumStage& spectrum);

// Pass threshold for the weighted-conjugation identity residual.
inline constexpr double kIdentityTolerance = 1e-4;

}  // namespace nlsdecay
