#ifndef MASSCOVER_MODEL_IO_HPP
#define MASSCOVER_MODEL_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "masscover/probcore.hpp"

namespace masscover {

/// A parsed and validated model file: source law (zero symbols stripped),
/// mass function (defaults to M = 1), normalized distortion, and an optional
/// Markov transition matrix for block-rate runs.
struct Model {
  ProbabilityVector p;
  MassVector m;
  DistortionMatrix rho;
  std::optional<std::vector<double>> transition;  // row-major, square over the full alphabet
  std::optional<ProbabilityVector> initial;       // explicit initial law, if any

  std::vector<std::size_t> kept_symbols;  // original indices of surviving source symbols
  std::vector<double> rho_offsets;        // row minima subtracted during normalization
  bool had_mass;                          // file carried an explicit m section
};

/// Parses the plain-text model format:
///   p = 0.6 0.4
///   m = 0.6 0.4
///   rho = 0 1 / 1 0
///   trans = 0.9 0.1 / 0.2 0.8
/// Rows are separated by '/', values by whitespace; '#' starts a comment.
Model parse_model(const std::string& text);

Model load_model(const std::string& path);

/// Inverse serializer: load_model(emit_model(model)) reproduces the model
/// exactly (doubles are written round-trippably).
std::string emit_model(const Model& model);

}  // namespace masscover

#endif
