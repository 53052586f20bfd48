#pragma once

#include <optional>
#include <string>

#include "hypobridge/model.hpp"

namespace hypobridge {

/// On-disk model description: drift and diffusion as nested row-major
/// arrays, plus optional metadata. JSON is the primary surface syntax; a
/// TOML subset covering the same schema is accepted as an alternative.
struct ModelFile {
  Matrix A;
  Matrix B;
  std::optional<double> rank_tol;
  std::optional<std::string> label;

  ModelSpec to_spec() const {
    return build_model(A, B, rank_tol.value_or(1e-10));
  }
};

ModelFile parse_model_json(const std::string& text);
ModelFile parse_model_toml(const std::string& text);

/// Reads a model file; dispatches on extension (.toml is TOML, everything
/// else JSON). Throws ParseError with a located message on malformed input.
ModelFile read_model_file(const std::string& path);

std::string model_to_json(const ModelFile& mf);
void write_model_file(const std::string& path, const ModelFile& mf);

}  // namespace hypobridge
