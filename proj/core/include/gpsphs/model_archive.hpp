#pragma once

#include <string>

#include "gpsphs/pipeline.hpp"
#include "gpsphs/structure_spec.hpp"

namespace gpsphs {

/// Versioned JSON archive of a trained model plus the structure it was
/// trained against. Numbers round-trip losslessly; caches (Cholesky factors,
/// Laplace modes) are rebuilt deterministically on load, so
/// save(load(x)) == save(x) byte for byte.
struct ModelArchive {
  static constexpr int kFormatVersion = 1;

  TrainedModel model;
  StructureSpec structure;
};

void save_model_archive(const ModelArchive& archive, const std::string& path);
ModelArchive load_model_archive(const std::string& path);

std::string model_archive_to_json(const ModelArchive& archive);
ModelArchive model_archive_from_json(const std::string& text);

}  // namespace gpsphs
