#pragma once

// Binary PNM images and JSON model/statistics files.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "grf/appearance.hpp"
#include "grf/fields.hpp"
#include "grf/grid_model.hpp"

namespace grf {

/// P5 (grey) or P6 (RGB), maxval 255.  Values are scaled to [0,1].
Image read_image(std::istream& in);
Image read_image(const std::filesystem::path& path);
/// Values are clamped to [0,1] and rounded to the nearest of 256 levels.
void write_image(std::ostream& out, const Image& image);
void write_image(const std::filesystem::path& path, const Image& image);

/// P5 with pixel value = label id.  Throws LabelOutOfRange when a value is
/// not below label_count (label_count <= 0 skips the check).
Labelling read_labelling(std::istream& in, int label_count = 0);
Labelling read_labelling(const std::filesystem::path& path, int label_count = 0);
void write_labelling(std::ostream& out, const Labelling& y);
void write_labelling(const std::filesystem::path& path, const Labelling& y);

/// P5 with 0 = free and v >= 1 = clamped to label v-1.
ClampMask read_clamp_mask(std::istream& in, int label_count = 0);
ClampMask read_clamp_mask(const std::filesystem::path& path, int label_count = 0);
void write_clamp_mask(std::ostream& out, const ClampMask& mask);
void write_clamp_mask(const std::filesystem::path& path, const ClampMask& mask);

/// Free-form key/value record of how a file was produced.
using Provenance = std::map<std::string, std::string>;

struct ModelFile {
  GrfModel model;
  std::optional<AppearanceModel> appearance;
  Provenance provenance;
};

inline constexpr int kModelFormatVersion = 1;

/// Doubles are written with 17 significant digits, so read(write(m))
/// reproduces every potential bit for bit.  Structure invariants are checked
/// again on read.
std::string model_to_json(const ModelFile& file);
ModelFile model_from_json(const std::string& text);
void write_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile read_model(const std::filesystem::path& path);

struct StatisticsFile {
  SufficientStatistics stats;
  Provenance provenance;
};

std::string statistics_to_json(const StatisticsFile& file);
/// Throws DimensionMismatch for ragged tables, InvalidArgument for negative entries.
StatisticsFile statistics_from_json(const std::string& text);
void write_statistics(const std::filesystem::path& path, const StatisticsFile& file);
StatisticsFile read_statistics(const std::filesystem::path& path);

}  // namespace grf
