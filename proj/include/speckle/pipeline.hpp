#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "speckle/distances.hpp"
#include "speckle/error.hpp"
#include "speckle/ingest.hpp"

// File-to-report plumbing shared by the command-line tool: input loading,
// nested ROI sweeps and manifest-driven batches.
namespace speckle::pipeline {

enum class InputKind { automatic, amplitudes, image };

struct InputSpec {
  std::string path;
  InputKind kind = InputKind::automatic;
  std::optional<ingest::ImageFormat> format{};
  std::optional<ingest::RoiSpec> roi{};
  double dynamic_range = ingest::kDefaultDynamicRange;
};

/// True for a CSV file whose first non-empty line is the `amplitude` header.
inline bool looks_like_amplitude_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = ingest::detail::trim(line);
    if (trimmed.empty()) continue;
    return trimmed == "amplitude";
  }
  return false;
}

inline InputKind resolve_kind(const InputSpec& spec) {
  if (spec.kind != InputKind::automatic) return spec.kind;
  if (spec.format) return InputKind::image;
  return looks_like_amplitude_csv(spec.path) ? InputKind::amplitudes : InputKind::image;
}

/// Linear amplitudes of a whole image (display log mapping undone).
inline ingest::PixelMatrix load_linear_image(const InputSpec& spec) {
  return ingest::inverse_log_transform(ingest::load_image(spec.path, spec.format), spec.dynamic_range);
}

/// Raw (unnormalized) amplitude sample described by `spec`. Images need a ROI.
inline AmplitudeSample load_sample(const InputSpec& spec) {
  if (resolve_kind(spec) == InputKind::amplitudes) return ingest::read_amplitude_csv(spec.path);
  if (!spec.roi) throw InvalidArgument("image input requires --roi x0,y0,w,h");
  return ingest::extract_roi(load_linear_image(spec), *spec.roi);
}

inline distances::DistanceReport analyze(const AmplitudeSample& raw, const distances::DistanceSettings& settings) {
  return distances::distance_report(ingest::normalize_rms(raw), settings);
}

inline constexpr std::size_t kMinSweepPixels = 100;

inline const std::vector<double>& default_sweep_fractions() {
  static const std::vector<double> fractions = {1.0 / 64, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0};
  return fractions;
}

struct SweepRow {
  double fraction = 0.0;
  ingest::RoiSpec roi;
  std::optional<distances::DistanceReport> report;
  std::string warning;
};

/// Centered sub-ROI covering `fraction` of the base area (sides scaled by sqrt).
inline ingest::RoiSpec centered_sub_roi(const ingest::RoiSpec& base, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw InvalidArgument("ROI fraction must lie in (0, 1]");
  if (fraction == 1.0) return base;
  const double side = std::sqrt(fraction);
  const auto w = static_cast<std::size_t>(std::max(1.0, std::round(static_cast<double>(base.width) * side)));
  const auto h = static_cast<std::size_t>(std::max(1.0, std::round(static_cast<double>(base.height) * side)));
  return {base.x0 + (base.width - w) / 2, base.y0 + (base.height - h) / 2, w, h};
}

/// Distances over nested centered sub-ROIs of `base`; ROIs under
/// kMinSweepPixels pixels produce a warning row instead of a report.
inline std::vector<SweepRow> roi_sweep(const ingest::PixelMatrix& amplitudes, const ingest::RoiSpec& base,
                                       std::span<const double> fractions,
                                       const distances::DistanceSettings& settings) {
  // Surface an out-of-bounds base ROI before any work.
  (void)ingest::extract_roi(amplitudes, base);
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    SweepRow row;
    row.fraction = f;
    row.roi = centered_sub_roi(base, f);
    if (row.roi.area() < kMinSweepPixels) {
      row.warning = "skipped: sub-ROI has " + std::to_string(row.roi.area()) + " pixels (minimum " +
                    std::to_string(kMinSweepPixels) + ")";
    } else {
      row.report = analyze(ingest::extract_roi(amplitudes, row.roi), settings);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ManifestEntry {
  std::string path;
  std::optional<ingest::RoiSpec> roi{};
  std::string label;
};

namespace detail {

// One CSV record with double-quote handling.
inline std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cells.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back();
    } else {
      cells.back() += ch;
    }
  }
  for (auto& c : cells) c = std::string(ingest::detail::trim(c));
  return cells;
}

}  // namespace detail

/// Reads a manifest with header `path,roi,label`. ROIs containing commas must
/// be quoted ("x0,y0,w,h") or use another separator (x0;y0;w;h). Relative
/// paths resolve against the manifest's directory.
inline std::vector<ManifestEntry> read_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot read manifest: " + manifest_path);
  const auto base_dir = std::filesystem::path(manifest_path).parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  bool header_seen = false;
  std::size_t idx_path = 0, idx_roi = 1, idx_label = 2;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (ingest::detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_record(line);
    if (!header_seen) {
      header_seen = true;
      auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (cells[i] == name) return i;
        }
        return std::nullopt;
      };
      const auto p = find("path");
      const auto r = find("roi");
      const auto l = find("label");
      if (!p || !r || !l) throw DataError("manifest header must contain path,roi,label: " + manifest_path);
      idx_path = *p;
      idx_roi = *r;
      idx_label = *l;
      continue;
    }
    const std::size_t needed = std::max({idx_path, idx_roi, idx_label}) + 1;
    if (cells.size() < needed) {
      throw DataError("manifest line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(needed));
    }
    ManifestEntry entry;
    std::filesystem::path p(cells[idx_path]);
    entry.path = (p.is_absolute() || base_dir.empty()) ? p.string() : (base_dir / p).string();
    entry.label = cells[idx_label];
    if (!cells[idx_roi].empty()) entry.roi = ingest::parse_roi(cells[idx_roi]);
    entries.push_back(std::move(entry));
  }
  if (!header_seen) throw DataError("empty manifest: " + manifest_path);
  return entries;
}

struct BatchRow {
  ManifestEntry entry;
  std::optional<distances::DistanceReport> report;
  std::string error;
};

struct BatchOptions {
  InputKind kind = InputKind::automatic;
  std::optional<ingest::ImageFormat> format{};
  double dynamic_range = ingest::kDefaultDynamicRange;
  distances::DistanceSettings settings;
  std::size_t jobs = 1;
};

/// Analyzes every manifest entry; results come back in manifest order and a
/// failing entry yields an error row rather than aborting the batch.
inline std::vector<BatchRow> run_batch(const std::vector<ManifestEntry>& entries, const BatchOptions& options) {
  auto work = [&options](const ManifestEntry& entry) {
    BatchRow row{entry, std::nullopt, {}};
    try {
      InputSpec spec{entry.path, options.kind, options.format, entry.roi, options.dynamic_range};
      row.report = analyze(load_sample(spec), options.settings);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };
  std::vector<BatchRow> rows;
  rows.reserve(entries.size());
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
  for (std::size_t start = 0; start < entries.size(); start += jobs) {
    const std::size_t stop = std::min(entries.size(), start + jobs);
    if (jobs == 1) {
      rows.push_back(work(entries[start]));
      continue;
    }
    std::vector<std::future<BatchRow>> pending;
    for (std::size_t i = start; i < stop; ++i) pending.push_back(std::async(std::launch::async, work, std::cref(entries[i])));
    for (auto& f : pending) rows.push_back(f.get());
  }
  return rows;
}

}  // namespace speckle::pipeline
