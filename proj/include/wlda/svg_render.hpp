#pragma once

#include "wlda/masked_data.hpp"

namespace wlda {

/// Deterministic static SVG emission for heatmaps and bar charts.
/// Identical input yields byte-identical files (fixed formatting, no
/// timestamps, no randomness).

struct HeatmapOptions {
    // Fixed symmetric color range; <= 0 means use the symmetric data range.
    double range = 0.0;
    std::string title;
};

/// Writes a diverging-scale heatmap (blue-white-red) with per-cell 2-decimal
/// annotations, row/column labels, and a legend. Rejects non-finite entries.
void emit_heatmap(const Matrix& values, const std::vector<std::string>& labels,
                  const std::string& path, const HeatmapOptions& opts = {});

/// Writes a horizontal bar chart with 2-decimal value annotations.
void emit_bars(const Vector& values, const std::vector<std::string>& labels,
               const std::string& path, const std::string& title = "");

} // namespace wlda
