// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "codol/types.hpp"

namespace codol {

// Minimal standalone SVG renderers for report artifacts.
std::string svg_heatmap(const Mat& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title);

struct LineSeries {
    std::string name;
    std::vector<double> y;
    std::vector<double> error;  // optional symmetric error bars
};

std::string svg_line_plot(const std::vector<double>& x, const std::vector<LineSeries>& series,
                          const std::string& title, const std::string& x_label, const std::string& y_label);

}  // namespace codol
