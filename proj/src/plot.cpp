// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/plot.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace codol {

namespace {

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Blue (low) to red (high).
std::string color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 * t));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(2.0 * t - 1.0)) * 0.8));
    return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

}  // namespace

std::string svg_heatmap(const Mat& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title) {
    const int cell = 48;
    const int left = 120;
    const int top = 60;
    const int width = left + cell * static_cast<int>(values.cols()) + 20;
    const int height = top + cell * static_cast<int>(values.rows()) + 20;
    const double lo = values.size() ? values.minCoeff() : 0.0;
    const double hi = values.size() ? values.maxCoeff() : 1.0;
    const double span = hi > lo ? hi - lo : 1.0;

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"11\">\n<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n",
        width, height, left, escape(title));
    for (Index c = 0; c < values.cols(); ++c) {
        const std::string label = c < static_cast<Index>(col_labels.size()) ? col_labels[static_cast<std::size_t>(c)] : "";
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                           left + cell * c + cell / 2, top - 8, escape(label));
    }
    for (Index r = 0; r < values.rows(); ++r) {
        const std::string label = r < static_cast<Index>(row_labels.size()) ? row_labels[static_cast<std::size_t>(r)] : "";
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 6,
                           top + cell * r + cell / 2 + 4, escape(label));
        for (Index c = 0; c < values.cols(); ++c) {
            const double v = values(r, c);
            out += fmt::format(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>"
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"white\">{:.2f}</text>\n",
                left + cell * c, top + cell * r, cell, cell, color((v - lo) / span), left + cell * c + cell / 2,
                top + cell * r + cell / 2 + 4, v);
        }
    }
    out += "</svg>\n";
    return out;
}

std::string svg_line_plot(const std::vector<double>& x, const std::vector<LineSeries>& series,
                          const std::string& title, const std::string& x_label, const std::string& y_label) {
    const double width = 520;
    const double height = 360;
    const double left = 60;
    const double right = 20;
    const double top = 40;
    const double bottom = 50;
    double x_lo = x.empty() ? 0.0 : *std::min_element(x.begin(), x.end());
    double x_hi = x.empty() ? 1.0 : *std::max_element(x.begin(), x.end());
    double y_lo = 1e300;
    double y_hi = -1e300;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double e = i < s.error.size() ? s.error[i] : 0.0;
            y_lo = std::min(y_lo, s.y[i] - e);
            y_hi = std::max(y_hi, s.y[i] + e);
        }
    }
    if (y_lo > y_hi) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    auto px = [&](double v) { return left + (v - x_lo) / (x_hi - x_lo) * (width - left - right); };
    auto py = [&](double v) { return height - bottom - (v - y_lo) / (y_hi - y_lo) * (height - top - bottom); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"11\">\n<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n",
        width, height, left, escape(title));
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", left,
                       height - bottom, width - right);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", left, top,
                       height - bottom);
    for (double v : x) {
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", px(v),
                           height - bottom + 16, v);
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", left - 4, py(y_lo),
                       y_lo);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", left - 4,
                       py(y_hi) + 8, y_hi);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                       (left + width - right) / 2, height - 12, escape(x_label));
    out += fmt::format("<text x=\"14\" y=\"{:.1f}\" transform=\"rotate(-90 14 {:.1f})\" text-anchor=\"middle\">{}</text>\n",
                       (top + height - bottom) / 2, (top + height - bottom) / 2, escape(y_label));
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* stroke = palette[s % 6];
        std::string points;
        for (std::size_t i = 0; i < series[s].y.size() && i < x.size(); ++i) {
            points += fmt::format("{:.1f},{:.1f} ", px(x[i]), py(series[s].y[i]));
            if (i < series[s].error.size() && series[s].error[i] > 0.0) {
                out += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"{3}\"/>\n",
                                   px(x[i]), py(series[s].y[i] - series[s].error[i]),
                                   py(series[s].y[i] + series[s].error[i]), stroke);
            }
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", stroke,
                           points);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", width - right - 110,
                           top + 14.0 * static_cast<double>(s + 1), stroke, escape(series[s].name));
    }
    out += "</svg>\n";
    return out;
}

}  // namespace codol
