// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codol/pipeline.hpp"

namespace codol {

// One line of the metrics CSV.
struct MetricRow {
    std::string variant;
    std::string dataset;
    std::string train_domains;
    std::string test_domain;
    std::uint64_t seed = 0;
    Index class_length = 0;
    Index domain_length = 0;
    std::optional<double> ratio;
    double accuracy = 0.0;

    bool operator==(const MetricRow&) const = default;
};

inline constexpr const char* kMetricsHeader =
    "variant,dataset,train_domains,test_domain,seed,M_c,M_k,ratio,accuracy";

std::vector<MetricRow> metric_rows(const EvalReport& report);
std::string metrics_csv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> parse_metrics_csv(const std::string& text);

// Groups rows by (variant, dataset, M_c, M_k, ratio), then by split in
// first-seen order.
std::vector<EvalReport> reports_from_rows(const std::vector<MetricRow>& rows);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// Two-decimal formatting used in tables.
std::string format_accuracy(double value);

// One row per report: per-test-domain means followed by the average.
std::string markdown_table(const std::vector<EvalReport>& reports);

nlohmann::json alignment_to_json(const AlignmentReport& report);
nlohmann::json ratio_rows_to_json(const std::vector<RatioRow>& rows);
nlohmann::json sweep_to_json(const std::vector<SweepCell>& cells);

}  // namespace codol
