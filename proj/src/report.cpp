// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#include "codol/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "codol/errors.hpp"

namespace codol {

std::vector<MetricRow> metric_rows(const EvalReport& report) {
    std::vector<MetricRow> rows;
    for (const auto& cell : report.cells) {
        for (std::size_t k = 0; k < cell.accuracies.size(); ++k) {
            rows.push_back({report.variant, report.dataset, cell.train_domains, cell.test_domain,
                            k < cell.seeds.size() ? cell.seeds[k] : 0, report.class_length, report.domain_length,
                            report.ratio, cell.accuracies[k]});
        }
    }
    return rows;
}

namespace {

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricRow>& rows) {
    std::string out = std::string(kMetricsHeader) + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(r.variant), csv_field(r.dataset),
                           csv_field(r.train_domains), csv_field(r.test_domain), r.seed, r.class_length,
                           r.domain_length, r.ratio ? fmt::format("{}", *r.ratio) : std::string(),
                           fmt::format("{}", r.accuracy));
    }
    return out;
}

std::vector<MetricRow> parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw ParseError(std::string("metrics CSV must start with the header '") + kMetricsHeader + "'");
    }
    std::vector<MetricRow> rows;
    Index line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 9) {
            throw ParseError("metrics CSV line " + std::to_string(line_no) + " needs 9 fields");
        }
        try {
            MetricRow r;
            r.variant = f[0];
            r.dataset = f[1];
            r.train_domains = f[2];
            r.test_domain = f[3];
            r.seed = std::stoull(f[4]);
            r.class_length = std::stoll(f[5]);
            r.domain_length = std::stoll(f[6]);
            if (!f[7].empty()) r.ratio = std::stod(f[7]);
            r.accuracy = std::stod(f[8]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw ParseError("metrics CSV line " + std::to_string(line_no) + " has a malformed number");
        }
    }
    return rows;
}

std::vector<EvalReport> reports_from_rows(const std::vector<MetricRow>& rows) {
    using Key = std::tuple<std::string, std::string, Index, Index, std::optional<double>>;
    std::vector<Key> order;
    std::map<Key, EvalReport> reports;
    for (const auto& r : rows) {
        const Key key{r.variant, r.dataset, r.class_length, r.domain_length, r.ratio};
        auto [it, inserted] = reports.try_emplace(key);
        EvalReport& rep = it->second;
        if (inserted) {
            order.push_back(key);
            rep.variant = r.variant;
            rep.dataset = r.dataset;
            rep.class_length = r.class_length;
            rep.domain_length = r.domain_length;
            rep.ratio = r.ratio;
        }
        auto cell = std::find_if(rep.cells.begin(), rep.cells.end(), [&](const ReportCell& c) {
            return c.train_domains == r.train_domains && c.test_domain == r.test_domain;
        });
        if (cell == rep.cells.end()) {
            rep.cells.push_back({r.train_domains, r.test_domain, {}, {}, 0.0});
            cell = std::prev(rep.cells.end());
        }
        cell->seeds.push_back(r.seed);
        cell->accuracies.push_back(r.accuracy);
        if (std::find(rep.seeds.begin(), rep.seeds.end(), r.seed) == rep.seeds.end()) {
            rep.seeds.push_back(r.seed);
        }
    }
    std::vector<EvalReport> out;
    for (const auto& key : order) {
        EvalReport rep = reports.at(key);
        rep.finalize();
        out.push_back(std::move(rep));
    }
    return out;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"train_domains", c.train_domains},
                         {"test_domain", c.test_domain},
                         {"seeds", c.seeds},
                         {"accuracy", c.accuracies},
                         {"mean", c.mean}});
    }
    return {{"variant", report.variant},
            {"dataset", report.dataset},
            {"protocol", report.protocol},
            {"M_c", report.class_length},
            {"M_k", report.domain_length},
            {"ratio", report.ratio ? nlohmann::json(*report.ratio) : nlohmann::json(nullptr)},
            {"seeds", report.seeds},
            {"cells", cells},
            {"average", report.average}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.variant = j.at("variant").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.protocol = j.at("protocol").get<std::string>();
    r.class_length = j.at("M_c").get<Index>();
    r.domain_length = j.at("M_k").get<Index>();
    if (!j.at("ratio").is_null()) r.ratio = j.at("ratio").get<double>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& c : j.at("cells")) {
        r.cells.push_back({c.at("train_domains").get<std::string>(), c.at("test_domain").get<std::string>(),
                           c.at("seeds").get<std::vector<std::uint64_t>>(),
                           c.at("accuracy").get<std::vector<double>>(), c.at("mean").get<double>()});
    }
    r.average = j.at("average").get<double>();
    return r;
}

std::string format_accuracy(double value) {
    return fmt::format("{:.2f}", value);
}

namespace {

std::string column_name(const EvalReport& rep, const ReportCell& cell) {
    return rep.protocol == "single-source" ? cell.train_domains + " -> " + cell.test_domain : cell.test_domain;
}

}  // namespace

std::string markdown_table(const std::vector<EvalReport>& reports) {
    if (reports.empty()) {
        return {};
    }
    std::vector<std::string> columns;
    for (const auto& rep : reports) {
        for (const auto& c : rep.cells) {
            const std::string name = column_name(rep, c);
            if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
        }
    }
    std::string out = "| Method |";
    std::string rule = "|---|";
    for (const auto& c : columns) {
        out += " " + c + " |";
        rule += "---|";
    }
    out += " Avg |\n" + rule + "---|\n";
    for (const auto& rep : reports) {
        out += "| " + rep.variant + " |";
        for (const auto& col : columns) {
            auto it = std::find_if(rep.cells.begin(), rep.cells.end(),
                                   [&](const ReportCell& c) { return column_name(rep, c) == col; });
            out += it == rep.cells.end() ? " - |" : " " + format_accuracy(it->mean) + " |";
        }
        out += " " + format_accuracy(rep.average) + " |\n";
    }
    return out;
}

namespace {

nlohmann::json matrix_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

nlohmann::json alignment_to_json(const AlignmentReport& report) {
    return {{"classes", report.classes},
            {"domains", report.domains},
            {"class_similarity", matrix_json(report.class_similarity)},
            {"ablated_class_similarity", matrix_json(report.ablated_class_similarity)},
            {"domain_similarity", matrix_json(report.domain_similarity)},
            {"matched_mean", report.matched_mean},
            {"ablated_matched_mean", report.ablated_matched_mean},
            {"samples", report.samples}};
}

nlohmann::json ratio_rows_to_json(const std::vector<RatioRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        out.push_back({{"ratio", r.ratio},
                       {"mean", r.mean},
                       {"spread", r.spread},
                       {"seed_averages", r.seed_averages},
                       {"report", report_to_json(r.report)}});
    }
    return out;
}

nlohmann::json sweep_to_json(const std::vector<SweepCell>& cells) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : cells) {
        out.push_back({{"M_c", c.class_length}, {"M_k", c.domain_length}, {"report", report_to_json(c.report)}});
    }
    return out;
}

}  // namespace codol
