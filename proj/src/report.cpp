#include "retrainbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "retrainbench/csv.hpp"
#include "retrainbench/errors.hpp"

namespace retrainbench {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                    "#d62728", "#9467bd", "#8c564b"};

struct ChartSeries {
    std::string name;
    std::vector<double> y;  // aligned with the x labels; NaN = missing point
};

std::string svg_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string trim_number(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Categorical-x line chart. `y_ref`, when set, draws a dashed reference line
/// (the baseline at 1.0 on relative charts).
std::string render_line_chart(const std::string& title, const std::string& y_label,
                              const std::vector<int>& x_values,
                              const std::vector<ChartSeries>& series,
                              std::optional<double> y_ref) {
    const double width = 780.0, height = 430.0;
    const double left = 70.0, right = width - 170.0, top = 50.0, bottom = height - 50.0;

    double y_min = y_ref.value_or(std::numeric_limits<double>::infinity());
    double y_max = y_ref.value_or(-std::numeric_limits<double>::infinity());
    for (const auto& s : series) {
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (!std::isfinite(y_min) || !std::isfinite(y_max)) {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min < 1e-12) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double pad = 0.08 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const auto x_of = [&](std::size_t i) {
        if (x_values.size() == 1) return (left + right) / 2.0;
        return left + (right - left) * static_cast<double>(i) /
                          static_cast<double>(x_values.size() - 1);
    };
    const auto y_of = [&](double v) {
        return bottom - (bottom - top) * (v - y_min) / (y_max - y_min);
    };

    json meta;
    meta["title"] = title;
    meta["x"] = x_values;
    json series_json;
    for (const auto& s : series) series_json[s.name] = s.y;
    meta["series"] = std::move(series_json);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<metadata id=\"chart-data\">" << meta.dump() << "</metadata>\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << svg_escape(title) << "</text>\n";

    // Axes.
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = y_min + (y_max - y_min) * tick / 4.0;
        const double y = y_of(v);
        svg << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << trim_number(v) << "</text>\n";
    }
    for (std::size_t i = 0; i < x_values.size(); ++i) {
        const double x = x_of(i);
        svg << "<line x1=\"" << x << "\" y1=\"" << bottom << "\" x2=\"" << x << "\" y2=\""
            << bottom + 4 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << x_values[i] << "</text>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">retrain "
           "scenario r</text>\n";
    svg << "<text x=\"18\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 "
        << (top + bottom) / 2 << ")\">" << svg_escape(y_label) << "</text>\n";

    if (y_ref) {
        const double y = y_of(*y_ref);
        svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << right << "\" y2=\"" << y
            << "\" stroke=\"#888888\" stroke-dasharray=\"5,4\"/>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& color = kPalette[s % std::size(kPalette)];
        std::ostringstream points;
        bool in_segment = false;
        std::ostringstream path;
        for (std::size_t i = 0; i < series[s].y.size(); ++i) {
            const double v = series[s].y[i];
            if (!std::isfinite(v)) {
                in_segment = false;
                continue;
            }
            path << (in_segment ? " L " : " M ") << x_of(i) << ' ' << y_of(v);
            in_segment = true;
            points << "<circle cx=\"" << x_of(i) << "\" cy=\"" << y_of(v)
                   << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\"/>\n";
        svg << points.str();
        const double ly = top + 18.0 * static_cast<double>(s);
        svg << "<line x1=\"" << right + 14 << "\" y1=\"" << ly << "\" x2=\"" << right + 38
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << right + 44 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << svg_escape(series[s].name)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string render_bar_chart(const std::string& title, const std::vector<int>& x_values,
                             const std::vector<ChartSeries>& series) {
    const double width = 780.0, height = 430.0;
    const double left = 70.0, right = width - 170.0, top = 50.0, bottom = height - 50.0;

    double y_max = 1.0;
    for (const auto& s : series) {
        for (double v : s.y) y_max = std::max(y_max, v);
    }

    json meta;
    meta["title"] = title;
    meta["x"] = x_values;
    json series_json;
    for (const auto& s : series) series_json[s.name] = s.y;
    meta["series"] = std::move(series_json);

    const double slot = (right - left) / static_cast<double>(x_values.size());
    const double bar = slot * 0.8 / static_cast<double>(series.size());

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<metadata id=\"chart-data\">" << meta.dump() << "</metadata>\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << svg_escape(title) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = y_max * tick / 4.0;
        const double y = bottom - (bottom - top) * v / y_max;
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << trim_number(v) << "</text>\n";
    }
    for (std::size_t i = 0; i < x_values.size(); ++i) {
        const double x0 = left + slot * static_cast<double>(i) + slot * 0.1;
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double v = series[s].y[i];
            const double h = (bottom - top) * v / y_max;
            svg << "<rect x=\"" << x0 + bar * static_cast<double>(s) << "\" y=\"" << bottom - h
                << "\" width=\"" << bar << "\" height=\"" << h << "\" fill=\""
                << kPalette[s % std::size(kPalette)] << "\"/>\n";
        }
        svg << "<text x=\"" << left + slot * (static_cast<double>(i) + 0.5) << "\" y=\""
            << bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << x_values[i] << "</text>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">optimal "
           "retrain scenario r*</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double ly = top + 18.0 * static_cast<double>(s);
        svg << "<rect x=\"" << right + 14 << "\" y=\"" << ly - 8
            << "\" width=\"24\" height=\"10\" fill=\"" << kPalette[s % std::size(kPalette)]
            << "\"/>\n";
        svg << "<text x=\"" << right + 44 << "\" y=\"" << ly + 2
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << svg_escape(series[s].name)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

struct MetricsTable {
    std::vector<std::string> models;                       // row order
    std::vector<int> scenarios;                            // ascending
    std::map<std::string, std::map<int, std::vector<double>>> cells;  // model -> r -> columns
    std::vector<std::string> columns;
};

MetricsTable read_metrics(const std::string& path) {
    if (!fs::exists(path)) throw MissingArtifact("missing artifact: " + path);
    const CsvTable table = read_csv(path);
    MetricsTable out;
    out.columns.assign(table.header.begin() + 2, table.header.end());
    for (const auto& row : table.rows) {
        const std::string& model = row[0];
        const int r = std::stoi(row[1]);
        if (std::find(out.models.begin(), out.models.end(), model) == out.models.end()) {
            out.models.push_back(model);
        }
        if (std::find(out.scenarios.begin(), out.scenarios.end(), r) == out.scenarios.end()) {
            out.scenarios.push_back(r);
        }
        std::vector<double> values;
        for (std::size_t c = 2; c < row.size(); ++c) {
            double v = std::nan("");
            parse_double(row[c], v);
            values.push_back(v);
        }
        out.cells[model][r] = std::move(values);
    }
    std::sort(out.scenarios.begin(), out.scenarios.end());
    return out;
}

std::size_t column_index(const MetricsTable& table, const std::string& name) {
    const auto it = std::find(table.columns.begin(), table.columns.end(), name);
    if (it == table.columns.end()) throw MissingArtifact("metrics.csv lacks column " + name);
    return static_cast<std::size_t>(it - table.columns.begin());
}

std::vector<ChartSeries> series_for(const MetricsTable& table, const std::string& column) {
    const std::size_t idx = column_index(table, column);
    std::vector<ChartSeries> out;
    for (const auto& model : table.models) {
        ChartSeries s;
        s.name = model;
        for (int r : table.scenarios) {
            const auto it = table.cells.at(model).find(r);
            s.y.push_back(it == table.cells.at(model).end() ? std::nan("") : it->second[idx]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& written) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path.string());
    out << content;
    written.push_back(path.filename().string());
}

}  // namespace

std::string extract_chart_data(const std::string& svg_path) {
    std::ifstream in(svg_path);
    if (!in) throw MissingArtifact("cannot open svg: " + svg_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const std::string open = "<metadata id=\"chart-data\">";
    const std::size_t begin = text.find(open);
    const std::size_t end = text.find("</metadata>");
    if (begin == std::string::npos || end == std::string::npos) {
        throw MissingArtifact("svg has no embedded chart data: " + svg_path);
    }
    return text.substr(begin + open.size(), end - begin - open.size());
}

std::vector<std::string> write_report(const std::string& artifact_dir) {
    const fs::path dir(artifact_dir);
    std::vector<std::string> written;

    const MetricsTable metrics = read_metrics((dir / "metrics.csv").string());
    write_file(dir / "rel_rmsse.svg",
               render_line_chart("RMSSE relative to the baseline scenario", "rel RMSSE",
                                 metrics.scenarios, series_for(metrics, "rel_rmsse"), 1.0),
               written);
    write_file(dir / "rel_smql.svg",
               render_line_chart("SMQL relative to the baseline scenario", "rel SMQL",
                                 metrics.scenarios, series_for(metrics, "rel_smql"), 1.0),
               written);
    write_file(dir / "rel_ct.svg",
               render_line_chart("Computing time relative to the baseline scenario", "rel CT",
                                 metrics.scenarios, series_for(metrics, "rel_ct"), 1.0),
               written);

    const MetricsTable costs = read_metrics((dir / "cost.csv").string());
    write_file(dir / "cost.svg",
               render_line_chart("Estimated fleet forecasting cost", "cost", costs.scenarios,
                                 series_for(costs, "cost"), std::nullopt),
               written);
    write_file(dir / "savings.svg",
               render_line_chart("Savings vs the baseline scenario", "savings", costs.scenarios,
                                 series_for(costs, "savings"), 0.0),
               written);

    // Optimal-frequency histogram over the scenario set.
    const fs::path optimal_path = dir / "optimal.csv";
    if (!fs::exists(optimal_path)) throw MissingArtifact("missing artifact: " + optimal_path.string());
    const CsvTable optimal = read_csv(optimal_path.string());
    std::map<int, std::size_t> hist_rmsse;
    std::map<int, std::size_t> hist_smql;
    for (int r : metrics.scenarios) {
        hist_rmsse[r] = 0;
        hist_smql[r] = 0;
    }
    for (const auto& row : optimal.rows) {
        hist_rmsse[std::stoi(row[1])] += 1;
        hist_smql[std::stoi(row[2])] += 1;
    }
    ChartSeries rmsse_bars{"r* by RMSSE", {}};
    ChartSeries smql_bars{"r* by SMQL", {}};
    for (int r : metrics.scenarios) {
        rmsse_bars.y.push_back(static_cast<double>(hist_rmsse[r]));
        smql_bars.y.push_back(static_cast<double>(hist_smql[r]));
    }
    write_file(dir / "optimal_hist.svg",
               render_bar_chart("Optimal retraining frequency per series", metrics.scenarios,
                                {rmsse_bars, smql_bars}),
               written);

    std::ostringstream summary;
    summary << "model          r      mean_rmsse  mean_smql   rel_rmsse  rel_smql   rel_ct     "
               "ct_wall_s\n";
    const std::size_t c_rmsse = column_index(metrics, "mean_rmsse");
    const std::size_t c_smql = column_index(metrics, "mean_smql");
    const std::size_t c_ct = column_index(metrics, "ct_wall_s");
    const std::size_t c_rr = column_index(metrics, "rel_rmsse");
    const std::size_t c_rs = column_index(metrics, "rel_smql");
    const std::size_t c_rc = column_index(metrics, "rel_ct");
    char line[256];
    for (const auto& model : metrics.models) {
        for (int r : metrics.scenarios) {
            const auto it = metrics.cells.at(model).find(r);
            if (it == metrics.cells.at(model).end()) continue;
            const auto& v = it->second;
            std::snprintf(line, sizeof(line),
                          "%-14s %-6d %-11.4f %-11.4f %-10.4f %-10.4f %-10.4f %.3f\n",
                          model.c_str(), r, v[c_rmsse], v[c_smql], v[c_rr], v[c_rs], v[c_rc],
                          v[c_ct]);
            summary << line;
        }
    }
    write_file(dir / "summary.txt", summary.str(), written);
    return written;
}

}  // namespace retrainbench
