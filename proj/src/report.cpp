#include "trap/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "trap/io.hpp"
#include "trap/rng.hpp"

namespace trap::report {

namespace fs = std::filesystem;

void Csv::add_row(std::vector<std::string> row) {
    if (row.size() != header.size())
        throw std::invalid_argument("csv: row width " + std::to_string(row.size()) +
                                    " != header width " + std::to_string(header.size()));
    rows.push_back(std::move(row));
}

std::string Csv::to_text() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].find_first_of(",\n") != std::string::npos)
                throw std::invalid_argument("csv: cell contains a separator: " + cells[i]);
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

Csv Csv::parse(const std::string& text, const std::string& origin) {
    Csv csv;
    std::stringstream ss(text);
    std::string line;
    bool first = true;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (first) {
            csv.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != csv.header.size())
                throw std::runtime_error(origin + ": ragged csv row '" + line + "'");
            csv.rows.push_back(std::move(cells));
        }
    }
    if (first) throw std::runtime_error(origin + ": empty csv");
    return csv;
}

int Csv::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_csv(const std::string& path, const Csv& csv) {
    io::write_file_atomic(path, csv.to_text());
}

Csv read_csv(const std::string& path) {
    auto buf = io::read_file(path);
    return Csv::parse(std::string(buf.begin(), buf.end()), path);
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
    const double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& [label, pts] : series)
        for (const auto& [x, y] : pts) {
            if (!any) {
                xmin = xmax = x;
                ymin = ymax = y;
                any = true;
            }
            xmin = std::min(xmin, x), xmax = std::max(xmax, x);
            ymin = std::min(ymin, y), ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << x_label << "</text>\n";
    s << "<text x=\"14\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
      << H / 2 << ")\">" << y_label << "</text>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"10\">" << format_value(xmin)
      << "</text>\n<text x=\"" << W - R << "\" y=\"" << H - B + 16
      << "\" text-anchor=\"end\" font-size=\"10\">" << format_value(xmax) << "</text>\n";
    s << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-size=\"10\">"
      << format_value(ymin) << "</text>\n<text x=\"" << L - 4 << "\" y=\"" << T + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << format_value(ymax) << "</text>\n";
    for (size_t si = 0; si < series.size(); ++si) {
        const auto& [label, pts] = series[si];
        const char* color = colors[si % 8];
        if (pts.size() == 1) {
            s << "<circle cx=\"" << px(pts[0].first) << "\" cy=\"" << py(pts[0].second)
              << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        } else if (!pts.empty()) {
            s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : pts) s << px(x) << "," << py(y) << " ";
            s << "\"/>\n";
        }
        s << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 + 14 * static_cast<double>(si)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << label
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

int plot_groups(const std::string& dir, const std::string& csv_name, const std::string& stem,
                const std::vector<std::string>& group_cols, const std::string& x_col,
                const std::string& y_col) {
    const fs::path path = fs::path(dir) / csv_name;
    if (!fs::exists(path)) return 0;
    const Csv csv = read_csv(path.string());
    const int yc = csv.column(y_col);
    const int xc = x_col.empty() ? -1 : csv.column(x_col);
    if (yc < 0) return 0;
    std::vector<int> gcols;
    for (const auto& g : group_cols) {
        int c = csv.column(g);
        if (c >= 0) gcols.push_back(c);
    }
    std::vector<std::string> order;
    std::vector<std::vector<std::pair<double, double>>> pts;
    std::vector<long> row_in_group;
    for (const auto& row : csv.rows) {
        std::string key;
        for (int c : gcols) key += (key.empty() ? "" : "|") + row[static_cast<size_t>(c)];
        if (key.empty()) key = stem;
        auto it = std::find(order.begin(), order.end(), key);
        size_t gi;
        if (it == order.end()) {
            gi = order.size();
            order.push_back(key);
            pts.emplace_back();
            row_in_group.push_back(0);
        } else {
            gi = static_cast<size_t>(it - order.begin());
        }
        const std::string& yv = row[static_cast<size_t>(yc)];
        const double x = xc >= 0 ? std::stod(row[static_cast<size_t>(xc)])
                                 : static_cast<double>(row_in_group[gi]);
        ++row_in_group[gi];
        if (yv == "NA") continue;
        pts[gi].emplace_back(x, std::stod(yv));
    }
    int written = 0;
    for (size_t gi = 0; gi < order.size(); ++gi) {
        const std::string fname = stem + "_" + sanitize(order[gi]) + ".svg";
        const std::string svg = svg_line_chart(csv_name + "  " + order[gi],
                                               x_col.empty() ? "index" : x_col, y_col,
                                               {{order[gi], pts[gi]}});
        io::write_file_atomic((fs::path(dir) / fname).string(), svg);
        ++written;
    }
    return written;
}

}  // namespace

int emit_plots(const std::string& dir) {
    int n = 0;
    n += plot_groups(dir, "asr.csv", "plot_asr", {"source", "target"}, "", "asr");
    n += plot_groups(dir, "destruction.csv", "plot_destruction", {"preset", "corruption"}, "level",
                     "rate");
    n += plot_groups(dir, "rfd.csv", "plot_rfd", {"method"}, "", "value");
    n += plot_groups(dir, "trace.csv", "plot_trace", {}, "step", "mean_loss");
    return n;
}

void Manifest::add_seed(const std::string& stage, uint64_t seed) {
    seeds_.emplace_back(stage, seed);
}

void Manifest::add_file(const std::string& dir, const std::string& name) {
    const auto buf = io::read_file((fs::path(dir) / name).string());
    files_.emplace_back(name, fnv1a(buf.data(), buf.size()));
}

void Manifest::write(const std::string& path) const {
    char hex[32];
    std::ostringstream s;
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_hash_));
    s << "config_hash = " << hex << "\n";
    s << "master_seed = " << master_seed_ << "\n";
    for (const auto& [stage, seed] : seeds_) s << "seed." << stage << " = " << seed << "\n";
    for (const auto& [name, h] : files_) {
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
        s << "file " << name << " fnv1a=" << hex << "\n";
    }
    io::write_file_atomic(path, s.str());
}

}  // namespace trap::report
