#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "isac/harness.hpp"
#include "json.hpp"

namespace isac::bench {

using nlohmann::json;

namespace detail {

std::string format_number(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& cols,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("csv: cannot write " + path);
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

void render_svg(const std::string& path, const std::string& title,
                const std::string& xlabel, const std::string& ylabel,
                const std::vector<PlotSeries>& series, bool x_log,
                bool y_log) {
    struct Pt {
        double x, y;
    };
    std::vector<std::pair<std::string, std::vector<Pt>>> drawn;
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    bool any = false;
    for (const auto& s : series) {
        std::vector<Pt> pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double px = s.x[i], py = s.y[i];
            if (x_log) {
                if (!(px > 0)) continue;
                px = std::log10(px);
            }
            if (y_log) {
                if (!(py > 0)) continue;
                py = std::log10(py);
            }
            if (!std::isfinite(px) || !std::isfinite(py)) continue;
            pts.push_back({px, py});
        }
        if (pts.empty()) continue;
        std::sort(pts.begin(), pts.end(),
                  [](const Pt& a, const Pt& b) { return a.x < b.x; });
        for (const Pt& p : pts) {
            if (!any) {
                x_lo = x_hi = p.x;
                y_lo = y_hi = p.y;
                any = true;
            }
            x_lo = std::min(x_lo, p.x);
            x_hi = std::max(x_hi, p.x);
            y_lo = std::min(y_lo, p.y);
            y_hi = std::max(y_hi, p.y);
        }
        drawn.emplace_back(s.label, std::move(pts));
    }
    if (!any) throw ConfigError("plot: no plottable points");
    if (x_hi - x_lo < 1e-12) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (y_hi - y_lo < 1e-12) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }

    const double width = 640, height = 420;
    const double l = 70, r = 20, t = 40, b = 55;
    auto sx = [&](double v) {
        return l + (v - x_lo) / (x_hi - x_lo) * (width - l - r);
    };
    auto sy = [&](double v) {
        return height - b - (v - y_lo) / (y_hi - y_lo) * (height - t - b);
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("plot: cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
        << "font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << coord(width / 2) << "\" y=\"22\" "
        << "text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";

    for (int i = 0; i < 5; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
        const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
        out << "<line x1=\"" << coord(sx(fx)) << "\" y1=\"" << coord(t)
            << "\" x2=\"" << coord(sx(fx)) << "\" y2=\"" << coord(height - b)
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<line x1=\"" << coord(l) << "\" y1=\"" << coord(sy(fy))
            << "\" x2=\"" << coord(width - r) << "\" y2=\"" << coord(sy(fy))
            << "\" stroke=\"#dddddd\"/>\n";
        const double xv = x_log ? std::pow(10.0, fx) : fx;
        const double yv = y_log ? std::pow(10.0, fy) : fy;
        out << "<text x=\"" << coord(sx(fx)) << "\" y=\""
            << coord(height - b + 16) << "\" text-anchor=\"middle\">"
            << tick_label(xv) << "</text>\n";
        out << "<text x=\"" << coord(l - 6) << "\" y=\"" << coord(sy(fy) + 4)
            << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    out << "<rect x=\"" << coord(l) << "\" y=\"" << coord(t) << "\" width=\""
        << coord(width - l - r) << "\" height=\"" << coord(height - t - b)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << coord((l + width - r) / 2) << "\" y=\""
        << coord(height - 12) << "\" text-anchor=\"middle\">" << xlabel
        << (x_log ? " (log)" : "") << "</text>\n";
    out << "<text x=\"16\" y=\"" << coord((t + height - b) / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << coord((t + height - b) / 2) << ")\">" << ylabel
        << (y_log ? " (log)" : "") << "</text>\n";

    int idx = 0;
    for (const auto& [label, pts] : drawn) {
        const char* color = kPalette[idx % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const Pt& p : pts)
            out << coord(sx(p.x)) << "," << coord(sy(p.y)) << " ";
        out << "\"/>\n";
        for (const Pt& p : pts)
            out << "<circle cx=\"" << coord(sx(p.x)) << "\" cy=\""
                << coord(sy(p.y)) << "\" r=\"2.5\" fill=\"" << color
                << "\"/>\n";
        const double ly = t + 16 + 16.0 * idx;
        out << "<line x1=\"" << coord(width - r - 130) << "\" y1=\""
            << coord(ly - 4) << "\" x2=\"" << coord(width - r - 110)
            << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << coord(width - r - 104) << "\" y=\""
            << coord(ly) << "\">" << label << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
}

}  // namespace detail

namespace {

struct CsvData {
    std::vector<std::string> cols;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end())
            throw ConfigError("plot: column not in results.csv: " + name);
        return static_cast<std::size_t>(it - cols.begin());
    }
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

CsvData read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("plot: cannot open " + path);
    CsvData data;
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("plot: empty file " + path);
    data.cols = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        data.rows.push_back(split_csv_line(line));
    }
    return data;
}

double parse_double(const std::string& s, const std::string& col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("plot: non-numeric value '" + s + "' in column " +
                          col);
    }
}

}  // namespace

std::string emit_plot(const std::string& csv_path,
                      const std::string& spec_path) {
    std::ifstream in(spec_path);
    if (!in) throw ConfigError("plot: cannot open " + spec_path);
    json spec;
    try {
        in >> spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("plot: invalid spec JSON: ") + e.what());
    }
    if (!spec.is_object()) throw ConfigError("plot: spec must be an object");
    static const std::set<std::string> known = {
        "x", "y", "series", "x_log", "y_log", "y_db", "title", "out"};
    for (const auto& item : spec.items())
        if (!known.count(item.key()))
            throw ConfigError("plot: unknown spec key: " + item.key());
    for (const char* req : {"x", "y"})
        if (!spec.contains(req) || !spec.at(req).is_string())
            throw ConfigError(std::string("plot: spec needs string key ") +
                              req);

    const std::string xcol = spec.at("x").get<std::string>();
    const std::string ycol = spec.at("y").get<std::string>();
    const std::string series_col =
        spec.contains("series") ? spec.at("series").get<std::string>() : "";
    const bool x_log = spec.value("x_log", false);
    const bool y_log = spec.value("y_log", false);
    const bool y_db = spec.value("y_db", false);
    const std::string title =
        spec.value("title", ycol + " vs " + xcol);

    const CsvData data = read_csv(csv_path);
    const std::size_t xi = data.col(xcol);
    const std::size_t yi = data.col(ycol);
    const std::size_t si = series_col.empty() ? 0 : data.col(series_col);

    std::map<std::string, detail::PlotSeries> groups;
    std::vector<std::string> order;
    for (const auto& row : data.rows) {
        const std::string key = series_col.empty() ? ycol : row.at(si);
        if (!groups.count(key)) {
            groups[key].label = key;
            order.push_back(key);
        }
        double y = parse_double(row.at(yi), ycol);
        if (y_db) {
            if (!(y > 0)) continue;
            y = 10.0 * std::log10(y);
        }
        groups[key].x.push_back(parse_double(row.at(xi), xcol));
        groups[key].y.push_back(y);
    }
    std::vector<detail::PlotSeries> series;
    for (const std::string& key : order) series.push_back(groups[key]);

    namespace fs = std::filesystem;
    fs::path out = spec.value("out", ycol + "_vs_" + xcol + ".svg");
    if (out.is_relative()) out = fs::path(csv_path).parent_path() / out;
    detail::render_svg(out.string(), title, xcol,
                       y_db ? ycol + " (dB)" : ycol, series, x_log, y_log);
    return out.string();
}

}  // namespace isac::bench
