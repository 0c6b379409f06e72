#include "agn/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "agn/csv.hpp"
#include "agn/error.hpp"

namespace agn {

void write_accuracy_csv(const std::vector<AccuracyRow>& rows, const std::filesystem::path& path,
                        const std::string& comment) {
    CsvWriter csv(path, {"opt_lin", "nn_mean", "nn_sd", "linear_best", "bayes"}, comment);
    for (const AccuracyRow& r : rows) {
        csv.field(r.opt_lin).field(r.nn_mean).field(r.nn_sd).field(r.linear_best).field(r.bayes);
        csv.end_row();
    }
    csv.close();
}

std::vector<AccuracyRow> read_accuracy_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_opt = t.column("opt_lin"), c_mean = t.column("nn_mean"), c_sd = t.column("nn_sd"),
                      c_lin = t.column("linear_best"), c_bayes = t.column("bayes");
    std::vector<AccuracyRow> rows;
    const std::string src = path.string();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        rows.push_back({parse_number(t, i, c_opt, src), parse_number(t, i, c_mean, src), parse_number(t, i, c_sd, src),
                        parse_number(t, i, c_lin, src), parse_number(t, i, c_bayes, src)});
    }
    return rows;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void open_svg(std::ofstream& out, const std::filesystem::path& path, double w, double h, const std::string& comment) {
    out.open(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- " << comment << " -->\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
        << w << ' ' << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void close_svg(std::ofstream& out, const std::filesystem::path& path) {
    out << "</svg>\n";
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_accuracy_svg(const std::vector<AccuracyRow>& input, const std::filesystem::path& path,
                        const std::string& comment) {
    if (input.empty()) throw InvalidArgument("no rows to plot");
    std::vector<AccuracyRow> rows = input;
    std::sort(rows.begin(), rows.end(), [](const AccuracyRow& a, const AccuracyRow& b) { return a.opt_lin < b.opt_lin; });

    const double W = 640, H = 440, left = 70, right = 20, top = 30, bottom = 60;
    double x_lo = rows.front().opt_lin, x_hi = rows.back().opt_lin;
    if (x_hi - x_lo < 1e-9) {
        x_lo -= 0.05;
        x_hi += 0.05;
    }
    double y_lo = 1.0, y_hi = 0.0;
    for (const AccuracyRow& r : rows) {
        y_lo = std::min({y_lo, r.nn_mean - r.nn_sd, r.linear_best, r.bayes});
        y_hi = std::max({y_hi, r.nn_mean + r.nn_sd, r.linear_best, r.bayes});
    }
    y_lo = std::max(0.0, y_lo - 0.02);
    y_hi = std::min(1.0, y_hi + 0.02);
    if (y_hi - y_lo < 1e-9) y_hi = y_lo + 0.1;
    auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * (W - left - right); };
    auto py = [&](double y) { return H - bottom - (y - y_lo) / (y_hi - y_lo) * (H - top - bottom); };

    std::ofstream out;
    open_svg(out, path, W, H, comment);
    out << "<g stroke=\"black\" fill=\"none\"><line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right
        << "\" y2=\"" << H - bottom << "\"/><line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << H - bottom << "\"/></g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double x = x_lo + (x_hi - x_lo) * k / 5.0;
        const double y = y_lo + (y_hi - y_lo) * k / 5.0;
        out << "<text x=\"" << num(px(x)) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << num(x)
            << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
            << "</text>\n";
    }
    out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">OPT_lin</text>\n";
    out << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" transform=\"rotate(-90 16 " << (top + H - bottom) / 2
        << ")\" text-anchor=\"middle\">test accuracy</text>\n</g>\n";

    auto polyline = [&](auto value, const char* colour, const char* dash) {
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\"" << dash << " points=\"";
        for (const AccuracyRow& r : rows) out << num(px(r.opt_lin)) << ',' << num(py(value(r))) << ' ';
        out << "\"/>\n";
    };
    polyline([](const AccuracyRow& r) { return r.bayes; }, "#2a9d8f", " stroke-dasharray=\"2,3\"");
    polyline([](const AccuracyRow& r) { return r.linear_best; }, "#888888", " stroke-dasharray=\"6,4\"");
    polyline([](const AccuracyRow& r) { return r.nn_mean; }, "#d62828", "");
    for (const AccuracyRow& r : rows) {
        const double x = px(r.opt_lin);
        out << "<line stroke=\"#d62828\" x1=\"" << num(x) << "\" x2=\"" << num(x) << "\" y1=\"" << num(py(r.nn_mean - r.nn_sd))
            << "\" y2=\"" << num(py(r.nn_mean + r.nn_sd)) << "\"/>\n<circle fill=\"#d62828\" r=\"3\" cx=\"" << num(x)
            << "\" cy=\"" << num(py(r.nn_mean)) << "\"/>\n";
    }
    const double lx = W - right - 170, ly = top + 10;
    const char* labels[3] = {"network", "best linear", "Bayes optimal"};
    const char* colours[3] = {"#d62828", "#888888", "#2a9d8f"};
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (int k = 0; k < 3; ++k) {
        out << "<line stroke=\"" << colours[k] << "\" stroke-width=\"2\" x1=\"" << lx << "\" x2=\"" << lx + 24 << "\" y1=\""
            << ly + 18 * k << "\" y2=\"" << ly + 18 * k << "\"/><text x=\"" << lx + 30 << "\" y=\"" << ly + 18 * k + 4
            << "\">" << labels[k] << "</text>\n";
    }
    out << "</g>\n";
    close_svg(out, path);
}

double DecisionRaster::coord(std::size_t index) const {
    const double cell = 2.0 * extent / static_cast<double>(resolution);
    return -extent + (static_cast<double>(index) + 0.5) * cell;
}

DecisionRaster decision_raster(const NetworkParams& params, std::size_t resolution, double extent) {
    if (resolution == 0 || !(extent > 0.0)) throw InvalidArgument("raster needs resolution >= 1 and extent > 0");
    if (params.input_dim() < 2) throw DimensionError("decision raster needs input dimension >= 2");
    DecisionRaster r;
    r.resolution = resolution;
    r.extent = extent;
    r.sign.resize(resolution * resolution);
    r.confidence.resize(resolution * resolution);
    std::vector<double> x(params.input_dim(), 0.0);
    for (std::size_t row = 0; row < resolution; ++row) {
        x[1] = r.coord(row);
        for (std::size_t col = 0; col < resolution; ++col) {
            x[0] = r.coord(col);
            const double f = forward(params, x);
            const std::size_t k = row * resolution + col;
            r.sign[k] = (f > 0.0) - (f < 0.0);
            r.confidence[k] = 1.0 / (1.0 + std::exp(-std::abs(f)));
        }
    }
    return r;
}

double raster_disagreement_with_x1(const DecisionRaster& raster, double min_abs_x1) {
    std::size_t cells = 0, wrong = 0;
    for (std::size_t row = 0; row < raster.resolution; ++row) {
        for (std::size_t col = 0; col < raster.resolution; ++col) {
            const double x1 = raster.coord(col);
            if (std::abs(x1) <= min_abs_x1) continue;
            ++cells;
            if (raster.sign_at(row, col) != (x1 > 0.0 ? 1 : -1)) ++wrong;
        }
    }
    return cells ? static_cast<double>(wrong) / static_cast<double>(cells) : 0.0;
}

void write_raster_csv(const DecisionRaster& raster, const std::filesystem::path& path, const std::string& comment) {
    CsvWriter csv(path, {"x1", "x2", "sign", "confidence"}, comment);
    for (std::size_t row = 0; row < raster.resolution; ++row) {
        for (std::size_t col = 0; col < raster.resolution; ++col) {
            const std::size_t k = row * raster.resolution + col;
            csv.field(raster.coord(col)).field(raster.coord(row)).field(raster.sign[k]).field(raster.confidence[k]);
            csv.end_row();
        }
    }
    csv.close();
}

void write_raster_svg(const DecisionRaster& raster, const std::filesystem::path& path, const std::string& comment) {
    const std::size_t n = raster.resolution;
    const double px = 2.0;  // pixels per cell
    std::ofstream out;
    open_svg(out, path, n * px, n * px, comment);
    // Confidence maps 0.5..1 onto 8 shades; horizontal runs of the same
    // shade share a rectangle.
    auto shade = [&](std::size_t k) {
        if (raster.sign[k] == 0) return 0;
        const int level = std::clamp(static_cast<int>((raster.confidence[k] - 0.5) * 16.0), 0, 7);
        return raster.sign[k] * (level + 1);
    };
    auto colour = [](int s) {
        if (s == 0) return std::string("#ffffff");
        const int level = std::abs(s) - 1;
        const int light = 225 - level * 25;
        char buf[8];
        if (s > 0) {
            std::snprintf(buf, sizeof buf, "#%02x%02xff", light, light);
        } else {
            std::snprintf(buf, sizeof buf, "#ff%02x%02x", light, light);
        }
        return std::string(buf);
    };
    out << "<g shape-rendering=\"crispEdges\">\n";
    for (std::size_t row = 0; row < n; ++row) {
        const double y = static_cast<double>(n - 1 - row) * px;  // x2 increases upwards
        std::size_t col = 0;
        while (col < n) {
            const int s = shade(row * n + col);
            std::size_t end = col + 1;
            while (end < n && shade(row * n + end) == s) ++end;
            out << "<rect x=\"" << col * px << "\" y=\"" << y << "\" width=\"" << (end - col) * px << "\" height=\"" << px
                << "\" fill=\"" << colour(s) << "\"/>\n";
            col = end;
        }
    }
    out << "</g>\n";
    close_svg(out, path);
}

}  // namespace agn
