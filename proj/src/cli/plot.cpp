#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "solitonlab/cli.hpp"

namespace solitonlab::cli {

namespace fs = std::filesystem;

namespace {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw validation_error("CSV column '" + name + "' missing");
    }
    double number(std::size_t r, const std::string& name) const { return std::stod(rows[r][col(name)]); }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<Csv> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    Csv c;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    c.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) c.rows.push_back(split(line));
    return c;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
};

// Fixed 640x420 viewport, linear axes over the data range.
std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, bool markers) {
    const double W = 640, H = 420, ml = 70, mr = 150, mt = 40, mb = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!(x1 > x0)) x1 = x0 + 1, x0 -= 1;
    if (!(y1 > y0)) y1 = y0 + 1, y0 -= 1;
    auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto Y = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << " " << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << fmt(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        o << "<text x=\"" << fmt(X(xv)) << "\" y=\"" << H - mb + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label(xv) << "</text>\n";
        o << "<text x=\"" << ml - 6 << "\" y=\"" << fmt(Y(yv) + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label(yv) << "</text>\n";
    }
    o << "<text x=\"" << fmt((ml + W - mr) / 2) << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel << "</text>\n";
    o << "<text x=\"16\" y=\"" << fmt((mt + H - mb) / 2) << "\" transform=\"rotate(-90 16 " << fmt((mt + H - mb) / 2)
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << ylabel << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* col = kColors[i % 6];
        o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < series[i].pts.size(); ++k)
            o << (k ? " " : "") << fmt(X(series[i].pts[k].first)) << "," << fmt(Y(series[i].pts[k].second));
        o << "\"/>\n";
        if (markers)
            for (auto [x, y] : series[i].pts)
                o << "<circle cx=\"" << fmt(X(x)) << "\" cy=\"" << fmt(Y(y)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        const double ly = mt + 16 * static_cast<double>(i);
        o << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << fmt(ly) << "\" x2=\"" << W - mr + 30 << "\" y2=\"" << fmt(ly)
          << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << W - mr + 34 << "\" y=\"" << fmt(ly + 4) << "\" font-family=\"sans-serif\" font-size=\"11\">"
          << series[i].name << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

// Fitted log10(u1 + u2) against the distance to x_omega.
double fitted_log(const std::string& model, double c, double exponent, double amp, double eps, double r) {
    double ln;
    if (model == "power_law")
        ln = amp - exponent * std::log(r);
    else if (model == "fast_product")
        ln = amp - c * r / (eps * (1 + r));
    else
        ln = amp - c * std::pow(r / eps, exponent);
    return ln / std::log(10.0);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw validation_error("cannot write " + p.string());
    out << text;
}

}  // namespace

int plot(const fs::path& dir, const std::optional<fs::path>& out) {
    try {
        if (!fs::is_directory(dir)) throw validation_error("report directory '" + dir.string() + "' not found");
        const fs::path target = out.value_or(dir);
        fs::create_directories(target);
        int figures = 0;

        if (auto decay = read_csv(dir / "decay.csv"); decay && !decay->rows.empty()) {
            std::vector<Series> series;
            for (std::size_t r = 0; r < decay->rows.size(); ++r) {
                const double eps = decay->number(r, "epsilon"), c = decay->number(r, "c");
                const double ex = decay->number(r, "exponent"), amp = decay->number(r, "amplitude");
                const double a = decay->number(r, "r_in"), b = decay->number(r, "r_out");
                const std::string model = decay->rows[r][decay->col("model")];
                Series s{"eps=" + label(eps), {}};
                for (int k = 0; k <= 64; ++k) {
                    double rr = a + (b - a) * k / 64;
                    s.pts.emplace_back(rr, fitted_log(model, c, ex, amp, eps, rr));
                }
                series.push_back(std::move(s));
            }
            write_file(target / "decay.svg",
                       svg_chart("Fitted decay of u1 + u2", "|x - x_omega|", "log10(u1 + u2)", series, false));
            ++figures;
        }

        if (auto conc = read_csv(dir / "concentration.csv"); conc && !conc->rows.empty()) {
            Series e{"J/eps^N", {}}, d{"dist_to_M", {}};
            for (std::size_t r = 0; r < conc->rows.size(); ++r) {
                const double eps = conc->number(r, "epsilon");
                e.pts.emplace_back(eps, conc->number(r, "energy_over_epsN"));
                d.pts.emplace_back(eps, conc->number(r, "dist_to_M"));
            }
            auto by_eps = [](Series& s) { std::sort(s.pts.begin(), s.pts.end()); };
            by_eps(e);
            by_eps(d);
            write_file(target / "energy.svg", svg_chart("Penalized energy versus epsilon", "epsilon", "J/eps^N", {e}, true));
            write_file(target / "concentration.svg",
                       svg_chart("Distance of the peak to the minimum set", "epsilon", "dist_to_M", {d}, true));
            figures += 2;
        }

        if (figures == 0) throw validation_error("no decay.csv or concentration.csv rows in '" + dir.string() + "'");
        return exit_ok;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    }
}

}  // namespace solitonlab::cli
