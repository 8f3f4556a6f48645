#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "common.hpp"
#include "serialize.hpp"

namespace relubias {

std::string sweep_aggregate_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "d,mean_error,std_error,lower_bound,upper_bound\n";
    for (const auto& r : rows)
        out << format_double(r.d) << "," << format_double(r.mean_error) << ","
            << format_double(r.std_error) << "," << format_double(r.lower_bound) << ","
            << format_double(r.upper_bound) << "\n";
    return out.str();
}

std::vector<SweepRow> parse_sweep_aggregate_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "d,mean_error,std_error,lower_bound,upper_bound")
        throw SchemaError("aggregate CSV: bad header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        SweepRow r;
        char c;
        std::istringstream ls(line);
        if (!(ls >> r.d >> c >> r.mean_error >> c >> r.std_error >> c >> r.lower_bound >> c >>
              r.upper_bound))
            throw SchemaError("aggregate CSV: malformed row");
        rows.push_back(r);
    }
    if (rows.empty()) throw SchemaError("aggregate CSV: no data rows");
    return rows;
}

namespace {

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string render_sweep_svg(const std::vector<SweepRow>& rows, const std::string& style) {
    (void)style;  // single built-in style
    const double W = 640, H = 480;
    const double ml = 70, mr = 160, mt = 30, mb = 55;
    const double pw = W - ml - mr, ph = H - mt - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto upd_y = [&](double v) {
        if (v > 0) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    };
    for (const auto& r : rows) {
        xmin = std::min(xmin, r.d);
        xmax = std::max(xmax, r.d);
        upd_y(r.mean_error);
        upd_y(r.mean_error + r.std_error);
        upd_y(std::max(r.mean_error - r.std_error, r.mean_error * 0.1));
        upd_y(r.lower_bound);
        upd_y(r.upper_bound);
    }
    if (!(xmin > 0) || !(ymin > 0)) throw InputError("render_sweep_svg: needs positive data");
    if (xmax == xmin) xmax = xmin * 1.1;
    const double lx0 = std::log10(xmin) - 0.05, lx1 = std::log10(xmax) + 0.05;
    const double ly0 = std::log10(ymin) - 0.15, ly1 = std::log10(ymax) + 0.15;

    auto X = [&](double d) { return ml + (std::log10(d) - lx0) / (lx1 - lx0) * pw; };
    auto Y = [&](double v) { return mt + ph - (std::log10(v) - ly0) / (ly1 - ly0) * ph; };

    std::ostringstream s;
    s << "<!-- relubias plot v1 -->\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<rect x=\"" << px(ml) << "\" y=\"" << px(mt) << "\" width=\"" << px(pw)
      << "\" height=\"" << px(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // decade ticks
    for (int e = static_cast<int>(std::floor(lx0)); e <= static_cast<int>(std::ceil(lx1)); ++e) {
        const double d = std::pow(10.0, e);
        if (std::log10(d) < lx0 || std::log10(d) > lx1) continue;
        s << "<line x1=\"" << px(X(d)) << "\" y1=\"" << px(mt + ph) << "\" x2=\"" << px(X(d))
          << "\" y2=\"" << px(mt + ph + 6) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << px(X(d)) << "\" y=\"" << px(mt + ph + 20)
          << "\" font-size=\"11\" text-anchor=\"middle\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::floor(ly0)); e <= static_cast<int>(std::ceil(ly1)); ++e) {
        const double v = std::pow(10.0, e);
        if (std::log10(v) < ly0 || std::log10(v) > ly1) continue;
        s << "<line x1=\"" << px(ml - 6) << "\" y1=\"" << px(Y(v)) << "\" x2=\"" << px(ml)
          << "\" y2=\"" << px(Y(v)) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << px(ml - 10) << "\" y=\"" << px(Y(v) + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    // per-d ticks
    for (const auto& r : rows) {
        s << "<line x1=\"" << px(X(r.d)) << "\" y1=\"" << px(mt + ph) << "\" x2=\"" << px(X(r.d))
          << "\" y2=\"" << px(mt + ph + 3) << "\" stroke=\"gray\"/>\n";
        s << "<text x=\"" << px(X(r.d)) << "\" y=\"" << px(mt + ph + 34)
          << "\" font-size=\"9\" text-anchor=\"middle\" fill=\"gray\">"
          << static_cast<long>(r.d) << "</text>\n";
    }
    s << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(H - 8)
      << "\" font-size=\"12\" text-anchor=\"middle\">d (log)</text>\n";
    s << "<text x=\"14\" y=\"" << px(mt + ph / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << px(mt + ph / 2) << ")\">distance to the min-norm solution (log)</text>\n";

    auto polyline = [&](auto get, const char* color, bool dashed) {
        std::ostringstream pts;
        for (const auto& r : rows) {
            const double v = get(r);
            if (!(v > 0)) continue;
            pts << px(X(r.d)) << "," << px(Y(v)) << " ";
        }
        s << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color << "\""
          << (dashed ? " stroke-dasharray=\"6,4\"" : "") << " stroke-width=\"1.5\"/>\n";
    };
    polyline([](const SweepRow& r) { return r.upper_bound; }, "#cc3333", true);
    polyline([](const SweepRow& r) { return r.lower_bound; }, "#3333cc", true);

    // slope -1/2 guide anchored at the first mean point, shifted down slightly
    {
        const double x0 = rows.front().d, y0 = rows.front().mean_error * 0.6;
        const double x1 = rows.back().d;
        const double y1 = y0 * std::sqrt(x0 / x1);
        s << "<line x1=\"" << px(X(x0)) << "\" y1=\"" << px(Y(y0)) << "\" x2=\"" << px(X(x1))
          << "\" y2=\"" << px(Y(y1))
          << "\" stroke=\"#888888\" stroke-dasharray=\"2,3\" stroke-width=\"1\"/>\n";
    }

    polyline([](const SweepRow& r) { return r.mean_error; }, "#227722", false);
    for (const auto& r : rows) {
        const double lo = std::max(r.mean_error - r.std_error, r.mean_error * 1e-3);
        const double hi = r.mean_error + r.std_error;
        s << "<line x1=\"" << px(X(r.d)) << "\" y1=\"" << px(Y(lo)) << "\" x2=\"" << px(X(r.d))
          << "\" y2=\"" << px(Y(hi)) << "\" stroke=\"#227722\" stroke-width=\"1\"/>\n";
        s << "<circle cx=\"" << px(X(r.d)) << "\" cy=\"" << px(Y(r.mean_error))
          << "\" r=\"3.2\" fill=\"#227722\"/>\n";
    }

    // legend
    const double lx = ml + pw + 12, lyy = mt + 10;
    const char* labels[4] = {"mean +/- std", "upper envelope", "lower envelope", "slope -1/2"};
    const char* colors[4] = {"#227722", "#cc3333", "#3333cc", "#888888"};
    const char* dashes[4] = {"", " stroke-dasharray=\"6,4\"", " stroke-dasharray=\"6,4\"",
                             " stroke-dasharray=\"2,3\""};
    for (int i = 0; i < 4; ++i) {
        const double yy = lyy + 18.0 * i;
        s << "<line x1=\"" << px(lx) << "\" y1=\"" << px(yy) << "\" x2=\"" << px(lx + 24)
          << "\" y2=\"" << px(yy) << "\" stroke=\"" << colors[i] << "\"" << dashes[i]
          << " stroke-width=\"1.5\"/>\n";
        s << "<text x=\"" << px(lx + 30) << "\" y=\"" << px(yy + 4) << "\" font-size=\"11\">"
          << labels[i] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace relubias
