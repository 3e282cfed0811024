#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace shotline {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> median;
    std::vector<double> lo;
    std::vector<double> hi;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

/// Median curves with shaded interquartile bands on a log y axis. Values at
/// or below the floor (including nonpositive regret) are drawn on the floor
/// line, which is labelled as such.
inline std::string regret_svg(const std::vector<SvgSeries>& series, double x_max, const std::string& x_label,
                              const std::string& y_label) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    constexpr double W = 720, H = 440, L = 80, R = 190, T = 20, Bm = 50;
    const double pw = W - L - R, ph = H - T - Bm;

    double y_hi = 0.0;
    double y_pos_min = HUGE_VAL;
    for (const auto& s : series)
        for (const auto* v : {&s.median, &s.lo, &s.hi})
            for (const double y : *v) {
                y_hi = std::max(y_hi, y);
                if (y > 0.0) y_pos_min = std::min(y_pos_min, y);
            }
    if (y_hi <= 0.0) y_hi = 1.0;
    const double top = std::pow(10.0, std::ceil(std::log10(y_hi)));
    double floor_v = std::isfinite(y_pos_min) ? std::pow(10.0, std::floor(std::log10(y_pos_min))) : top / 1e3;
    floor_v = std::max(floor_v, top * 1e-8);
    if (floor_v >= top) floor_v = top / 10.0;
    if (x_max <= 0.0) x_max = 1.0;

    const auto px = [&](double x) { return L + pw * std::clamp(x / x_max, 0.0, 1.0); };
    const auto py = [&](double y) {
        const double v = std::max(y, floor_v);
        return T + ph * (std::log10(top) - std::log10(v)) / (std::log10(top) - std::log10(floor_v));
    };
    using detail::svg_num;

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(W) + "\" height=\"" + svg_num(H) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<rect x=\"" + svg_num(L) + "\" y=\"" + svg_num(T) + "\" width=\"" + svg_num(pw) + "\" height=\"" +
         svg_num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double d = floor_v; d <= top * 1.0001; d *= 10.0) {
        const std::string y = svg_num(py(d));
        char lab[32];
        std::snprintf(lab, sizeof lab, "1e%d", static_cast<int>(std::lround(std::log10(d))));
        s += "<line x1=\"" + svg_num(L) + "\" x2=\"" + svg_num(L + pw) + "\" y1=\"" + y + "\" y2=\"" + y +
             "\" stroke=\"#ddd\"/>\n";
        s += "<text x=\"" + svg_num(L - 6) + "\" y=\"" + y + "\" text-anchor=\"end\" dy=\"4\">" +
             (d == floor_v ? std::string("&#8804;") : std::string()) + lab + "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_max * i / 4.0;
        char lab[32];
        std::snprintf(lab, sizeof lab, "%.3g", xv);
        s += "<text x=\"" + svg_num(px(xv)) + "\" y=\"" + svg_num(T + ph + 16) + "\" text-anchor=\"middle\">" + lab +
             "</text>\n";
    }
    s += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"" + svg_num(H - 10) + "\" text-anchor=\"middle\">" +
         detail::svg_escape(x_label) + "</text>\n";
    s += "<text transform=\"translate(16," + svg_num(T + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::svg_escape(y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        const std::string colour = palette[k % std::size(palette)];
        if (!sr.x.empty()) {
            std::string band;
            for (std::size_t i = 0; i < sr.x.size(); ++i) band += svg_num(px(sr.x[i])) + "," + svg_num(py(sr.hi[i])) + " ";
            for (std::size_t i = sr.x.size(); i-- > 0;) band += svg_num(px(sr.x[i])) + "," + svg_num(py(sr.lo[i])) + " ";
            s += "<polygon points=\"" + band + "\" fill=\"" + colour + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
            std::string line;
            for (std::size_t i = 0; i < sr.x.size(); ++i)
                line += svg_num(px(sr.x[i])) + "," + svg_num(py(sr.median[i])) + " ";
            s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.8\"/>\n";
        }
        const std::string ly = svg_num(T + 14 + 18.0 * static_cast<double>(k));
        s += "<line x1=\"" + svg_num(L + pw + 12) + "\" x2=\"" + svg_num(L + pw + 36) + "\" y1=\"" + ly + "\" y2=\"" +
             ly + "\" stroke=\"" + colour + "\" stroke-width=\"3\"/>\n";
        s += "<text x=\"" + svg_num(L + pw + 42) + "\" y=\"" + ly + "\" dy=\"4\">" + detail::svg_escape(sr.label) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace shotline
