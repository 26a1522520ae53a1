#include "rsma/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace rsma {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 220, kTop = 30, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

// Round step of 1, 2 or 5 times a power of ten giving about n ticks.
double nice_step(double span, int n) {
  const double raw = span / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0}) {
    if (f * mag >= raw) return f * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string render_svg(const SweepResult& result) {
  const auto& values = result.spec.values;
  const std::size_t nm = result.spec.methods.size();
  double xmin = *std::min_element(values.begin(), values.end());
  double xmax = *std::max_element(values.begin(), values.end());
  if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  double ymax = 0.0;
  for (const auto& p : result.points) {
    if (std::isfinite(p.mean + p.stderr_mean)) ymax = std::max(ymax, p.mean + p.stderr_mean);
  }
  const double ystep = nice_step(ymax > 0.0 ? ymax : 1.0, 5);
  ymax = ystep * std::ceil((ymax > 0.0 ? ymax : 1.0) / ystep);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + ph - y / ymax * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double y = 0.0; y <= ymax + 1e-9 * ystep; y += ystep) {
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(sy(y)) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(sy(y)) + "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(y) + 4) + "\" text-anchor=\"end\">" + label(y) +
         "</text>\n";
  }
  for (double x : values) {
    s += "<line x1=\"" + num(sx(x)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(sx(x)) + "\" y2=\"" +
         num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(sx(x)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" + label(x) +
         "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
       escape(to_string(result.spec.parameter)) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(kTop + ph / 2) + ")\">mean sum ET (bits/s/Hz)</text>\n";

  for (std::size_t m = 0; m < nm; ++m) {
    const std::string color = kColors[m % (sizeof(kColors) / sizeof(kColors[0]))];
    std::string pts;
    for (const auto& p : result.points) {
      if (p.method != result.spec.methods[m].id()) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(sx(p.value)) + "," + num(sy(p.mean));
      s += "<line x1=\"" + num(sx(p.value)) + "\" y1=\"" + num(sy(p.mean - p.stderr_mean)) + "\" x2=\"" +
           num(sx(p.value)) + "\" y2=\"" + num(sy(p.mean + p.stderr_mean)) + "\" stroke=\"" + color + "\"/>\n";
      s += "<circle cx=\"" + num(sx(p.value)) + "\" cy=\"" + num(sy(p.mean)) + "\" r=\"3\" fill=\"" + color +
           "\"/>\n";
    }
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(m);
    s += "<line x1=\"" + num(kLeft + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kLeft + pw + 32) +
         "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(kLeft + pw + 38) + "\" y=\"" + num(ly + 4) + "\">" +
         escape(result.spec.methods[m].id()) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace rsma
