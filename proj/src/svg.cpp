#include "vrec/svg.hpp"

#include <cstdio>
#include <sstream>

namespace vrec {

namespace {

constexpr double kSize = 400.0;
constexpr double kMargin = 50.0;

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double sx(double fpr) { return kMargin + fpr * kSize; }
double sy(double tpr) { return kMargin + (1.0 - tpr) * kSize; }

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string roc_svg(const RocCurve& curve, const std::string& title) {
  const double full = kSize + 2.0 * kMargin;
  char auc_text[32];
  std::snprintf(auc_text, sizeof(auc_text), "%.1f", curve.auc * 100.0);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(full) << "\" height=\""
    << fixed(full) << "\" viewBox=\"0 0 " << fixed(full) << ' ' << fixed(full) << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << fixed(full) << "\" height=\"" << fixed(full)
    << "\" fill=\"white\"/>\n";
  s << "<rect x=\"" << fixed(kMargin) << "\" y=\"" << fixed(kMargin) << "\" width=\""
    << fixed(kSize) << "\" height=\"" << fixed(kSize)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << fixed(sx(0)) << "\" y1=\"" << fixed(sy(0)) << "\" x2=\"" << fixed(sx(1))
    << "\" y2=\"" << fixed(sy(1)) << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    s << "<text x=\"" << fixed(sx(v)) << "\" y=\"" << fixed(sy(0) + 18)
      << "\" font-size=\"11\" text-anchor=\"middle\">" << fixed(v) << "</text>\n";
    s << "<text x=\"" << fixed(sx(0) - 6) << "\" y=\"" << fixed(sy(v) + 4)
      << "\" font-size=\"11\" text-anchor=\"end\">" << fixed(v) << "</text>\n";
  }
  s << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (i) s << ' ';
    s << fixed(sx(curve.points[i].fpr)) << ',' << fixed(sy(curve.points[i].tpr));
  }
  s << "\"/>\n";
  s << "<text x=\"" << fixed(full / 2) << "\" y=\"" << fixed(kMargin - 18)
    << "\" font-size=\"14\" text-anchor=\"middle\">" << escape(title) << " (AUC "
    << auc_text << ")</text>\n";
  s << "<text x=\"" << fixed(full / 2) << "\" y=\"" << fixed(full - 10)
    << "\" font-size=\"12\" text-anchor=\"middle\">false positive rate</text>\n";
  s << "<text x=\"14\" y=\"" << fixed(full / 2) << "\" font-size=\"12\" text-anchor=\"middle\""
    << " transform=\"rotate(-90 14 " << fixed(full / 2) << ")\">true positive rate</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace vrec
