#include "masscover/output.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "masscover/errors.hpp"

namespace masscover {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp." + std::to_string(getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("rename failed for: " + path);
  }
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string render_svg_curve(std::span<const double> xs, std::span<const double> ys,
                             const std::string& x_label, const std::string& y_label) {
  if (xs.size() != ys.size() || xs.empty()) throw ConfigError("svg needs matching nonempty series");
  const double w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  double xmin = *std::min_element(xs.begin(), xs.end());
  double xmax = *std::max_element(xs.begin(), xs.end());
  double ymin = *std::min_element(ys.begin(), ys.end());
  double ymax = *std::max_element(ys.begin(), ys.end());
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
     << h - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n";
  // axis ticks at the extremes
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", xmin);
  os << "<text x=\"" << px(xmin) << "\" y=\"" << h - mb + 18 << "\" font-size=\"12\" "
     << "text-anchor=\"middle\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", xmax);
  os << "<text x=\"" << px(xmax) << "\" y=\"" << h - mb + 18 << "\" font-size=\"12\" "
     << "text-anchor=\"middle\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", ymin);
  os << "<text x=\"" << ml - 8 << "\" y=\"" << py(ymin) + 4 << "\" font-size=\"12\" "
     << "text-anchor=\"end\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", ymax);
  os << "<text x=\"" << ml - 8 << "\" y=\"" << py(ymax) + 4 << "\" font-size=\"12\" "
     << "text-anchor=\"end\">" << buf << "</text>\n";
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
     << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (mt + h - mb) / 2 << ")\">" << y_label << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ' ';
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", px(xs[i]), py(ys[i]));
    os << buf;
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

void append_result_record(const std::string& line) {
  const char* dir = std::getenv("MASSCOVER_RESULTS_DIR");
  std::string path = (dir && *dir ? std::string(dir) : std::string(".")) +
                     "/masscover_results.txt";
  std::ofstream out(path, std::ios::app);
  if (!out) return;  // the index is best-effort; runs should not fail on it
  out << line << '\n';
}

}  // namespace masscover
