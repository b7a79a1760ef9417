#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vicorpus/analysis.hpp"
#include "vicorpus/error.hpp"

namespace vicorpus::analysis {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string pair_stem(const std::pair<int, int>& p) {
  return "pc" + std::to_string(p.first + 1) + "_pc" + std::to_string(p.second + 1);
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out.flush()) throw Error("cannot write " + path.string());
}

}  // namespace

ScatterTables project_pairs(const PcaModel& model, const std::vector<BowVector>& vectors,
                            const std::vector<std::pair<int, int>>& pairs) {
  const auto k = static_cast<int>(model.components.rows());
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= k || j >= k) {
      throw UsageError("component pair (" + std::to_string(i) + "," + std::to_string(j) + ") out of range for k=" +
                       std::to_string(k));
    }
  }
  ScatterTables out;
  if (pairs.empty()) return out;
  for (const auto& v : vectors) {
    const Eigen::VectorXd y = model.project(v);
    for (const auto& p : pairs) out[p][v.tag].push_back({v.doc_id, y(p.first), y(p.second)});
  }
  return out;
}

std::vector<std::filesystem::path> write_scatter_csvs(const ScatterTables& tables, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  if (tables.empty()) return written;
  std::filesystem::create_directories(dir);
  for (const auto& [pair, by_tag] : tables) {
    for (const auto& [tag, rows] : by_tag) {
      std::string body = "doc_id,x,y\n";
      for (const auto& r : rows) body += csv_field(r.doc_id) + "," + number(r.x) + "," + number(r.y) + "\n";
      auto path = dir / (pair_stem(pair) + "__" + tag + ".csv");
      write_text(path, body);
      written.push_back(std::move(path));
    }
  }
  return written;
}

std::vector<std::filesystem::path> write_scatter_svgs(const ScatterTables& tables, const std::filesystem::path& dir) {
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double size = 480, margin = 40;
  std::vector<std::filesystem::path> written;
  if (tables.empty()) return written;
  std::filesystem::create_directories(dir);
  for (const auto& [pair, by_tag] : tables) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& [tag, rows] : by_tag) {
      for (const auto& r : rows) {
        x0 = std::min(x0, r.x);
        x1 = std::max(x1, r.x);
        y0 = std::min(y0, r.y);
        y1 = std::max(y1, r.y);
      }
    }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    const double span = size - 2 * margin;
    auto sx = [&](double v) { return margin + (v - x0) / (x1 - x0) * span; };
    auto sy = [&](double v) { return size - margin - (v - y0) / (y1 - y0) * span; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" viewBox=\"0 0 480 480\">\n";
    svg += "<rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
    svg += "<rect x=\"40\" y=\"40\" width=\"400\" height=\"400\" fill=\"none\" stroke=\"#444\"/>\n";
    svg += "<text x=\"240\" y=\"470\" text-anchor=\"middle\" font-size=\"12\">PC" + std::to_string(pair.first + 1) +
           "</text>\n";
    svg += "<text x=\"12\" y=\"240\" font-size=\"12\" transform=\"rotate(-90 12 240)\" text-anchor=\"middle\">PC" +
           std::to_string(pair.second + 1) + "</text>\n";
    std::size_t t = 0;
    for (const auto& [tag, rows] : by_tag) {
      const char* color = palette[t % std::size(palette)];
      svg += "<g fill=\"" + std::string(color) + "\" fill-opacity=\"0.6\">\n";
      for (const auto& r : rows) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\"/>\n", sx(r.x), sy(r.y));
        svg += buf;
      }
      svg += "</g>\n";
      char buf[160];
      std::snprintf(buf, sizeof buf, "<circle cx=\"52\" cy=\"%.0f\" r=\"4\" fill=\"%s\"/>", 54.0 + 16.0 * static_cast<double>(t), color);
      svg += buf;
      std::snprintf(buf, sizeof buf, "<text x=\"60\" y=\"%.0f\" font-size=\"11\">", 58.0 + 16.0 * static_cast<double>(t));
      svg += buf + xml_escape(tag) + "</text>\n";
      ++t;
    }
    svg += "</svg>\n";
    auto path = dir / (pair_stem(pair) + ".svg");
    write_text(path, svg);
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace vicorpus::analysis
