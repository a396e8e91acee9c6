#include "topicmap/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "topicmap/error.hpp"
#include "topicmap/util.hpp"

namespace topicmap::report {
namespace {

constexpr Rgb kLow{247, 251, 255};
constexpr Rgb kHigh{8, 48, 107};

constexpr std::array<Rgb, 12> kPalette{{{31, 119, 180},
                                        {255, 127, 14},
                                        {44, 160, 44},
                                        {214, 39, 40},
                                        {148, 103, 189},
                                        {140, 86, 75},
                                        {227, 119, 194},
                                        {127, 127, 127},
                                        {188, 189, 34},
                                        {23, 190, 207},
                                        {57, 59, 121},
                                        {173, 73, 74}}};

constexpr Rgb kNoiseColor{200, 200, 200};

std::string num(double v) { return format_fixed(v, 2); }

std::string header(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
         "\" font-family=\"Helvetica, Arial, sans-serif\">\n<rect x=\"0\" y=\"0\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" fill=\"#ffffff\"/>\n";
}

std::string text(double x, double y, std::string_view body, std::string_view extra = {}) {
  std::string out = "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"";
  if (!extra.empty()) {
    out += ' ';
    out += extra;
  }
  return out + ">" + xml_escape(body) + "</text>\n";
}

}  // namespace

Rgb heat_color(double t) {
  if (std::isnan(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0);
  auto mix = [t](int lo, int hi) { return static_cast<int>(std::lround(lo + (hi - lo) * t)); };
  return {mix(kLow.r, kHigh.r), mix(kLow.g, kHigh.g), mix(kLow.b, kHigh.b)};
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string xml_escape(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string heatmap_svg(const RowMatrix& matrix, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, std::string_view title) {
  if (matrix.rows() == 0 || matrix.cols() == 0) throw Error(ErrorKind::invalid_argument, "heatmap matrix is empty");
  if (row_labels.size() != static_cast<std::size_t>(matrix.rows()) ||
      col_labels.size() != static_cast<std::size_t>(matrix.cols())) {
    throw Error(ErrorKind::invalid_argument, "heatmap label counts do not match the matrix shape");
  }
  const double cell = 44.0;
  const double left = 70.0;
  const double top = title.empty() ? 50.0 : 80.0;
  const double width = left + cell * static_cast<double>(matrix.cols()) + 20.0;
  const double height = top + cell * static_cast<double>(matrix.rows()) + 20.0;
  std::string svg = header(width, height);
  if (!title.empty()) svg += text(width / 2.0, 28.0, title, "font-size=\"16\" text-anchor=\"middle\"");
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    svg += text(left + cell * (static_cast<double>(j) + 0.5), top - 10.0, col_labels[static_cast<std::size_t>(j)],
                "class=\"col-label\" font-size=\"11\" text-anchor=\"middle\"");
  }
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const double y = top + cell * static_cast<double>(i);
    svg += text(left - 8.0, y + cell / 2.0 + 4.0, row_labels[static_cast<std::size_t>(i)],
                "class=\"row-label\" font-size=\"11\" text-anchor=\"end\"");
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      const double x = left + cell * static_cast<double>(j);
      const double v = matrix(i, j);
      const double shade = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
      svg += "<rect class=\"cell\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" +
             num(cell) + "\" fill=\"" + hex(heat_color(shade)) + "\" stroke=\"#ffffff\"/>\n";
      svg += text(x + cell / 2.0, y + cell / 2.0 + 4.0, format_fixed(v, 2),
                  std::string("class=\"score\" font-size=\"11\" text-anchor=\"middle\" fill=\"") +
                      (shade > 0.5 ? "#ffffff" : "#000000") + "\"");
    }
  }
  return svg + "</svg>\n";
}

std::string heatmap_svg(const compare::SimilarityReport& report, std::string_view title) {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  for (Eigen::Index i = 0; i < report.matrix.rows(); ++i) rows.push_back("A" + std::to_string(i));
  for (Eigen::Index j = 0; j < report.matrix.cols(); ++j) cols.push_back("B" + std::to_string(j));
  return heatmap_svg(report.matrix, rows, cols, title);
}

void write_heatmap(const compare::SimilarityReport& report, const std::filesystem::path& path,
                   std::string_view title) {
  write_file(path, heatmap_svg(report, title));
}

std::string scatter_svg(const reduce::ReducedMatrix& proj, const std::vector<std::string>& labels,
                        const std::map<std::string, std::string>& legend, std::string_view title) {
  if (proj.rows.cols() != 2) throw Error(ErrorKind::invalid_argument, "scatter plots need a 2-D projection");
  if (labels.empty()) throw Error(ErrorKind::invalid_argument, "scatter plot needs at least one label");
  if (labels.size() != proj.size() || static_cast<std::size_t>(proj.rows.rows()) != proj.size()) {
    throw Error(ErrorKind::invalid_argument, "scatter plot has " + std::to_string(labels.size()) + " labels for " +
                                                 std::to_string(proj.size()) + " points");
  }
  std::map<std::string, std::size_t> colour_index;
  for (const auto& label : labels) colour_index.emplace(label, 0);
  std::size_t next = 0;
  for (auto& [label, index] : colour_index) index = next++;
  auto colour_of = [&](const std::string& label) {
    if (label == "noise") return kNoiseColor;
    return kPalette[colour_index.at(label) % kPalette.size()];
  };

  const double plot = 480.0;
  const double margin = 40.0;
  const double legend_width = 260.0;
  const double top = title.empty() ? margin : margin + 30.0;
  const double width = margin * 2.0 + plot + legend_width;
  const double height = std::max(top + plot + margin, top + 20.0 * static_cast<double>(colour_index.size()) + margin);
  const double min_x = proj.rows.col(0).minCoeff();
  const double max_x = proj.rows.col(0).maxCoeff();
  const double min_y = proj.rows.col(1).minCoeff();
  const double max_y = proj.rows.col(1).maxCoeff();
  auto scale = [&](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };

  std::string svg = header(width, height);
  if (!title.empty()) svg += text(margin + plot / 2.0, 30.0, title, "font-size=\"16\" text-anchor=\"middle\"");
  svg += "<rect x=\"" + num(margin) + "\" y=\"" + num(top) + "\" width=\"" + num(plot) + "\" height=\"" + num(plot) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const double x = margin + 8.0 + (plot - 16.0) * scale(proj.rows(idx, 0), min_x, max_x);
    const double y = top + plot - 8.0 - (plot - 16.0) * scale(proj.rows(idx, 1), min_y, max_y);
    svg += "<circle class=\"point\" cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3.00\" fill=\"" +
           hex(colour_of(labels[i])) + "\" fill-opacity=\"0.80\"/>\n";
  }
  double ly = top + 10.0;
  const double lx = margin * 2.0 + plot;
  for (const auto& [label, index] : colour_index) {
    const auto it = legend.find(label);
    const std::string caption = it == legend.end() ? label : label + ": " + it->second;
    auto caption_text = text(lx + 16.0, ly, caption, "font-size=\"11\"");
    caption_text.pop_back();
    svg += "<g class=\"legend-entry\"><rect x=\"" + num(lx) + "\" y=\"" + num(ly - 9.0) +
           "\" width=\"10.00\" height=\"10.00\" fill=\"" + hex(colour_of(label)) + "\"/>" + caption_text +
           "</g>\n";
    ly += 20.0;
  }
  return svg + "</svg>\n";
}

void write_scatter(const reduce::ReducedMatrix& proj, const std::vector<std::string>& labels,
                   const std::filesystem::path& path, const std::map<std::string, std::string>& legend,
                   std::string_view title) {
  write_file(path, scatter_svg(proj, labels, legend, title));
}

std::string bar_chart_svg(const std::vector<std::string>& labels, const std::vector<double>& values,
                          std::string_view title) {
  if (labels.empty() || labels.size() != values.size()) {
    throw Error(ErrorKind::invalid_argument, "bar chart needs matching, nonempty labels and values");
  }
  const double bar = 22.0;
  const double left = 180.0;
  const double span = 360.0;
  const double top = title.empty() ? 20.0 : 50.0;
  const double width = left + span + 80.0;
  const double height = top + bar * static_cast<double>(labels.size()) + 20.0;
  const double peak = std::max(*std::max_element(values.begin(), values.end()), 0.0);
  std::string svg = header(width, height);
  if (!title.empty()) svg += text(width / 2.0, 30.0, title, "font-size=\"16\" text-anchor=\"middle\"");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = top + bar * static_cast<double>(i);
    const double w = peak > 0.0 ? span * std::max(values[i], 0.0) / peak : 0.0;
    svg += text(left - 8.0, y + bar / 2.0 + 4.0, labels[i], "font-size=\"11\" text-anchor=\"end\"");
    svg += "<rect class=\"bar\" x=\"" + num(left) + "\" y=\"" + num(y + 3.0) + "\" width=\"" + num(w) +
           "\" height=\"" + num(bar - 6.0) + "\" fill=\"" + hex(kPalette[0]) + "\"/>\n";
    svg += text(left + w + 6.0, y + bar / 2.0 + 4.0, format_double(values[i]), "font-size=\"11\"");
  }
  return svg + "</svg>\n";
}

std::string ngram_chart_svg(const corpus::NgramTable& table, std::string_view title) {
  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& entry : table.entries) {
    std::string joined;
    for (const auto& token : entry.tokens) joined += (joined.empty() ? "" : " ") + token;
    labels.push_back(std::move(joined));
    values.push_back(static_cast<double>(entry.count));
  }
  return bar_chart_svg(labels, values, title);
}

}  // namespace topicmap::report
