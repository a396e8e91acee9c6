#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "topicmap/compare.hpp"
#include "topicmap/corpus.hpp"
#include "topicmap/reduce.hpp"

namespace topicmap::report {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
};

/// Linear ramp from near-white to dark blue; t is clamped to [0, 1].
Rgb heat_color(double t);
std::string hex(Rgb c);
std::string xml_escape(std::string_view text);

/// One rect per cell, each labelled with its score at two decimals.
std::string heatmap_svg(const RowMatrix& matrix, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, std::string_view title = {});
std::string heatmap_svg(const compare::SimilarityReport& report, std::string_view title = {});
void write_heatmap(const compare::SimilarityReport& report, const std::filesystem::path& path,
                   std::string_view title = {});

/// Point colours cycle through a fixed palette by sorted label; legend text
/// defaults to the label itself.
std::string scatter_svg(const reduce::ReducedMatrix& proj, const std::vector<std::string>& labels,
                        const std::map<std::string, std::string>& legend = {}, std::string_view title = {});
void write_scatter(const reduce::ReducedMatrix& proj, const std::vector<std::string>& labels,
                   const std::filesystem::path& path, const std::map<std::string, std::string>& legend = {},
                   std::string_view title = {});

/// Horizontal bars, e.g. for n-gram frequencies.
std::string bar_chart_svg(const std::vector<std::string>& labels, const std::vector<double>& values,
                          std::string_view title = {});
std::string ngram_chart_svg(const corpus::NgramTable& table, std::string_view title = {});

}  // namespace topicmap::report
