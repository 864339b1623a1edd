#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "storytopics/project.hpp"

namespace storytopics {

struct MarkerStyle {
  std::string_view shape;  ///< circle, cross, diamond, plus, square
  std::string_view color;  ///< SVG color value
};

/// Health purple circle, Entertainment beige cross, Energy teal diamond,
/// Safety cherry plus, Other orange square.
MarkerStyle marker_style(DomainLabel label);

/// Scatter plot with one marker per story and a legend. Story markers carry
/// class "marker"; legend swatches carry class "legend-marker".
void render_svg(std::ostream& out, const Projection2D& projection, std::string_view title = {});
void plot(const Projection2D& projection, const std::filesystem::path& out, std::string_view title = {});

}  // namespace storytopics
